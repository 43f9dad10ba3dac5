"""Acceptance summary workbook writer"""

import logging
from datetime import datetime
from pathlib import Path

from openpyxl import Workbook
from openpyxl.utils import get_column_letter

from config.settings import TOOL_NAME, VERSION
from report.formatter import ExcelFormatter

log = logging.getLogger(__name__)

CRITERIA_HEADERS = [
    "#",
    "Criterion",
    "Value",
    "Unit",
    "Operator",
    "Baseline",
    "Tolerance",
    "Status",
    "Reference",
]
STAGE_HEADERS = ["Stage", "Status", "Seconds", "Message"]


def _baseline_text(baseline):
    if isinstance(baseline, (list, tuple)):
        return f"[{baseline[0]:g}, {baseline[1]:g}]"
    return baseline


class SummaryExcelWriter:
    """Write the acceptance results and stage log of a run to .xlsx"""

    def __init__(self, output_path, results, run_info=None):
        self.output_path = Path(output_path)
        self.results = results
        self.run_info = run_info or {}
        self.fmt = ExcelFormatter()

    def write_summary(self):
        log.info("=== Writing acceptance workbook ===")
        wb = Workbook()
        if "Sheet" in wb.sheetnames:
            wb.remove(wb["Sheet"])
        self._create_criteria_sheet(wb)
        self._create_stage_sheet(wb)
        self._save_workbook(wb)
        return self.output_path

    def _write_headers(self, ws, headers, row=1):
        for col_idx, header in enumerate(headers, 1):
            self.fmt.format_header(ws.cell(row=row, column=col_idx), header)

    def _create_criteria_sheet(self, wb):
        ws = wb.create_sheet("Acceptance", 0)
        ws.cell(row=1, column=1).value = (
            f"{TOOL_NAME} {VERSION} | config {self.run_info.get('config_hash', '')}"
        )
        ws.cell(row=1, column=1).font = self.fmt.title_font
        self._write_headers(ws, CRITERIA_HEADERS, row=3)

        row_idx = 4
        for r in self.results:
            values = [
                r.criterion,
                r.name,
                "N/A" if r.value is None else r.value,
                r.unit,
                r.operator,
                _baseline_text(r.baseline),
                "" if r.tolerance is None else r.tolerance,
                None,
                r.reference,
            ]
            for col_idx, value in enumerate(values, 1):
                cell = ws.cell(row=row_idx, column=col_idx)
                if col_idx == 8:
                    self.fmt.format_status(cell, r.status)
                else:
                    self.fmt.format_value(cell, value, "0.000E+00" if col_idx == 3 else "General")
            row_idx += 1

        overall = ws.cell(row=row_idx + 1, column=2)
        overall.value = "Overall"
        self.fmt.format_pass_fail(
            ws.cell(row=row_idx + 1, column=8), all(r.passed for r in self.results)
        )

        for col in range(1, len(CRITERIA_HEADERS) + 1):
            ws.column_dimensions[get_column_letter(col)].width = 15
        ws.column_dimensions["B"].width = 40
        ws.column_dimensions["I"].width = 60
        log.info("✓ Written acceptance sheet: %d criteria", len(self.results))

    def _create_stage_sheet(self, wb):
        ws = wb.create_sheet("Stages", 1)
        self._write_headers(ws, STAGE_HEADERS)
        row_idx = 2
        for stage in self.run_info.get("stages", []):
            ws.cell(row=row_idx, column=1).value = stage["name"]
            self.fmt.format_status(
                ws.cell(row=row_idx, column=2), "PASS" if stage["ok"] else "FAIL"
            )
            self.fmt.format_value(ws.cell(row=row_idx, column=3), stage["seconds"], "0.00")
            ws.cell(row=row_idx, column=4).value = stage.get("message", "")
            row_idx += 1

        cache = self.run_info.get("cache") or {}
        row_idx += 1
        for label in ("hits", "misses", "solves"):
            ws.cell(row=row_idx, column=1).value = f"cache {label}"
            ws.cell(row=row_idx, column=3).value = cache.get(label, 0)
            row_idx += 1
        ws.cell(row=row_idx, column=1).value = "generated"
        ws.cell(row=row_idx, column=4).value = datetime.now().isoformat(timespec="seconds")

        ws.column_dimensions["A"].width = 20
        ws.column_dimensions["D"].width = 60

    def _save_workbook(self, wb):
        try:
            self.output_path.parent.mkdir(parents=True, exist_ok=True)
            wb.save(self.output_path)
            log.info("✓ Acceptance workbook saved: %s", self.output_path)
        except Exception as e:
            log.error("✗ Error saving workbook: %s", e)
            raise
