"""Excel formatting utilities"""

from openpyxl.styles import Alignment, Border, Font, PatternFill, Side


class ExcelFormatter:
    """Apply formatting to acceptance workbook cells"""

    def __init__(self):
        # PASS / FAIL / REPORT styles
        self.red_fill = PatternFill(start_color="FFFFC7CE", end_color="FFFFC7CE", fill_type="solid")
        self.dark_red_text = Font(color="FF9C0006", bold=True)

        self.green_fill = PatternFill(
            start_color="FFC6EFCE", end_color="FFC6EFCE", fill_type="solid"
        )
        self.dark_green_text = Font(color="FF006100", bold=True)

        self.yellow_fill = PatternFill(
            start_color="FFFFEB9C", end_color="FFFFEB9C", fill_type="solid"
        )
        self.dark_yellow_text = Font(color="FF9C5700", bold=True)

        self.header_fill = PatternFill("solid", fgColor="47402D")
        self.header_font = Font(bold=True, color="FFFFFF", size=11)
        self.title_font = Font(bold=True, size=16)

        self.thin_border = Border(
            left=Side(style="thin"),
            right=Side(style="thin"),
            top=Side(style="thin"),
            bottom=Side(style="thin"),
        )
        self.center_alignment = Alignment(horizontal="center", vertical="center")

    def format_status(self, cell, status: str):
        """PASS green, FAIL red, REPORT (report-only criterion) yellow"""
        if status == "PASS":
            cell.fill = self.green_fill
            cell.font = self.dark_green_text
        elif status == "FAIL":
            cell.fill = self.red_fill
            cell.font = self.dark_red_text
        else:
            cell.fill = self.yellow_fill
            cell.font = self.dark_yellow_text
        cell.value = status
        cell.border = self.thin_border
        cell.alignment = self.center_alignment

    def format_pass_fail(self, cell, is_pass: bool):
        self.format_status(cell, "PASS" if is_pass else "FAIL")

    def format_header(self, cell, value: str):
        cell.fill = self.header_fill
        cell.font = self.header_font
        cell.value = value
        cell.border = self.thin_border
        cell.alignment = self.center_alignment

    def format_value(self, cell, value, num_format: str = "0.000"):
        """Numbers get `num_format`, anything else is written as text"""
        cell.value = value
        if isinstance(value, (int, float)) and not isinstance(value, bool):
            cell.number_format = num_format
        cell.border = self.thin_border
        cell.alignment = self.center_alignment
