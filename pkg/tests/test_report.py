import pandas as pd
import pytest
from openpyxl import load_workbook

from acceptance.validator import AcceptanceResult
from config.settings import VERSION
from report.chart_generator import ChartGenerator
from report.csv_writer import CsvWriter, header_line, read_csv
from report.summary_writer import SummaryExcelWriter


def _result(key, status, value=1.0, baseline=1.0):
    return AcceptanceResult(
        key=key,
        name=key.replace("_", " "),
        criterion=1,
        value=value,
        unit="",
        operator=">=",
        baseline=baseline,
        tolerance=None,
        status=status,
        reference="",
    )


def test_header_line_carries_version_hash_and_units():
    line = header_line(["wavelength_nm", "normalized_efficiency"], "abc123")
    assert line == (
        f"# qpmkit {VERSION} | config abc123 | wavelength_nm[nm],normalized_efficiency[]\n"
    )


def test_csv_round_trip_skips_header(tmp_path):
    frame = pd.DataFrame({"pump_power_mw": [0.001, 0.002], "car": [120.5, 60.75]})
    path = CsvWriter(tmp_path, "abc123").write(frame, "pairs_car.csv")
    first = path.read_text(encoding="utf-8").splitlines()[0]
    assert first.startswith("# qpmkit")
    assert "pump_power_mw[mW]" in first
    pd.testing.assert_frame_equal(read_csv(path), frame)


def test_csv_writer_tracks_files_and_index(tmp_path):
    writer = CsvWriter(tmp_path / "nested", "h")
    matrix = pd.DataFrame(
        [[1.0, 0.0], [0.0, 1.0]],
        index=pd.Index([1530.0, 1525.0], name="signal_nm"),
        columns=[1540.03, 1545.1],
    )
    path = writer.write(matrix, "pairs_channels.csv", index=True)
    assert writer.written == [path]
    assert "signal_nm[nm]" in path.read_text(encoding="utf-8").splitlines()[0]
    assert read_csv(path).columns[0] == "signal_nm"


def test_chart_script_points_at_csv(tmp_path):
    path = ChartGenerator(tmp_path).car_chart("pairs_car.csv")
    script = path.read_text(encoding="utf-8")
    assert path.name == "pairs_car.gp"
    assert "set datafile separator ','" in script
    assert "set logscale xy" in script
    assert "'pairs_car.csv' every ::1" in script


def test_dfg_chart_has_half_power_baseline(tmp_path):
    script = ChartGenerator(tmp_path).dfg_chart("dfg.csv").read_text(encoding="utf-8")
    assert "0.5 with lines dashtype 2" in script


def test_peak_shift_chart_has_no_baseline(tmp_path):
    path = ChartGenerator(tmp_path).peak_shift_chart("tuning_peak_vs_temperature.csv")
    script = path.read_text(encoding="utf-8")
    assert path.name == "tuning_peak_vs_temperature.gp"
    assert "using 1:2 with lines title 'peak'" in script
    assert "dashtype" not in script


def test_summary_workbook(tmp_path):
    results = [_result("a", "PASS"), _result("b", "FAIL", 0.5), _result("c", "REPORT")]
    run_info = {
        "config_hash": "abc123",
        "stages": [{"name": "design", "ok": True, "seconds": 1.5, "message": ""}],
        "cache": {"hits": 2, "misses": 3, "solves": 3},
    }
    path = SummaryExcelWriter(tmp_path / "acceptance_summary.xlsx", results, run_info).write_summary()

    wb = load_workbook(path)
    assert wb.sheetnames == ["Acceptance", "Stages"]
    ws = wb["Acceptance"]
    assert ws.cell(row=3, column=8).value == "Status"
    assert [ws.cell(row=r, column=8).value for r in (4, 5, 6)] == ["PASS", "FAIL", "REPORT"]
    assert ws.cell(row=4, column=8).fill.start_color.rgb == "FFC6EFCE"
    assert ws.cell(row=5, column=8).fill.start_color.rgb == "FFFFC7CE"
    assert ws.cell(row=8, column=2).value == "Overall"
    assert ws.cell(row=8, column=8).value == "FAIL"

    stages = wb["Stages"]
    assert stages.cell(row=2, column=1).value == "design"
    assert stages.cell(row=2, column=2).value == "PASS"
    assert stages.cell(row=4, column=3).value == 2


@pytest.mark.parametrize("baseline", [[3.5, 4.5], 85.0])
def test_summary_workbook_baseline_text(tmp_path, baseline):
    path = SummaryExcelWriter(
        tmp_path / "s.xlsx", [_result("a", "PASS", 4.0, baseline)]
    ).write_summary()
    cell = load_workbook(path)["Acceptance"].cell(row=4, column=6).value
    assert cell == ("[3.5, 4.5]" if isinstance(baseline, list) else 85.0)
