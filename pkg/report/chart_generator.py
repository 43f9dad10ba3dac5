"""Gnuplot script generation for the emitted CSV files"""

import logging
from dataclasses import dataclass
from pathlib import Path
from typing import List, Optional

log = logging.getLogger(__name__)


@dataclass
class Chart:
    data_file: str
    x_column: int
    y_columns: List[int]
    title: str
    x_label: str
    y_label: str
    baseline: Optional[float] = None
    baseline_label: str = "baseline"
    log_scale: bool = False


class ChartGenerator:
    """Write one gnuplot script per figure, data-only"""

    def __init__(self, output_dir):
        self.output_dir = Path(output_dir)

    def _script(self, chart: Chart, labels):
        stem = Path(chart.data_file).stem
        lines = [
            "set datafile separator ','",
            "set datafile commentschars '#'",
            "set terminal pngcairo size 900,600",
            f"set output '{stem}.png'",
            f"set title '{chart.title}'",
            f"set xlabel '{chart.x_label}'",
            f"set ylabel '{chart.y_label}'",
            "set grid",
        ]
        if chart.log_scale:
            lines.append("set logscale xy")
        plots = [
            f"'{chart.data_file}' every ::1 using {chart.x_column}:{y} with lines title '{label}'"
            for y, label in zip(chart.y_columns, labels)
        ]
        if chart.baseline is not None:
            plots.append(
                f"{chart.baseline!r} with lines dashtype 2 lc rgb 'red' "
                f"title '{chart.baseline_label}'"
            )
        lines.append("plot " + ", \\\n     ".join(plots))
        return "\n".join(lines) + "\n"

    def generate(self, chart: Chart, labels=None):
        labels = labels or [f"column {y}" for y in chart.y_columns]
        path = self.output_dir / (Path(chart.data_file).stem + ".gp")
        try:
            path.parent.mkdir(parents=True, exist_ok=True)
            path.write_text(self._script(chart, labels), encoding="utf-8")
        except OSError as e:
            log.error("✗ Could not write chart script %s: %s", path, e)
            raise
        log.info("✓ Generated chart script: %s", path.name)
        return path

    def tuning_chart(self, data_file, axis_kind="wavelength"):
        x_label = "Fundamental wavelength (nm)" if axis_kind == "wavelength" else "Temperature (C)"
        return self.generate(
            Chart(
                data_file=data_file,
                x_column=1,
                y_columns=[2],
                title="SHG phase-matching curve",
                x_label=x_label,
                y_label="Normalized efficiency",
                baseline=0.5,
                baseline_label="half maximum",
            ),
            labels=["normalized efficiency"],
        )

    def peak_shift_chart(self, data_file):
        return self.generate(
            Chart(
                data_file=data_file,
                x_column=1,
                y_columns=[2],
                title="Phase-matching peak vs temperature",
                x_label="Temperature (C)",
                y_label="Fundamental wavelength (nm)",
            ),
            labels=["peak"],
        )

    def dfg_chart(self, data_file):
        return self.generate(
            Chart(
                data_file=data_file,
                x_column=1,
                y_columns=[3],
                title="DFG response",
                x_label="Signal wavelength (nm)",
                y_label="Normalized efficiency",
                baseline=0.5,
                baseline_label="3 dB",
            ),
            labels=["normalized efficiency"],
        )

    def car_chart(self, data_file):
        return self.generate(
            Chart(
                data_file=data_file,
                x_column=1,
                y_columns=[5, 6],
                title="Coincidences and accidentals versus pump power",
                x_label="Pump power (mW)",
                y_label="Rate (Hz)",
                log_scale=True,
            ),
            labels=["coincidences", "accidentals"],
        )
