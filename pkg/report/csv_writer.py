"""CSV writer with provenance header"""

import logging
from pathlib import Path

import pandas as pd

from config.settings import CSV_FLOAT_FORMAT, TOOL_NAME, VERSION

log = logging.getLogger(__name__)

# column name -> unit shown in the header line
COLUMN_UNITS = {
    "wavelength_nm": "nm",
    "temperature_c": "C",
    "signal_nm": "nm",
    "idler_nm": "nm",
    "normalized_efficiency": "",
    "peak_nm": "nm",
    "peak_value": "",
    "pump_power_mw": "mW",
    "mean_pairs_per_gate": "",
    "singles_signal_hz": "Hz",
    "singles_idler_hz": "Hz",
    "coincidences_hz": "Hz",
    "accidentals_hz": "Hz",
    "car": "",
    "mc_coincidences_hz": "Hz",
    "mc_coincidences_err_hz": "Hz",
    "mc_accidentals_hz": "Hz",
    "mc_accidentals_err_hz": "Hz",
    "mc_car": "",
    "mc_car_err": "",
    "top_width_nm": "nm",
    "n_eff_fundamental": "",
    "n_eff_harmonic": "",
    "poling_period_um": "um",
    "overlap_percent": "%",
    "eta_percent_per_w_cm2": "%/W/cm2",
    "feasible": "",
    "x_nm": "nm",
    "z_nm": "nm",
    "field": "",
}


def header_line(columns, config_hash):
    cols = ",".join(f"{c}[{COLUMN_UNITS.get(c, '')}]" for c in columns)
    return f"# {TOOL_NAME} {VERSION} | config {config_hash} | {cols}\n"


class CsvWriter:
    """Write DataFrames as CSV with a `# qpmkit <version> | config <hash> | ...` line"""

    def __init__(self, output_dir, config_hash):
        self.output_dir = Path(output_dir)
        self.config_hash = config_hash
        self.written = []

    def write(self, frame, name, index=False):
        path = self.output_dir / name
        try:
            path.parent.mkdir(parents=True, exist_ok=True)
            columns = ([frame.index.name or "index"] if index else []) + [
                str(c) for c in frame.columns
            ]
            with open(path, "w", encoding="utf-8", newline="") as f:
                f.write(header_line(columns, self.config_hash))
                frame.to_csv(f, index=index, float_format=CSV_FLOAT_FORMAT, lineterminator="\n")
        except OSError as e:
            log.error("✗ Error writing %s: %s", path, e)
            raise
        self.written.append(path)
        log.info("✓ Written %s (%d rows)", path.name, len(frame))
        return path


def read_csv(path):
    """Read back a CSV written by CsvWriter, skipping the provenance line"""
    return pd.read_csv(path, comment="#")
