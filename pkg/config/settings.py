"""Application settings and constants"""

import os
from pathlib import Path

BASE_DIR = Path(__file__).parent.parent
CONFIG_DIR = BASE_DIR / "config"

VERSION = "1.0.0"
TOOL_NAME = "qpmkit"

MATERIALS_FILE = "materials.json"
PAPER_CONFIG_FILE = "paper_device.json"
ACCEPTANCE_FILE = "acceptance_config.json"

CACHE_ENV_VAR = "QPMKIT_CACHE_DIR"
DEFAULT_CACHE_DIR = BASE_DIR / ".mode_cache"


def cache_root(configured=None):
    """Cache directory: environment variable wins over config, then default"""
    env = os.environ.get(CACHE_ENV_VAR)
    if env:
        return Path(env)
    if configured:
        return Path(configured)
    return DEFAULT_CACHE_DIR


class ExitCode:
    SUCCESS = 0
    FAILURE = 1
    CONFIG_ERROR = 3
    SOLVER_ERROR = 4
    MODEL_VALIDITY_ERROR = 5


# Numerical defaults
GROUP_INDEX_STEP_UM = 1e-3
MODE_GROUP_INDEX_STEP_UM = 1e-2
# solved temperatures spanning the temperature sweep; other temperatures interpolate
THERMAL_NODES = 3
DEFAULT_GRID_NM = 10.0
DEFAULT_MARGIN_NM = 1500.0
SUBSAMPLES = 16
EIGEN_TOLERANCE = 1e-12
RESIDUAL_TOLERANCE = 1e-8
MAX_ITERATIONS = 5000
ENERGY_TOLERANCE = 1e-9
MODEL_MU_LIMIT = 0.5
MC_MIN_GATES = 10_000
MC_CHUNK_GATES = 1_000_000
MC_SIDE_PEAKS = 10
# sinc^2(x) = 1/2
SINC2_HALF_POINT = 1.3915573782515103

CSV_FLOAT_FORMAT = "%.10g"


# Unit tables: factor to the dimension's base unit
# length -> m, power -> W, frequency -> Hz, time -> s, angle -> deg
UNITS = {
    "length": {
        "m": 1.0,
        "cm": 1e-2,
        "mm": 1e-3,
        "um": 1e-6,
        "µm": 1e-6,
        "nm": 1e-9,
    },
    "power": {"W": 1.0, "mW": 1e-3, "uW": 1e-6, "µW": 1e-6, "nW": 1e-9},
    "frequency": {"Hz": 1.0, "kHz": 1e3, "MHz": 1e6, "GHz": 1e9, "THz": 1e12},
    "time": {"s": 1.0, "ms": 1e-3, "us": 1e-6, "µs": 1e-6, "ns": 1e-9, "ps": 1e-12},
    "angle": {"deg": 1.0, "°": 1.0},
    "loss": {"dB": 1.0},
    "loss_per_length": {"dB/cm": 1.0, "dB/m": 1e-2},
    "brightness": {"Hz/mW/nm": 1.0, "kHz/mW/nm": 1e3, "MHz/mW/nm": 1e6},
    "nonlinearity": {"pm/V": 1.0},
    "efficiency": {"%/W/cm2": 1.0},
    "fraction": {"": 1.0, "%": 1e-2},
    "count": {"": 1.0},
}

# Temperatures are offsets, not factors
TEMPERATURE_UNITS = {"C": 0.0, "degC": 0.0, "°C": 0.0, "K": -273.15}

# Canonical unit per field dimension, expressed as the factor of the base unit
CANONICAL = {
    "nm": ("length", 1e-9),
    "um": ("length", 1e-6),
    "mm": ("length", 1e-3),
    "cm": ("length", 1e-2),
    "W": ("power", 1.0),
    "mW": ("power", 1e-3),
    "Hz": ("frequency", 1.0),
    "GHz": ("frequency", 1e9),
    "s": ("time", 1.0),
    "deg": ("angle", 1.0),
    "dB": ("loss", 1.0),
    "dB/cm": ("loss_per_length", 1.0),
    "Hz/mW/nm": ("brightness", 1.0),
    "pm/V": ("nonlinearity", 1.0),
    "%/W/cm2": ("efficiency", 1.0),
    "fraction": ("fraction", 1.0),
    "count": ("count", 1.0),
    "C": ("temperature", 0.0),
}

# Per-field unit schema of the project config: dotted path -> canonical unit
UNIT_SCHEMA = {
    "design_wavelength": "nm",
    "temperature": "C",
    "cross_section.film_thickness": "nm",
    "cross_section.top_width": "nm",
    "cross_section.sidewall_angle": "deg",
    "cross_section.slab_thickness": "nm",
    "ring_cross_section.film_thickness": "nm",
    "ring_cross_section.top_width": "nm",
    "ring_cross_section.sidewall_angle": "deg",
    "ring_cross_section.slab_thickness": "nm",
    "grid.dx": "nm",
    "grid.dz": "nm",
    "grid.margin": "nm",
    "device.poling_period": "um",
    "device.length": "mm",
    "device.temperature": "C",
    "device.duty_cycle": "fraction",
    "device.facet_reflectivity": "fraction",
    "device.design_wavelength": "nm",
    "device.d33": "pm/V",
    "device.facet_loss.*": "dB",
    "dispersion.fundamental_band.start": "nm",
    "dispersion.fundamental_band.stop": "nm",
    "dispersion.anchors": "count",
    "sweeps.wavelength.start": "nm",
    "sweeps.wavelength.stop": "nm",
    "sweeps.wavelength.points": "count",
    "sweeps.signal.start": "nm",
    "sweeps.signal.stop": "nm",
    "sweeps.signal.points": "count",
    "sweeps.temperature.start": "C",
    "sweeps.temperature.stop": "C",
    "sweeps.temperature.points": "count",
    "sweeps.pump_power.start": "mW",
    "sweeps.pump_power.stop": "mW",
    "sweeps.pump_power.points": "count",
    "sweeps.top_width.start": "nm",
    "sweeps.top_width.stop": "nm",
    "sweeps.top_width.points": "count",
    "sweeps.top_width.min_poling_period": "um",
    "dfg.pump_wavelength": "nm",
    "pairs.brightness": "Hz/mW/nm",
    "pairs.pump_power": "mW",
    "pairs.pump_wavelength": "nm",
    "pairs.channel_signal.center": "nm",
    "pairs.channel_signal.width": "GHz",
    "pairs.channel_idler.center": "nm",
    "pairs.channel_idler.width": "GHz",
    "pairs.detector.gate_rate": "Hz",
    "pairs.detector.gate_width": "s",
    "pairs.detector.efficiency_signal": "fraction",
    "pairs.detector.efficiency_idler": "fraction",
    "pairs.detector.dark_signal": "fraction",
    "pairs.detector.dark_idler": "fraction",
    "pairs.collection_signal": "fraction",
    "pairs.collection_idler": "fraction",
    "pairs.monte_carlo.gates": "count",
    "pairs.channel_grid.signal_centers.*": "nm",
    "pairs.channel_grid.idler_centers.*": "nm",
    "pairs.channel_grid.width": "GHz",
    "metrics.measured_pump": "mW",
    "metrics.measured_sh": "mW",
    "metrics.reference_eta": "%/W/cm2",
    "metrics.pump_band": "nm",
    "metrics.sh_band": "nm",
    "metrics.intrinsic_q": "count",
    "metrics.ring_wavelength": "nm",
    "metrics.group_index": "count",
    "metrics.group_index_range.*": "count",
}
