"""Helper utilities"""

import hashlib
import json
import re

import numpy as np
from scipy.constants import c

from config.settings import CANONICAL, TEMPERATURE_UNITS, UNITS
from utils.exceptions import ConfigError

QUANTITY_PATTERN = re.compile(
    r"^\s*([-+]?(?:\d+\.?\d*|\.\d+)(?:[eE][-+]?\d+)?)\s*(.*?)\s*$"
)


def parse_quantity(value, unit, field="value"):
    """
    Parse a config quantity such as "500 nm" and return it in `unit`.

    `unit` is a canonical unit key from config.settings.CANONICAL.
    Plain numbers are accepted only for dimensionless fields.
    """
    dimension, target = CANONICAL[unit]

    if isinstance(value, bool):
        raise ConfigError(f"{field}: expected a quantity, got {value!r}")
    if isinstance(value, (int, float)):
        if dimension in ("fraction", "count"):
            return float(value)
        raise ConfigError(f"{field}: '{value}' has no unit (expected {unit})")

    match = QUANTITY_PATTERN.match(str(value).replace(",", ""))
    if not match:
        raise ConfigError(f"{field}: cannot parse quantity {value!r}")
    number = float(match.group(1))
    given = match.group(2)

    if dimension == "temperature":
        if given not in TEMPERATURE_UNITS:
            raise ConfigError(f"{field}: unit '{given}' is not a temperature")
        return number + TEMPERATURE_UNITS[given]

    table = UNITS[dimension]
    if given not in table:
        raise ConfigError(
            f"{field}: unit '{given}' does not match dimension {dimension} "
            f"(allowed: {', '.join(u or '<none>' for u in table)})"
        )
    return number * table[given] / target


def content_hash(*parts):
    """Short SHA-256 over JSON-serialisable parts, stable across runs"""
    digest = hashlib.sha256()
    for part in parts:
        if isinstance(part, bytes):
            digest.update(part)
        else:
            digest.update(
                json.dumps(part, sort_keys=True, default=json_default).encode()
            )
    return digest.hexdigest()


def json_default(obj):
    if isinstance(obj, np.ndarray):
        return obj.tolist()
    if isinstance(obj, np.generic):
        return obj.item()
    if hasattr(obj, "__dict__"):
        return vars(obj)
    raise TypeError(f"not serialisable: {type(obj).__name__}")


def sinc2(x):
    """sin(x)^2 / x^2 with sinc2(0) = 1"""
    return np.sinc(np.asarray(x) / np.pi) ** 2


def ghz_to_nm(width_ghz, center_nm):
    """Spectral width in nm of a band `width_ghz` wide centered at `center_nm`"""
    center_m = center_nm * 1e-9
    return center_m**2 * width_ghz * 1e9 / c * 1e9


def nm_to_thz(wavelength_nm):
    return c / (np.asarray(wavelength_nm) * 1e-9) / 1e12


def thz_to_nm(frequency_thz):
    return c / (np.asarray(frequency_thz) * 1e12) * 1e9


def sweep_values(start, stop, points, log=False):
    """Sweep axis from a config block; at least two points"""
    points = int(points)
    if points < 2:
        raise ConfigError(f"sweep needs at least 2 points, got {points}")
    if log:
        return np.geomspace(start, stop, points)
    return np.linspace(start, stop, points)


def half_max_crossings(axis, values):
    """
    Linear-interpolated half-maximum crossings around the peak.

    Returns (left, right); an edge is None when the curve does not fall
    below half maximum inside the axis.
    """
    values = np.asarray(values, dtype=float)
    axis = np.asarray(axis, dtype=float)
    peak = int(np.argmax(values))
    half = values[peak] / 2.0

    left = None
    for i in range(peak, 0, -1):
        if values[i - 1] < half <= values[i]:
            t = (half - values[i - 1]) / (values[i] - values[i - 1])
            left = axis[i - 1] + t * (axis[i] - axis[i - 1])
            break

    right = None
    for i in range(peak, len(values) - 1):
        if values[i + 1] < half <= values[i]:
            t = (values[i] - half) / (values[i] - values[i + 1])
            right = axis[i] + t * (axis[i + 1] - axis[i])
            break

    return left, right
