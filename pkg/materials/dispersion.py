"""Temperature-dependent refractive index models"""

import logging
import math
from dataclasses import dataclass, field
from typing import Dict, Optional, Tuple

import numpy as np

from config.settings import GROUP_INDEX_STEP_UM
from utils.exceptions import ConfigError, RangeError

log = logging.getLogger(__name__)

FORMS = ("temperature_sellmeier", "sellmeier", "constant")
POLARIZATIONS = ("quasi-TE", "quasi-TM")

# Reference temperature and offset of the generalized temperature form
T_REFERENCE = 24.5
T_OFFSET = 570.82


@dataclass(frozen=True)
class DispersionModel:
    name: str
    form: str
    coefficients: Tuple[float, ...]
    temperature_terms: Tuple[float, ...] = ()
    valid_wavelength_range: Tuple[float, float] = (0.2, 20.0)
    valid_temperature_range: Tuple[float, float] = (-50.0, 250.0)
    d33: Optional[float] = None  # pm/V
    reference: str = ""

    def __post_init__(self):
        if self.form not in FORMS:
            raise ConfigError(f"material {self.name}: unknown form '{self.form}'")
        expected = {"temperature_sellmeier": 6, "constant": 1}.get(self.form)
        if expected is not None and len(self.coefficients) != expected:
            raise ConfigError(
                f"material {self.name}: form {self.form} needs {expected} coefficients"
            )
        if self.form == "sellmeier" and (
            len(self.coefficients) == 0 or len(self.coefficients) % 2
        ):
            raise ConfigError(f"material {self.name}: sellmeier needs B, C pairs")
        if self.form == "temperature_sellmeier" and len(self.temperature_terms) != 4:
            raise ConfigError(f"material {self.name}: needs 4 temperature terms")
        if self.form == "sellmeier" and len(self.temperature_terms) not in (0, 2):
            raise ConfigError(
                f"material {self.name}: temperature terms are [dn/dT, T_ref] or empty"
            )

    def check_window(self, wavelength, temperature):
        lo, hi = self.valid_wavelength_range
        wl = np.asarray(wavelength, dtype=float)
        if np.any(wl < lo) or np.any(wl > hi):
            bad = wl[(wl < lo) | (wl > hi)].flat[0] if wl.ndim else float(wl)
            raise RangeError("wavelength", float(bad), self.valid_wavelength_range)
        lo, hi = self.valid_temperature_range
        if not lo <= temperature <= hi:
            raise RangeError("temperature", temperature, self.valid_temperature_range)


def _index_squared(model, wl, temperature):
    coeffs = model.coefficients
    wl2 = wl * wl

    if model.form == "constant":
        return np.full_like(wl, coeffs[0] ** 2)

    if model.form == "temperature_sellmeier":
        a1, a2, a3, a4, a5, a6 = coeffs
        b1, b2, b3, b4 = model.temperature_terms
        f = (temperature - T_REFERENCE) * (temperature + T_OFFSET)
        return (
            a1
            + b1 * f
            + (a2 + b2 * f) / (wl2 - (a3 + b3 * f) ** 2)
            + (a4 + b4 * f) / (wl2 - a5**2)
            - a6 * wl2
        )

    n2 = np.ones_like(wl)
    for b, c in zip(coeffs[0::2], coeffs[1::2]):
        n2 = n2 + b * wl2 / (wl2 - c)
    return n2


def refractive_index(model: DispersionModel, wavelength, temperature):
    """
    Refractive index at `wavelength` (µm) and `temperature` (°C).

    Accepts scalars or arrays of wavelengths. Raises RangeError naming the
    offending axis outside the model's validity window.
    """
    model.check_window(wavelength, temperature)
    wl = np.asarray(wavelength, dtype=float)
    n = np.sqrt(_index_squared(model, wl, float(temperature)))

    if model.form == "sellmeier" and model.temperature_terms:
        dn_dt, t_ref = model.temperature_terms
        n = n + dn_dt * (temperature - t_ref)

    return float(n) if n.ndim == 0 else n


def group_index(model: DispersionModel, wavelength, temperature, step=GROUP_INDEX_STEP_UM):
    """n_g = n - λ dn/dλ by central difference; λ must sit 2 steps inside the window"""
    lo, hi = model.valid_wavelength_range
    wl = np.asarray(wavelength, dtype=float)
    if np.any(wl - 2 * step < lo) or np.any(wl + 2 * step > hi):
        raise RangeError("wavelength", float(np.min(wl)), (lo + 2 * step, hi - 2 * step))

    n = refractive_index(model, wl, temperature)
    n_plus = refractive_index(model, wl + step, temperature)
    n_minus = refractive_index(model, wl - step, temperature)
    dn = (np.asarray(n_plus) - np.asarray(n_minus)) / (2 * step)
    ng = np.asarray(n) - wl * dn
    return float(ng) if ng.ndim == 0 else ng


def effective_nonlinearity(d33, duty_cycle=0.5):
    """First-order QPM coefficient (2/π)·d33·sin(π·duty)"""
    return 2.0 / math.pi * d33 * math.sin(math.pi * duty_cycle)


@dataclass
class MaterialLibrary:
    """Named dispersion models plus polarization aliases for birefringent cores"""

    models: Dict[str, DispersionModel] = field(default_factory=dict)
    aliases: Dict[str, Dict[str, str]] = field(default_factory=dict)
    source: str = ""

    @classmethod
    def from_records(cls, raw, source=""):
        models = {}
        for record in raw.get("materials", []):
            try:
                model = DispersionModel(
                    name=record["name"],
                    form=record["form"],
                    coefficients=tuple(float(v) for v in record["coefficients"]),
                    temperature_terms=tuple(
                        float(v) for v in record.get("temperature_terms", [])
                    ),
                    valid_wavelength_range=tuple(record["valid_wavelength_um"]),
                    valid_temperature_range=tuple(record["valid_temperature_c"]),
                    d33=record.get("d33_pm_per_v"),
                    reference=record.get("reference", ""),
                )
            except KeyError as e:
                raise ConfigError(f"material record missing field {e}") from e
            if model.name in models:
                raise ConfigError(f"duplicate material '{model.name}'")
            models[model.name] = model

        aliases = raw.get("aliases", {})
        for alias, targets in aliases.items():
            for pol, target in targets.items():
                if pol not in POLARIZATIONS:
                    raise ConfigError(f"alias {alias}: unknown polarization '{pol}'")
                if target not in models:
                    raise ConfigError(f"alias {alias}: unknown material '{target}'")

        log.debug("Loaded %d materials from %s", len(models), source or "records")
        return cls(models=models, aliases=aliases, source=source)

    def resolve(self, name, polarization="quasi-TE") -> DispersionModel:
        if name in self.aliases:
            name = self.aliases[name].get(polarization, name)
        try:
            return self.models[name]
        except KeyError:
            raise ConfigError(
                f"unknown material '{name}' (known: {', '.join(sorted(self.models))})"
            ) from None
