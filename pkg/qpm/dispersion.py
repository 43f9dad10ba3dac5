"""Effective-index dispersion of the interacting modes"""

import logging
from dataclasses import dataclass
from typing import Tuple

import numpy as np
from numpy.polynomial import Polynomial

from materials.dispersion import refractive_index
from modes.solver import SolvePoint
from utils.exceptions import ConfigError, RangeError, SolverError

log = logging.getLogger(__name__)

BAND_SLACK = 1e-9  # µm


@dataclass(frozen=True)
class IndexFit:
    """n_eff(λ) over one band: a polynomial in λ (µm) or a constant"""

    band: Tuple[float, float]
    polynomial: Polynomial
    axis: str = "wavelength"

    def __call__(self, wavelength):
        wl = np.asarray(wavelength, dtype=float)
        lo, hi = self.band
        if np.any(wl < lo - BAND_SLACK) or np.any(wl > hi + BAND_SLACK):
            bad = wl[(wl < lo - BAND_SLACK) | (wl > hi + BAND_SLACK)].flat[0]
            raise RangeError(self.axis, float(bad), self.band)
        n = self.polynomial(wl)
        return float(n) if np.ndim(n) == 0 else n

    def derivative(self, wavelength):
        self(wavelength)
        d = self.polynomial.deriv()(np.asarray(wavelength, dtype=float))
        return float(d) if np.ndim(d) == 0 else d

    def group_index(self, wavelength):
        wl = np.asarray(wavelength, dtype=float)
        ng = np.asarray(self(wl)) - wl * np.asarray(self.derivative(wl))
        return float(ng) if ng.ndim == 0 else ng

    @classmethod
    def fit(cls, wavelengths, indices, band):
        wavelengths = np.asarray(wavelengths, dtype=float)
        if len(wavelengths) == 1:
            return cls.constant(float(indices[0]), band)
        degree = min(len(wavelengths) - 1, 3)
        poly = Polynomial.fit(wavelengths, indices, degree, domain=list(band))
        return cls(band=tuple(band), polynomial=poly)

    @classmethod
    def constant(cls, n, band):
        return cls(band=tuple(band), polynomial=Polynomial([n]))


@dataclass(frozen=True)
class ModeDispersion:
    """
    n_eff of the fundamental-band and harmonic-band modes. The harmonic band
    is the fundamental band halved.
    """

    fundamental: IndexFit
    harmonic: IndexFit
    temperature: float = 25.0
    label: str = ""

    @property
    def fundamental_band(self):
        return self.fundamental.band

    @property
    def harmonic_band(self):
        return self.harmonic.band

    def n_fundamental(self, wavelength):
        return self.fundamental(wavelength)

    def n_harmonic(self, wavelength):
        return self.harmonic(wavelength)

    def index_pair(self, pump_wavelength):
        """(n_2ω, n_ω) for a fundamental wavelength"""
        return self.harmonic(np.asarray(pump_wavelength) / 2), self.fundamental(pump_wavelength)

    @classmethod
    def constant(cls, n_fundamental, n_harmonic, band=(1.4, 1.7), temperature=25.0):
        """Dispersionless toy model"""
        return cls(
            fundamental=IndexFit.constant(n_fundamental, band),
            harmonic=IndexFit.constant(n_harmonic, (band[0] / 2, band[1] / 2)),
            temperature=temperature,
            label="constant",
        )

    @classmethod
    def from_anchors(cls, fund_wl, fund_n, sh_wl, sh_n, band, temperature=25.0, label="fit"):
        return cls(
            fundamental=IndexFit.fit(fund_wl, fund_n, band),
            harmonic=IndexFit.fit(sh_wl, sh_n, (band[0] / 2, band[1] / 2)),
            temperature=temperature,
            label=label,
        )

    @classmethod
    def from_materials(cls, library, material, band, temperature, polarization="quasi-TE"):
        """Bulk-material dispersion of one polarization in both bands"""
        model = library.resolve(material, polarization)
        wl = np.linspace(band[0], band[1], 9)
        n_f = refractive_index(model, wl, temperature)
        n_sh = refractive_index(model, wl / 2, temperature)
        return cls.from_anchors(wl, n_f, wl / 2, n_sh, band, temperature, label=f"bulk {model.name}")

    @classmethod
    def from_solver(
        cls,
        solver,
        cross_section,
        grid,
        temperature,
        band,
        anchors=5,
        polarization="quasi-TE",
        workers=1,
    ):
        """
        Fit solved fundamental-mode indices at `anchors` wavelengths across
        the band and at their halves.
        """
        if anchors < 1:
            raise ConfigError("dispersion needs at least one anchor wavelength")
        wl = np.linspace(band[0], band[1], int(anchors)) if anchors > 1 else np.array(
            [0.5 * (band[0] + band[1])]
        )
        points = [
            SolvePoint(cross_section, grid, float(w), temperature, polarization) for w in wl
        ] + [
            SolvePoint(cross_section, grid, float(w) / 2, temperature, polarization)
            for w in wl
        ]
        solved = solver.solve_many(points, workers=workers)
        missing = [p.wavelength for p, modes in zip(points, solved) if not modes]
        if missing:
            raise SolverError(
                "no guided mode at dispersion anchors",
                {"wavelengths_um": ",".join(f"{w:.4f}" for w in missing)},
            )
        n = np.array([modes[0].n_eff for modes in solved])
        half = len(wl)
        log.info(
            "✓ Dispersion fitted from %d anchors per band at %.2f C", half, temperature
        )
        return cls.from_anchors(
            wl, n[:half], wl / 2, n[half:], band, temperature, label="mode solver"
        )


@dataclass(frozen=True)
class ThermalDispersion:
    """
    Anchor indices solved at a few node temperatures. `at(T)` interpolates
    every anchor in T through the nodes and refits a ModeDispersion.
    """

    band: Tuple[float, float]
    anchors: np.ndarray  # fundamental wavelengths, µm
    node_temperatures: np.ndarray  # °C
    n_fundamental: np.ndarray  # (nodes, anchors)
    n_harmonic: np.ndarray  # (nodes, anchors)
    label: str = ""

    @property
    def temperature_range(self):
        return float(self.node_temperatures.min()), float(self.node_temperatures.max())

    def _interpolate(self, table, temperature):
        t = self.node_temperatures
        if len(t) == 1:
            return table[0]
        degree = len(t) - 1
        return np.array(
            [Polynomial.fit(t, table[:, j], degree)(temperature) for j in range(table.shape[1])]
        )

    def at(self, temperature) -> ModeDispersion:
        lo, hi = self.temperature_range
        if temperature < lo - 1e-9 or temperature > hi + 1e-9:
            raise RangeError("temperature", float(temperature), (lo, hi))
        return ModeDispersion.from_anchors(
            self.anchors,
            self._interpolate(self.n_fundamental, temperature),
            self.anchors / 2,
            self._interpolate(self.n_harmonic, temperature),
            self.band,
            float(temperature),
            label=f"{self.label} @ {temperature:.2f} C",
        )

    @classmethod
    def from_solver(
        cls,
        solver,
        cross_section,
        grid,
        band,
        temperatures,
        anchors=5,
        polarization="quasi-TE",
        workers=1,
    ):
        """Solve the anchors of `band` at each node temperature in one batch"""
        nodes = np.unique(np.asarray(temperatures, dtype=float))
        if len(nodes) < 1:
            raise ConfigError("thermal dispersion needs at least one node temperature")
        wl = np.linspace(band[0], band[1], int(anchors))
        points = [
            SolvePoint(cross_section, grid, float(w) / div, float(t), polarization)
            for t in nodes
            for div in (1, 2)
            for w in wl
        ]
        solved = solver.solve_many(points, workers=workers)
        missing = [p for p, modes in zip(points, solved) if not modes]
        if missing:
            raise SolverError(
                "no guided mode at thermal dispersion anchors",
                {
                    "points": ",".join(
                        f"{p.wavelength:.4f}um@{p.temperature:.1f}C" for p in missing
                    )
                },
            )
        n = np.array([modes[0].n_eff for modes in solved]).reshape(len(nodes), 2, len(wl))
        log.info(
            "✓ Thermal dispersion: %d anchors at %d node temperatures (%.1f-%.1f C)",
            len(wl),
            len(nodes),
            nodes[0],
            nodes[-1],
        )
        return cls(
            band=tuple(band),
            anchors=wl,
            node_temperatures=nodes,
            n_fundamental=n[:, 0, :],
            n_harmonic=n[:, 1, :],
            label="mode solver",
        )
