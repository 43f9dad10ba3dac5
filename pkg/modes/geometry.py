"""Waveguide cross-section, computational grid and index rasterization"""

import logging
import math
from dataclasses import dataclass

import numpy as np

from config.settings import DEFAULT_GRID_NM, DEFAULT_MARGIN_NM, SUBSAMPLES
from materials.dispersion import POLARIZATIONS, refractive_index
from utils.exceptions import ConfigError

log = logging.getLogger(__name__)


@dataclass(frozen=True)
class CrossSection:
    """
    Trapezoidal ridge etched into a thin film.

    The film sits on the substrate at z = 0 and is film_thickness high.
    Below slab_thickness the film is unetched and spans the full width;
    above it the ridge narrows linearly from bottom_width to top_width.
    All lengths in nm, sidewall angle in degrees.
    """

    film_thickness: float
    top_width: float
    sidewall_angle: float
    slab_thickness: float = 0.0
    core: str = "LN_congruent"
    substrate: str = "SiO2"
    cladding: str = "SiO2"

    def __post_init__(self):
        if self.film_thickness <= 0 or self.top_width <= 0:
            raise ConfigError("cross-section film thickness and top width must be > 0")
        if not 0 < self.sidewall_angle <= 90:
            raise ConfigError(
                f"sidewall angle {self.sidewall_angle} deg outside (0, 90]"
            )
        if not 0 <= self.slab_thickness < self.film_thickness:
            raise ConfigError("slab thickness must be in [0, film thickness)")

    @property
    def etch_depth(self):
        return self.film_thickness - self.slab_thickness

    @property
    def bottom_width(self):
        if self.sidewall_angle == 90:
            return self.top_width
        return self.top_width + 2 * self.etch_depth / math.tan(
            math.radians(self.sidewall_angle)
        )

    def half_width(self, z):
        """Ridge half-width at height z (nm) inside the etched part"""
        t = (np.asarray(z, dtype=float) - self.slab_thickness) / self.etch_depth
        return 0.5 * (self.bottom_width + (self.top_width - self.bottom_width) * t)

    def with_top_width(self, top_width):
        return CrossSection(
            self.film_thickness,
            top_width,
            self.sidewall_angle,
            self.slab_thickness,
            self.core,
            self.substrate,
            self.cladding,
        )


@dataclass(frozen=True)
class Grid:
    """
    Uniform cell grid. x is centered on the ridge axis; z is centered on
    the middle of the film. A span of exactly one cell makes that axis
    translation-invariant.
    """

    dx: float
    dz: float
    x_span: float
    z_span: float
    margin: float = DEFAULT_MARGIN_NM

    def __post_init__(self):
        if self.dx <= 0 or self.dz <= 0:
            raise ConfigError("grid steps must be > 0")
        if self.x_span < self.dx or self.z_span < self.dz:
            raise ConfigError("grid spans must cover at least one cell")

    @classmethod
    def around(
        cls,
        cs: CrossSection,
        dx=DEFAULT_GRID_NM,
        dz=DEFAULT_GRID_NM,
        margin=DEFAULT_MARGIN_NM,
        invariant_x=False,
    ):
        x_span = dx if invariant_x else _cover(cs.bottom_width + 2 * margin, dx)
        z_span = _cover(cs.film_thickness + 2 * margin, dz)
        return cls(dx, dz, x_span, z_span, margin)

    @property
    def nx(self):
        return max(1, int(round(self.x_span / self.dx)))

    @property
    def nz(self):
        return max(1, int(round(self.z_span / self.dz)))

    @property
    def shape(self):
        return self.nx, self.nz

    def x_centers(self):
        return -0.5 * self.nx * self.dx + self.dx * (np.arange(self.nx) + 0.5)

    def z_centers(self, film_thickness):
        z0 = 0.5 * film_thickness - 0.5 * self.nz * self.dz
        return z0 + self.dz * (np.arange(self.nz) + 0.5)


def _cover(length, step):
    return math.ceil(length / step - 1e-9) * step


@dataclass
class IndexMap:
    """Rasterized refractive index, axis 0 = x, axis 1 = z"""

    index: np.ndarray
    dx: float
    dz: float
    x: np.ndarray
    z: np.ndarray
    wavelength: float
    temperature: float
    polarization: str

    @property
    def shape(self):
        return self.index.shape

    def boundary_max(self):
        n = self.index
        edges = [n[0, :], n[-1, :], n[:, 0], n[:, -1]]
        if n.shape[0] == 1:
            edges = [n[:, 0], n[:, -1]]
        if n.shape[1] == 1:
            edges = [n[0, :], n[-1, :]]
        return float(max(e.max() for e in edges))


def rasterize(cs: CrossSection, grid: Grid, wavelength, temperature, library, polarization):
    """
    Map the cross-section onto the grid at one wavelength (µm) and
    temperature (°C).

    Cells cut by an interface get the area-weighted average of the
    material indices; coverage is exact along x and sampled on
    SUBSAMPLES sub-rows along z.
    """
    if polarization not in POLARIZATIONS:
        raise ConfigError(f"unknown polarization '{polarization}'")

    n_core = refractive_index(library.resolve(cs.core, polarization), wavelength, temperature)
    n_sub = refractive_index(
        library.resolve(cs.substrate, polarization), wavelength, temperature
    )
    n_clad = refractive_index(
        library.resolve(cs.cladding, polarization), wavelength, temperature
    )

    x = grid.x_centers()
    z = grid.z_centers(cs.film_thickness)
    x_lo = (x - 0.5 * grid.dx)[:, None]
    x_hi = (x + 0.5 * grid.dx)[:, None]

    offsets = (np.arange(SUBSAMPLES) + 0.5) / SUBSAMPLES - 0.5
    z_sub = (z[:, None] + offsets[None, :] * grid.dz).ravel()

    in_substrate = z_sub < 0
    in_slab = (z_sub >= 0) & (z_sub < cs.slab_thickness)
    in_ridge = (z_sub >= cs.slab_thickness) & (z_sub < cs.film_thickness)

    half = np.where(in_ridge, cs.half_width(z_sub), 0.0)
    half = np.where(in_slab, np.inf, half)
    covered = np.clip(np.minimum(x_hi, half) - np.maximum(x_lo, -half), 0.0, None)
    if grid.nx == 1:
        # translation-invariant axis: a core row is core across the cell
        covered = np.where(in_slab | in_ridge, grid.dx, 0.0)[None, :]
    f_core = (covered / grid.dx).reshape(grid.nx, grid.nz, SUBSAMPLES).mean(axis=2)
    f_sub = in_substrate.reshape(grid.nz, SUBSAMPLES).mean(axis=1)[None, :]
    f_sub = np.broadcast_to(f_sub, f_core.shape)
    f_clad = np.clip(1.0 - f_core - f_sub, 0.0, 1.0)

    index = f_core * n_core + f_sub * n_sub + f_clad * n_clad
    index = np.where(f_core >= 1.0, n_core, index)
    index = np.where(f_sub >= 1.0, n_sub, index)
    index = np.where(f_clad >= 1.0, n_clad, index)

    log.debug(
        "Rasterized %dx%d grid at %.4f um (%s): core %.5f, substrate %.5f, cladding %.5f",
        grid.nx,
        grid.nz,
        wavelength,
        polarization,
        n_core,
        n_sub,
        n_clad,
    )
    return IndexMap(
        index=np.ascontiguousarray(index),
        dx=grid.dx,
        dz=grid.dz,
        x=x,
        z=z,
        wavelength=float(wavelength),
        temperature=float(temperature),
        polarization=polarization,
    )
