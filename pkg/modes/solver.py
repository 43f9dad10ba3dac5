"""Semi-vectorial finite-difference mode solver"""

import logging
import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass
from dataclasses import field as dc_field
from typing import List, NamedTuple, Optional

import numpy as np
import pandas as pd
import scipy.linalg
from scipy.sparse import coo_matrix
from scipy.sparse.linalg import ArpackNoConvergence, eigs

from config.settings import (
    EIGEN_TOLERANCE,
    MAX_ITERATIONS,
    MODE_GROUP_INDEX_STEP_UM,
    RESIDUAL_TOLERANCE,
)
from modes.geometry import CrossSection, Grid, IndexMap, rasterize
from utils.exceptions import ShapeError, SolverError

log = logging.getLogger(__name__)

# Below this many unknowns a dense eigen-solve is used
DENSE_LIMIT = 400


@dataclass(frozen=True)
class SolverSettings:
    tolerance: float = EIGEN_TOLERANCE
    residual_tolerance: float = RESIDUAL_TOLERANCE
    max_iterations: int = MAX_ITERATIONS
    guided_only: bool = True


@dataclass
class ModeSolution:
    wavelength: float  # µm
    temperature: float  # °C
    polarization: str
    n_eff: float
    field: np.ndarray = dc_field(repr=False)
    mode_order: int
    residual: float
    dx: float  # nm
    dz: float  # nm
    x: np.ndarray = dc_field(repr=False)
    z: np.ndarray = dc_field(repr=False)

    @property
    def cell_area(self):
        """Cell area in m²"""
        return self.dx * self.dz * 1e-18

    def power_integral(self):
        return float(np.sum(self.field**2) * self.cell_area)


@dataclass(frozen=True)
class Overlap:
    factor: float  # 1/m
    percent: float


def _coefficients(eps, dx, dz, k, method):
    """
    Five-point stencil of the semi-vectorial Helmholtz operator.

    `eps` is the permittivity padded by one edge cell on every side.
    Method "Ex" carries the interface conditions along x, "Ez" along z.
    """
    nx, nz = eps.shape[0] - 2, eps.shape[1] - 2
    n = s = dz
    e = w = p = dx
    q = dz

    en = eps[1:-1, 2:].ravel()
    es = eps[1:-1, :-2].ravel()
    ee = eps[2:, 1:-1].ravel()
    ew = eps[:-2, 1:-1].ravel()
    ep = eps[1:-1, 1:-1].ravel()

    if method == "Ex":
        An = np.full_like(ep, 2 / n / (n + s))
        As = np.full_like(ep, 2 / s / (n + s))
        den = (p * (ep - ee) + 2 * e * ee) * (p**2 * (ep - ew) + 4 * w**2 * ew) + (
            p * (ep - ew) + 2 * w * ew
        ) * (p**2 * (ep - ee) + 4 * e**2 * ee)
        Ae = 8 * (p * (ep - ew) + 2 * w * ew) * ee / den
        Aw = 8 * (p * (ep - ee) + 2 * e * ee) * ew / den
    elif method == "Ez":
        den = (q * (ep - en) + 2 * n * en) * (q**2 * (ep - es) + 4 * s**2 * es) + (
            q * (ep - es) + 2 * s * es
        ) * (q**2 * (ep - en) + 4 * n**2 * en)
        An = 8 * (q * (ep - es) + 2 * s * es) * en / den
        As = 8 * (q * (ep - en) + 2 * n * en) * es / den
        Ae = np.full_like(ep, 2 / e / (e + w))
        Aw = np.full_like(ep, 2 / w / (e + w))
    else:
        raise ValueError(f"unknown method {method}")

    # translation-invariant axes carry no derivative terms
    if nx == 1:
        Ae[:] = 0.0
        Aw[:] = 0.0
    if nz == 1:
        An[:] = 0.0
        As[:] = 0.0

    if method == "Ex":
        Ap = ep * k**2 - An - As - Ae * ep / ee - Aw * ep / ew
    else:
        Ap = ep * k**2 - An * ep / en - As * ep / es - Ae - Aw
    return Ap, An, As, Ae, Aw


def build_operator(index_map: IndexMap):
    """Sparse operator A with A·E = β²·E, lengths in µm"""
    nx, nz = index_map.shape
    eps = index_map.index**2
    eps = np.c_[eps[:, :1], eps, eps[:, -1:]]
    eps = np.r_[eps[:1, :], eps, eps[-1:, :]]

    k = 2 * math.pi / index_map.wavelength
    method = "Ex" if index_map.polarization == "quasi-TE" else "Ez"
    Ap, An, As, Ae, Aw = _coefficients(
        eps, index_map.dx * 1e-3, index_map.dz * 1e-3, k, method
    )

    ii = np.arange(nx * nz).reshape(nx, nz)
    iall = ii.ravel()
    i_n = ii[:, 1:].ravel()
    i_s = ii[:, :-1].ravel()
    i_e = ii[1:, :].ravel()
    i_w = ii[:-1, :].ravel()

    I = np.r_[iall, i_w, i_e, i_s, i_n]  # noqa: E741
    J = np.r_[iall, i_e, i_w, i_n, i_s]
    V = np.r_[Ap[iall], Ae[i_w], Aw[i_e], An[i_s], As[i_n]]
    return coo_matrix((V, (I, J)), shape=(nx * nz, nx * nz)).tocsr()


def _eigenpairs(A, count, sigma, settings):
    size = A.shape[0]
    if size <= DENSE_LIMIT or count >= size - 1:
        values, vectors = scipy.linalg.eig(A.toarray())
        order = np.argsort(np.abs(values - sigma))[:count]
        return values[order], vectors[:, order]
    try:
        return eigs(
            A,
            k=count,
            sigma=sigma,
            which="LM",
            tol=settings.tolerance,
            maxiter=settings.max_iterations,
        )
    except ArpackNoConvergence as e:
        raise SolverError(
            "eigen-solver did not converge",
            {
                "unknowns": size,
                "requested": count,
                "converged": len(e.eigenvalues),
                "max_iterations": settings.max_iterations,
            },
        ) from e
    except RuntimeError as e:
        raise SolverError(f"shift-invert factorization failed: {e}", {"unknowns": size}) from e


def solve_modes(index_map: IndexMap, n_modes=1, settings=None) -> List[ModeSolution]:
    """
    Solve for up to `n_modes` modes, sorted by descending n_eff.

    With `settings.guided_only` eigenpairs whose n_eff is not between the
    boundary index and the peak index are dropped; an empty list means the
    structure is at cutoff.
    """
    settings = settings or SolverSettings()
    A = build_operator(index_map)
    k = 2 * math.pi / index_map.wavelength
    n_max = float(index_map.index.max())
    sigma = (k * n_max) ** 2

    values, vectors = _eigenpairs(A, n_modes + 2, sigma, settings)

    n_floor = index_map.boundary_max() if settings.guided_only else 0.0
    candidates = []
    for value, vector in zip(values, vectors.T):
        beta2 = value.real
        if beta2 <= 0 or abs(value.imag) > 1e-6 * abs(beta2):
            continue
        n_eff = math.sqrt(beta2) / k
        if settings.guided_only and not n_floor < n_eff < n_max:
            continue
        peak = np.argmax(np.abs(vector))
        v = (vector * np.exp(-1j * np.angle(vector[peak]))).real
        residual = np.linalg.norm(A @ v - beta2 * v) / (abs(beta2) * np.linalg.norm(v))
        if residual > settings.residual_tolerance:
            raise SolverError(
                "eigenpair residual above tolerance",
                {
                    "n_eff": f"{n_eff:.8f}",
                    "residual": f"{residual:.3e}",
                    "tolerance": settings.residual_tolerance,
                },
            )
        candidates.append((n_eff, v, residual))

    candidates.sort(key=lambda c: -c[0])
    modes = []
    cell_area = index_map.dx * index_map.dz * 1e-18
    for order, (n_eff, v, residual) in enumerate(candidates[:n_modes]):
        E = v.reshape(index_map.shape)
        if E.flat[np.argmax(np.abs(E))] < 0:
            E = -E
        E = E / math.sqrt(np.sum(E**2) * cell_area)
        modes.append(
            ModeSolution(
                wavelength=index_map.wavelength,
                temperature=index_map.temperature,
                polarization=index_map.polarization,
                n_eff=n_eff,
                field=E,
                mode_order=order,
                residual=float(residual),
                dx=index_map.dx,
                dz=index_map.dz,
                x=index_map.x,
                z=index_map.z,
            )
        )

    if not modes:
        log.warning(
            "⚠ No guided %s mode at %.4f um (cutoff)",
            index_map.polarization,
            index_map.wavelength,
        )
    return modes


def mode_overlap(sh_mode: ModeSolution, fund_mode: ModeSolution) -> Overlap:
    """Nonlinear overlap factor (1/m) and normalized field overlap (%)"""
    E2, E1 = sh_mode.field, fund_mode.field
    if E2.shape != E1.shape or not (
        math.isclose(sh_mode.dx, fund_mode.dx) and math.isclose(sh_mode.dz, fund_mode.dz)
    ):
        raise ShapeError(
            f"mode grids differ: {E2.shape} @ {sh_mode.dx}x{sh_mode.dz} nm "
            f"vs {E1.shape} @ {fund_mode.dx}x{fund_mode.dz} nm"
        )
    dA = sh_mode.cell_area
    norm2 = np.sum(E2**2) * dA
    norm1 = np.sum(E1**2) * dA
    factor = abs(np.sum(E2 * E1**2) * dA) / (math.sqrt(norm2) * norm1)
    percent = (np.sum(E2 * E1) * dA) ** 2 / (norm2 * norm1) * 100.0
    return Overlap(factor=float(factor), percent=float(percent))


def field_frame(mode: ModeSolution):
    """Long-format table (x_nm, z_nm, field) of a mode profile for export"""
    xx, zz = np.meshgrid(mode.x, mode.z, indexing="ij")
    return pd.DataFrame(
        {"x_nm": xx.ravel(), "z_nm": zz.ravel(), "field": mode.field.ravel()}
    )


class SolvePoint(NamedTuple):
    cross_section: CrossSection
    grid: Grid
    wavelength: float
    temperature: float
    polarization: str = "quasi-TE"
    n_modes: int = 1


def _solve_point(library, settings, point: SolvePoint):
    index_map = rasterize(
        point.cross_section,
        point.grid,
        point.wavelength,
        point.temperature,
        library,
        point.polarization,
    )
    return solve_modes(index_map, point.n_modes, settings)


def _solve_point_task(args):
    return _solve_point(*args)


class ModeSolver:
    """Rasterize-and-solve front end with an optional on-disk cache"""

    def __init__(self, library, settings: Optional[SolverSettings] = None, cache=None):
        self.library = library
        self.settings = settings or SolverSettings()
        self.cache = cache
        self.solve_count = 0

    def _key(self, point: SolvePoint):
        cs = point.cross_section
        materials = {
            role: asdict(self.library.resolve(name, point.polarization))
            for role, name in (
                ("core", cs.core),
                ("substrate", cs.substrate),
                ("cladding", cs.cladding),
            )
        }
        return {
            "cross_section": asdict(cs),
            "grid": asdict(point.grid),
            "wavelength": round(point.wavelength, 12),
            "temperature": round(point.temperature, 9),
            "polarization": point.polarization,
            "n_modes": point.n_modes,
            "settings": asdict(self.settings),
            "materials": materials,
        }

    def _from_cache(self, point):
        if self.cache is None:
            return None
        inputs = self._key(point)
        entry = self.cache.load(self.cache.make_key(inputs))
        if entry is None:
            return None
        grid = point.grid
        return [
            ModeSolution(
                wavelength=point.wavelength,
                temperature=point.temperature,
                polarization=point.polarization,
                n_eff=float(n_eff),
                field=entry["fields"][i],
                mode_order=i,
                residual=float(entry["residual"][i]),
                dx=grid.dx,
                dz=grid.dz,
                x=entry["x_nm"],
                z=entry["z_nm"],
            )
            for i, n_eff in enumerate(entry["n_eff"])
        ]

    def _to_cache(self, point, modes):
        if self.cache is None:
            return
        inputs = self._key(point)
        grid = point.grid
        fields = (
            np.stack([m.field for m in modes]) if modes else np.empty((0,) + grid.shape)
        )
        self.cache.store(
            self.cache.make_key(inputs),
            inputs,
            [m.n_eff for m in modes],
            [m.residual for m in modes],
            fields,
            grid.x_centers(),
            grid.z_centers(point.cross_section.film_thickness),
        )

    def solve(
        self,
        cross_section,
        grid,
        wavelength,
        temperature,
        polarization="quasi-TE",
        n_modes=1,
    ) -> List[ModeSolution]:
        point = SolvePoint(cross_section, grid, wavelength, temperature, polarization, n_modes)
        return self.solve_many([point])[0]

    def fundamental(self, cross_section, grid, wavelength, temperature, polarization="quasi-TE"):
        """Fundamental mode, or None at cutoff"""
        modes = self.solve(cross_section, grid, wavelength, temperature, polarization)
        return modes[0] if modes else None

    def solve_many(self, points, workers=1):
        """
        Solve a list of SolvePoints, in order. Cache lookups and writes stay
        in this process; only misses are fanned out to the worker pool.
        """
        results = [self._from_cache(p) for p in points]
        missing = [i for i, r in enumerate(results) if r is None]
        if not missing:
            return results

        tasks = [(self.library, self.settings, points[i]) for i in missing]
        if workers > 1 and len(tasks) > 1:
            log.info("Solving %d mode problems on %d workers", len(tasks), workers)
            with ProcessPoolExecutor(max_workers=workers) as pool:
                solved = list(pool.map(_solve_point_task, tasks))
        else:
            solved = [_solve_point_task(t) for t in tasks]

        for i, modes in zip(missing, solved):
            self.solve_count += 1
            self._to_cache(points[i], modes)
            results[i] = modes
        return results


def mode_group_index(
    solver: ModeSolver,
    cross_section,
    grid,
    wavelength,
    temperature,
    polarization="quasi-TE",
    step=MODE_GROUP_INDEX_STEP_UM,
    workers=1,
):
    """
    Group index n - λ dn_eff/dλ of the fundamental mode by central
    difference of solved effective indices. None if any point is cut off.
    """
    points = [
        SolvePoint(cross_section, grid, wl, temperature, polarization)
        for wl in (wavelength - step, wavelength, wavelength + step)
    ]
    solved = solver.solve_many(points, workers=workers)
    if any(not modes for modes in solved):
        log.warning("⚠ Group index unavailable at %.4f um: mode cut off", wavelength)
        return None
    n_minus, n_0, n_plus = (modes[0].n_eff for modes in solved)
    return n_0 - wavelength * (n_plus - n_minus) / (2 * step)
