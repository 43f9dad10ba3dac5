"""Quasi-phase-matching: poling design, tuning curves, SHG and DFG efficiency"""

import logging
import math
from dataclasses import dataclass, field
from typing import Optional

import numpy as np
import pandas as pd
from scipy.constants import c, epsilon_0

from config.settings import ENERGY_TOLERANCE, SINC2_HALF_POINT
from materials.dispersion import effective_nonlinearity
from metrics.calculator import FacetLossTable
from modes.geometry import CrossSection, Grid
from modes.solver import SolvePoint, mode_overlap
from utils.exceptions import ConfigError, ContractViolation, SolverError
from utils.helpers import half_max_crossings, nm_to_thz, sinc2

log = logging.getLogger(__name__)


@dataclass(frozen=True)
class QpmDevice:
    cross_section: CrossSection
    poling_period: float  # µm
    length: float  # mm
    temperature: float = 25.0  # °C
    duty_cycle: float = 0.5
    facet_reflectivity: Optional[float] = None  # None: Fresnel from the SH n_eff
    facet_loss: FacetLossTable = field(default_factory=FacetLossTable)

    def __post_init__(self):
        if not self.poling_period > 0:
            raise ConfigError(f"poling period must be > 0, got {self.poling_period}")
        if not self.length > 0:
            raise ConfigError(f"device length must be > 0, got {self.length}")
        if not 0 < self.duty_cycle < 1:
            raise ConfigError(f"duty cycle must be in (0, 1), got {self.duty_cycle}")
        if self.facet_reflectivity is not None and not 0 <= self.facet_reflectivity < 1:
            raise ConfigError(
                f"facet reflectivity must be in [0, 1), got {self.facet_reflectivity}"
            )

    @property
    def length_um(self):
        return self.length * 1e3

    @property
    def length_cm(self):
        return self.length * 0.1

    def with_period(self, poling_period):
        return QpmDevice(
            self.cross_section,
            poling_period,
            self.length,
            self.temperature,
            self.duty_cycle,
            self.facet_reflectivity,
            self.facet_loss,
        )


@dataclass
class TuningCurve:
    axis: np.ndarray
    axis_kind: str  # "wavelength" (µm) or "temperature" (°C)
    values: np.ndarray
    peak_location: float
    peak_value: float
    fwhm: Optional[float]

    def to_frame(self):
        if self.axis_kind == "wavelength":
            return pd.DataFrame(
                {"wavelength_nm": self.axis * 1e3, "normalized_efficiency": self.values}
            )
        return pd.DataFrame(
            {"temperature_c": self.axis, "normalized_efficiency": self.values}
        )


@dataclass
class DfgSpectrum:
    pump_wavelength: float  # µm
    signal: np.ndarray  # µm
    idler: np.ndarray  # µm
    values: np.ndarray
    bandwidth_thz: float
    bandwidth_limited: bool

    def to_frame(self):
        return pd.DataFrame(
            {
                "signal_nm": self.signal * 1e3,
                "idler_nm": self.idler * 1e3,
                "normalized_efficiency": self.values,
            }
        )


def wavevector_mismatch_shg(n_sh, n_fund, pump_wavelength, poling_period):
    """ΔK = k_2ω - 2k_ω - 2π/Λ in rad/µm, wavelengths and Λ in µm"""
    wl = np.asarray(pump_wavelength, dtype=float)
    k_sh = 2 * np.pi * np.asarray(n_sh) / (wl / 2)
    k_fund = 2 * np.pi * np.asarray(n_fund) / wl
    return k_sh - 2 * k_fund - 2 * np.pi / poling_period


def idler_wavelength(pump_wavelength, signal_wavelength):
    """Energy conservation 1/λi = 1/λp - 1/λs"""
    lp = np.asarray(pump_wavelength, dtype=float)
    ls = np.asarray(signal_wavelength, dtype=float)
    if np.any(ls <= lp):
        raise ContractViolation("signal wavelength must be longer than the pump")
    li = 1.0 / (1.0 / lp - 1.0 / ls)
    return float(li) if li.ndim == 0 else li


def wavevector_mismatch_spdc(n_p, n_s, n_i, lp, ls, li, poling_period):
    """ΔK = k_p - k_s - k_i - 2π/Λ in rad/µm; wavelengths must conserve energy"""
    lp, ls, li = (np.asarray(v, dtype=float) for v in (lp, ls, li))
    imbalance = np.abs(1 / lp - 1 / ls - 1 / li) * lp
    if np.any(imbalance > ENERGY_TOLERANCE):
        raise ContractViolation(
            f"energy not conserved: relative imbalance {float(np.max(imbalance)):.2e}"
        )
    k_p = 2 * np.pi * np.asarray(n_p) / lp
    k_s = 2 * np.pi * np.asarray(n_s) / ls
    k_i = 2 * np.pi * np.asarray(n_i) / li
    return k_p - (k_s + k_i) - 2 * np.pi / poling_period


def poling_period_from_indices(n_sh, n_fund, pump_wavelength):
    """First-order period λ/(2(n_2ω - n_ω)); None for anomalous dispersion"""
    delta = n_sh - n_fund
    if delta <= 0:
        log.warning(
            "⚠ Anomalous index ordering at %.4f um (n_2w - n_w = %.5f): no period",
            pump_wavelength,
            delta,
        )
        return None
    return pump_wavelength / (2 * delta)


def solve_mode_pair(solver, cross_section, grid, pump_wavelength, temperature,
                    polarization="quasi-TE", workers=1):
    """Fundamental modes at λ and λ/2; SolverError when either is cut off"""
    fund, sh = solver.solve_many(
        [
            SolvePoint(cross_section, grid, pump_wavelength, temperature, polarization),
            SolvePoint(cross_section, grid, pump_wavelength / 2, temperature, polarization),
        ],
        workers=workers,
    )
    if not fund or not sh:
        raise SolverError(
            "no guided mode",
            {
                "fundamental": "cutoff" if not fund else "ok",
                "harmonic": "cutoff" if not sh else "ok",
                "wavelength_um": pump_wavelength,
            },
        )
    return fund[0], sh[0]


def poling_period_for(solver, cross_section, grid, pump_wavelength, temperature,
                      polarization="quasi-TE", workers=1):
    fund, sh = solve_mode_pair(
        solver, cross_section, grid, pump_wavelength, temperature, polarization, workers
    )
    return poling_period_from_indices(sh.n_eff, fund.n_eff, pump_wavelength)


def design_poling_period(dispersion, pump_wavelength):
    n_sh, n_fund = dispersion.index_pair(pump_wavelength)
    return poling_period_from_indices(n_sh, n_fund, pump_wavelength)


def fresnel_reflectivity(n):
    return ((np.asarray(n) - 1) / (np.asarray(n) + 1)) ** 2


def airy_factor(sh_wavelength, n_sh, length_um, reflectivity):
    """Fabry-Perot transmission of the SH wave, 1 on resonance"""
    R = np.asarray(reflectivity, dtype=float)
    phase = 2 * np.pi * np.asarray(n_sh) * length_um / np.asarray(sh_wavelength)
    loss = (1 - R) ** 2
    return loss / (loss + 4 * R * np.sin(phase) ** 2)


def _curve(axis, values, kind):
    peak = int(np.argmax(values))
    left, right = half_max_crossings(axis, values)
    fwhm = None if left is None or right is None else float(right - left)
    if fwhm is None:
        log.warning("⚠ Tuning curve half maximum not inside the %s sweep", kind)
    return TuningCurve(
        axis=np.asarray(axis, dtype=float),
        axis_kind=kind,
        values=values,
        peak_location=float(axis[peak]),
        peak_value=float(values[peak]),
        fwhm=fwhm,
    )


def shg_response(device: QpmDevice, dispersion, wavelengths, with_fringes=False):
    wl = np.asarray(wavelengths, dtype=float)
    n_sh, n_fund = dispersion.index_pair(wl)
    dk = wavevector_mismatch_shg(n_sh, n_fund, wl, device.poling_period)
    values = sinc2(dk * device.length_um / 2)
    if with_fringes:
        R = device.facet_reflectivity
        if R is None:
            R = fresnel_reflectivity(n_sh)
        values = values * airy_factor(wl / 2, n_sh, device.length_um, R)
    return values


def tuning_curve(device: QpmDevice, dispersion, wavelengths, with_fringes=False) -> TuningCurve:
    """Normalized SHG response over fundamental wavelengths (µm)"""
    wl = np.asarray(wavelengths, dtype=float)
    return _curve(wl, shg_response(device, dispersion, wl, with_fringes), "wavelength")


def temperature_tuning_curve(device: QpmDevice, pump_wavelength, temperatures, indices_at):
    """
    Normalized SHG response at a fixed pump wavelength (µm) over
    temperatures; `indices_at(T)` returns (n_2ω, n_ω) at that temperature.
    """
    temps = np.asarray(temperatures, dtype=float)
    values = np.empty_like(temps)
    for i, t in enumerate(temps):
        n_sh, n_fund = indices_at(float(t))
        dk = wavevector_mismatch_shg(n_sh, n_fund, pump_wavelength, device.poling_period)
        values[i] = sinc2(dk * device.length_um / 2)
    return _curve(temps, values, "temperature")


def _vertex(axis, values, index):
    """Parabolic vertex through the three samples around `index`"""
    x = axis[index - 1:index + 2]
    y = values[index - 1:index + 2]
    denom = y[0] - 2 * y[1] + y[2]
    if denom == 0:
        return float(x[1]), float(y[1])
    offset = 0.5 * (y[0] - y[2]) / denom
    step = x[2] - x[1]
    return float(x[1] + offset * step), float(y[1] - 0.25 * (y[0] - y[2]) * offset)


def peak_wavelength_vs_temperature(device: QpmDevice, dispersion_at, temperatures, wavelengths):
    """
    Phase-matching peak (nm) of the fringe-free tuning curve at each
    temperature. `dispersion_at(T)` returns the ModeDispersion at T; a peak
    on the sweep edge is reported as NaN.
    """
    wl = np.asarray(wavelengths, dtype=float)
    rows = []
    for t in np.asarray(temperatures, dtype=float):
        values = shg_response(device, dispersion_at(float(t)), wl)
        peak = int(np.argmax(values))
        if peak in (0, len(wl) - 1):
            log.warning("⚠ Phase-matching peak at %.2f C on the sweep edge", t)
            rows.append((float(t), math.nan, float(values[peak])))
            continue
        location, value = _vertex(wl, values, peak)
        rows.append((float(t), location * 1e3, value))
    return pd.DataFrame(rows, columns=["temperature_c", "peak_nm", "peak_value"])


def is_monotone(values):
    """True when finite `values` are strictly increasing or strictly decreasing"""
    v = np.asarray(values, dtype=float)
    if len(v) < 2 or not np.all(np.isfinite(v)):
        return False
    step = np.diff(v)
    return bool(np.all(step > 0) or np.all(step < 0))


def mismatch_slope(device, dispersion, wavelength, step=1e-4):
    """dΔK/dλ in rad/µm² by central difference"""
    wl = np.array([wavelength - step, wavelength + step])
    n_sh, n_fund = dispersion.index_pair(wl)
    dk = wavevector_mismatch_shg(n_sh, n_fund, wl, device.poling_period)
    return float((dk[1] - dk[0]) / (2 * step))


def analytic_fwhm(device: QpmDevice, dispersion, wavelength):
    """Tuning FWHM in µm from the linearized mismatch around `wavelength`"""
    slope = mismatch_slope(device, dispersion, wavelength)
    if slope == 0:
        return math.inf
    return 4 * SINC2_HALF_POINT / (device.length_um * abs(slope))


def fringe_period(axis, values):
    """Mean spacing of the local maxima of a fringed curve, None if fewer than two"""
    v = np.asarray(values, dtype=float)
    peaks = np.where((v[1:-1] > v[:-2]) & (v[1:-1] >= v[2:]))[0] + 1
    if len(peaks) < 2:
        return None
    return float(np.mean(np.diff(np.asarray(axis)[peaks])))


def expected_fsr(sh_wavelength, group_index, length_um):
    """Fabry-Perot free spectral range λ²/(2 n_g L), in the units of λ"""
    return sh_wavelength**2 / (2 * group_index * length_um)


def normalized_shg_efficiency(fund_mode, sh_mode, d33, duty_cycle=0.5):
    """
    Normalized conversion efficiency in %/W/cm².

    Uses the squared nonlinear overlap factor and the fundamental
    wavelength; d33 in pm/V. The overlap factor is a single field overlap
    (1/m), so its square supplies the 1/area, and ω² = (2πc/λ_ω)².
    """
    overlap = mode_overlap(sh_mode, fund_mode)
    d_eff = effective_nonlinearity(d33, duty_cycle) * 1e-12
    wl = fund_mode.wavelength * 1e-6
    eta_si = (
        8
        * math.pi**2
        * d_eff**2
        / (epsilon_0 * c * sh_mode.n_eff * fund_mode.n_eff**2 * wl**2)
        * overlap.factor**2
    )
    return eta_si * 1e-2


def shg_power(eta, pump_power, length_cm, delta_k=0.0):
    """SH power (W) from η (%/W/cm²), pump (W), length (cm), ΔK (rad/µm)"""
    phase = np.asarray(delta_k) * length_cm * 1e4 / 2
    return eta / 100 * np.asarray(pump_power) ** 2 * length_cm**2 * sinc2(phase)


def efficiency_from_powers(sh_power, pump_power, length_cm):
    """η in %/W/cm² that turns `pump_power` into `sh_power` at phase matching"""
    if pump_power <= 0 or length_cm <= 0:
        raise ContractViolation("pump power and length must be > 0")
    return 100 * sh_power / (pump_power**2 * length_cm**2)


def dfg_idler_power(eta, pump_power, signal_power, length_cm, delta_k=0.0,
                    pump_wavelength=None, idler_wavelength_um=None):
    """
    Undepleted-pump DFG idler power (W). The coupling is scaled from the SHG
    efficiency by (2λp/λi)², which is 1 at degeneracy.
    """
    scale = 1.0
    if pump_wavelength is not None and idler_wavelength_um is not None:
        scale = (2 * pump_wavelength / idler_wavelength_um) ** 2
    phase = np.asarray(delta_k) * length_cm * 1e4 / 2
    return (
        eta / 100 * scale * pump_power * np.asarray(signal_power) * length_cm**2 * sinc2(phase)
    )


def _dfg_values(device, dispersion, pump_wavelength, signal, idler):
    n_p = dispersion.n_harmonic(pump_wavelength)
    dk = wavevector_mismatch_spdc(
        n_p,
        dispersion.n_fundamental(signal),
        dispersion.n_fundamental(idler),
        pump_wavelength,
        signal,
        idler,
        device.poling_period,
    )
    return sinc2(dk * device.length_um / 2)


def dfg_spectrum(device: QpmDevice, dispersion, pump_wavelength, signal_wavelengths) -> DfgSpectrum:
    """Normalized DFG (equivalently SPDC) response over signal wavelengths (µm)"""
    signal = np.asarray(signal_wavelengths, dtype=float)
    idler = np.asarray(idler_wavelength(pump_wavelength, signal))
    values = _dfg_values(device, dispersion, pump_wavelength, signal, idler)

    left, right = half_max_crossings(signal, values)
    limited = left is None or right is None
    lo = signal[0] if left is None else left
    hi = signal[-1] if right is None else right
    bandwidth = float(abs(nm_to_thz(lo * 1e3) - nm_to_thz(hi * 1e3)))
    if limited:
        log.warning(
            "⚠ DFG half maximum not reached inside the sweep: bandwidth > %.2f THz",
            bandwidth,
        )
    return DfgSpectrum(
        pump_wavelength=float(pump_wavelength),
        signal=signal,
        idler=idler,
        values=values,
        bandwidth_thz=bandwidth,
        bandwidth_limited=limited,
    )


def dfg_symmetry_error(device, dispersion, pump_wavelength, signal_wavelengths):
    """Largest change of the DFG response when signal and idler swap roles"""
    signal = np.asarray(signal_wavelengths, dtype=float)
    idler = np.asarray(idler_wavelength(pump_wavelength, signal))
    forward = _dfg_values(device, dispersion, pump_wavelength, signal, idler)
    swapped = _dfg_values(device, dispersion, pump_wavelength, idler, signal)
    return float(np.max(np.abs(forward - swapped)))


def spdc_pump_wavelength(device: QpmDevice, dispersion, wavelengths):
    """
    Pump wavelength (nm) for degenerate SPDC: half the SHG phase-matched
    fundamental. None when the fringe-free tuning curve has no interior peak.
    """
    curve = tuning_curve(device, dispersion, wavelengths, with_fringes=False)
    peak = int(np.argmax(curve.values))
    if peak in (0, len(curve.values) - 1) or curve.peak_value < 0.5:
        log.warning("⚠ No phase-matching peak inside the tuning sweep")
        return None
    return curve.peak_location * 1e3 / 2


def scan_top_width(solver, cross_section, widths_nm, grid_step, pump_wavelength,
                   temperature, d33, duty_cycle=0.5, min_period=None, workers=1):
    """
    Poling period, overlap and η for a range of ridge top widths.

    `grid_step` is (dx, dz, margin) in nm; each width gets its own covering
    grid. Rows failing the minimum-period constraint are marked infeasible.
    """
    dx, dz, margin = grid_step
    sections = [cross_section.with_top_width(float(w)) for w in widths_nm]
    grids = [Grid.around(cs, dx, dz, margin) for cs in sections]
    points = []
    for cs, grid in zip(sections, grids):
        points.append(SolvePoint(cs, grid, pump_wavelength, temperature))
        points.append(SolvePoint(cs, grid, pump_wavelength / 2, temperature))
    solved = solver.solve_many(points, workers=workers)

    rows = []
    for i, width in enumerate(widths_nm):
        fund, sh = solved[2 * i], solved[2 * i + 1]
        if not fund or not sh:
            rows.append({"top_width_nm": float(width), "feasible": False})
            continue
        fund, sh = fund[0], sh[0]
        period = poling_period_from_indices(sh.n_eff, fund.n_eff, pump_wavelength)
        overlap = mode_overlap(sh, fund)
        rows.append(
            {
                "top_width_nm": float(width),
                "n_eff_fundamental": fund.n_eff,
                "n_eff_harmonic": sh.n_eff,
                "poling_period_um": period,
                "overlap_percent": overlap.percent,
                "eta_percent_per_w_cm2": normalized_shg_efficiency(fund, sh, d33, duty_cycle),
                "feasible": period is not None
                and (min_period is None or period >= min_period),
            }
        )
    frame = pd.DataFrame(rows)
    feasible = frame[frame["feasible"]]
    if len(feasible):
        best = feasible.loc[feasible["eta_percent_per_w_cm2"].idxmax()]
        log.info(
            "✓ Best feasible top width %.0f nm: eta %.0f %%/W/cm2, period %.3f um",
            best["top_width_nm"],
            best["eta_percent_per_w_cm2"],
            best["poling_period_um"],
        )
    else:
        log.warning("⚠ No top width satisfies the poling-period constraint")
    return frame
