"""Photon-pair counting statistics: analytic model and Monte-Carlo"""

import logging
import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, replace
from typing import Optional, Sequence

import numpy as np
import pandas as pd
from scipy.constants import c

from config.settings import MC_CHUNK_GATES, MC_MIN_GATES, MC_SIDE_PEAKS, MODEL_MU_LIMIT
from qpm.engine import wavevector_mismatch_spdc
from utils.exceptions import ConfigError, ContractViolation, ModelValidityError
from utils.helpers import ghz_to_nm, sinc2

log = logging.getLogger(__name__)


def _check_fraction(name, value):
    if not 0 <= value <= 1:
        raise ConfigError(f"{name} must be in [0, 1], got {value}")


@dataclass(frozen=True)
class Channel:
    center_nm: float
    width_ghz: float

    def __post_init__(self):
        if self.center_nm <= 0 or self.width_ghz <= 0:
            raise ConfigError("channel center and width must be > 0")

    @property
    def width_nm(self):
        return ghz_to_nm(self.width_ghz, self.center_nm)

    @property
    def frequency_hz(self):
        return c / (self.center_nm * 1e-9)


@dataclass(frozen=True)
class Detector:
    gate_rate: float  # Hz
    gate_width: float  # s
    efficiency_signal: float
    efficiency_idler: float
    dark_signal: float = 0.0  # probability per gate
    dark_idler: float = 0.0

    def __post_init__(self):
        if self.gate_rate <= 0 or self.gate_width <= 0:
            raise ConfigError("gate rate and gate width must be > 0")
        for name in ("efficiency_signal", "efficiency_idler", "dark_signal", "dark_idler"):
            _check_fraction(name, getattr(self, name))


@dataclass(frozen=True)
class PairExperiment:
    brightness: float  # pairs/s/mW/nm
    pump_power: float  # mW
    channel_signal: Channel
    channel_idler: Channel
    detector: Detector
    collection_signal: float = 1.0
    collection_idler: float = 1.0

    def __post_init__(self):
        if self.brightness < 0 or self.pump_power < 0:
            raise ConfigError("brightness and pump power must be >= 0")
        _check_fraction("collection_signal", self.collection_signal)
        _check_fraction("collection_idler", self.collection_idler)

    @property
    def eta_signal(self):
        return self.detector.efficiency_signal * self.collection_signal

    @property
    def eta_idler(self):
        return self.detector.efficiency_idler * self.collection_idler

    def with_pump_power(self, pump_power):
        return replace(self, pump_power=pump_power)


@dataclass
class CoincidenceResult:
    """Count rates in Hz. Standard errors are set for Monte-Carlo results only."""

    singles_signal: float
    singles_idler: float
    coincidences: float
    accidentals: float
    true_coincidences: float
    car: float
    mean_pairs_per_gate: float
    n_gates: Optional[int] = None
    coincidences_err: Optional[float] = None
    accidentals_err: Optional[float] = None
    car_err: Optional[float] = None


def pair_rate(exp: PairExperiment):
    """Generated pairs per second inside the channel pair"""
    if not math.isclose(exp.channel_signal.width_ghz, exp.channel_idler.width_ghz):
        raise ContractViolation(
            f"signal and idler channel widths differ: {exp.channel_signal.width_ghz} GHz "
            f"vs {exp.channel_idler.width_ghz} GHz"
        )
    return exp.brightness * exp.pump_power * exp.channel_signal.width_nm


def brightness_from_rate(rate, pump_power, channel: Channel):
    """Spectral brightness (pairs/s/mW/nm) that produces `rate` in `channel`"""
    if pump_power <= 0:
        raise ContractViolation("pump power must be > 0")
    return rate / (pump_power * channel.width_nm)


def mean_pairs_per_gate(exp: PairExperiment):
    mu = pair_rate(exp) / exp.detector.gate_rate
    if mu >= MODEL_MU_LIMIT:
        raise ModelValidityError(
            f"mean pairs per gate {mu:.3g} >= {MODEL_MU_LIMIT}: "
            "the single-pair detection model does not hold"
        )
    return mu


def expected_counts(exp: PairExperiment) -> CoincidenceResult:
    """First-order counting model; CAR = 1/µ + 1 without dark counts"""
    det = exp.detector
    mu = mean_pairs_per_gate(exp)
    p_true = mu * exp.eta_signal * exp.eta_idler
    p_signal = mu * exp.eta_signal + det.dark_signal
    p_idler = mu * exp.eta_idler + det.dark_idler
    p_acc = p_signal * p_idler
    p_coinc = p_true + p_acc
    return CoincidenceResult(
        singles_signal=p_signal * det.gate_rate,
        singles_idler=p_idler * det.gate_rate,
        coincidences=p_coinc * det.gate_rate,
        accidentals=p_acc * det.gate_rate,
        true_coincidences=p_true * det.gate_rate,
        car=p_coinc / p_acc if p_acc > 0 else math.inf,
        mean_pairs_per_gate=mu,
    )


@dataclass
class GateTally:
    gates: int = 0
    singles_signal: int = 0
    singles_idler: int = 0
    coincidences: int = 0
    accidental_hits: int = 0
    accidental_trials: int = 0

    def __add__(self, other):
        return GateTally(
            self.gates + other.gates,
            self.singles_signal + other.singles_signal,
            self.singles_idler + other.singles_idler,
            self.coincidences + other.coincidences,
            self.accidental_hits + other.accidental_hits,
            self.accidental_trials + other.accidental_trials,
        )


def _simulate_chunk(args):
    mu, eta_s, eta_i, dark_s, dark_i, gates, seed, side_peaks = args
    rng = np.random.Generator(np.random.Philox(seed))
    pairs = rng.poisson(mu, gates)
    click_s = (rng.binomial(pairs, eta_s) > 0) | (rng.random(gates) < dark_s)
    click_i = (rng.binomial(pairs, eta_i) > 0) | (rng.random(gates) < dark_i)

    hits = 0
    trials = 0
    for offset in range(1, side_peaks + 1):
        hits += int(np.count_nonzero(click_s[:-offset] & click_i[offset:]))
        trials += gates - offset
    return GateTally(
        gates=gates,
        singles_signal=int(np.count_nonzero(click_s)),
        singles_idler=int(np.count_nonzero(click_i)),
        coincidences=int(np.count_nonzero(click_s & click_i)),
        accidental_hits=hits,
        accidental_trials=trials,
    )


def monte_carlo_counts(
    exp: PairExperiment,
    n_gates,
    seed=0,
    workers=1,
    side_peaks=MC_SIDE_PEAKS,
    chunk_gates=MC_CHUNK_GATES,
) -> CoincidenceResult:
    """
    Gate-by-gate simulation: Poisson pair number, binomial loss per arm,
    Bernoulli dark counts. Accidentals come from the `side_peaks` gate
    offsets. Chunk i draws from the i-th spawned seed, so the result does
    not depend on `workers`.
    """
    n_gates = int(n_gates)
    if n_gates < MC_MIN_GATES:
        raise ContractViolation(f"Monte-Carlo needs at least {MC_MIN_GATES} gates")
    if chunk_gates <= side_peaks:
        raise ContractViolation("chunk size must exceed the number of side peaks")
    det = exp.detector
    mu = mean_pairs_per_gate(exp)

    n_chunks = math.ceil(n_gates / chunk_gates)
    sizes = [chunk_gates] * (n_chunks - 1) + [n_gates - chunk_gates * (n_chunks - 1)]
    seeds = np.random.SeedSequence(seed).spawn(n_chunks)
    tasks = [
        (mu, exp.eta_signal, exp.eta_idler, det.dark_signal, det.dark_idler, size, s, side_peaks)
        for size, s in zip(sizes, seeds)
    ]
    if workers > 1 and n_chunks > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            tallies = list(pool.map(_simulate_chunk, tasks))
    else:
        tallies = [_simulate_chunk(t) for t in tasks]

    total = sum(tallies, GateTally())
    scale = det.gate_rate / total.gates
    p_acc = total.accidental_hits / total.accidental_trials
    accidental_counts = p_acc * total.gates
    if total.accidental_hits and total.coincidences:
        car = total.coincidences / accidental_counts
        car_err = car * math.sqrt(1 / total.coincidences + 1 / total.accidental_hits)
    else:
        car, car_err = math.inf, math.nan
    log.debug(
        "Monte-Carlo: %d gates in %d chunks, %d coincidences, %d side-peak hits",
        total.gates,
        n_chunks,
        total.coincidences,
        total.accidental_hits,
    )
    return CoincidenceResult(
        singles_signal=total.singles_signal * scale,
        singles_idler=total.singles_idler * scale,
        coincidences=total.coincidences * scale,
        accidentals=p_acc * det.gate_rate,
        true_coincidences=(total.coincidences - accidental_counts) * scale,
        car=car,
        mean_pairs_per_gate=mu,
        n_gates=total.gates,
        coincidences_err=math.sqrt(total.coincidences) * scale,
        accidentals_err=math.sqrt(total.accidental_hits) / total.accidental_trials * det.gate_rate,
        car_err=car_err,
    )


def car_sweep(exp: PairExperiment, pump_powers: Sequence[float], monte_carlo=None):
    """
    Counting statistics over pump powers (mW). `monte_carlo` is an optional
    dict with n_gates, seed and workers; each power gets its own seed stream.
    """
    rows = []
    for i, power in enumerate(pump_powers):
        point = exp.with_pump_power(float(power))
        model = expected_counts(point)
        row = {
            "pump_power_mw": float(power),
            "mean_pairs_per_gate": model.mean_pairs_per_gate,
            "singles_signal_hz": model.singles_signal,
            "singles_idler_hz": model.singles_idler,
            "coincidences_hz": model.coincidences,
            "accidentals_hz": model.accidentals,
            "car": model.car,
        }
        if monte_carlo:
            mc = monte_carlo_counts(
                point,
                monte_carlo["n_gates"],
                seed=[int(monte_carlo.get("seed", 0)), i],
                workers=monte_carlo.get("workers", 1),
            )
            row.update(
                {
                    "mc_coincidences_hz": mc.coincidences,
                    "mc_coincidences_err_hz": mc.coincidences_err,
                    "mc_accidentals_hz": mc.accidentals,
                    "mc_accidentals_err_hz": mc.accidentals_err,
                    "mc_car": mc.car,
                    "mc_car_err": mc.car_err,
                }
            )
        rows.append(row)
    return pd.DataFrame(rows)


def loglog_slope(x, y):
    """Least-squares slope of log y against log x"""
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    if len(x) < 2 or np.any(x <= 0) or np.any(y <= 0):
        raise ContractViolation("log-log fit needs at least two positive points")
    return float(np.polyfit(np.log(x), np.log(y), 1)[0])


def joint_channel_matrix(
    device,
    dispersion,
    pump_wavelength,
    signal_channels: Sequence[Channel],
    idler_channels: Sequence[Channel],
    exp: PairExperiment,
    samples=201,
):
    """
    Expected coincidence rate for every signal/idler channel combination.

    Each signal channel is sampled at `samples` frequency midpoints; the
    idler frequency follows from energy conservation and counts when it
    falls inside the idler channel, weighted by the phase-matching sinc².
    The largest entry equals the expected coincidence rate of `exp`.
    """
    if not signal_channels or not idler_channels:
        raise ContractViolation("channel lists must not be empty")

    nu_p = c / (pump_wavelength * 1e-6)
    offsets = (np.arange(samples) + 0.5) / samples - 0.5
    matrix = np.zeros((len(signal_channels), len(idler_channels)))
    for row, ch_s in enumerate(signal_channels):
        nu_s = ch_s.frequency_hz + offsets * ch_s.width_ghz * 1e9
        nu_i = nu_p - nu_s
        ls = c / nu_s * 1e6
        li = c / nu_i * 1e6
        dk = wavevector_mismatch_spdc(
            dispersion.n_harmonic(pump_wavelength),
            dispersion.n_fundamental(ls),
            dispersion.n_fundamental(li),
            pump_wavelength,
            ls,
            li,
            device.poling_period,
        )
        weight = sinc2(dk * device.length_um / 2)
        for col, ch_i in enumerate(idler_channels):
            inside = np.abs(nu_i - ch_i.frequency_hz) <= ch_i.width_ghz * 1e9 / 2
            matrix[row, col] = np.mean(weight * inside)

    peak = matrix.max()
    if peak > 0:
        matrix *= expected_counts(exp).coincidences / peak
    else:
        log.warning("⚠ No signal/idler channel pair satisfies energy conservation")

    return pd.DataFrame(
        matrix,
        index=pd.Index([ch.center_nm for ch in signal_channels], name="signal_nm"),
        columns=[ch.center_nm for ch in idler_channels],
    )
