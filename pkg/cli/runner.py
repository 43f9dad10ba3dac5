"""Command orchestration: design, tune, dfg, pairs, metrics and the reference-device bundle"""

import json
import logging
import time
from dataclasses import asdict, replace
from pathlib import Path

import numpy as np

from acceptance.validator import AcceptanceValidator
from config.settings import (
    CONFIG_DIR,
    THERMAL_NODES,
    TOOL_NAME,
    VERSION,
    ExitCode,
    cache_root,
)
from data.loader import ProjectLoader
from data.transformer import ConfigTransformer
from materials.dispersion import refractive_index
from metrics.calculator import deembed_power, embed_power, propagation_loss_db, q_to_loss
from modes.cache import ModeCache
from modes.geometry import Grid
from modes.slab import slab_effective_index
from modes.solver import (
    ModeSolver,
    field_frame,
    mode_group_index,
    mode_overlap,
)
from pairs.simulator import (
    car_sweep,
    expected_counts,
    joint_channel_matrix,
    loglog_slope,
)
from qpm.dispersion import ModeDispersion, ThermalDispersion
from qpm.engine import (
    analytic_fwhm,
    design_poling_period,
    dfg_spectrum,
    dfg_symmetry_error,
    efficiency_from_powers,
    expected_fsr,
    fringe_period,
    idler_wavelength,
    is_monotone,
    normalized_shg_efficiency,
    peak_wavelength_vs_temperature,
    poling_period_from_indices,
    scan_top_width,
    shg_power,
    solve_mode_pair,
    spdc_pump_wavelength,
    temperature_tuning_curve,
    tuning_curve,
)
from report.chart_generator import ChartGenerator
from report.csv_writer import CsvWriter
from report.summary_writer import SummaryExcelWriter
from utils.exceptions import (
    ConfigError,
    ContractViolation,
    ModelValidityError,
    QpmKitError,
    RangeError,
    ShapeError,
    SolverError,
)
from utils.helpers import json_default

log = logging.getLogger(__name__)

SLAB_CONFIG_FILE = "slab_check.json"
# fine sweep around the tuning peak used to resolve the facet fringes
FRINGE_HALF_SPAN_UM = 3e-4
FRINGE_STEP_UM = 5e-7


def exit_code_for(error):
    if isinstance(error, (ConfigError, RangeError, ContractViolation)):
        return ExitCode.CONFIG_ERROR
    if isinstance(error, (SolverError, ShapeError)):
        return ExitCode.SOLVER_ERROR
    if isinstance(error, ModelValidityError):
        return ExitCode.MODEL_VALIDITY_ERROR
    return ExitCode.FAILURE


def load_project(config_path, seed=None, threads=None, fringes=None, output_dir=None):
    """Load, transform and apply command-line overrides"""
    loader = ProjectLoader()
    loader.load_config_file(config_path)
    loader.load_materials_file()
    config = ConfigTransformer(loader).transform_all()
    if seed is not None:
        config.seed = int(seed)
    if threads is not None:
        config.workers = max(1, int(threads))
    if fringes is not None:
        config.fringes = bool(fringes)
    if output_dir is not None:
        config.output_dir = Path(output_dir)
    return config


def _write_json(path, payload):
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w", encoding="utf-8") as f:
        json.dump(payload, f, indent=2, sort_keys=True, default=json_default)
    print(f"✓ Written {path.name}")
    return path


class Runner:
    """Run the commands of one project config, sharing solver, cache and results"""

    def __init__(self, config, use_cache=True, cache=None):
        self.config = config
        self.output_dir = Path(config.output_dir)
        self.cache = cache or ModeCache(cache_root(config.cache_dir), enabled=use_cache)
        self.solver = ModeSolver(config.library, config.solver, self.cache)
        self.csv = CsvWriter(self.output_dir, config.config_hash)
        self.charts = ChartGenerator(self.output_dir)
        self.measurements = {}
        self._dispersion = None
        self._device = None
        self._thermal = None

    # ----- shared pieces -----

    def header(self):
        return {"tool": TOOL_NAME, "version": VERSION, "config_hash": self.config.config_hash}

    def _design_wavelength(self):
        if self.config.design_wavelength is None:
            raise ConfigError("design_wavelength is required for this command")
        return self.config.design_wavelength

    def dispersion(self):
        """Modal dispersion fitted from solved anchors, solved once per run"""
        if self._dispersion is None:
            cfg = self.config
            cfg.require("dispersion_band")
            print("\n=== Mode dispersion ===")
            self._dispersion = ModeDispersion.from_solver(
                self.solver,
                cfg.cross_section,
                cfg.grid,
                cfg.temperature,
                cfg.dispersion_band,
                anchors=cfg.anchors,
                workers=cfg.workers,
            )
        return self._dispersion

    def device(self):
        """QpmDevice with the configured or designed poling period"""
        if self._device is None:
            cfg = self.config
            cfg.require("device")
            period = cfg.device.poling_period
            if period is None:
                period = design_poling_period(self.dispersion(), cfg.device.design_wavelength)
                if period is None:
                    raise SolverError(
                        "anomalous modal dispersion: no poling period",
                        {"wavelength_um": cfg.device.design_wavelength},
                    )
                print(
                    f"✓ Poling period designed at {cfg.device.design_wavelength:.4f} um: "
                    f"{period:.4f} um"
                )
            self._device = cfg.build_device(period)
        return self._device

    def cache_stats(self):
        stats = self.cache.stats()
        stats["solves"] = self.solver.solve_count
        return stats

    def _d33(self):
        cfg = self.config
        if cfg.device is not None and cfg.device.d33 is not None:
            return cfg.device.d33
        d33 = cfg.library.resolve(cfg.cross_section.core, "quasi-TE").d33
        if d33 is None:
            raise ConfigError(f"material {cfg.cross_section.core} has no d33")
        return d33

    # ----- commands -----

    def cmd_design(self):
        """Mode pair, poling period, overlap and efficiency at the design wavelength"""
        cfg = self.config
        if cfg.grid.nx == 1:
            return self._slab_design()

        wl = self._design_wavelength()
        print("\n=== Mode solving ===")
        fund, sh = solve_mode_pair(
            self.solver, cfg.cross_section, cfg.grid, wl, cfg.temperature, workers=cfg.workers
        )
        period = poling_period_from_indices(sh.n_eff, fund.n_eff, wl)
        overlap = mode_overlap(sh, fund)
        duty = cfg.device.duty_cycle if cfg.device is not None else 0.5
        eta = normalized_shg_efficiency(fund, sh, self._d33(), duty)

        self.csv.write(field_frame(fund), "mode_fundamental.csv")
        self.csv.write(field_frame(sh), "mode_harmonic.csv")

        report = dict(
            self.header(),
            cross_section=asdict(cfg.cross_section),
            grid={"dx_nm": cfg.grid.dx, "dz_nm": cfg.grid.dz, "shape": list(cfg.grid.shape)},
            wavelength_um=wl,
            temperature_c=cfg.temperature,
            n_eff_fundamental=fund.n_eff,
            n_eff_harmonic=sh.n_eff,
            residual_fundamental=fund.residual,
            residual_harmonic=sh.residual,
            poling_period_um=period,
            overlap_percent=overlap.percent,
            overlap_factor_per_m=overlap.factor,
            eta_percent_per_w_cm2=eta,
        )

        if "top_width" in cfg.sweeps:
            print("\n=== Top-width scan ===")
            scan = scan_top_width(
                self.solver,
                cfg.cross_section,
                cfg.sweeps["top_width"],
                (cfg.grid.dx, cfg.grid.dz, cfg.grid.margin),
                wl,
                cfg.temperature,
                self._d33(),
                duty,
                min_period=cfg.min_poling_period,
                workers=cfg.workers,
            )
            self.csv.write(scan, "top_width_scan.csv")
            report["top_width_scan"] = "top_width_scan.csv"

        _write_json(self.output_dir / "design_report.json", report)
        self.measurements.update(
            poling_period_um=period,
            overlap_percent=overlap.percent,
            eta_norm=eta,
        )
        print(
            f"n_eff {fund.n_eff:.6f} @ {wl * 1e3:.1f} nm, {sh.n_eff:.6f} @ {wl * 5e2:.1f} nm\n"
            f"poling period {'none (anomalous)' if period is None else f'{period:.4f} um'}\n"
            f"overlap {overlap.percent:.2f} %\n"
            f"eta_norm {eta:.0f} %/W/cm2"
        )
        return report

    def _slab_design(self):
        """Translation-invariant preset: compare with the analytic slab"""
        cfg = self.config
        cs = cfg.cross_section
        wl = self._design_wavelength()
        if cs.substrate != cs.cladding:
            raise ConfigError("the slab comparison needs a symmetric slab (substrate = cladding)")
        print("\n=== Slab check ===")
        n_core = float(
            refractive_index(cfg.library.resolve(cs.core), wl, cfg.temperature)
        )
        n_clad = float(
            refractive_index(cfg.library.resolve(cs.cladding), wl, cfg.temperature)
        )
        mode = self.solver.fundamental(cs, cfg.grid, wl, cfg.temperature)
        if mode is None:
            raise SolverError("no guided slab mode", {"wavelength_um": wl})
        analytic = slab_effective_index(cs.film_thickness, n_core, n_clad, wl)
        if analytic is None:
            raise SolverError("analytic slab mode is cut off", {"wavelength_um": wl})
        error = abs(mode.n_eff - analytic)
        report = dict(
            self.header(),
            wavelength_um=wl,
            thickness_nm=cs.film_thickness,
            n_core=n_core,
            n_clad=n_clad,
            grid_dz_nm=cfg.grid.dz,
            n_eff_solver=mode.n_eff,
            n_eff_analytic=analytic,
            abs_error=error,
        )
        _write_json(self.output_dir / "slab_report.json", report)
        self.measurements["slab_neff_error"] = error
        print(f"slab n_eff {mode.n_eff:.6f} (solver) vs {analytic:.6f} (analytic), |dn| {error:.2e}")
        return report

    def cmd_tune(self):
        cfg = self.config
        cfg.require("sweeps")
        if "wavelength" not in cfg.sweeps:
            raise ConfigError("sweeps.wavelength is required for tune")
        disp = self.dispersion()
        device = self.device()
        print("\n=== Tuning curve ===")

        curve = tuning_curve(device, disp, cfg.sweeps["wavelength"], with_fringes=False)
        path = self.csv.write(curve.to_frame(), "tuning.csv")
        self.charts.tuning_chart(path.name)

        analytic = analytic_fwhm(device, disp, curve.peak_location)
        fwhm_error = None if curve.fwhm is None else abs(curve.fwhm - analytic) / analytic
        if curve.fwhm is None:
            print(
                f"  ⚠ FWHM unresolved: sweep narrower than the analytic FWHM "
                f"of {analytic * 1e3:.3f} nm"
            )
        pump_nm = spdc_pump_wavelength(device, disp, cfg.sweeps["wavelength"])
        summary = dict(
            self.header(),
            poling_period_um=device.poling_period,
            peak_nm=curve.peak_location * 1e3,
            peak_value=curve.peak_value,
            fwhm_nm=None if curve.fwhm is None else curve.fwhm * 1e3,
            fwhm_resolved=curve.fwhm is not None,
            analytic_fwhm_nm=analytic * 1e3,
            fwhm_relative_error=fwhm_error,
            spdc_pump_nm=pump_nm,
        )

        fsr_error = None
        if cfg.fringes:
            peak = curve.peak_location
            n = int(round(2 * FRINGE_HALF_SPAN_UM / FRINGE_STEP_UM)) + 1
            fine = np.linspace(peak - FRINGE_HALF_SPAN_UM, peak + FRINGE_HALF_SPAN_UM, n)
            fringed = tuning_curve(device, disp, fine, with_fringes=True)
            path = self.csv.write(fringed.to_frame(), "tuning_fringes.csv")
            self.charts.tuning_chart(path.name)
            spacing = fringe_period(fringed.axis, fringed.values)
            n_g = disp.harmonic.group_index(peak / 2)
            expected = expected_fsr(peak / 2, n_g, device.length_um)
            if spacing is None:
                print("  ⚠ No fringes resolved around the tuning peak")
            else:
                # fringes repeat in SH wavelength, which moves at half the fundamental step
                fsr_error = abs(spacing / 2 - expected) / expected
            summary.update(
                fringe_spacing_nm=None if spacing is None else spacing * 1e3,
                expected_sh_fsr_nm=expected * 1e3,
                harmonic_group_index=n_g,
                fsr_relative_error=fsr_error,
            )

        if "temperature" in cfg.sweeps:
            summary.update(self._temperature_tuning(device))

        _write_json(self.output_dir / "tune_summary.json", summary)
        self.measurements.update(
            tuning_peak=curve.peak_value,
            tuning_fwhm_error=fwhm_error,
            fsr_error=fsr_error,
        )
        print(
            f"peak {summary['peak_nm']:.3f} nm, FWHM "
            f"{'unresolved' if curve.fwhm is None else f'{curve.fwhm * 1e3:.3f} nm'} "
            f"(analytic {analytic * 1e3:.3f} nm)"
        )
        return summary

    def thermal_dispersion(self):
        """Anchor indices solved at THERMAL_NODES temperatures spanning the temperature sweep"""
        if self._thermal is None:
            cfg = self.config
            cfg.require("dispersion_band")
            temps = np.asarray(cfg.sweeps["temperature"], dtype=float)
            count = min(THERMAL_NODES, len(np.unique(temps)))
            nodes = np.linspace(temps.min(), temps.max(), count)
            self._thermal = ThermalDispersion.from_solver(
                self.solver,
                cfg.cross_section,
                cfg.grid,
                cfg.dispersion_band,
                nodes,
                anchors=cfg.anchors,
                workers=cfg.workers,
            )
        return self._thermal

    def _temperature_tuning(self, device):
        """Fixed-wavelength temperature curve and phase-matching peak per temperature"""
        cfg = self.config
        wl = self._design_wavelength()
        temps = np.asarray(cfg.sweeps["temperature"], dtype=float)
        thermal = self.thermal_dispersion()

        curve = temperature_tuning_curve(
            device, wl, temps, lambda t: thermal.at(t).index_pair(wl)
        )
        path = self.csv.write(curve.to_frame(), "tuning_temperature.csv")
        self.charts.tuning_chart(path.name, axis_kind="temperature")

        peaks = peak_wavelength_vs_temperature(
            device, thermal.at, temps, cfg.sweeps["wavelength"]
        )
        path = self.csv.write(peaks, "tuning_peak_vs_temperature.csv")
        self.charts.peak_shift_chart(path.name)
        finite = peaks.dropna(subset=["peak_nm"])
        shift = None
        if len(finite) >= 2:
            shift = float(np.polyfit(finite["temperature_c"], finite["peak_nm"], 1)[0])
        monotone = is_monotone(peaks["peak_nm"])
        if monotone:
            print(f"✓ Peak shift {shift:.4f} nm/C, monotone over {temps.min():g}-{temps.max():g} C")
        else:
            print("  ⚠ Phase-matching peak not monotone in temperature")
        return dict(
            temperature_peak_c=curve.peak_location,
            peak_shift_nm_per_c=shift,
            peak_monotone=monotone,
        )

    def cmd_dfg(self):
        cfg = self.config
        if "signal" not in cfg.sweeps:
            raise ConfigError("sweeps.signal is required for dfg")
        disp = self.dispersion()
        device = self.device()
        print("\n=== DFG spectrum ===")
        pump = cfg.dfg_pump
        if pump is None:
            if "wavelength" not in cfg.sweeps:
                raise ConfigError("dfg.pump_wavelength or sweeps.wavelength is required for dfg")
            pump_nm = spdc_pump_wavelength(device, disp, cfg.sweeps["wavelength"])
            if pump_nm is None:
                raise ConfigError("dfg.pump_wavelength not set and no SHG peak to derive it")
            pump = pump_nm / 1e3

        signal = cfg.sweeps["signal"]
        spectrum = dfg_spectrum(device, disp, pump, signal)
        path = self.csv.write(spectrum.to_frame(), "dfg.csv")
        self.charts.dfg_chart(path.name)
        symmetry = dfg_symmetry_error(device, disp, pump, signal)

        summary = dict(
            self.header(),
            pump_nm=pump * 1e3,
            bandwidth_thz=spectrum.bandwidth_thz,
            bandwidth_limited=spectrum.bandwidth_limited,
            min_normalized_efficiency=float(spectrum.values.min()),
            symmetry_error=symmetry,
        )
        _write_json(self.output_dir / "dfg_summary.json", summary)
        self.measurements.update(dfg_bandwidth_thz=spectrum.bandwidth_thz, dfg_symmetry_error=symmetry)
        print(
            f"DFG 3-dB bandwidth {'>' if spectrum.bandwidth_limited else ''}"
            f"{spectrum.bandwidth_thz:.2f} THz at pump {pump * 1e3:.2f} nm"
        )
        return summary

    def cmd_pairs(self):
        cfg = self.config
        cfg.require("pairs")
        if "pump_power" not in cfg.sweeps:
            raise ConfigError("sweeps.pump_power is required for pairs")
        exp = cfg.pairs
        powers = cfg.sweeps["pump_power"]
        print("\n=== Pair statistics ===")

        mc = None
        if cfg.monte_carlo_gates:
            mc = {"n_gates": cfg.monte_carlo_gates, "seed": cfg.seed, "workers": cfg.workers}
        table = car_sweep(exp, powers, mc)
        path = self.csv.write(table, "pairs_car.csv")
        self.charts.car_chart(path.name)

        summary = dict(
            self.header(),
            coincidence_slope=loglog_slope(table["pump_power_mw"], table["coincidences_hz"]),
            accidental_slope=loglog_slope(table["pump_power_mw"], table["accidentals_hz"]),
            car_identity_error=self._car_identity_error(exp, powers),
        )
        nominal = expected_counts(exp)
        summary.update(
            nominal_mean_pairs_per_gate=nominal.mean_pairs_per_gate,
            nominal_car=nominal.car,
        )
        if mc:
            summary["mc_deviation_sigma"] = self._mc_deviation(table)

        if cfg.channel_grid is not None:
            summary.update(self._channel_matrix(exp))

        _write_json(self.output_dir / "pairs_summary.json", summary)
        self.measurements.update(
            {k: summary.get(k) for k in (
                "coincidence_slope",
                "accidental_slope",
                "car_identity_error",
                "mc_deviation_sigma",
                "channel_offdiag_ratio",
                "channel_pairing_error_nm",
            )}
        )
        print(
            f"slopes: coincidences {summary['coincidence_slope']:.4f}, "
            f"accidentals {summary['accidental_slope']:.4f}; "
            f"CAR {nominal.car:.1f} at mu {nominal.mean_pairs_per_gate:.4g}"
        )
        return summary

    @staticmethod
    def _car_identity_error(exp, powers):
        """Largest |(CAR - 1)·µ - 1| over the sweep with the darks switched off"""
        dark_free = replace(exp, detector=replace(exp.detector, dark_signal=0.0, dark_idler=0.0))
        worst = 0.0
        for p in powers:
            r = expected_counts(dark_free.with_pump_power(float(p)))
            worst = max(worst, abs((r.car - 1) * r.mean_pairs_per_gate - 1))
        return worst

    @staticmethod
    def _mc_deviation(table):
        worst = 0.0
        for name in ("coincidences", "accidentals"):
            err = table[f"mc_{name}_err_hz"].to_numpy()
            diff = np.abs(table[f"mc_{name}_hz"].to_numpy() - table[f"{name}_hz"].to_numpy())
            ok = err > 0
            if ok.any():
                worst = max(worst, float(np.max(diff[ok] / err[ok])))
        return worst

    def _channel_matrix(self, exp):
        grid = self.config.channel_grid
        matrix = joint_channel_matrix(
            self.device(), self.dispersion(), grid.pump_wavelength, grid.signal, grid.idler, exp
        )
        self.csv.write(matrix, "pairs_channels.csv", index=True)

        values = matrix.to_numpy()
        n = min(values.shape)
        diagonal = np.diag(values[:n, :n])
        off = values.copy()
        off[np.arange(n), np.arange(n)] = 0.0
        ratio = float(off.max() / diagonal.min()) if diagonal.min() > 0 else float("inf")

        first = grid.signal[0].center_nm
        partner = idler_wavelength(grid.pump_wavelength * 1e3, first)
        best_col = int(np.argmax(values[0]))
        pairing_error = abs(grid.idler[best_col].center_nm - partner)
        return {
            "channel_offdiag_ratio": ratio,
            "channel_pairing_error_nm": pairing_error,
            "channel_first_signal_nm": first,
            "channel_first_idler_nm": partner,
        }

    def cmd_metrics(self):
        cfg = self.config
        cfg.require("metrics")
        m = cfg.metrics
        print("\n=== Device metrics ===")
        summary = dict(self.header())

        if m.measured_pump is not None and m.measured_sh is not None:
            cfg.require("device")
            table = cfg.device.facet_loss
            pump_w, sh_w = m.measured_pump * 1e-3, m.measured_sh * 1e-3
            if m.measured_on_chip:
                pump_on, sh_on = pump_w, sh_w
            else:
                pump_on = deembed_power(table, pump_w, 1, m.pump_band, "launched")
                sh_on = deembed_power(table, sh_w, 1, m.sh_band, "collected")
            length_cm = cfg.device.length / 10
            eta = efficiency_from_powers(sh_on, pump_on, length_cm)
            summary.update(
                pump_on_chip_mw=pump_on * 1e3,
                sh_on_chip_uw=sh_on * 1e6,
                pump_off_chip_mw=embed_power(table, pump_on, 1, m.pump_band, "launched") * 1e3,
                sh_off_chip_uw=embed_power(table, sh_on, 1, m.sh_band, "collected") * 1e6,
                eta_measured_percent_per_w_cm2=eta,
            )
            if m.reference_eta is not None:
                predicted = shg_power(m.reference_eta, pump_on, length_cm)
                summary["sh_from_reference_eta_uw"] = float(predicted) * 1e6
                self.measurements["shg_power_uw"] = float(predicted) * 1e6

        if m.intrinsic_q is not None:
            summary.update(self._ring_loss())

        _write_json(self.output_dir / "metrics.json", summary)
        for key in ("eta_measured_percent_per_w_cm2", "ring_loss_db_per_cm"):
            if key in summary:
                print(f"{key} {summary[key]:.4g}")
        return summary

    def _ring_loss(self):
        cfg = self.config
        m = cfg.metrics
        ring_wl = m.ring_wavelength
        if ring_wl is None:
            raise ConfigError("metrics.ring_wavelength is required with intrinsic_q")
        out = {"intrinsic_q": m.intrinsic_q, "ring_wavelength_nm": ring_wl * 1e3}

        n_g = m.group_index
        if n_g is None:
            if cfg.ring_cross_section is None:
                raise ConfigError("ring_cross_section or metrics.group_index is required")
            ring_grid = Grid.around(
                cfg.ring_cross_section, cfg.grid.dx, cfg.grid.dz, cfg.grid.margin
            )
            n_g = mode_group_index(
                self.solver, cfg.ring_cross_section, ring_grid, ring_wl, cfg.temperature,
                workers=cfg.workers,
            )
            if n_g is None:
                raise SolverError(
                    "ring mode cut off at the ring wavelength", {"wavelength_um": ring_wl}
                )
            out["group_index_source"] = "mode solver"
        else:
            out["group_index_source"] = "config"

        loss = q_to_loss(m.intrinsic_q, ring_wl, n_g)
        out.update(group_index=n_g, ring_loss_db_per_cm=loss)
        if cfg.device is not None:
            out["device_loss_db"] = propagation_loss_db(loss, cfg.device.length)
        if m.group_index_range is not None:
            low, high = m.group_index_range
            out["ring_loss_range_db_per_cm"] = [
                q_to_loss(m.intrinsic_q, ring_wl, low),
                q_to_loss(m.intrinsic_q, ring_wl, high),
            ]
            self.measurements.update(
                ring_loss_min_db_cm=out["ring_loss_range_db_per_cm"][0],
                ring_loss_max_db_cm=out["ring_loss_range_db_per_cm"][1],
            )
        return out


class PaperBundle:
    """All stages into one directory, with stage timings and an acceptance summary"""

    STAGES = ("modes", "design", "slab", "tune", "dfg", "pairs", "metrics")

    def __init__(self, config, use_cache=True, slab_config_path=None):
        self.config = config
        # the FSR criterion needs the fringed sweep
        self.config.fringes = True
        self.runner = Runner(config, use_cache=use_cache)
        self.slab_config_path = slab_config_path or CONFIG_DIR / SLAB_CONFIG_FILE
        self.stages = []
        self.error = None

    def _stage_modes(self):
        cfg = self.config
        solve_mode_pair(
            self.runner.solver, cfg.cross_section, cfg.grid, self.runner._design_wavelength(),
            cfg.temperature, workers=cfg.workers,
        )
        self.runner.dispersion()

    def _stage_slab(self):
        slab = load_project(
            self.slab_config_path,
            output_dir=self.runner.output_dir / "slab",
        )
        slab_runner = Runner(slab, cache=self.runner.cache)
        slab_runner.cmd_design()
        self.runner.measurements.update(slab_runner.measurements)

    def _run_stage(self, name):
        action = {
            "modes": self._stage_modes,
            "design": self.runner.cmd_design,
            "slab": self._stage_slab,
            "tune": self.runner.cmd_tune,
            "dfg": self.runner.cmd_dfg,
            "pairs": self.runner.cmd_pairs,
            "metrics": self.runner.cmd_metrics,
        }[name]
        print(f"\n=== Stage {name} ===")
        start = time.perf_counter()
        try:
            action()
        except QpmKitError as e:
            seconds = time.perf_counter() - start
            print(f"✗ Stage {name} failed: {e}")
            self.stages.append({"name": name, "ok": False, "seconds": seconds, "message": str(e)})
            self.error = e
            return False
        seconds = time.perf_counter() - start
        self.stages.append({"name": name, "ok": True, "seconds": seconds, "message": ""})
        print(f"✓ Stage {name} done in {seconds:.2f} s")
        return True

    def run(self):
        for name in self.STAGES:
            if not self._run_stage(name):
                break

        out = self.runner.output_dir
        validator = AcceptanceValidator(self.runner.measurements)
        results = validator.validate_all()
        ok = self.error is None and validator.overall_pass
        run_info = {
            "config_hash": self.config.config_hash,
            "stages": self.stages,
            "cache": self.runner.cache_stats(),
        }
        _write_json(out / "acceptance_summary.json", dict(validator.summary(), **run_info))
        SummaryExcelWriter(out / "acceptance_summary.xlsx", results, run_info).write_summary()
        _write_json(
            out / "bundle.json",
            dict(
                self.runner.header(),
                status="ok" if ok else "failed",
                measurements=self.runner.measurements,
                files=sorted(p.name for p in self.runner.csv.written),
                **run_info,
            ),
        )
        print(f"bundle {'PASSED' if ok else 'FAILED'}: {out}")
        for r in results:
            print(f"  [{r.criterion:2d}] {r.status:6s} {r.name}: {r.value}")
        if self.error is not None:
            raise self.error
        return ok


def run_command(command, config, use_cache=True):
    """Dispatch one CLI verb; returns the process exit status"""
    if command == "paper":
        ok = PaperBundle(config, use_cache=use_cache).run()
        return ExitCode.SUCCESS if ok else ExitCode.FAILURE
    runner = Runner(config, use_cache=use_cache)
    getattr(runner, f"cmd_{command}")()
    log.debug("Cache: %s", runner.cache_stats())
    return ExitCode.SUCCESS
