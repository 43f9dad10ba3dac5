"""Transformation of raw config JSON into typed project objects"""

import logging
from dataclasses import dataclass, field
from pathlib import Path
from typing import Dict, List, Optional, Tuple

import numpy as np

from config.settings import (
    DEFAULT_GRID_NM,
    DEFAULT_MARGIN_NM,
    MC_MIN_GATES,
    UNIT_SCHEMA,
)
from metrics.calculator import FacetLossTable
from modes.geometry import CrossSection, Grid
from modes.solver import SolverSettings
from pairs.simulator import Channel, Detector, PairExperiment
from qpm.engine import QpmDevice, idler_wavelength
from utils.exceptions import ConfigError
from utils.helpers import content_hash, parse_quantity, sweep_values

log = logging.getLogger(__name__)

HASH_LENGTH = 12


@dataclass
class DeviceSpec:
    poling_period: Optional[float]  # µm, None = designed at design_wavelength
    design_wavelength: float  # µm
    length: float  # mm
    temperature: float
    duty_cycle: float
    facet_reflectivity: Optional[float]
    d33: Optional[float]
    facet_loss: FacetLossTable


@dataclass
class ChannelGrid:
    pump_wavelength: float  # µm
    signal: List[Channel]
    idler: List[Channel]


@dataclass
class MetricsSpec:
    measured_pump: Optional[float] = None  # mW
    measured_sh: Optional[float] = None  # mW
    measured_on_chip: bool = True
    intrinsic_q: Optional[float] = None
    ring_wavelength: Optional[float] = None  # µm
    group_index: Optional[float] = None
    group_index_range: Optional[Tuple[float, float]] = None
    reference_eta: Optional[float] = None  # %/W/cm²
    pump_band: float = 1550.0  # nm, facet-loss table key
    sh_band: float = 775.0


@dataclass
class ProjectConfig:
    name: str
    config_hash: str
    library: object
    cross_section: CrossSection
    grid: Grid
    solver: SolverSettings
    device: Optional[DeviceSpec] = None
    ring_cross_section: Optional[CrossSection] = None
    design_wavelength: Optional[float] = None  # µm
    temperature: float = 25.0
    dispersion_band: Optional[Tuple[float, float]] = None  # µm
    anchors: int = 5
    sweeps: Dict[str, np.ndarray] = field(default_factory=dict)
    min_poling_period: Optional[float] = None  # µm, for the top-width scan
    dfg_pump: Optional[float] = None  # µm
    pairs: Optional[PairExperiment] = None
    pair_powers_log: bool = True
    monte_carlo_gates: Optional[int] = None
    channel_grid: Optional[ChannelGrid] = None
    metrics: MetricsSpec = field(default_factory=MetricsSpec)
    output_dir: Path = Path("output")
    cache_dir: Optional[Path] = None
    seed: int = 0
    workers: int = 1
    fringes: bool = False

    def require(self, *names):
        for name in names:
            if getattr(self, name) in (None, {}, []):
                raise ConfigError(f"config section '{name}' is required for this command")

    def build_device(self, poling_period) -> QpmDevice:
        self.require("device")
        spec = self.device
        return QpmDevice(
            cross_section=self.cross_section,
            poling_period=poling_period,
            length=spec.length,
            temperature=spec.temperature,
            duty_cycle=spec.duty_cycle,
            facet_reflectivity=spec.facet_reflectivity,
            facet_loss=spec.facet_loss,
        )


class ConfigTransformer:
    """Turn the loaded JSON into a ProjectConfig, checking every unit"""

    def __init__(self, project_loader):
        self.loader = project_loader
        self.raw = project_loader.raw_config or {}

    def _q(self, section, key, path, default=None, required=True):
        if key not in section or section[key] is None:
            if default is not None or not required:
                return default
            raise ConfigError(f"missing field {path}")
        unit = UNIT_SCHEMA.get(path)
        if unit is None:
            wildcard = path.rsplit(".", 1)[0] + ".*"
            unit = UNIT_SCHEMA.get(wildcard)
        if unit is None:
            raise ConfigError(f"no unit schema for field {path}")
        return parse_quantity(section[key], unit, path)

    def _section(self, name, required=False):
        section = self.raw.get(name)
        if section is None:
            if required:
                raise ConfigError(f"missing config section '{name}'")
            return None
        if not isinstance(section, dict):
            raise ConfigError(f"config section '{name}' must be an object")
        return section

    def transform_all(self) -> ProjectConfig:
        log.info("=== Config transformation ===")
        cross_section = self._cross_section("cross_section", required=True)
        ring = self._cross_section("ring_cross_section")
        config = ProjectConfig(
            name=self.raw.get("name", "project"),
            config_hash=content_hash(self.raw, self.loader.raw_materials)[:HASH_LENGTH],
            library=self.loader.library,
            cross_section=cross_section,
            ring_cross_section=ring,
            grid=self._grid(cross_section),
            solver=self._solver(),
        )
        self._device(config)
        self._operating_point(config)
        self._dispersion(config)
        self._sweeps(config)
        self._pairs(config)
        self._metrics(config)
        self._run(config)
        log.info("✓ Config %s ready (hash %s)", config.name, config.config_hash)
        return config

    def _cross_section(self, name, required=False):
        s = self._section(name, required)
        if s is None:
            return None
        return CrossSection(
            film_thickness=self._q(s, "film_thickness", f"{name}.film_thickness"),
            top_width=self._q(s, "top_width", f"{name}.top_width"),
            sidewall_angle=self._q(s, "sidewall_angle", f"{name}.sidewall_angle", 90.0),
            slab_thickness=self._q(s, "slab_thickness", f"{name}.slab_thickness", 0.0),
            core=s.get("core", "LN_congruent"),
            substrate=s.get("substrate", "SiO2"),
            cladding=s.get("cladding", "SiO2"),
        )

    def _grid(self, cs):
        g = self._section("grid") or {}
        dx = self._q(g, "dx", "grid.dx", DEFAULT_GRID_NM)
        dz = self._q(g, "dz", "grid.dz", DEFAULT_GRID_NM)
        margin = self._q(g, "margin", "grid.margin", DEFAULT_MARGIN_NM)
        return Grid.around(cs, dx, dz, margin, invariant_x=bool(g.get("translation_invariant_x")))

    def _solver(self):
        s = self._section("solver") or {}
        defaults = SolverSettings()
        return SolverSettings(
            tolerance=float(s.get("tolerance", defaults.tolerance)),
            residual_tolerance=float(s.get("residual_tolerance", defaults.residual_tolerance)),
            max_iterations=int(s.get("max_iterations", defaults.max_iterations)),
        )

    def _device(self, config):
        d = self._section("device")
        if d is None:
            return
        period = d.get("poling_period", "auto")
        reflectivity = d.get("facet_reflectivity", "fresnel")
        losses = d.get("facet_loss") or {}
        config.device = DeviceSpec(
            poling_period=None
            if period == "auto"
            else self._q(d, "poling_period", "device.poling_period"),
            design_wavelength=self._q(d, "design_wavelength", "device.design_wavelength") / 1e3,
            length=self._q(d, "length", "device.length"),
            temperature=self._q(d, "temperature", "device.temperature", 25.0),
            duty_cycle=self._q(d, "duty_cycle", "device.duty_cycle", 0.5),
            facet_reflectivity=None
            if reflectivity in (None, "fresnel")
            else self._q(d, "facet_reflectivity", "device.facet_reflectivity"),
            d33=self._q(d, "d33", "device.d33", required=False),
            facet_loss=FacetLossTable(
                {
                    band: self._q(losses, band, f"device.facet_loss.{band}")
                    for band in losses
                }
            ),
        )

    def _operating_point(self, config):
        # a device block wins over the top-level fields
        if config.device is not None:
            config.design_wavelength = config.device.design_wavelength
            config.temperature = config.device.temperature
            return
        wavelength = self._q(self.raw, "design_wavelength", "design_wavelength", required=False)
        config.design_wavelength = None if wavelength is None else wavelength / 1e3
        config.temperature = self._q(self.raw, "temperature", "temperature", 25.0)

    def _dispersion(self, config):
        d = self._section("dispersion")
        if d is None:
            return
        band = d.get("fundamental_band") or {}
        config.dispersion_band = (
            self._q(band, "start", "dispersion.fundamental_band.start") / 1e3,
            self._q(band, "stop", "dispersion.fundamental_band.stop") / 1e3,
        )
        config.anchors = int(self._q(d, "anchors", "dispersion.anchors", 5))

    def _sweep(self, s, name, scale=1.0):
        block = s.get(name)
        if block is None:
            return None
        path = f"sweeps.{name}"
        values = sweep_values(
            self._q(block, "start", f"{path}.start"),
            self._q(block, "stop", f"{path}.stop"),
            self._q(block, "points", f"{path}.points"),
            log=bool(block.get("log", False)),
        )
        return values * scale

    def _sweeps(self, config):
        s = self._section("sweeps") or {}
        for name, scale in (
            ("wavelength", 1e-3),
            ("signal", 1e-3),
            ("temperature", 1.0),
            ("pump_power", 1.0),
            ("top_width", 1.0),
        ):
            values = self._sweep(s, name, scale)
            if values is not None:
                config.sweeps[name] = values
        if "top_width" in s:
            config.min_poling_period = self._q(
                s["top_width"], "min_poling_period", "sweeps.top_width.min_poling_period",
                required=False,
            )
        if "pump_power" in s:
            config.pair_powers_log = bool(s["pump_power"].get("log", True))
        dfg = self._section("dfg")
        if dfg is not None:
            config.dfg_pump = self._q(dfg, "pump_wavelength", "dfg.pump_wavelength") / 1e3

    def _channel(self, block, path):
        return Channel(
            center_nm=self._q(block, "center", f"{path}.center"),
            width_ghz=self._q(block, "width", f"{path}.width"),
        )

    def _pairs(self, config):
        p = self._section("pairs")
        if p is None:
            return
        det = p.get("detector") or {}
        detector = Detector(
            gate_rate=self._q(det, "gate_rate", "pairs.detector.gate_rate"),
            gate_width=self._q(det, "gate_width", "pairs.detector.gate_width"),
            efficiency_signal=self._q(det, "efficiency_signal", "pairs.detector.efficiency_signal"),
            efficiency_idler=self._q(det, "efficiency_idler", "pairs.detector.efficiency_idler"),
            dark_signal=self._q(det, "dark_signal", "pairs.detector.dark_signal", 0.0),
            dark_idler=self._q(det, "dark_idler", "pairs.detector.dark_idler", 0.0),
        )
        config.pairs = PairExperiment(
            brightness=self._q(p, "brightness", "pairs.brightness"),
            pump_power=self._q(p, "pump_power", "pairs.pump_power"),
            channel_signal=self._channel(p.get("channel_signal") or {}, "pairs.channel_signal"),
            channel_idler=self._channel(p.get("channel_idler") or {}, "pairs.channel_idler"),
            detector=detector,
            collection_signal=self._q(p, "collection_signal", "pairs.collection_signal", 1.0),
            collection_idler=self._q(p, "collection_idler", "pairs.collection_idler", 1.0),
        )

        mc = p.get("monte_carlo")
        if mc:
            gates = int(self._q(mc, "gates", "pairs.monte_carlo.gates"))
            if gates < MC_MIN_GATES:
                raise ConfigError(f"pairs.monte_carlo.gates must be >= {MC_MIN_GATES}")
            config.monte_carlo_gates = gates

        grid = p.get("channel_grid")
        if grid:
            pump = self._q(p, "pump_wavelength", "pairs.pump_wavelength") / 1e3
            width = self._q(grid, "width", "pairs.channel_grid.width")
            signal_nm = [
                parse_quantity(v, "nm", "pairs.channel_grid.signal_centers")
                for v in grid.get("signal_centers", [])
            ]
            idler_spec = grid.get("idler_centers", "auto")
            if idler_spec == "auto":
                idler_nm = [idler_wavelength(pump * 1e3, s) for s in signal_nm]
            else:
                idler_nm = [
                    parse_quantity(v, "nm", "pairs.channel_grid.idler_centers")
                    for v in idler_spec
                ]
            config.channel_grid = ChannelGrid(
                pump_wavelength=pump,
                signal=[Channel(s, width) for s in signal_nm],
                idler=[Channel(i, width) for i in idler_nm],
            )

    def _metrics(self, config):
        m = self._section("metrics")
        if m is None:
            return
        rng = m.get("group_index_range")
        ring_wl = self._q(m, "ring_wavelength", "metrics.ring_wavelength", required=False)
        config.metrics = MetricsSpec(
            measured_pump=self._q(m, "measured_pump", "metrics.measured_pump", required=False),
            measured_sh=self._q(m, "measured_sh", "metrics.measured_sh", required=False),
            reference_eta=self._q(m, "reference_eta", "metrics.reference_eta", required=False),
            pump_band=self._q(m, "pump_band", "metrics.pump_band", 1550.0),
            sh_band=self._q(m, "sh_band", "metrics.sh_band", 775.0),
            measured_on_chip=m.get("measured_at", "on_chip") == "on_chip",
            intrinsic_q=self._q(m, "intrinsic_q", "metrics.intrinsic_q", required=False),
            ring_wavelength=None if ring_wl is None else ring_wl / 1e3,
            group_index=self._q(m, "group_index", "metrics.group_index", required=False),
            group_index_range=None
            if rng is None
            else tuple(
                parse_quantity(v, "count", "metrics.group_index_range") for v in rng
            ),
        )

    def _run(self, config):
        r = self._section("run") or {}
        config.output_dir = Path(r.get("output_dir", "output"))
        config.cache_dir = Path(r["cache_dir"]) if r.get("cache_dir") else None
        config.seed = int(r.get("seed", 0))
        config.workers = max(1, int(r.get("workers", 1)))
        config.fringes = bool(r.get("fringes", False))
