import json
from pathlib import Path

import pytest

from config.settings import CONFIG_DIR, MATERIALS_FILE
from data.loader import ProjectLoader
from materials.dispersion import MaterialLibrary
from modes.geometry import CrossSection
from pairs.simulator import Channel, Detector, PairExperiment
from qpm.dispersion import ModeDispersion
from qpm.engine import QpmDevice


def _constant(name, n):
    return {
        "name": name,
        "form": "constant",
        "coefficients": [n],
        "valid_wavelength_um": [0.2, 20.0],
        "valid_temperature_c": [-50.0, 250.0],
    }


@pytest.fixture(scope="session")
def library():
    loader = ProjectLoader()
    return loader.load_materials_file(CONFIG_DIR / MATERIALS_FILE)


@pytest.fixture
def toy_library():
    return MaterialLibrary.from_records(
        {"materials": [_constant("core", 2.14), _constant("clad", 1.44)]}, source="toy"
    )


@pytest.fixture
def toy_dispersion():
    """n_ω = 1.9 and n_2ω = 2.0 everywhere"""
    return ModeDispersion.constant(1.9, 2.0)


@pytest.fixture
def toy_device():
    """4 mm device poled to phase-match SHG of the toy dispersion at 1.55 µm"""
    return QpmDevice(
        cross_section=CrossSection(500.0, 1850.0, 67.0),
        poling_period=7.75,
        length=4.0,
    )


@pytest.fixture
def make_experiment():
    def make(brightness=69e6, pump_power=0.0074, efficiency=0.15, dark=0.0,
             gate_rate=100e6, collection=1.0, width_ghz=200.0):
        return PairExperiment(
            brightness=brightness,
            pump_power=pump_power,
            channel_signal=Channel(1530.0, width_ghz),
            channel_idler=Channel(1540.03, width_ghz),
            detector=Detector(
                gate_rate=gate_rate,
                gate_width=1e-9,
                efficiency_signal=efficiency,
                efficiency_idler=efficiency,
                dark_signal=dark,
                dark_idler=dark,
            ),
            collection_signal=collection,
            collection_idler=collection,
        )

    return make


@pytest.fixture
def write_config(tmp_path):
    def write(payload, name="project.json"):
        path = Path(tmp_path) / name
        path.write_text(json.dumps(payload), encoding="utf-8")
        return path

    return write
