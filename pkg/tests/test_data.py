import json

import pytest

from config.settings import CONFIG_DIR
from data.loader import ProjectLoader
from data.transformer import ConfigTransformer
from utils.exceptions import ConfigError
from utils.helpers import half_max_crossings, parse_quantity, sweep_values

MINIMAL = {
    "name": "minimal",
    "cross_section": {"film_thickness": "500 nm", "top_width": "1850 nm"},
}


def _transform(path):
    loader = ProjectLoader()
    loader.load_config_file(path)
    loader.load_materials_file()
    return ConfigTransformer(loader).transform_all()


@pytest.mark.parametrize(
    "value, unit, expected",
    [
        ("500 nm", "nm", 500.0),
        ("1.55 um", "nm", 1550.0),
        ("1.55 µm", "um", 1.55),
        ("4 mm", "mm", 4.0),
        ("34.5 C", "C", 34.5),
        ("300 K", "C", 26.85),
        ("70 %", "fraction", 0.7),
        (0.5, "fraction", 0.5),
        ("69 MHz/mW/nm", "Hz/mW/nm", 69e6),
        ("200 GHz", "GHz", 200.0),
        ("7.4 uW", "mW", 0.0074),
        ("2266 %/W/cm2", "%/W/cm2", 2266.0),
    ],
)
def test_parse_quantity(value, unit, expected):
    assert parse_quantity(value, unit) == pytest.approx(expected)


@pytest.mark.parametrize(
    "value, unit",
    [(500, "nm"), ("5 mW", "nm"), ("fast", "nm"), (True, "fraction"), ("20 F", "C")],
)
def test_parse_quantity_rejects(value, unit):
    with pytest.raises(ConfigError):
        parse_quantity(value, unit, "field")


def test_sweep_values():
    assert list(sweep_values(1.0, 2.0, 3)) == [1.0, 1.5, 2.0]
    assert sweep_values(1.0, 100.0, 3, log=True)[1] == pytest.approx(10.0)
    with pytest.raises(ConfigError):
        sweep_values(1.0, 2.0, 1)


def test_half_max_crossings():
    axis = [0.0, 1.0, 2.0, 3.0, 4.0]
    left, right = half_max_crossings(axis, [0.0, 0.5, 1.0, 0.5, 0.0])
    assert (left, right) == (1.0, 3.0)
    assert half_max_crossings(axis, [1.0, 0.9, 0.8, 0.2, 0.1]) == (None, 2.5)


def test_missing_config_file_is_config_error(tmp_path):
    with pytest.raises(ConfigError, match="not found"):
        ProjectLoader().load_config_file(tmp_path / "absent.json")


def test_invalid_json_is_config_error(tmp_path):
    path = tmp_path / "broken.json"
    path.write_text("{not json", encoding="utf-8")
    with pytest.raises(ConfigError, match="not valid JSON"):
        ProjectLoader().load_config_file(path)


def test_missing_material_file_is_config_error(write_config):
    loader = ProjectLoader()
    loader.load_config_file(write_config(dict(MINIMAL, materials="/nowhere/materials.json")))
    with pytest.raises(ConfigError, match="material file not found"):
        loader.load_materials_file()


def test_minimal_config_defaults(write_config):
    config = _transform(write_config(MINIMAL))
    assert config.cross_section.sidewall_angle == 90.0
    assert config.device is None
    assert config.temperature == 25.0
    assert config.design_wavelength is None
    assert len(config.config_hash) == 12
    with pytest.raises(ConfigError, match="required"):
        config.require("pairs")


def test_config_hash_follows_content(write_config):
    first = _transform(write_config(MINIMAL, "a.json"))
    again = _transform(write_config(MINIMAL, "b.json"))
    changed = _transform(write_config(dict(MINIMAL, name="other"), "c.json"))
    assert first.config_hash == again.config_hash
    assert changed.config_hash != first.config_hash


def test_field_without_unit_is_config_error(write_config):
    payload = {"cross_section": {"film_thickness": 500, "top_width": "1850 nm"}}
    with pytest.raises(ConfigError, match="cross_section.film_thickness"):
        _transform(write_config(payload))


def test_reference_device_config():
    config = _transform(CONFIG_DIR / "paper_device.json")
    assert config.design_wavelength == pytest.approx(1.532)
    assert config.temperature == pytest.approx(34.5)
    assert config.device.poling_period is None
    assert config.device.length == 4.0
    assert config.device.facet_loss.lookup(1550) == 4.3
    assert config.dispersion_band == pytest.approx((1.45, 1.65))
    assert len(config.sweeps["wavelength"]) == 5001
    assert config.sweeps["wavelength"][0] == pytest.approx(1.5)
    assert config.sweeps["pump_power"][-1] == pytest.approx(0.0074)
    assert config.min_poling_period == pytest.approx(3.5)
    assert config.dfg_pump == pytest.approx(0.766)
    assert config.pairs.brightness == pytest.approx(69e6)
    assert config.pairs.collection_signal == pytest.approx(0.7)
    assert config.monte_carlo_gates == 10_000_000
    assert config.channel_grid.idler[0].center_nm == pytest.approx(1540.03, abs=0.01)
    assert config.metrics.reference_eta == pytest.approx(2266.0)
    assert config.metrics.ring_wavelength == pytest.approx(1.6)
    assert config.metrics.group_index_range == (1.6, 2.4)
    assert config.seed == 20190101


def test_slab_preset_is_translation_invariant():
    config = _transform(CONFIG_DIR / "slab_check.json")
    assert config.grid.nx == 1
    assert config.library.resolve("slab_core").coefficients == (2.14,)
    assert config.design_wavelength == pytest.approx(1.55)


def test_explicit_period_and_reflectivity(write_config):
    payload = dict(
        MINIMAL,
        device={
            "poling_period": "4 um",
            "design_wavelength": "1550 nm",
            "length": "4 mm",
            "facet_reflectivity": "13 %",
        },
    )
    config = _transform(write_config(payload))
    assert config.device.poling_period == 4.0
    assert config.device.facet_reflectivity == pytest.approx(0.13)
    device = config.build_device(config.device.poling_period)
    assert device.length_um == 4000.0


def test_too_few_monte_carlo_gates_is_config_error(write_config):
    payload = json.loads((CONFIG_DIR / "paper_device.json").read_text(encoding="utf-8"))
    payload["pairs"]["monte_carlo"] = {"gates": 10}
    with pytest.raises(ConfigError, match="gates"):
        _transform(write_config(payload))
