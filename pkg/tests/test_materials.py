import math

import numpy as np
import pytest

from materials.dispersion import (
    DispersionModel,
    MaterialLibrary,
    effective_nonlinearity,
    group_index,
    refractive_index,
)
from utils.exceptions import ConfigError, RangeError


def test_unit_index_air(library):
    assert refractive_index(library.resolve("air"), 1.55, 25.0) == 1.0


def test_lithium_niobate_extraordinary_index(library):
    n = refractive_index(library.resolve("LN_congruent_e"), 1.55, 25.0)
    assert n == pytest.approx(2.138, abs=2e-3)


def test_fused_silica_index(library):
    n = refractive_index(library.resolve("SiO2"), 1.55, 25.0)
    assert n == pytest.approx(1.444, abs=1e-3)


def test_alias_resolves_by_polarization(library):
    assert library.resolve("LN_congruent", "quasi-TE").name == "LN_congruent_e"
    assert library.resolve("LN_congruent", "quasi-TM").name == "LN_congruent_o"


def test_array_input_matches_scalar(library):
    model = library.resolve("LN_congruent_e")
    wl = np.array([0.775, 1.55])
    values = refractive_index(model, wl, 34.5)
    assert values[1] == refractive_index(model, 1.55, 34.5)
    assert values[0] > values[1]


def test_index_is_reproducible(library):
    model = library.resolve("LN_congruent_e")
    assert refractive_index(model, 1.532, 34.5) == refractive_index(model, 1.532, 34.5)


def test_index_rises_with_temperature(library):
    model = library.resolve("LN_congruent_e")
    assert refractive_index(model, 1.55, 60.0) > refractive_index(model, 1.55, 25.0)


def test_wavelength_outside_window_names_axis(library):
    with pytest.raises(RangeError) as info:
        refractive_index(library.resolve("LN_congruent_e"), 0.3, 25.0)
    assert info.value.axis == "wavelength"


def test_temperature_outside_window_names_axis(library):
    with pytest.raises(RangeError) as info:
        refractive_index(library.resolve("LN_congruent_e"), 1.55, 10.0)
    assert info.value.axis == "temperature"


def test_group_index_of_dispersionless_model():
    model = DispersionModel("flat", "constant", (2.0,))
    assert group_index(model, 1.55, 25.0) == pytest.approx(2.0, abs=1e-12)


def test_group_index_exceeds_phase_index_for_normal_dispersion(library):
    model = library.resolve("LN_congruent_e")
    assert group_index(model, 1.55, 25.0) > refractive_index(model, 1.55, 25.0)


def test_group_index_at_window_edge_raises():
    model = DispersionModel("flat", "constant", (2.0,), valid_wavelength_range=(1.0, 2.0))
    with pytest.raises(RangeError):
        group_index(model, 1.0005, 25.0)


def test_effective_nonlinearity():
    assert effective_nonlinearity(27.0) == pytest.approx(2 / math.pi * 27.0)
    assert effective_nonlinearity(27.0, 0.3) < effective_nonlinearity(27.0, 0.5)


def test_wrong_coefficient_count_is_config_error():
    with pytest.raises(ConfigError):
        DispersionModel("bad", "temperature_sellmeier", (1.0, 2.0))


def test_unknown_material_is_config_error(library):
    with pytest.raises(ConfigError, match="unknown material"):
        library.resolve("unobtainium")


def test_duplicate_material_is_config_error():
    record = {
        "name": "x",
        "form": "constant",
        "coefficients": [1.5],
        "valid_wavelength_um": [0.2, 20.0],
        "valid_temperature_c": [-50.0, 250.0],
    }
    with pytest.raises(ConfigError, match="duplicate"):
        MaterialLibrary.from_records({"materials": [record, record]})


def test_missing_record_field_is_config_error():
    with pytest.raises(ConfigError, match="missing field"):
        MaterialLibrary.from_records({"materials": [{"name": "x", "form": "constant"}]})
