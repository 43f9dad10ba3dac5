import math
from dataclasses import replace

import numpy as np
import pytest

from modes.geometry import CrossSection
from pairs.simulator import (
    Channel,
    Detector,
    brightness_from_rate,
    car_sweep,
    expected_counts,
    joint_channel_matrix,
    loglog_slope,
    mean_pairs_per_gate,
    monte_carlo_counts,
    pair_rate,
)
from qpm.engine import QpmDevice, idler_wavelength
from utils.exceptions import ConfigError, ContractViolation, ModelValidityError


def _with_mu(make_experiment, mu, efficiency=1.0, dark=0.0, gate_rate=1e6):
    """Experiment at 1 mW whose mean pairs per gate is `mu`"""
    width_nm = Channel(1530.0, 200.0).width_nm
    return make_experiment(
        brightness=mu * gate_rate / width_nm,
        pump_power=1.0,
        efficiency=efficiency,
        dark=dark,
        gate_rate=gate_rate,
    )


def test_channel_width_in_nm():
    assert Channel(1535.0, 200.0).width_nm == pytest.approx(1.572, abs=1e-3)


def test_reference_brightness_gives_sub_million_rate(make_experiment):
    rate = pair_rate(make_experiment(brightness=69e6, pump_power=0.0074))
    assert rate == pytest.approx(0.8e6, rel=0.03)


def test_brightness_inverts_pair_rate(make_experiment):
    exp = make_experiment()
    assert brightness_from_rate(pair_rate(exp), exp.pump_power, exp.channel_signal) == (
        pytest.approx(exp.brightness)
    )


def test_zero_pump_gives_zero_rate(make_experiment):
    assert pair_rate(make_experiment(pump_power=0.0)) == 0.0


def test_mismatched_channel_widths_are_contract_violation(make_experiment):
    exp = make_experiment()
    with pytest.raises(ContractViolation, match="widths differ"):
        pair_rate(replace(exp, channel_idler=Channel(1540.03, 100.0)))


def test_invalid_detector_is_config_error():
    with pytest.raises(ConfigError):
        Detector(gate_rate=1e6, gate_width=1e-9, efficiency_signal=1.5, efficiency_idler=0.1)


def test_lossless_counting_model(make_experiment):
    result = expected_counts(_with_mu(make_experiment, 0.01))
    gate_rate = 1e6
    assert result.mean_pairs_per_gate == pytest.approx(0.01)
    assert result.true_coincidences / gate_rate == pytest.approx(0.01)
    assert result.accidentals / gate_rate == pytest.approx(1e-4)
    assert result.car == pytest.approx(1 / 0.01 + 1)


def test_car_identity_without_darks(make_experiment):
    for mu in (1e-4, 1e-3, 0.05, 0.2):
        r = expected_counts(_with_mu(make_experiment, mu, efficiency=0.1))
        assert (r.car - 1) * r.mean_pairs_per_gate == pytest.approx(1.0, rel=1e-9)


def test_dark_counts_dominate_at_low_mu(make_experiment):
    r = expected_counts(_with_mu(make_experiment, 1e-9, efficiency=0.1, dark=1e-3))
    assert r.car == pytest.approx(1.0, abs=1e-3)


def test_mu_above_limit_is_model_validity_error(make_experiment):
    with pytest.raises(ModelValidityError):
        mean_pairs_per_gate(_with_mu(make_experiment, 0.6))


def test_monte_carlo_is_deterministic_for_a_seed(make_experiment):
    exp = _with_mu(make_experiment, 0.01, efficiency=0.3, dark=1e-3)
    first = monte_carlo_counts(exp, 200_000, seed=7)
    second = monte_carlo_counts(exp, 200_000, seed=7)
    assert first == second
    assert monte_carlo_counts(exp, 200_000, seed=8) != first


def test_monte_carlo_does_not_depend_on_worker_count(make_experiment):
    exp = _with_mu(make_experiment, 0.01, efficiency=0.3, dark=1e-3)
    one = monte_carlo_counts(exp, 100_000, seed=3, chunk_gates=50_000)
    two = monte_carlo_counts(exp, 100_000, seed=3, chunk_gates=50_000, workers=2)
    assert one == two


def test_monte_carlo_agrees_with_model(make_experiment):
    exp = _with_mu(make_experiment, 0.01, efficiency=0.3)
    model = expected_counts(exp)
    mc = monte_carlo_counts(exp, 200_000, seed=20190101)
    assert abs(mc.coincidences - model.coincidences) <= 3 * mc.coincidences_err
    assert abs(mc.accidentals - model.accidentals) <= 3 * mc.accidentals_err


def test_uncorrelated_darks_give_unit_car(make_experiment):
    exp = _with_mu(make_experiment, 0.0, efficiency=0.5, dark=1e-2)
    mc = monte_carlo_counts(exp, 1_000_000, seed=11)
    assert abs(mc.car - 1.0) <= 4 * mc.car_err


def test_monte_carlo_error_falls_as_inverse_root_of_gates(make_experiment):
    exp = _with_mu(make_experiment, 0.05, efficiency=0.3)

    def spread(gates, seeds):
        runs = [monte_carlo_counts(exp, gates, seed=s).coincidences for s in seeds]
        return float(np.std(runs, ddof=1))

    short = spread(100_000, range(40))
    long = spread(400_000, range(100, 140))
    assert 0.3 < long / short < 0.75

    err_short = monte_carlo_counts(exp, 100_000, seed=1).coincidences_err
    err_long = monte_carlo_counts(exp, 400_000, seed=1).coincidences_err
    assert err_long / err_short == pytest.approx(0.5, rel=0.05)


def test_doubling_pump_halves_excess_car(make_experiment):
    exp = _with_mu(make_experiment, 0.01, efficiency=0.5)
    doubled = exp.with_pump_power(2 * exp.pump_power)

    low, high = expected_counts(exp), expected_counts(doubled)
    assert (high.car - 1) / (low.car - 1) == pytest.approx(0.5, rel=1e-9)
    assert high.car / low.car == pytest.approx(0.5, abs=0.01)

    mc_low = monte_carlo_counts(exp, 1_000_000, seed=42)
    mc_high = monte_carlo_counts(doubled, 1_000_000, seed=43)
    ratio = mc_high.car / mc_low.car
    ratio_err = ratio * math.hypot(mc_low.car_err / mc_low.car, mc_high.car_err / mc_high.car)
    assert abs(ratio - high.car / low.car) <= 4 * ratio_err
    assert ratio_err < 0.1


def test_too_few_gates_is_contract_violation(make_experiment):
    with pytest.raises(ContractViolation):
        monte_carlo_counts(_with_mu(make_experiment, 0.01), 100)


def test_car_sweep_slopes(make_experiment):
    exp = _with_mu(make_experiment, 1e-3, efficiency=0.15)
    powers = np.geomspace(0.1, 1.0, 5)
    table = car_sweep(exp, powers)
    assert loglog_slope(table["pump_power_mw"], table["coincidences_hz"]) == pytest.approx(1.0, abs=0.02)
    assert loglog_slope(table["pump_power_mw"], table["accidentals_hz"]) == pytest.approx(2.0, abs=1e-6)
    assert table["car"].is_monotonic_decreasing
    assert "mc_car" not in table


def test_car_sweep_with_monte_carlo_columns(make_experiment):
    exp = _with_mu(make_experiment, 1e-2, efficiency=0.3)
    table = car_sweep(exp, [0.5, 1.0], {"n_gates": 20_000, "seed": 1})
    for column in ("mc_coincidences_hz", "mc_accidentals_err_hz", "mc_car"):
        assert column in table
    assert len(table) == 2


def test_loglog_slope_needs_positive_points():
    with pytest.raises(ContractViolation):
        loglog_slope([1.0], [1.0])
    with pytest.raises(ContractViolation):
        loglog_slope([1.0, 2.0], [0.0, 1.0])


def _spdc_device():
    # phase-matched for a 767.5 nm pump with n_ω = 1.9 and n_2ω = 2.0
    return QpmDevice(CrossSection(500.0, 1850.0, 67.0), poling_period=7.675, length=4.0)


def test_channel_matrix_is_diagonal(make_experiment, toy_dispersion):
    signal = [Channel(s, 200.0) for s in (1530.0, 1525.0, 1520.0)]
    idler = [Channel(idler_wavelength(767.5, ch.center_nm), 200.0) for ch in signal]
    exp = make_experiment()
    matrix = joint_channel_matrix(_spdc_device(), toy_dispersion, 0.7675, signal, idler, exp)
    values = matrix.to_numpy()
    assert values.shape == (3, 3)
    assert np.all(np.diag(values) > 0)
    assert np.count_nonzero(values - np.diag(np.diag(values))) == 0
    assert values.max() == pytest.approx(expected_counts(exp).coincidences)
    assert matrix.index.name == "signal_nm"


def test_channel_matrix_pairs_only_energy_partner(make_experiment, toy_dispersion):
    signal = [Channel(1530.0, 200.0)]
    idler = [Channel(c, 200.0) for c in (1535.0, 1540.03, 1545.0)]
    matrix = joint_channel_matrix(
        _spdc_device(), toy_dispersion, 0.7675, signal, idler, make_experiment()
    )
    row = matrix.to_numpy()[0]
    assert row[1] > 0
    assert row[0] == 0 and row[2] == 0


def test_channel_matrix_symmetric_about_degeneracy(make_experiment, toy_dispersion):
    centers = [1530.0, 1535.0, 1540.0]
    channels = [Channel(c, 200.0) for c in centers]
    device = QpmDevice(CrossSection(500.0, 1850.0, 67.0), poling_period=7.675, length=4.0)
    matrix = joint_channel_matrix(device, toy_dispersion, 0.7675, channels,
                                  list(reversed(channels)), make_experiment())
    values = matrix.to_numpy()
    np.testing.assert_allclose(values, values.T[::-1, ::-1], rtol=1e-9, atol=0)
    assert math.isclose(values[1, 1], values.max())


def test_empty_channel_list_is_contract_violation(make_experiment, toy_dispersion):
    with pytest.raises(ContractViolation):
        joint_channel_matrix(_spdc_device(), toy_dispersion, 0.7675, [], [], make_experiment())
