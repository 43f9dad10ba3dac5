import pytest

from metrics.calculator import (
    FacetLossTable,
    deembed_power,
    embed_power,
    propagation_loss_db,
    q_to_loss,
)
from utils.exceptions import ConfigError, ContractViolation

TABLE = FacetLossTable({"1550": 4.3, "775": 5.4})


def test_zero_loss_is_identity():
    table = FacetLossTable({"1550": 0.0})
    assert deembed_power(table, 2.95, 1, 1550) == 2.95
    assert deembed_power(table, 2.95, 2, 1550, "launched") == 2.95


def test_collected_power_is_raised_by_facet_loss():
    assert deembed_power(TABLE, 1.0, 1, 1550) == pytest.approx(10**0.43)
    assert deembed_power(TABLE, 1.0, 2, 775) == pytest.approx(10**1.08)


def test_launched_power_is_reduced_by_facet_loss():
    assert deembed_power(TABLE, 1.0, 1, 1550, "launched") == pytest.approx(10**-0.43)


def test_embed_inverts_deembed():
    for direction in ("collected", "launched"):
        on_chip = deembed_power(TABLE, 3.0, 1, 775, direction)
        assert embed_power(TABLE, on_chip, 1, 775, direction) == pytest.approx(3.0)


def test_band_keys_accept_numbers_and_strings():
    assert TABLE.lookup(1550) == TABLE.lookup("1550") == TABLE.lookup(1550.0) == 4.3


def test_unknown_band_is_config_error():
    with pytest.raises(ConfigError, match="no facet loss"):
        deembed_power(TABLE, 1.0, 1, 1310)


def test_negative_loss_is_config_error():
    with pytest.raises(ConfigError):
        FacetLossTable({"1550": -1.0})


def test_bad_direction_and_facet_count_are_contract_violations():
    with pytest.raises(ContractViolation):
        deembed_power(TABLE, 1.0, 1, 1550, "sideways")
    with pytest.raises(ContractViolation):
        deembed_power(TABLE, 1.0, -1, 1550)


@pytest.mark.parametrize(
    "group_index, expected",
    [(2.25, 0.19), (1.8, 0.15)],
)
def test_q_to_loss(group_index, expected):
    assert q_to_loss(2e6, 1.6, group_index) == pytest.approx(expected, abs=5e-3)


def test_infinite_q_limit():
    assert q_to_loss(1e15, 1.6, 2.0) < 1e-8


def test_q_to_loss_rejects_non_positive_inputs():
    with pytest.raises(ContractViolation):
        q_to_loss(0, 1.6, 2.0)


def test_propagation_loss_over_device():
    assert propagation_loss_db(0.15, 4.0) == pytest.approx(0.06)
