import json

import pytest

from acceptance.validator import AcceptanceValidator, evaluate
from utils.exceptions import ConfigError

PASSING = {
    "shg_power_uw": 31.55,
    "slab_neff_error": 2e-4,
    "poling_period_um": 4.1,
    "overlap_percent": 91.0,
    "eta_norm": 5200.0,
    "tuning_peak": 1.0,
    "tuning_fwhm_error": 0.01,
    "fsr_error": 0.02,
    "dfg_bandwidth_thz": 6.0,
    "dfg_symmetry_error": 0.0,
    "coincidence_slope": 1.005,
    "accidental_slope": 1.98,
    "car_identity_error": 1e-12,
    "mc_deviation_sigma": 1.2,
    "channel_offdiag_ratio": 0.0,
    "channel_pairing_error_nm": 0.0,
    "ring_loss_min_db_cm": 0.136,
    "ring_loss_max_db_cm": 0.205,
}


@pytest.mark.parametrize(
    "value, operator, baseline, tolerance, expected",
    [
        (5, ">=", 5, None, True),
        (5, ">", 5, None, False),
        (4, "<=", 5, None, True),
        (5, "<", 5, None, False),
        (4.0, "between", [3.5, 4.5], None, True),
        (4.6, "between", [3.5, 4.5], None, False),
        (31.6, "within", 31.56, 0.005, True),
        (32.0, "within", 31.56, 0.005, False),
        (1.01, "approx", 1.0, 0.02, True),
        (1.03, "approx", 1.0, 0.02, False),
    ],
)
def test_evaluate(value, operator, baseline, tolerance, expected):
    assert evaluate(value, operator, baseline, tolerance) is expected


def test_unknown_operator_is_config_error():
    with pytest.raises(ConfigError):
        evaluate(1.0, "~", 1.0)


def test_all_criteria_pass():
    validator = AcceptanceValidator(PASSING)
    results = validator.validate_all()
    assert {r.status for r in results} == {"PASS"}
    assert validator.overall_pass
    assert {r.criterion for r in results} == set(range(1, 11))


def test_missing_measurement_fails_overall():
    measurements = dict(PASSING)
    del measurements["fsr_error"]
    validator = AcceptanceValidator(measurements)
    results = {r.key: r for r in validator.validate_all()}
    assert results["fsr_error"].status == "N/A"
    assert not validator.overall_pass


def test_report_only_criterion_does_not_fail_run():
    validator = AcceptanceValidator(dict(PASSING, dfg_bandwidth_thz=2.0))
    results = {r.key: r for r in validator.validate_all()}
    assert results["dfg_bandwidth_thz"].status == "REPORT"
    assert validator.overall_pass


def test_out_of_band_efficiency_fails():
    validator = AcceptanceValidator(dict(PASSING, eta_norm=1200.0))
    validator.validate_all()
    assert not validator.overall_pass


def test_summary_is_json_serialisable():
    validator = AcceptanceValidator(PASSING)
    validator.validate_all()
    summary = json.loads(json.dumps(validator.summary()))
    assert summary["overall_pass"] is True
    assert len(summary["criteria"]) == len(PASSING)


def test_custom_rule_file(tmp_path):
    path = tmp_path / "rules.json"
    path.write_text(
        json.dumps({"criteria": {"x": {"name": "x", "criterion": 1, "operator": "<", "baseline": 1}}}),
        encoding="utf-8",
    )
    validator = AcceptanceValidator({"x": 0.5}, config_path=path)
    assert [r.status for r in validator.validate_all()] == ["PASS"]


def test_rule_without_baseline_is_config_error(tmp_path):
    path = tmp_path / "rules.json"
    path.write_text(
        json.dumps({"criteria": {"x": {"name": "x", "criterion": 1, "operator": "<"}}}),
        encoding="utf-8",
    )
    with pytest.raises(ConfigError, match="baseline"):
        AcceptanceValidator({"x": 0.5}, config_path=path).validate_all()


def test_unreadable_rule_file_is_config_error(tmp_path):
    with pytest.raises(ConfigError):
        AcceptanceValidator({}, config_path=tmp_path / "absent.json")
