"""Acceptance validation of a reference-device bundle run"""

import json
import logging
from dataclasses import asdict, dataclass
from typing import Any, Optional

from config.settings import ACCEPTANCE_FILE, CONFIG_DIR
from utils.exceptions import ConfigError

log = logging.getLogger(__name__)

OPERATORS = (">=", ">", "<=", "<", "between", "within", "approx")


def evaluate(value, operator, baseline, tolerance=None):
    """True when `value` meets `operator` against `baseline`"""
    if operator == ">=":
        return value >= baseline
    if operator == ">":
        return value > baseline
    if operator == "<=":
        return value <= baseline
    if operator == "<":
        return value < baseline
    if operator == "between":
        low, high = baseline
        return low <= value <= high
    if operator == "within":
        # relative tolerance
        return abs(value - baseline) <= tolerance * abs(baseline)
    if operator == "approx":
        # absolute tolerance
        return abs(value - baseline) <= tolerance
    raise ConfigError(f"unknown acceptance operator '{operator}'")


@dataclass
class AcceptanceResult:
    key: str
    name: str
    criterion: int
    value: Optional[float]
    unit: str
    operator: str
    baseline: Any
    tolerance: Optional[float]
    status: str  # PASS, FAIL, REPORT or N/A
    reference: str

    @property
    def passed(self):
        return self.status in ("PASS", "REPORT")

    def to_dict(self):
        return asdict(self)


class AcceptanceValidator:
    """Check measured quantities against acceptance_config.json"""

    def __init__(self, measurements, config_path=None):
        self.measurements = measurements
        path = config_path or CONFIG_DIR / ACCEPTANCE_FILE
        try:
            with open(path, "r", encoding="utf-8") as f:
                self.config = json.load(f)
        except (OSError, json.JSONDecodeError) as e:
            raise ConfigError(f"cannot read acceptance config {path}: {e}") from e
        self.results = []

    def _check(self, key, rule):
        for field in ("name", "operator", "baseline", "criterion"):
            if field not in rule:
                raise ConfigError(f"acceptance rule '{key}' has no '{field}'")
        if rule["operator"] not in OPERATORS:
            raise ConfigError(f"acceptance rule '{key}': unknown operator {rule['operator']}")

        value = self.measurements.get(key)
        tolerance = rule.get("tolerance")
        if value is None:
            status = "N/A"
        else:
            ok = evaluate(float(value), rule["operator"], rule["baseline"], tolerance)
            if ok:
                status = "PASS"
            elif rule.get("report_only", False):
                status = "REPORT"
            else:
                status = "FAIL"
        return AcceptanceResult(
            key=key,
            name=rule["name"],
            criterion=int(rule["criterion"]),
            value=None if value is None else float(value),
            unit=rule.get("unit", ""),
            operator=rule["operator"],
            baseline=rule["baseline"],
            tolerance=tolerance,
            status=status,
            reference=rule.get("reference", ""),
        )

    def validate_all(self):
        log.info("=== Acceptance validation ===")
        self.results = [self._check(key, rule) for key, rule in self.config["criteria"].items()]
        for r in self.results:
            mark = {"PASS": "✓", "REPORT": "⚠", "N/A": "⚠"}.get(r.status, "✗")
            log.info("  %s [%d] %s: %s (%s)", mark, r.criterion, r.name, r.value, r.status)
        n_pass = sum(r.passed for r in self.results)
        log.info("✓ Acceptance: %d/%d criteria passed", n_pass, len(self.results))
        return self.results

    @property
    def overall_pass(self):
        return bool(self.results) and all(r.passed for r in self.results)

    def summary(self):
        return {
            "overall_pass": self.overall_pass,
            "criteria": [r.to_dict() for r in self.results],
        }
