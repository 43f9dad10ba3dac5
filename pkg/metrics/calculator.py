"""Facet de-embedding and resonator loss conversions"""

import math
from dataclasses import dataclass, field
from typing import Dict

from utils.exceptions import ConfigError, ContractViolation

DIRECTIONS = ("collected", "launched")


def _band_key(band):
    try:
        return f"{float(band):g}"
    except (TypeError, ValueError):
        raise ConfigError(f"facet-loss band must be a wavelength in nm, got {band!r}") from None


@dataclass(frozen=True)
class FacetLossTable:
    """Per-facet coupling loss (dB) by band, keyed by wavelength in nm"""

    losses: Dict[str, float] = field(default_factory=dict)

    def __post_init__(self):
        normalized = {}
        for band, loss in self.losses.items():
            if loss < 0:
                raise ConfigError(f"facet loss for band {band} must be >= 0 dB, got {loss}")
            normalized[_band_key(band)] = float(loss)
        object.__setattr__(self, "losses", normalized)

    def lookup(self, band):
        key = _band_key(band)
        if key not in self.losses:
            known = ", ".join(sorted(self.losses)) or "none"
            raise ConfigError(f"no facet loss for band {key} nm (known: {known})")
        return self.losses[key]


def _facet_factor(table, n_facets, band):
    if n_facets < 0:
        raise ContractViolation("number of facets must be >= 0")
    return 10 ** (table.lookup(band) * n_facets / 10)


def deembed_power(table: FacetLossTable, power, n_facets, band, direction="collected"):
    """
    On-chip power from a measured power.

    `collected`: measured after leaving the chip, so the facet loss is added
    back. `launched`: measured before entering, so the loss is removed.
    """
    factor = _facet_factor(table, n_facets, band)
    if direction == "collected":
        return power * factor
    if direction == "launched":
        return power / factor
    raise ContractViolation(f"direction must be one of {DIRECTIONS}, got {direction!r}")


def embed_power(table: FacetLossTable, power, n_facets, band, direction="collected"):
    """Off-chip power that corresponds to an on-chip power"""
    factor = _facet_factor(table, n_facets, band)
    if direction == "collected":
        return power / factor
    if direction == "launched":
        return power * factor
    raise ContractViolation(f"direction must be one of {DIRECTIONS}, got {direction!r}")


def q_to_loss(intrinsic_q, wavelength, group_index):
    """Propagation loss in dB/cm from intrinsic Q at `wavelength` µm"""
    if intrinsic_q <= 0 or wavelength <= 0 or group_index <= 0:
        raise ContractViolation("Q, wavelength and group index must be > 0")
    alpha = 2 * math.pi * group_index / (intrinsic_q * wavelength * 1e-6)  # 1/m
    return 10 * math.log10(math.e) * alpha / 100


def propagation_loss_db(loss_db_per_cm, length_mm):
    return loss_db_per_cm * length_mm / 10
