"""Analytic symmetric-slab dispersion, used to check the numerical solver"""

import math

from scipy.optimize import brentq

from utils.exceptions import ContractViolation


def slab_effective_index(thickness, n_core, n_clad, wavelength, order=0, polarization="quasi-TE"):
    """
    Effective index of guided mode `order` of a symmetric slab.

    thickness in nm, wavelength in µm. Solves
    κd/2 - mπ/2 = atan(r·γ/κ) with r = 1 for TE and (n_core/n_clad)² for TM.
    Returns None when the mode is cut off.
    """
    if n_core <= n_clad:
        raise ContractViolation("slab core index must exceed the cladding index")
    k0 = 2 * math.pi / wavelength
    d = thickness * 1e-3
    ratio = 1.0 if polarization == "quasi-TE" else (n_core / n_clad) ** 2

    def mismatch(n):
        kappa = k0 * math.sqrt(max(n_core**2 - n**2, 0.0))
        gamma = k0 * math.sqrt(max(n**2 - n_clad**2, 0.0))
        if kappa == 0:
            return -(order + 1) * math.pi / 2
        return kappa * d / 2 - order * math.pi / 2 - math.atan(ratio * gamma / kappa)

    lo = n_clad * (1 + 1e-12)
    hi = n_core * (1 - 1e-15)
    if mismatch(lo) <= 0:
        return None
    return brentq(mismatch, lo, hi, xtol=1e-14, rtol=1e-14)
