"""
ercavity/spectroscopy/absorption.py
Single-pass attenuation and the cavity transmission dip it maps onto.

On resonance an ensemble with cooperativity C leaves T = 1/(1 + C)² of the
empty-cavity transmission, so the dip depth is 1 - 1/(1 + C)². Saturation
uses the homogeneous two-level form C0/(1 + s).
"""

from __future__ import annotations

import math

from ercavity.errors import DomainError


def beer_lambert(alpha: float, L: float, confinement: float = 1.0) -> float:
    """Absorbed fraction 1 - exp(-confinement·alpha·L)."""
    if not alpha > 0:
        raise DomainError(f"absorption coefficient must be positive, got {alpha}")
    if not L >= 0:
        raise DomainError(f"length must be non-negative, got {L}")
    if not 0 < confinement <= 1:
        raise DomainError(f"confinement must lie in (0, 1], got {confinement}")
    return -math.expm1(-confinement * alpha * L)


def confinement_for_attenuation(target: float, alpha: float, L: float) -> float:
    """Confinement factor at which beer_lambert(alpha, L, ·) equals target."""
    if not 0 < target < 1:
        raise DomainError(f"target attenuation must lie in (0, 1), got {target}")
    if not alpha > 0 or not L > 0:
        raise DomainError(f"need alpha > 0 and L > 0, got {alpha}, {L}")
    confinement = -math.log1p(-target) / (alpha * L)
    if confinement > 1:
        raise DomainError(
            f"target {target:.4g} exceeds the full-overlap attenuation {beer_lambert(alpha, L):.4g}"
        )
    return confinement


def cooperativity_from_transmission(t_rel: float) -> float:
    """C from the resonant transmission relative to the empty cavity, t_rel = 1/(1+C)²."""
    if not 0 < t_rel <= 1:
        raise DomainError(f"relative transmission must lie in (0, 1], got {t_rel}")
    return 1.0 / math.sqrt(t_rel) - 1.0


def dip_to_cooperativity(dip: float) -> float:
    if not 0 <= dip < 1:
        raise DomainError(f"dip must lie in [0, 1), got {dip}")
    return cooperativity_from_transmission(1.0 - dip)


def cooperativity_to_dip(C: float) -> float:
    if not C >= 0:
        raise DomainError(f"cooperativity must be >= 0, got {C}")
    return 1.0 - 1.0 / (1.0 + C) ** 2


def saturated_cooperativity(C0: float, s: float) -> float:
    if not C0 >= 0:
        raise DomainError(f"unsaturated cooperativity must be >= 0, got {C0}")
    if not s >= 0:
        raise DomainError(f"saturation parameter must be >= 0, got {s}")
    if math.isinf(s):
        return 0.0
    return C0 / (1.0 + s)


def saturation_for_cooperativity(C0: float, C: float) -> float:
    """Saturation parameter that reduces C0 to C."""
    if not 0 < C <= C0:
        raise DomainError(f"need 0 < C <= C0, got C={C}, C0={C0}")
    return C0 / C - 1.0


def optical_depth_enhancement(dip: float, single_pass: float) -> float:
    """Ratio of the cavity transmission dip to the bare single-pass attenuation."""
    if not 0 <= dip < 1 or not 0 < single_pass < 1:
        raise DomainError(f"need dip in [0, 1) and single_pass in (0, 1), got {dip}, {single_pass}")
    return dip / single_pass
