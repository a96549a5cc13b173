"""
ercavity/spectroscopy/rate_chain.py
Scalar chain from absorption to cavity-modified lifetime:

    absorption line --> oscillator strength f --> radiative rate Γ_rad
                    --> branching ratio β = Γ_rad·τ --> τ_cav = τ/(1 + β·F)

The host-medium local-field correction is not fixed by the measurements it
is calibrated against, so it is a named, pluggable convention. Every
convention carries two factors of n:
  correction(n)   multiplier on the vacuum emission rate
  local_field(n)  divisor on the integrated absorption when extracting f
Both equal 1 at n = 1.
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass
from typing import Callable, Dict

from ercavity.core import CODATA, PhysConstants
from ercavity.errors import DomainError

logger = logging.getLogger(__name__)

# Y2SiO5, monoclinic C2/c, 8 formula units (16 Y) per conventional cell.
YSO_LATTICE = {'a': 10.41e-10, 'b': 6.721e-10, 'c': 12.49e-10, 'beta_deg': 102.65}
YSO_Y_PER_CELL = 16

# Peak absorption (1/m) and FWHM (Hz) of the 1536 nm line, 0.02 % Er, per polarization axis.
AXIS_ABSORPTION = {
    'D1': (24.5e2, 510e6),
    'D2': (49.0e2, 500e6),
}

LAMBDA_RANGE = (1e-6, 2e-6)
BRANCHING_TOLERANCE = 1e-9


def yso_yttrium_density() -> float:
    """Yttrium number density of Y2SiO5 (both crystallographic sites), 1/m³."""
    lat = YSO_LATTICE
    cell = lat['a'] * lat['b'] * lat['c'] * math.sin(math.radians(lat['beta_deg']))
    return YSO_Y_PER_CELL / cell


def active_density(dopant_fraction: float, y_density: float, site_share: float = 1.0) -> float:
    """Er number density N = dopant_fraction · y_density · site_share."""
    if not 0 < dopant_fraction <= 1:
        raise DomainError(f"dopant fraction must lie in (0, 1], got {dopant_fraction}")
    if not y_density > 0:
        raise DomainError(f"yttrium density must be positive, got {y_density}")
    if not 0 < site_share <= 1:
        raise DomainError(f"site share must lie in (0, 1], got {site_share}")
    return dopant_fraction * y_density * site_share


@dataclass(frozen=True)
class RadRateConvention:
    name:        str
    correction:  Callable[[float], float]
    local_field: Callable[[float], float]

    def __repr__(self) -> str:
        return f"RadRateConvention({self.name!r})"


def _lorentz(n: float) -> float:
    return (n * n + 2.0) / 3.0


CONVENTIONS: Dict[str, RadRateConvention] = {
    'none':           RadRateConvention('none', lambda n: 1.0, lambda n: 1.0),
    'index':          RadRateConvention('index', lambda n: n, lambda n: 1.0),
    'virtual_cavity': RadRateConvention('virtual_cavity', lambda n: n * _lorentz(n) ** 2, lambda n: _lorentz(n) ** 2),
    'local_field':    RadRateConvention('local_field', lambda n: n * _lorentz(n), lambda n: _lorentz(n) ** 2),
}
DEFAULT_CONVENTION = CONVENTIONS['local_field']


def get_convention(name: str) -> RadRateConvention:
    try:
        return CONVENTIONS[name]
    except KeyError:
        raise DomainError(f"unknown convention {name!r}; choose from {sorted(CONVENTIONS)}") from None


@dataclass(frozen=True)
class TransitionParams:
    lambda0:           float    # m
    tau_bulk:          float    # s
    alpha_max:         float    # 1/m
    fwhm_abs:          float    # Hz, homogeneous-equivalent absorption FWHM
    inhom_fwhm:        float    # Hz
    n:                 float
    N:                 float    # 1/m³
    dipole_axis_label: str = 'D1'

    def __post_init__(self):
        for name in ('lambda0', 'tau_bulk', 'alpha_max', 'fwhm_abs', 'inhom_fwhm', 'n', 'N'):
            value = getattr(self, name)
            if not (value > 0 and math.isfinite(value)):
                raise DomainError(f"{name} must be positive and finite, got {value}")
        lo, hi = LAMBDA_RANGE
        if not lo <= self.lambda0 <= hi:
            raise DomainError(f"lambda0 {self.lambda0:.4g} m lies outside the supported 1-2 um range")
        if self.dipole_axis_label not in ('D1', 'D2', 'b'):
            raise DomainError(f"dipole axis must be D1, D2 or b, got {self.dipole_axis_label!r}")

    @classmethod
    def for_axis(cls, label: str, **fields) -> 'TransitionParams':
        """Fill alpha_max and fwhm_abs from the tabulated line for D1 or D2."""
        if label not in AXIS_ABSORPTION:
            raise DomainError(f"no tabulated absorption for axis {label!r}; pass alpha_max and fwhm_abs")
        alpha, fwhm = AXIS_ABSORPTION[label]
        fields.setdefault('alpha_max', alpha)
        fields.setdefault('fwhm_abs', fwhm)
        return cls(dipole_axis_label=label, **fields)

    def oscillator_strength(self, conv: RadRateConvention = DEFAULT_CONVENTION) -> float:
        return oscillator_strength(self.alpha_max, self.fwhm_abs, self.N, self.n, conv)


def oscillator_strength(
    alpha_max: float,
    fwhm:      float,
    N:         float,
    n:         float,
    conv:      RadRateConvention = DEFAULT_CONVENTION,
    constants: PhysConstants = CODATA,
) -> float:
    """
    f = (4·eps0·m_e·c·n / e²) · (1/N) · ∫α dν / L(n)

    with the Lorentzian line integral ∫α dν = (π/2)·alpha_max·fwhm.
    """
    for name, value in (('alpha_max', alpha_max), ('fwhm', fwhm), ('N', N), ('n', n)):
        if not value > 0:
            raise DomainError(f"{name} must be positive, got {value}")
    k = constants
    line_integral = 0.5 * math.pi * alpha_max * fwhm
    return 4.0 * k.eps0 * k.m_e * k.c * n / (k.e ** 2) * line_integral / N / conv.local_field(n)


def vacuum_rate_coefficient(lambda0: float, constants: PhysConstants = CODATA) -> float:
    """2π·e² / (eps0·m_e·c·λ²): radiative rate per unit oscillator strength in vacuum."""
    k = constants
    return 2.0 * math.pi * k.e ** 2 / (k.eps0 * k.m_e * k.c * lambda0 ** 2)


def radiative_rate(
    f:         float,
    lambda0:   float,
    n:         float,
    conv:      RadRateConvention = DEFAULT_CONVENTION,
    constants: PhysConstants = CODATA,
) -> float:
    """Spontaneous emission rate (Hz) of one transition with oscillator strength f."""
    if not f > 0:
        raise DomainError(f"oscillator strength must be positive, got {f}")
    if not lambda0 > 0 or not n >= 1:
        raise DomainError(f"need lambda0 > 0 and n >= 1, got {lambda0}, {n}")
    return vacuum_rate_coefficient(lambda0, constants) * f * conv.correction(n)


def select_convention(f: float, lambda0: float, n: float, target_rate: float) -> RadRateConvention:
    """Convention whose radiative rate lies closest (in log) to target_rate."""
    if not target_rate > 0:
        raise DomainError(f"target rate must be positive, got {target_rate}")
    best = min(
        CONVENTIONS.values(),
        key=lambda conv: abs(math.log(radiative_rate(f, lambda0, n, conv) / target_rate)),
    )
    logger.debug(f"Convention closest to {target_rate:.4g} Hz: {best.name}")
    return best


def branching_ratio(gamma_rad: float, tau_total: float) -> float:
    """β = Γ_rad·τ_total; the coupled path cannot outpace the total decay."""
    if not gamma_rad > 0 or not tau_total > 0:
        raise DomainError(f"need gamma_rad > 0 and tau_total > 0, got {gamma_rad}, {tau_total}")
    beta = gamma_rad * tau_total
    if beta > 1.0 + BRANCHING_TOLERANCE:
        raise DomainError(
            f"radiative rate {gamma_rad:.6g} Hz exceeds the total decay rate {1.0 / tau_total:.6g} Hz"
        )
    return min(beta, 1.0)


def _check_beta(beta: float) -> None:
    if not 0 < beta <= 1:
        raise DomainError(f"branching ratio must lie in (0, 1], got {beta}")


def purcell_lifetime(tau_bulk: float, F_eff: float, beta: float) -> float:
    """Only the cavity-coupled path is enhanced: τ_cav = τ_bulk / (1 + β·F)."""
    if not tau_bulk > 0:
        raise DomainError(f"tau_bulk must be positive, got {tau_bulk}")
    if not F_eff >= 0:
        raise DomainError(f"effective Purcell factor must be >= 0, got {F_eff}")
    _check_beta(beta)
    return tau_bulk / (1.0 + beta * F_eff)


def effective_purcell_from_lifetimes(tau_ref: float, tau_cav: float, beta: float) -> float:
    """Inverse of purcell_lifetime: F = (τ_ref/τ_cav - 1)/β."""
    if not tau_cav > 0:
        raise DomainError(f"tau_cav must be positive, got {tau_cav}")
    if tau_cav > tau_ref:
        raise DomainError(f"cavity lifetime {tau_cav:.6g} s exceeds the reference {tau_ref:.6g} s")
    _check_beta(beta)
    return (tau_ref / tau_cav - 1.0) / beta
