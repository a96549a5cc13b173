"""
ercavity/cavity/purcell.py
Cavity figure of merit: the Purcell factor of a single-mode resonator.

F_P = (3 / 4π²) · (Q / V_norm) · |E_ion·d̂|² / |E_max|²

with V_norm the mode volume in units of (λ/n)³. The printed form of this
expression carries (λ/n) to the first power; only the cubed form is
dimensionally consistent with V = 1.65 (λ/n)³ = 1.05 µm³ and reproduces
F_P ≈ 517 for Q = 11 400, so the cube is used.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, replace

from ercavity.core import CODATA, OpticalFrequency, freq_from_wavelength, linewidth_from_Q
from ercavity.errors import DomainError

PURCELL_PREFACTOR = 3.0 / (4.0 * math.pi ** 2)


@dataclass(frozen=True)
class CavityMode:
    lambda0: float      # resonance wavelength, m
    Q:       float
    V_norm:  float      # mode volume in (λ0/n)³
    n:       float      # refractive index at the field maximum

    def __post_init__(self):
        if not self.lambda0 > 0:
            raise DomainError(f"resonance wavelength must be positive, got {self.lambda0}")
        if not self.Q > 0:
            raise DomainError(f"Q must be positive, got {self.Q}")
        if not self.V_norm > 0:
            raise DomainError(f"V_norm must be positive, got {self.V_norm}")
        if not self.n >= 1:
            raise DomainError(f"refractive index must be >= 1, got {self.n}")
        if not math.isfinite(self.V_physical):
            raise DomainError("physical mode volume is not finite")

    @property
    def nu0(self) -> OpticalFrequency:
        return freq_from_wavelength(self.lambda0)

    @property
    def kappa(self) -> float:
        """Energy decay rate expressed as FWHM linewidth, Hz."""
        return linewidth_from_Q(self.nu0, self.Q)

    @property
    def V_physical(self) -> float:
        return self.V_norm * (self.lambda0 / self.n) ** 3

    def with_frequency(self, nu: float) -> 'CavityMode':
        return replace(self, lambda0=CODATA.c / nu)


def purcell_factor(mode: CavityMode, overlap: float = 1.0) -> float:
    """Purcell factor for a dipole with normalized field overlap in [0, 1]."""
    if not 0.0 <= overlap <= 1.0:
        raise DomainError(f"overlap must lie in [0, 1], got {overlap}")
    return PURCELL_PREFACTOR * (mode.Q / mode.V_norm) * overlap


def index_for_mode_volume(v_norm: float, lambda0: float, v_physical: float) -> float:
    """Refractive index n solving v_norm·(λ0/n)³ = v_physical."""
    if not (v_norm > 0 and lambda0 > 0 and v_physical > 0):
        raise DomainError("mode volumes and wavelength must be positive")
    return lambda0 * (v_norm / v_physical) ** (1.0 / 3.0)
