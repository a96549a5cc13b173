"""
ercavity/core.py
Physical constants and the frequency / linewidth conversions shared by every module.
All quantities are SI base units internally; unit suffixes live at the CLI boundary.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

from ercavity.errors import DomainError


@dataclass(frozen=True)
class PhysConstants:
    """CODATA 2018, 9 significant figures. Override only for consistency tests."""
    c:    float = 299792458.0        # m/s (exact)
    e:    float = 1.60217663e-19     # C
    m_e:  float = 9.10938370e-31     # kg
    eps0: float = 8.85418781e-12     # F/m


CODATA = PhysConstants()


@dataclass(frozen=True)
class OpticalFrequency:
    nu: float   # Hz

    def __post_init__(self):
        if not (self.nu > 0 and math.isfinite(self.nu)):
            raise DomainError(f"optical frequency must be positive and finite, got {self.nu}")

    @property
    def wavelength(self) -> float:
        return wavelength_from_freq(self)

    def __float__(self) -> float:
        return self.nu


def freq_from_wavelength(lambda0: float, constants: PhysConstants = CODATA) -> OpticalFrequency:
    """Vacuum wavelength (m) -> optical frequency c/λ."""
    if not lambda0 > 0:
        raise DomainError(f"wavelength must be positive, got {lambda0}")
    return OpticalFrequency(constants.c / lambda0)


def wavelength_from_freq(nu: OpticalFrequency | float, constants: PhysConstants = CODATA) -> float:
    value = float(nu)
    if not value > 0:
        raise DomainError(f"frequency must be positive, got {value}")
    return constants.c / value


def linewidth_from_Q(nu0: OpticalFrequency | float, Q: float) -> float:
    """FWHM linewidth (Hz) of a resonance at nu0 with quality factor Q."""
    if not Q > 0:
        raise DomainError(f"quality factor must be positive, got {Q}")
    return float(nu0) / Q
