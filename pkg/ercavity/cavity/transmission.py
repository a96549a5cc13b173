"""
ercavity/cavity/transmission.py
Single-mode, two-sided symmetric cavity transmission, optionally loaded by a
homogeneously broadened effective ensemble line (inhomogeneous width is
folded into gamma_a since it is far below the cavity linewidth).

    t(ν) = (κ/2) / (i(ν - ν_c) + κ/2 + Σ(ν))
    Σ(ν) = (C·κ/2)·(γ_a/2) / (i(ν - ν_a) + γ_a/2)

Returns |t|², equal to 1 on resonance for the bare cavity and 1/(1+C)² for
a resonant ensemble.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass
from typing import Optional

import numpy as np

from ercavity.cavity.purcell import CavityMode
from ercavity.errors import DomainError
from ercavity.models.record import Spectrum

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class EnsembleLine:
    nu_a:          float    # Hz
    gamma_a:       float    # Hz FWHM
    cooperativity: float

    def __post_init__(self):
        if not self.gamma_a > 0:
            raise DomainError(f"ensemble linewidth must be positive, got {self.gamma_a}")
        if self.cooperativity < 0:
            raise DomainError(f"cooperativity must be >= 0, got {self.cooperativity}")


def cavity_transmission(nu, mode: CavityMode, ensemble: Optional[EnsembleLine] = None):
    """Relative transmission at nu (scalar or array, Hz)."""
    nu = np.asarray(nu, dtype=float)
    half_kappa = mode.kappa / 2.0
    denom = 1j * (nu - float(mode.nu0)) + half_kappa
    if ensemble is not None:
        half_gamma = ensemble.gamma_a / 2.0
        denom = denom + ensemble.cooperativity * half_kappa * half_gamma / (1j * (nu - ensemble.nu_a) + half_gamma)
    T = np.abs(half_kappa / denom) ** 2
    return float(T) if T.ndim == 0 else T


def transmission_spectrum(
    mode:     CavityMode,
    nu:       np.ndarray,
    ensemble: Optional[EnsembleLine] = None,
    noise:    float = 0.0,
    seed:     Optional[int] = None,
    scale:    float = 1.0,
    baseline: float = 0.0,
) -> Spectrum:
    """
    Sampled transmission, scale·T(ν) + baseline, with optional multiplicative
    Gaussian noise of relative size `noise`. Noise requires a seed.
    """
    if noise < 0:
        raise DomainError(f"noise must be >= 0, got {noise}")
    T = scale * cavity_transmission(nu, mode, ensemble) + baseline
    if noise > 0:
        if seed is None:
            raise DomainError("a seed is required for noisy spectra")
        rng = np.random.default_rng(seed)
        T = T * (1.0 + noise * rng.standard_normal(T.shape))
        T = np.clip(T, 0.0, None)
    return Spectrum(nu=np.asarray(nu, dtype=float), T=T)
