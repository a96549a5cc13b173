"""
ercavity/models/record.py
Shared dataclass schema for measurement records and fit results.
Fitters, synthesizers, parsers and exporters all use these types.
Validation only, no physics here.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Dict, List, Optional

import numpy as np

from ercavity.errors import DomainError


@dataclass(frozen=True)
class Spectrum:
    """Frequency-sampled transmission."""
    nu:    np.ndarray               # Hz, strictly ascending
    T:     np.ndarray               # dimensionless, >= 0
    sigma: Optional[np.ndarray] = None

    def __post_init__(self):
        nu = np.asarray(self.nu, dtype=float)
        T  = np.asarray(self.T, dtype=float)
        object.__setattr__(self, 'nu', nu)
        object.__setattr__(self, 'T', T)
        if nu.ndim != 1 or nu.shape != T.shape:
            raise DomainError(f"spectrum arrays must be 1-D and equal length, got {nu.shape} and {T.shape}")
        if nu.size > 1 and not np.all(np.diff(nu) > 0):
            raise DomainError("spectrum frequencies must be strictly ascending")
        if np.any(T < 0):
            raise DomainError("transmission values must be non-negative")
        if self.sigma is not None:
            sigma = np.asarray(self.sigma, dtype=float)
            if sigma.shape != nu.shape or np.any(sigma <= 0):
                raise DomainError("sigma must match the spectrum length and be positive")
            object.__setattr__(self, 'sigma', sigma)

    def __len__(self) -> int:
        return int(self.nu.size)


@dataclass(frozen=True)
class DecayTrace:
    """Time-binned photon counts. Bin i starts at t0 + i*bin_width."""
    bin_width: float                # s
    counts:    np.ndarray           # Poisson samples are integer-valued; expected traces are not
    t0:        float = 0.0          # s

    def __post_init__(self):
        counts = np.asarray(self.counts, dtype=float)
        object.__setattr__(self, 'counts', counts)
        if not self.bin_width > 0:
            raise DomainError(f"bin_width must be positive, got {self.bin_width}")
        if counts.ndim != 1:
            raise DomainError("counts must be 1-D")
        if np.any(counts < 0) or not np.all(np.isfinite(counts)):
            raise DomainError("counts must be finite and non-negative")

    @property
    def times(self) -> np.ndarray:
        return self.t0 + self.bin_width * np.arange(self.counts.size)

    @property
    def total_counts(self) -> float:
        return float(self.counts.sum())

    def __len__(self) -> int:
        return int(self.counts.size)


@dataclass
class FitResult:
    """Output of one least-squares fit."""
    params:      Dict[str, float]
    stderr:      Dict[str, float]
    rss:         float
    n_iter:      int
    converged:   bool
    model:       str               = 'custom'
    message:     str               = ''
    grad_norm:   float             = float('nan')
    warnings:    List[str]         = field(default_factory=list)
    derived:     Dict[str, float]  = field(default_factory=dict)
    rss_history: List[float]       = field(default_factory=list)

    def to_dict(self) -> Dict:
        """Fit report record: {model, params, stderr, rss, converged, n_iter, ...}."""
        return {
            'model':     self.model,
            'params':    dict(self.params),
            'stderr':    dict(self.stderr),
            'derived':   dict(self.derived),
            'rss':       self.rss,
            'converged': self.converged,
            'n_iter':    self.n_iter,
            'message':   self.message,
            'warnings':  list(self.warnings),
        }
