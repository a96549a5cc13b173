"""
ercavity/ensemble/decay.py
Forward model for time-resolved photoluminescence after a rectangular
excitation pulse.

Sub-population F decays at Γ(F) = (1 + β·F)/τ_bulk; uncoupled ions decay at
1/τ_bulk. The expected count in bin [t1, t2] is the bin average of the
population, n_pulses · collection_scale · Σ w_F·(e^{-Γt1} - e^{-Γt2})/(Γ·Δt),
plus dark counts. Times are measured from the end of the excitation pulse.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass
from typing import Optional, Tuple

import numpy as np

from ercavity.ensemble.distribution import EnhancementDistribution
from ercavity.errors import ConfigurationError, DomainError
from ercavity.models.record import DecayTrace

logger = logging.getLogger(__name__)

WEIGHTINGS = ('population', 'pulse')


@dataclass(frozen=True)
class DetectorConfig:
    pulse_duration:    float = 20e-3        # s, rectangular excitation
    repetition_period: float = 75e-3        # s
    dark_rate:         float = 0.0          # counts/s
    collection_scale:  float = 1.0          # expected counts per bin at t = 0, per pulse
    rng_seed:          Optional[int] = None
    bin_width:         float = 0.2e-3       # s
    n_bins:            int = 250
    t0:                float = 0.0          # s after the pulse ends
    poisson:           bool = True
    weighting:         str = 'population'

    def __post_init__(self):
        if not 0 < self.pulse_duration < self.repetition_period:
            raise ConfigurationError(
                f"pulse_duration must be positive and shorter than repetition_period "
                f"({self.pulse_duration} >= {self.repetition_period})"
            )
        if self.dark_rate < 0 or self.collection_scale < 0 or self.t0 < 0:
            raise ConfigurationError("dark_rate, collection_scale and t0 must be non-negative")
        if not self.bin_width > 0 or self.n_bins < 1:
            raise ConfigurationError("bin_width must be positive and n_bins >= 1")
        if self.weighting not in WEIGHTINGS:
            raise ConfigurationError(f"weighting must be one of {WEIGHTINGS}, got {self.weighting!r}")

    @property
    def window(self) -> float:
        """Dark time available for the decay trace."""
        return self.repetition_period - self.pulse_duration

    @property
    def trace_span(self) -> float:
        return self.t0 + self.n_bins * self.bin_width


def decay_rates(
    dist:     EnhancementDistribution,
    beta:     float,
    tau_bulk: float,
) -> Tuple[np.ndarray, np.ndarray]:
    """(rates, weights) with the uncoupled population appended at 1/tau_bulk."""
    if not 0 < beta <= 1:
        raise DomainError(f"branching ratio must lie in (0, 1], got {beta}")
    if not tau_bulk > 0:
        raise DomainError(f"tau_bulk must be positive, got {tau_bulk}")
    rates = np.append((1.0 + beta * dist.factors) / tau_bulk, 1.0 / tau_bulk)
    weights = np.append(dist.weights, dist.uncoupled_fraction)
    keep = weights > 0
    return rates[keep], weights[keep]


def expected_decay(
    dist:     EnhancementDistribution,
    beta:     float,
    tau_bulk: float,
    det:      DetectorConfig,
    n_pulses: int = 1,
) -> np.ndarray:
    """Noise-free expected counts per bin, summed over n_pulses."""
    if n_pulses < 1:
        raise DomainError(f"n_pulses must be >= 1, got {n_pulses}")
    if det.trace_span > det.window * (1 + 1e-12):
        raise ConfigurationError(
            f"trace needs {det.trace_span * 1e3:.6g} ms but only {det.window * 1e3:.6g} ms "
            f"of dark time is available between pulses"
        )

    rates, weights = decay_rates(dist, beta, tau_bulk)
    if det.weighting == 'pulse':
        build_up = -np.expm1(-rates * det.pulse_duration)
        weights = weights * build_up / -np.expm1(-det.pulse_duration / tau_bulk)

    edges = det.t0 + det.bin_width * np.arange(det.n_bins + 1)
    survival = np.exp(-np.outer(rates, edges))                         # (n_rates, n_bins + 1)
    bin_mean = (survival[:, :-1] - survival[:, 1:]) / (rates[:, None] * det.bin_width)
    signal = det.collection_scale * (weights @ bin_mean)
    return n_pulses * (signal + det.dark_rate * det.bin_width)


def synthesize_decay(
    dist:     EnhancementDistribution,
    beta:     float,
    tau_bulk: float,
    det:      DetectorConfig,
    n_pulses: int = 1,
) -> DecayTrace:
    """Expected trace, Poisson-sampled with det.rng_seed unless det.poisson is off."""
    expected = expected_decay(dist, beta, tau_bulk, det, n_pulses)
    if det.poisson:
        if det.rng_seed is None:
            raise ConfigurationError("Poisson sampling requires an explicit rng_seed")
        rng = np.random.default_rng(det.rng_seed)
        counts = rng.poisson(expected).astype(float)
    else:
        counts = expected
    trace = DecayTrace(bin_width=det.bin_width, counts=counts, t0=det.t0)
    logger.info(
        f"Synthesized {det.n_bins} bins over {n_pulses} pulses: "
        f"{trace.total_counts:.0f} counts (seed={det.rng_seed}, poisson={det.poisson})"
    )
    return trace
