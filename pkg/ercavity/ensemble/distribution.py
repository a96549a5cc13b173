"""
ercavity/ensemble/distribution.py
Statistics of per-ion Purcell enhancement over the cavity mode.

Ions sit uniformly in the dielectric. An ion at r with dipole axis d̂ sees

    F(r) = F_max · |E(r)·d̂|² / |E_ref|²

where E_ref is the field in the cell maximising eps·|E|² (the same cell that
normalises the mode volume). Dielectric cells outside the coupled region
(mirror sections) carry F = 0 and are reported as uncoupled_fraction, not
folded into the coupled mean.

Bins are contiguous: bin i spans [bin_edges[i], bin_edges[i+1]]. Each bin
also stores the volume-weighted mean F of its cells (factors) rather than
the midpoint, so the distribution mean equals the quadrature mean exactly
whatever the bin count. Empty histogram bins are merged into the occupied
bin below them. A record read with edges but no factors uses midpoints.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass
from typing import Dict, Optional, Tuple

import numpy as np

from ercavity.cavity.field_grid import FieldGrid, material_mask
from ercavity.errors import DomainError

logger = logging.getLogger(__name__)

DEFAULT_N_BINS = 64
NORMALIZATION_TOL = 1e-12
EDGE_RTOL = 1e-9


@dataclass(frozen=True, eq=False)
class EnhancementDistribution:
    factors:            np.ndarray                  # representative Purcell factor per bin, ascending
    weights:            np.ndarray                  # fraction of all ions per bin
    uncoupled_fraction: float = 0.0                 # fraction of ions with F = 0 outside the coupled region
    bin_edges:          Optional[np.ndarray] = None # len(factors) + 1 contiguous edges; derived when omitted

    def __post_init__(self):
        factors = np.atleast_1d(np.array(self.factors, dtype=float))
        weights = np.atleast_1d(np.array(self.weights, dtype=float))
        object.__setattr__(self, 'factors', factors)
        object.__setattr__(self, 'weights', weights)
        if factors.shape != weights.shape or factors.ndim != 1:
            raise DomainError("factors and weights must be 1-D arrays of equal length")
        if np.any(weights < 0):
            raise DomainError("weights must be non-negative")
        if np.any(factors < 0) or (factors.size > 1 and not np.all(np.diff(factors) > 0)):
            raise DomainError("factors must be non-negative and strictly increasing")
        if not 0.0 <= self.uncoupled_fraction <= 1.0:
            raise DomainError(f"uncoupled_fraction must lie in [0, 1], got {self.uncoupled_fraction}")
        total = self.uncoupled_fraction + float(weights.sum())
        if abs(total - 1.0) > NORMALIZATION_TOL:
            raise DomainError(f"weights plus uncoupled_fraction must sum to 1, got {total!r}")

        edges = _edges_around(factors) if self.bin_edges is None else np.array(self.bin_edges, dtype=float)
        object.__setattr__(self, 'bin_edges', edges)
        if factors.size == 0:
            if edges.size not in (0, 1):
                raise DomainError("an empty distribution takes no bin edges")
            return
        if edges.shape != (factors.size + 1,):
            raise DomainError(f"need {factors.size + 1} bin edges for {factors.size} bins, got {edges.size}")
        if edges[0] < 0 or np.any(np.diff(edges) < 0):
            raise DomainError("bin edges must be non-negative and non-decreasing")
        slack = EDGE_RTOL * max(1.0, float(edges[-1]))
        if np.any(factors < edges[:-1] - slack) or np.any(factors > edges[1:] + slack):
            raise DomainError("every factor must lie inside its bin")

    @property
    def coupled_fraction(self) -> float:
        return float(self.weights.sum())

    def to_dict(self) -> Dict:
        return {
            'bin_edges':          self.bin_edges.tolist(),
            'weights':            self.weights.tolist(),
            'uncoupled_fraction': self.uncoupled_fraction,
            'factors':            self.factors.tolist(),
        }

    @classmethod
    def from_dict(cls, data: Dict) -> 'EnhancementDistribution':
        if 'weights' not in data:
            raise DomainError("distribution record is missing 'weights'")
        if 'bin_edges' not in data and 'factors' not in data:
            raise DomainError("distribution record is missing 'bin_edges'")
        edges = data.get('bin_edges')
        factors = data.get('factors')
        if factors is None:
            edges = np.asarray(edges, dtype=float)
            factors = 0.5 * (edges[:-1] + edges[1:]) if edges.size > 1 else np.empty(0)
        return cls(
            factors            = factors,
            weights            = data['weights'],
            uncoupled_fraction = float(data.get('uncoupled_fraction', 0.0)),
            bin_edges          = edges,
        )


def _edges_around(factors: np.ndarray) -> np.ndarray:
    """Edges halfway between neighbouring factors, closed at the outer factors."""
    if factors.size == 0:
        return np.empty(0)
    inner = 0.5 * (factors[:-1] + factors[1:])
    return np.concatenate([[factors[0]], inner, [factors[-1]]])


def enhancement_distribution(
    grid:        FieldGrid,
    dipole_axis: Tuple[float, float, float],
    F_max:       float,
    region:      Optional[np.ndarray] = None,
    n_bins:      int = DEFAULT_N_BINS,
) -> EnhancementDistribution:
    """
    Histogram of F over coupled dielectric cells, weighted by cell volume.

    region: boolean mask of coupled cells (default: every dielectric cell).
    Dielectric cells outside region count towards uncoupled_fraction.
    """
    axis = np.asarray(dipole_axis, dtype=float)
    if axis.shape != (3,) or abs(np.linalg.norm(axis) - 1.0) > 1e-9:
        raise DomainError(f"dipole_axis must be a unit 3-vector, got {dipole_axis}")
    if not F_max > 0:
        raise DomainError(f"F_max must be positive, got {F_max}")
    if n_bins < 1:
        raise DomainError(f"n_bins must be >= 1, got {n_bins}")

    material = material_mask(grid)
    if not material.any():
        raise DomainError("grid has no dielectric cells")
    coupled = material if region is None else (material & np.asarray(region, dtype=bool))

    ref = grid.E[grid.peak_index()]
    ref_intensity = float(ref @ ref)
    projected = np.einsum('...i,i->...', grid.E, axis) ** 2
    F = F_max * projected[coupled] / ref_intensity

    dV = grid.cell_volume
    total_volume = material.sum() * dV
    uncoupled = float((material & ~coupled).sum() * dV / total_volume)

    if F.size == 0:
        logger.warning("No dielectric cell lies inside the coupled region")
        return EnhancementDistribution(np.empty(0), np.empty(0), uncoupled_fraction=1.0)

    upper = max(F_max, float(F.max()))
    bin_volume, all_edges = np.histogram(F, bins=n_bins, range=(0.0, upper))
    bin_F_sum, _ = np.histogram(F, bins=n_bins, range=(0.0, upper), weights=F)
    occupied = bin_volume > 0
    factors = bin_F_sum[occupied] / bin_volume[occupied]
    weights = bin_volume[occupied] * dV / total_volume
    # each occupied bin absorbs the empty bins above it
    index = np.flatnonzero(occupied)
    edges = np.append(all_edges[index], all_edges[index[-1] + 1])

    logger.info(
        f"Enhancement distribution: {int(F.size)} coupled cells in {int(occupied.sum())} bins, "
        f"uncoupled fraction {uncoupled:.4f}"
    )
    return EnhancementDistribution(factors=factors, weights=weights, uncoupled_fraction=uncoupled, bin_edges=edges)


def average_enhancement(dist: EnhancementDistribution) -> float:
    """Weighted mean Purcell factor over coupled ions only."""
    coupled = dist.coupled_fraction
    if not coupled > 0:
        raise DomainError("every ion is uncoupled; the coupled mean is undefined")
    return float(np.dot(dist.factors, dist.weights) / coupled)


def monte_carlo_enhancement(
    dist:      EnhancementDistribution,
    n_samples: int,
    seed:      int,
) -> Tuple[float, float]:
    """Sample coupled ions from dist; returns (mean, standard error)."""
    if n_samples < 2:
        raise DomainError(f"n_samples must be >= 2, got {n_samples}")
    coupled = dist.coupled_fraction
    if not coupled > 0:
        raise DomainError("every ion is uncoupled; nothing to sample")
    rng = np.random.default_rng(seed)
    samples = rng.choice(dist.factors, size=n_samples, p=dist.weights / coupled)
    mean = float(samples.mean())
    stderr = float(samples.std(ddof=1) / np.sqrt(n_samples))
    return mean, stderr
