"""
tests/test_ensemble.py
Purcell-enhancement distribution over the mode and the decay-trace forward model.
"""

import numpy as np
import pytest

from ercavity.cavity.field_grid import FieldGrid, material_mask
from ercavity.cavity.surrogate import surrogate_mode
from ercavity.ensemble.decay import DetectorConfig, decay_rates, expected_decay, synthesize_decay
from ercavity.ensemble.distribution import (
    EnhancementDistribution,
    average_enhancement,
    enhancement_distribution,
    monte_carlo_enhancement,
)
from ercavity.errors import ConfigurationError, DomainError

X_AXIS = (1.0, 0.0, 0.0)
TAU_BULK = 10.8e-3
BETA = 0.1144
F_FAST = (10.8 / 1.8 - 1.0) / BETA      # puts the fast component at exactly 1.8 ms


def _uniform_grid(component=0):
    E = np.zeros((4, 4, 4, 3))
    E[..., component] = 1.0
    return FieldGrid(spacing=(1e-7, 1e-7, 1e-7), E=E, eps=np.full((4, 4, 4), 3.2))


@pytest.fixture(scope='module')
def cos2_grid():
    return surrogate_mode(envelope_sigma=None, transverse_waist=None, groove_width=0.0,
                          dims=(40, 40, 20), spacing=(50e-9, 50e-9, 57e-9))


def _two_point(F=F_FAST):
    return EnhancementDistribution(factors=[F], weights=[0.5], uncoupled_fraction=0.5)


def _clean(**overrides):
    fields = dict(poisson=False, collection_scale=1.0, dark_rate=0.0)
    fields.update(overrides)
    return DetectorConfig(**fields)


# ── DISTRIBUTION ──────────────────────────────────────────────

class TestEnhancementDistribution:
    def test_uniform_field_single_bin_at_max(self):
        dist = enhancement_distribution(_uniform_grid(), X_AXIS, F_max=517.0)
        assert dist.factors.tolist() == pytest.approx([517.0])
        assert dist.weights.tolist() == pytest.approx([1.0])
        assert dist.uncoupled_fraction == 0.0

    def test_orthogonal_dipole_sees_nothing(self):
        dist = enhancement_distribution(_uniform_grid(component=1), X_AXIS, F_max=517.0)
        assert average_enhancement(dist) == 0.0

    def test_cos2_mode_averages_to_half(self, cos2_grid):
        dist = enhancement_distribution(cos2_grid, X_AXIS, F_max=517.0)
        assert average_enhancement(dist) == pytest.approx(517.0 / 2, rel=1e-12)

    def test_mean_independent_of_bin_count(self, cos2_grid):
        coarse = enhancement_distribution(cos2_grid, X_AXIS, F_max=517.0, n_bins=3)
        fine = enhancement_distribution(cos2_grid, X_AXIS, F_max=517.0, n_bins=200)
        assert average_enhancement(coarse) == pytest.approx(average_enhancement(fine), rel=1e-12)

    def test_weights_sum_to_one(self):
        grid = surrogate_mode(dims=(33, 33, 40), spacing=(50e-9, 50e-9, 57e-9))
        dist = enhancement_distribution(grid, X_AXIS, F_max=517.0)
        assert dist.coupled_fraction + dist.uncoupled_fraction == pytest.approx(1.0, abs=1e-12)
        assert np.all(np.diff(dist.factors) > 0)
        assert dist.factors.max() <= 517.0 * (1 + 1e-12)

    def test_region_splits_off_uncoupled_ions(self, cos2_grid):
        region = material_mask(cos2_grid, z_extent=200e-9)
        dist = enhancement_distribution(cos2_grid, X_AXIS, F_max=517.0, region=region)
        expected = 1.0 - region.sum() / material_mask(cos2_grid).sum()
        assert dist.uncoupled_fraction == pytest.approx(expected, rel=1e-12)
        assert 0 < dist.uncoupled_fraction < 1

    def test_empty_region_is_fully_uncoupled(self, cos2_grid):
        region = np.zeros(cos2_grid.dims, dtype=bool)
        dist = enhancement_distribution(cos2_grid, X_AXIS, F_max=517.0, region=region)
        assert dist.uncoupled_fraction == 1.0
        with pytest.raises(DomainError):
            average_enhancement(dist)

    def test_quoted_average(self):
        dist = EnhancementDistribution(factors=[0.0, 517.0], weights=[1 - 116 / 517, 116 / 517])
        assert average_enhancement(dist) == pytest.approx(116.0)

    @pytest.mark.parametrize("axis", [(1.0, 1.0, 0.0), (0.0, 0.0, 0.0)])
    def test_non_unit_axis(self, axis):
        with pytest.raises(DomainError):
            enhancement_distribution(_uniform_grid(), axis, F_max=517.0)

    def test_non_positive_fmax(self):
        with pytest.raises(DomainError):
            enhancement_distribution(_uniform_grid(), X_AXIS, F_max=0.0)

    def test_invariants(self):
        with pytest.raises(DomainError):
            EnhancementDistribution(factors=[1.0, 2.0], weights=[0.5, 0.4])
        with pytest.raises(DomainError):
            EnhancementDistribution(factors=[2.0, 1.0], weights=[0.5, 0.5])
        with pytest.raises(DomainError):
            EnhancementDistribution(factors=[1.0, 2.0], weights=[1.5, -0.5])

    def test_bin_edges_enclose_factors(self, cos2_grid):
        dist = enhancement_distribution(cos2_grid, X_AXIS, F_max=517.0, n_bins=40)
        edges = dist.bin_edges
        assert edges.shape == (dist.factors.size + 1,)
        assert np.all(np.diff(edges) > 0)
        assert np.all(dist.factors >= edges[:-1] - 1e-9) and np.all(dist.factors <= edges[1:] + 1e-9)
        assert edges[-1] == pytest.approx(517.0)

    def test_edge_invariants(self):
        with pytest.raises(DomainError):
            EnhancementDistribution(factors=[1.0, 2.0], weights=[0.5, 0.5], bin_edges=[0.0, 3.0])
        with pytest.raises(DomainError):
            EnhancementDistribution(factors=[1.0, 2.0], weights=[0.5, 0.5], bin_edges=[0.0, 0.5, 3.0])

    def test_dict_round_trip(self):
        dist = _two_point()
        again = EnhancementDistribution.from_dict(dist.to_dict())
        assert np.array_equal(again.factors, dist.factors)
        assert again.uncoupled_fraction == dist.uncoupled_fraction
        with pytest.raises(DomainError):
            EnhancementDistribution.from_dict({'factors': [1.0]})


class TestMonteCarlo:
    def test_agrees_with_quadrature(self, cos2_grid):
        dist = enhancement_distribution(cos2_grid, X_AXIS, F_max=517.0)
        mean, stderr = monte_carlo_enhancement(dist, n_samples=100_000, seed=2016)
        assert abs(mean - average_enhancement(dist)) < 4 * stderr

    def test_seeded(self):
        dist = EnhancementDistribution(factors=[0.0, 517.0], weights=[0.5, 0.5])
        assert monte_carlo_enhancement(dist, 1000, seed=1) == monte_carlo_enhancement(dist, 1000, seed=1)

    def test_needs_coupled_ions(self):
        dist = EnhancementDistribution(factors=[], weights=[], uncoupled_fraction=1.0)
        with pytest.raises(DomainError):
            monte_carlo_enhancement(dist, 100, seed=1)


# ── DECAY SYNTHESIS ───────────────────────────────────────────

class TestDecayRates:
    def test_uncoupled_population_appended(self):
        rates, weights = decay_rates(_two_point(), BETA, TAU_BULK)
        assert 1.0 / rates[0] == pytest.approx(1.8e-3)
        assert 1.0 / rates[1] == pytest.approx(TAU_BULK)
        assert weights.tolist() == [0.5, 0.5]

    @pytest.mark.parametrize("beta", [0.0, 1.2])
    def test_beta_domain(self, beta):
        with pytest.raises(DomainError):
            decay_rates(_two_point(), beta, TAU_BULK)


class TestSynthesis:
    def test_single_exponential_is_exact(self):
        dist = EnhancementDistribution(factors=[0.0], weights=[1.0])
        counts = expected_decay(dist, BETA, TAU_BULK, _clean())
        ratios = np.diff(np.log(counts))
        assert ratios == pytest.approx(np.full(ratios.shape, -0.2e-3 / TAU_BULK), rel=1e-9)

    def test_first_bin_is_bin_average(self):
        dist = EnhancementDistribution(factors=[0.0], weights=[1.0])
        counts = expected_decay(dist, BETA, TAU_BULK, _clean(collection_scale=100.0))
        rate, bw = 1.0 / TAU_BULK, 0.2e-3
        assert counts[0] == pytest.approx(100.0 * -np.expm1(-rate * bw) / (rate * bw), rel=1e-12)

    def test_biexponential_tail(self):
        counts = expected_decay(_two_point(), BETA, TAU_BULK, _clean(n_bins=250))
        tail = np.diff(np.log(counts[-50:]))
        # fast component has died by 40 ms, only the bulk rate remains
        assert tail == pytest.approx(np.full(tail.shape, -0.2e-3 / TAU_BULK), rel=1e-6)
        assert counts[0] / counts[-1] > np.exp(50e-3 / TAU_BULK)

    def test_monotone_and_convex_without_dark_counts(self):
        counts = expected_decay(_two_point(), BETA, TAU_BULK, _clean())
        assert np.all(np.diff(counts) < 0)
        assert np.all(np.diff(counts, 2) > 0)

    def test_linear_in_pulses(self):
        det = _clean(dark_rate=20.0)
        one = expected_decay(_two_point(), BETA, TAU_BULK, det, n_pulses=1)
        many = expected_decay(_two_point(), BETA, TAU_BULK, det, n_pulses=7)
        assert many == pytest.approx(7 * one, rel=1e-14)

    def test_linear_in_collection_scale(self):
        unit = expected_decay(_two_point(), BETA, TAU_BULK, _clean())
        for scale in (0.25, 3.0, 1e4):
            scaled = expected_decay(_two_point(), BETA, TAU_BULK, _clean(collection_scale=scale))
            assert scaled == pytest.approx(scale * unit, rel=1e-12)

    def test_dark_counts_floor(self):
        det = _clean(collection_scale=0.0, dark_rate=50.0)
        counts = expected_decay(_two_point(), BETA, TAU_BULK, det, n_pulses=10)
        assert counts == pytest.approx(np.full(250, 10 * 50.0 * 0.2e-3))

    def test_pulse_weighting_favours_fast_ions(self):
        population = expected_decay(_two_point(), BETA, TAU_BULK, _clean())
        pulse = expected_decay(_two_point(), BETA, TAU_BULK, _clean(weighting='pulse'))
        assert pulse[0] > population[0]
        assert pulse[-1] == pytest.approx(population[-1], rel=1e-6)

    def test_seeded_synthesis_is_deterministic(self):
        det = DetectorConfig(collection_scale=50.0, dark_rate=20.0, rng_seed=2016)
        a = synthesize_decay(_two_point(), BETA, TAU_BULK, det, n_pulses=100)
        b = synthesize_decay(_two_point(), BETA, TAU_BULK, det, n_pulses=100)
        assert np.array_equal(a.counts, b.counts)
        assert np.all(a.counts == np.round(a.counts))

    def test_different_seeds_differ(self):
        base = dict(collection_scale=50.0, dark_rate=20.0)
        a = synthesize_decay(_two_point(), BETA, TAU_BULK, DetectorConfig(rng_seed=1, **base), n_pulses=100)
        b = synthesize_decay(_two_point(), BETA, TAU_BULK, DetectorConfig(rng_seed=2, **base), n_pulses=100)
        assert not np.array_equal(a.counts, b.counts)

    def test_poisson_requires_seed(self):
        with pytest.raises(ConfigurationError):
            synthesize_decay(_two_point(), BETA, TAU_BULK, DetectorConfig())

    def test_trace_longer_than_dark_window(self):
        det = _clean(n_bins=400)
        with pytest.raises(ConfigurationError):
            expected_decay(_two_point(), BETA, TAU_BULK, det)

    def test_detector_validation(self):
        with pytest.raises(ConfigurationError):
            DetectorConfig(pulse_duration=80e-3)
        with pytest.raises(ConfigurationError):
            DetectorConfig(weighting='uniform')
        with pytest.raises(ConfigurationError):
            DetectorConfig(bin_width=0.0)
