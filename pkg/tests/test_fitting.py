"""
tests/test_fitting.py
Levenberg-Marquardt engine, Lorentzian Q extraction and decay fits.
"""

import numpy as np
import pytest

from ercavity.cavity.purcell import CavityMode
from ercavity.cavity.transmission import transmission_spectrum
from ercavity.ensemble.decay import DetectorConfig, synthesize_decay
from ercavity.ensemble.distribution import EnhancementDistribution
from ercavity.errors import DomainError
from ercavity.fitting.decay import fit_decay, multi_exponential, normalize_to_bulk
from ercavity.fitting.engine import nlls_fit
from ercavity.fitting.lorentzian import fit_lorentzian, lorentzian
from ercavity.models.record import DecayTrace, Spectrum

TAU_BULK = 10.8e-3
BETA = 0.1144
F_FAST = (10.8 / 1.8 - 1.0) / BETA
SEED = 2016


def _exp_model(x, p):
    return p[0] * np.exp(-x / p[1]) + p[2]


def _rosenbrock(x, p):
    return np.array([10.0 * (p[1] - p[0] ** 2), 1.0 - p[0]])


def _mode():
    return CavityMode(lambda0=1536e-9, Q=11400, V_norm=1.65, n=1.785)


def _scan(mode, n=201, width=3.0):
    return float(mode.nu0) + np.linspace(-width, width, n) * mode.kappa


def _single(scale=50.0, seed=SEED, poisson=True):
    dist = EnhancementDistribution(factors=[0.0], weights=[1.0])
    det = DetectorConfig(collection_scale=scale, dark_rate=20.0, rng_seed=seed, poisson=poisson)
    return synthesize_decay(dist, BETA, TAU_BULK, det, n_pulses=100)


def _biexp(poisson=True, dark=20.0):
    dist = EnhancementDistribution(factors=[F_FAST], weights=[0.5], uncoupled_fraction=0.5)
    det = DetectorConfig(collection_scale=50.0, dark_rate=dark, rng_seed=SEED, poisson=poisson)
    return synthesize_decay(dist, BETA, TAU_BULK, det, n_pulses=100)


# ── ENGINE ────────────────────────────────────────────────────

class TestEngine:
    def test_linear_model_in_three_iterations(self):
        x = np.arange(1.0, 11.0)
        result = nlls_fit(lambda x, p: p[0] * x, x, 3.0 * x, [1.0], names=['a'])
        assert result.converged
        assert result.n_iter <= 3
        assert result.params['a'] == pytest.approx(3.0, rel=1e-10)

    def test_all_fixed_returns_init(self):
        x = np.linspace(0, 1, 20)
        y = 2.0 * np.exp(-x / 0.3) + 0.1
        init = [1.0, 0.5, 0.0]
        result = nlls_fit(_exp_model, x, y, init, fixed_mask=[True, True, True])
        expected_rss = float(np.sum((y - _exp_model(x, np.array(init))) ** 2))
        assert list(result.params.values()) == init
        assert result.rss == pytest.approx(expected_rss)
        assert result.n_iter == 0

    def test_rosenbrock(self):
        result = nlls_fit(_rosenbrock, np.arange(2.0), np.zeros(2), [-1.2, 1.0])
        assert result.converged
        assert result.n_iter <= 500
        assert [result.params['p0'], result.params['p1']] == pytest.approx([1.0, 1.0], abs=1e-6)

    def test_rss_never_increases(self):
        rng = np.random.default_rng(SEED)
        x = np.linspace(0, 2, 60)
        y = 5.0 * np.exp(-x / 0.4) + 0.3 + 0.05 * rng.standard_normal(x.size)
        result = nlls_fit(_exp_model, x, y, [1.0, 1.0, 0.0])
        assert result.converged
        assert np.all(np.diff(result.rss_history) <= 0)
        assert result.rss == result.rss_history[-1]

    def test_fixed_parameter_does_not_move(self):
        x = np.linspace(0, 2, 60)
        y = 5.0 * np.exp(-x / 0.4) + 0.3
        result = nlls_fit(_exp_model, x, y, [4.0, 0.4, 0.0], fixed_mask=[False, True, False])
        assert result.params['p1'] == 0.4
        assert result.stderr['p1'] == 0.0
        assert result.params['p0'] == pytest.approx(5.0, rel=1e-8)

    def test_bounds_are_respected(self):
        x = np.linspace(0, 2, 60)
        y = 5.0 * np.exp(-x / 0.4) - 0.3
        result = nlls_fit(_exp_model, x, y, [4.0, 0.5, 0.0], bounds=[(0, None), (1e-3, None), (0.0, None)])
        assert result.params['p2'] >= 0.0

    def test_init_outside_bounds(self):
        with pytest.raises(DomainError):
            nlls_fit(_exp_model, np.arange(5.0), np.ones(5), [-1.0, 1.0, 0.0], bounds=[(0, None)] * 3)

    def test_ignored_parameter_reports_non_convergence(self):
        x = np.linspace(0, 1, 10)
        result = nlls_fit(lambda x, p: p[0] * x, x, 2.0 * x + 0.1, [1.0, 1.0])
        assert not result.converged
        assert 'singular' in result.message

    def test_invariant_under_reordering(self):
        rng = np.random.default_rng(SEED)
        x = np.linspace(0, 2, 80)
        y = 5.0 * np.exp(-x / 0.4) + 0.3 + 0.05 * rng.standard_normal(x.size)
        order = rng.permutation(x.size)
        a = nlls_fit(_exp_model, x, y, [1.0, 1.0, 0.0])
        b = nlls_fit(_exp_model, x[order], y[order], [1.0, 1.0, 0.0])
        for name in a.params:
            assert b.params[name] == pytest.approx(a.params[name], rel=1e-6)

    def test_gradient_reported_at_solution(self):
        x = np.linspace(0, 2, 60)
        y = 5.0 * np.exp(-x / 0.4) + 0.3
        result = nlls_fit(_exp_model, x, y, [1.0, 1.0, 0.0])
        assert result.converged
        assert result.grad_norm < 1e-6

    def test_stderr_with_badly_scaled_parameters(self):
        rng = np.random.default_rng(SEED)
        x = np.linspace(0, 1, 50)
        y = 2.0 * x + 0.3 + 0.01 * rng.standard_normal(x.size)
        result = nlls_fit(lambda x, p: p[0] * 1e9 * x + p[1] * 1e-9, x, y, [1e-9, 1e8])
        assert result.converged

        X = np.column_stack([x, np.ones_like(x)])
        coef, rss, *_ = np.linalg.lstsq(X, y, rcond=None)
        cov = float(rss[0]) / (x.size - 2) * np.linalg.inv(X.T @ X)
        assert result.stderr['p0'] == pytest.approx(np.sqrt(cov[0, 0]) / 1e9, rel=1e-6)
        assert result.stderr['p1'] == pytest.approx(np.sqrt(cov[1, 1]) * 1e9, rel=1e-6)


# ── LORENTZIAN ────────────────────────────────────────────────

class TestLorentzian:
    def test_noise_free_exact(self):
        mode = _mode()
        scan = transmission_spectrum(mode, _scan(mode), scale=0.8, baseline=0.05)
        result = fit_lorentzian(scan)
        assert result.converged
        assert result.params['nu0'] == pytest.approx(float(mode.nu0), rel=1e-8)
        assert result.params['fwhm'] == pytest.approx(mode.kappa, rel=1e-8)
        assert result.params['amplitude'] == pytest.approx(0.8, rel=1e-8)
        assert result.derived['Q'] == pytest.approx(11400, rel=1e-8)

    def test_one_percent_noise(self):
        mode = _mode()
        scan = transmission_spectrum(mode, _scan(mode), noise=0.01, seed=SEED)
        result = fit_lorentzian(scan)
        assert result.converged
        assert abs(result.derived['Q'] / 11400 - 1) <= 0.02
        assert result.derived['Q_stderr'] > 0

    def test_flat_spectrum_is_not_a_peak(self):
        nu = _scan(_mode())
        result = fit_lorentzian(Spectrum(nu=nu, T=np.full(nu.size, 0.5)))
        assert not result.converged

    def test_noisy_flat_spectrum_is_not_a_peak(self):
        nu = 195e12 + np.linspace(-50e9, 50e9, 201)
        for seed in range(20):
            rng = np.random.default_rng(seed)
            T = 0.5 * (1.0 + 0.01 * rng.standard_normal(nu.size))
            result = fit_lorentzian(Spectrum(nu=nu, T=T))
            assert not result.converged, f"seed {seed}: {result.params}"

    def test_q_stderr_matches_scatter(self):
        mode = _mode()
        nu = _scan(mode)
        clean = lorentzian(nu, np.array([float(mode.nu0), mode.kappa, 1.0, 0.05]))
        qs, reported = [], []
        for seed in range(100):
            rng = np.random.default_rng(seed)
            result = fit_lorentzian(Spectrum(nu=nu, T=clean + 0.01 * rng.standard_normal(nu.size)))
            assert result.converged
            qs.append(result.derived['Q'])
            reported.append(result.derived['Q_stderr'])
        ratio = np.std(qs, ddof=1) / np.mean(reported)
        assert 0.75 <= ratio <= 1.33

    def test_q_invariant_under_rescaling(self):
        mode = _mode()
        scan = transmission_spectrum(mode, _scan(mode), noise=0.01, seed=SEED)
        scaled = Spectrum(nu=scan.nu, T=3.7 * scan.T)
        assert fit_lorentzian(scaled).derived['Q'] == pytest.approx(fit_lorentzian(scan).derived['Q'], rel=1e-5)

    def test_narrow_scan_warns(self):
        mode = _mode()
        scan = transmission_spectrum(mode, _scan(mode, width=0.6), scale=0.8, baseline=0.05)
        result = fit_lorentzian(scan)
        assert any('two linewidths' in w for w in result.warnings)

    def test_too_few_points(self):
        with pytest.raises(DomainError):
            fit_lorentzian(Spectrum(nu=[1.0, 2.0, 3.0], T=[0.1, 1.0, 0.1]))

    def test_model_peak(self):
        p = np.array([0.0, 2.0, 1.0, 0.1])
        assert lorentzian(np.array([0.0, 1.0]), p).tolist() == pytest.approx([1.1, 0.6])


# ── DECAY ─────────────────────────────────────────────────────

class TestDecayFit:
    def test_single_exponential(self):
        result = fit_decay(_single())
        assert result.converged
        assert abs(result.params['tau1'] / TAU_BULK - 1) <= 0.02

    def test_biexponential_with_fixed_bulk(self):
        trace = _biexp()
        assert trace.total_counts >= 1e5
        result = fit_decay(trace, n_components=2, fixed_tau1=TAU_BULK)
        assert result.converged
        assert result.params['tau1'] == TAU_BULK
        assert abs(result.params['tau2'] / 1.8e-3 - 1) <= 0.05

    def test_noise_free_biexponential_exact(self):
        trace = _biexp(poisson=False, dark=0.0)
        result = fit_decay(trace, n_components=2, fixed_tau1=TAU_BULK)
        bw = trace.bin_width

        def bin_scale(tau):
            return -np.expm1(-bw / tau) * tau / bw

        assert result.params['tau2'] == pytest.approx(1.8e-3, rel=1e-6)
        assert result.params['A1'] == pytest.approx(100 * 50.0 * 0.5 * bin_scale(TAU_BULK), rel=1e-6)
        assert result.params['A2'] == pytest.approx(100 * 50.0 * 0.5 * bin_scale(1.8e-3), rel=1e-6)
        assert abs(result.params['background']) < 1e-6 * trace.counts[0]

    def test_free_biexponential_orders_components(self):
        result = fit_decay(_biexp(), n_components=2)
        assert result.params['tau1'] > result.params['tau2']

    def test_spurious_second_component(self):
        result = fit_decay(_single(), n_components=2)
        degenerate = any('degenerate' in w for w in result.warnings)
        weak = min(result.params[a] - 2 * result.stderr[a] for a in ('A1', 'A2')) <= 0
        assert degenerate or weak

    def test_stderr_scales_with_counts(self):
        scales = np.array([1.0, 10.0, 100.0, 1000.0])
        errors = [fit_decay(_single(scale=s)).stderr['tau1'] for s in scales]
        slope = np.polyfit(np.log(scales), np.log(errors), 1)[0]
        assert slope == pytest.approx(-0.5, abs=0.1)

    def test_tau_stderr_matches_scatter(self):
        fits = [fit_decay(_single(seed=seed)) for seed in range(60)]
        assert all(f.converged for f in fits)
        spread = np.std([f.params['tau1'] for f in fits], ddof=1)
        reported = np.mean([f.stderr['tau1'] for f in fits])
        assert 0.6 <= spread / reported <= 1.6

    def test_multi_exponential_model(self):
        t = np.array([0.0, 1.0])
        assert multi_exponential(t, np.array([2.0, 1.0, 0.5])).tolist() == pytest.approx([2.5, 2 * np.exp(-1) + 0.5])

    def test_normalize_to_bulk(self):
        trace = _biexp(poisson=False, dark=0.0)
        result = fit_decay(trace, n_components=2, fixed_tau1=TAU_BULK)
        times, norm = normalize_to_bulk(trace, result)
        assert times.shape == norm.shape
        assert norm[-1] == pytest.approx(np.exp(-times[-1] / TAU_BULK), rel=1e-4)

    def test_too_few_signal_bins(self):
        with pytest.raises(DomainError):
            fit_decay(DecayTrace(bin_width=1e-3, counts=np.r_[np.ones(5) * 10, np.zeros(20)]))

    def test_component_count(self):
        with pytest.raises(DomainError):
            fit_decay(_single(), n_components=3)
