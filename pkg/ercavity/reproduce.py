"""
ercavity/reproduce.py
The published numbers, recomputed end to end. Each check returns its value,
the target and whether the tolerance held; reproduce-paper prints the table
and exits 1 if anything fails.
"""

from __future__ import annotations

import logging
import time
from dataclasses import dataclass
from typing import Callable, List

import numpy as np

from ercavity.cavity.field_grid import FieldGrid, mode_volume
from ercavity.cavity.purcell import CavityMode, index_for_mode_volume, purcell_factor
from ercavity.cavity.surrogate import surrogate_mode
from ercavity.cavity.transmission import EnsembleLine, cavity_transmission, transmission_spectrum
from ercavity.core import freq_from_wavelength, linewidth_from_Q
from ercavity.ensemble.decay import DetectorConfig, synthesize_decay
from ercavity.ensemble.distribution import (
    EnhancementDistribution,
    average_enhancement,
    enhancement_distribution,
    monte_carlo_enhancement,
)
from ercavity.fitting.decay import fit_decay
from ercavity.fitting.lorentzian import fit_lorentzian
from ercavity.pumping import (
    PumpModel,
    calibrate_return_branching,
    efficiency_vs_purcell,
    integrate,
    steady_state,
)
from ercavity.spectroscopy.absorption import (
    beer_lambert,
    confinement_for_attenuation,
    cooperativity_to_dip,
    dip_to_cooperativity,
)
from ercavity.spectroscopy.rate_chain import (
    branching_ratio,
    effective_purcell_from_lifetimes,
    purcell_lifetime,
    radiative_rate,
)

logger = logging.getLogger(__name__)

LAMBDA0 = 1536e-9
N_YSO = 1.785
Q_MEASURED = 11400
V_NORM = 1.65
V_PHYSICAL = 1.05e-18
TAU_11_4 = 11.4e-3
TAU_BULK_FIT = 10.8e-3
TAU_SHORT = 1.8e-3
SEED = 2016


@dataclass
class Check:
    number:  int
    name:    str
    value:   str
    target:  str
    passed:  bool
    seconds: float = 0.0


def _check_purcell() -> Check:
    F = purcell_factor(CavityMode(LAMBDA0, Q_MEASURED, V_NORM, N_YSO))
    return Check(1, 'Purcell factor', f"{F:.1f}", '517 +/- 2%', abs(F / 517 - 1) <= 0.02)


def _check_linewidth() -> Check:
    kappa = linewidth_from_Q(freq_from_wavelength(LAMBDA0), Q_MEASURED)
    return Check(2, 'Cavity linewidth', f"{kappa / 1e9:.3f} GHz", '17.1 +/- 0.2 GHz', abs(kappa - 17.1e9) <= 0.2e9)


def _check_mode_volume() -> Check:
    n = index_for_mode_volume(V_NORM, LAMBDA0, V_PHYSICAL)
    E = np.zeros((6, 5, 4, 3))
    E[..., 2] = 1.0
    box = FieldGrid(spacing=(1e-7, 2e-7, 3e-7), E=E, eps=np.full((6, 5, 4), 3.2))
    V = mode_volume(box, LAMBDA0).V_physical
    exact = abs(V - box.total_volume) <= 1e-12 * box.total_volume
    return Check(3, 'Mode-volume consistency', f"n={n:.4f}, box V exact={exact}", 'n = 1.785 +/- 0.005',
                 abs(n - 1.785) <= 0.005 and exact)


def _check_rate_chain() -> Check:
    gamma = radiative_rate(1.095e-7, LAMBDA0, N_YSO)
    beta = branching_ratio(10.03, TAU_11_4)
    return Check(4, 'Radiative rate / branching', f"{gamma:.2f} Hz, beta={beta:.4f}",
                 '[9, 11] Hz, 0.114 +/- 0.001', 9.0 <= gamma <= 11.0 and abs(beta - 0.114) <= 0.001)


def _check_lifetime() -> Check:
    tau = purcell_lifetime(TAU_11_4, 116, 0.114)
    reduction = TAU_11_4 / tau
    return Check(5, 'Predicted lifetime', f"{tau * 1e3:.3f} ms (x{reduction:.2f})", '[0.78, 0.92] ms, 13 +/- 1.5',
                 0.78e-3 <= tau <= 0.92e-3 and abs(reduction - 13) <= 1.5)


def _check_inverse_purcell() -> Check:
    F = effective_purcell_from_lifetimes(TAU_11_4, TAU_SHORT, 0.10)
    worst = 0.0
    for F_true in (0.5, 7.0, 53.3, 517.0):
        for beta in (0.01, 0.114, 1.0):
            back = effective_purcell_from_lifetimes(TAU_11_4, purcell_lifetime(TAU_11_4, F_true, beta), beta)
            worst = max(worst, abs(back / F_true - 1))
    return Check(6, 'Inverse Purcell', f"{F:.2f} (round trip {worst:.1e})", '53.3 +/- 0.5, 1e-10',
                 abs(F - 53.3) <= 0.5 and worst <= 1e-10)


def _check_spin_init() -> Check:
    gamma, T_Z = 1.0 / 11e-3, 100e-3
    p = calibrate_return_branching(0.68, gamma, T_Z)
    model = PumpModel(gamma_opt=gamma, T_Z=T_Z, p_return=p)
    eta1, eta6 = efficiency_vs_purcell(model, [1.0, 6.0])
    pumped = PumpModel(gamma_opt=gamma, T_Z=T_Z, p_return=p, R=1e3)
    final = integrate(pumped, 20 * max(1.0 / gamma, T_Z), 5e-5).final
    error = max(abs(a - b) for a, b in zip(final.as_tuple(), steady_state(pumped).as_tuple()))
    return Check(7, 'Spin initialization', f"p={p:.4f}, eta(1)={eta1:.4f}, eta(6)={eta6:.4f}, ode {error:.1e}",
                 'eta(1) 0.680 +/- 0.001, eta(6) 0.91 +/- 0.02, 1e-6',
                 abs(eta1 - 0.68) <= 0.001 and abs(eta6 - 0.91) <= 0.02 and error <= 1e-6)


def _check_dips() -> Check:
    mode = CavityMode(LAMBDA0, Q_MEASURED, V_NORM, N_YSO)
    nu0 = float(mode.nu0)
    dips = [1.0 - cavity_transmission(nu0, mode, EnsembleLine(nu0, 500e6, C)) for C in (0.291, 0.155)]
    worst = max(abs(dip_to_cooperativity(cooperativity_to_dip(C)) - C) / max(C, 1e-300)
                for C in np.linspace(0.01, 100.0, 41))
    return Check(8, 'Transmission dips', f"{dips[0]:.4f}, {dips[1]:.4f} (round trip {worst:.1e})",
                 '0.40 / 0.25 +/- 0.005, 1e-10',
                 abs(dips[0] - 0.40) <= 0.005 and abs(dips[1] - 0.25) <= 0.005 and worst <= 1e-10)


def _check_optical_depth() -> Check:
    direct = beer_lambert(24.5e2, 26e-6, 1.0)
    confinement = confinement_for_attenuation(0.038, 24.5e2, 26e-6)
    return Check(9, 'Optical depth', f"{direct * 100:.2f} %, confinement {confinement:.3f}",
                 '6.2 +/- 0.1 %, 0.61 +/- 0.01', abs(direct - 0.062) <= 0.001 and abs(confinement - 0.61) <= 0.01)


def _check_decay_loop() -> Check:
    beta = 0.1144
    F_fast = (TAU_BULK_FIT / TAU_SHORT - 1.0) / beta
    dist = EnhancementDistribution(factors=[F_fast], weights=[0.5], uncoupled_fraction=0.5)
    det = DetectorConfig(collection_scale=50.0, dark_rate=20.0, rng_seed=SEED)
    trace = synthesize_decay(dist, beta, TAU_BULK_FIT, det, n_pulses=100)
    fit = fit_decay(trace, n_components=2, fixed_tau1=TAU_BULK_FIT)
    tau2 = fit.params['tau2']
    return Check(10, 'Decay loop', f"tau2={tau2 * 1e3:.4f} ms from {trace.total_counts:.0f} counts",
                 '1.8 ms +/- 5 %, >= 1e5 counts',
                 fit.converged and abs(tau2 / TAU_SHORT - 1) <= 0.05 and trace.total_counts >= 1e5)


def _check_lorentzian() -> Check:
    mode = CavityMode(LAMBDA0, Q_MEASURED, V_NORM, N_YSO)
    nu = float(mode.nu0) + np.linspace(-3, 3, 401) * mode.kappa
    worst = 0.0
    for seed in range(20):
        fit = fit_lorentzian(transmission_spectrum(mode, nu, noise=0.01, seed=seed))
        worst = max(worst, abs(fit.derived['Q'] / Q_MEASURED - 1))
    clean = fit_lorentzian(transmission_spectrum(mode, nu, scale=0.9, baseline=0.05))
    expected = {'nu0': float(mode.nu0), 'fwhm': mode.kappa, 'amplitude': 0.9, 'baseline': 0.05}
    exact = max(abs(clean.params[k] / v - 1) for k, v in expected.items())
    return Check(11, 'Fitting robustness', f"worst Q error {worst * 100:.2f} %, clean {exact:.1e}",
                 '2 % over 20 seeds, 1e-6', worst <= 0.02 and exact <= 1e-6)


def _check_averaging() -> Check:
    F_max = 517.0
    grid = surrogate_mode(
        envelope_sigma=None, transverse_waist=None, groove_width=0.0,
        dims=(40, 40, 20), spacing=(50e-9, 50e-9, 57e-9),
    )
    dist = enhancement_distribution(grid, (1.0, 0.0, 0.0), F_max)
    mean = average_enhancement(dist)
    mc_mean, mc_err = monte_carlo_enhancement(dist, 1_000_000, SEED)
    ratio = 116.0 / F_max
    two_level = average_enhancement(EnhancementDistribution([0.0, F_max], [1.0 - ratio, ratio]))
    return Check(12, 'Averaging machinery',
                 f"cos2 mean/F_max={mean / F_max:.8f}, MC {mc_mean:.2f}+/-{mc_err:.2f}, ratio {ratio:.4f} -> {two_level:.3f}",
                 '0.5 +/- 1e-6, 3 stderr, 116',
                 abs(mean / F_max - 0.5) <= 1e-6 and abs(mc_mean - mean) <= 3 * mc_err
                 and abs(ratio - 0.2244) <= 1e-4 and abs(two_level - 116.0) <= 1e-9)


CHECKS: List[Callable[[], Check]] = [
    _check_purcell, _check_linewidth, _check_mode_volume, _check_rate_chain,
    _check_lifetime, _check_inverse_purcell, _check_spin_init, _check_dips,
    _check_optical_depth, _check_decay_loop, _check_lorentzian, _check_averaging,
]


def run_checks() -> List[Check]:
    results = []
    for fn in CHECKS:
        t0 = time.time()
        check = fn()
        check.seconds = time.time() - t0
        logger.info(f"Check {check.number} {check.name}: {'PASS' if check.passed else 'FAIL'} ({check.value})")
        results.append(check)
    return results


def format_table(checks: List[Check]) -> str:
    rows = [f"{'#':>2}  {'check':<28} {'result':<6} {'value':<58} target"]
    for c in checks:
        rows.append(f"{c.number:>2}  {c.name:<28} {'PASS' if c.passed else 'FAIL':<6} {c.value:<58} {c.target}")
    n_pass = sum(c.passed for c in checks)
    rows.append(f"{n_pass}/{len(checks)} checks passed")
    return '\n'.join(rows)
