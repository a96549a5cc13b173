"""
ercavity/fitting/decay.py
Multi-exponential fit of binned photon counts:

    counts(t) = Σ A_i·exp(-t/tau_i) + background,   t = bin start

Component 1 is the slow one and can be frozen at a known bulk lifetime.
Poisson weights use sigma = sqrt(max(counts, 1)) so empty bins stay finite.
"""

from __future__ import annotations

import logging
from typing import List, Optional, Tuple

import numpy as np

from ercavity.errors import DomainError
from ercavity.fitting.engine import nlls_fit
from ercavity.models.record import DecayTrace, FitResult

logger = logging.getLogger(__name__)

MIN_SIGNAL_BINS = 10
DEGENERATE_RATIO = 1.05


def _names(n_components: int) -> List[str]:
    names = []
    for i in range(1, n_components + 1):
        names += [f"A{i}", f"tau{i}"]
    return names + ['background']


def multi_exponential(t: np.ndarray, p: np.ndarray) -> np.ndarray:
    out = np.full_like(t, p[-1], dtype=float)
    for A, tau in zip(p[0:-1:2], p[1:-1:2]):
        out = out + A * np.exp(-t / tau)
    return out


def multi_exponential_jacobian(t: np.ndarray, p: np.ndarray) -> np.ndarray:
    cols = []
    for A, tau in zip(p[0:-1:2], p[1:-1:2]):
        e = np.exp(-t / tau)
        cols += [e, A * t / tau ** 2 * e]
    cols.append(np.ones_like(t))
    return np.column_stack(cols)


def _log_linear(t: np.ndarray, y: np.ndarray) -> Optional[Tuple[float, float]]:
    """(A, tau) from a weighted straight-line fit of log y; None if the data do not decay."""
    keep = y > 0
    if keep.sum() < 3:
        return None
    slope, intercept = np.polyfit(t[keep], np.log(y[keep]), 1, w=np.sqrt(y[keep]))
    if not slope < 0:
        return None
    return float(np.exp(intercept)), float(-1.0 / slope)


def initial_guess(
    trace:            DecayTrace,
    n_components:     int,
    fixed_tau1:       Optional[float],
    background:       float,
) -> np.ndarray:
    t = trace.times
    y = trace.counts - background
    span = float(t[-1] - t[0]) or trace.bin_width
    tail = t >= t[0] + 0.5 * span

    if fixed_tau1 is not None:
        keep = tail & (y > 0)
        logA = np.log(y[keep]) + t[keep] / fixed_tau1 if keep.any() else np.array([0.0])
        slow = (float(np.exp(np.mean(logA))), fixed_tau1)
    else:
        slow = _log_linear(t[tail], y[tail]) or (max(float(y[0]), 1.0), span)
    params = [slow[0], slow[1]]

    if n_components == 2:
        early = t < t[0] + span / 3.0
        residual = y[early] - slow[0] * np.exp(-t[early] / slow[1])
        fast = _log_linear(t[early], residual)
        if fast is None or fast[1] >= slow[1]:
            fast = (max(float(residual[0]), 1.0), slow[1] / 5.0)
        params += [fast[0], fast[1]]

    params.append(background)
    return np.array(params)


def fit_decay(
    trace:            DecayTrace,
    n_components:     int = 1,
    fixed_tau1:       Optional[float] = None,
    fixed_background: Optional[float] = None,
) -> FitResult:
    if n_components not in (1, 2):
        raise DomainError(f"n_components must be 1 or 2, got {n_components}")
    if fixed_tau1 is not None and not fixed_tau1 > 0:
        raise DomainError(f"fixed_tau1 must be positive, got {fixed_tau1}")
    background = 0.0 if fixed_background is None else float(fixed_background)
    n_signal = int(np.sum(trace.counts > background))
    if n_signal < MIN_SIGNAL_BINS:
        raise DomainError(f"need at least {MIN_SIGNAL_BINS} bins above background, got {n_signal}")

    names = _names(n_components)
    init = initial_guess(trace, n_components, fixed_tau1, background)
    init[0:-1:2] = np.clip(init[0:-1:2], 0.0, None)
    tau_floor = 1e-6 * trace.bin_width
    bounds = [(0.0, None), (tau_floor, None)] * n_components + [(None, None)]
    fixed = [False] * len(names)
    fixed[1] = fixed_tau1 is not None
    fixed[-1] = fixed_background is not None
    sigma = np.sqrt(np.maximum(trace.counts, 1.0))

    result = nlls_fit(
        multi_exponential, trace.times, trace.counts, init,
        sigma      = sigma,
        bounds     = bounds,
        fixed_mask = fixed,
        names      = names,
        jac        = multi_exponential_jacobian,
        label      = f"decay-{n_components}exp",
    )

    if n_components == 2:
        if fixed_tau1 is None and result.params['tau2'] > result.params['tau1']:
            _swap_components(result)
        ratio = result.params['tau1'] / result.params['tau2']
        if max(ratio, 1.0 / ratio) < DEGENERATE_RATIO:
            result.warnings.append(f"degenerate time constants (ratio {max(ratio, 1.0 / ratio):.4f})")
            logger.warning(f"Decay fit: {result.warnings[-1]}")

    taus = ', '.join(f"{k}={v * 1e3:.5g} ms" for k, v in result.params.items() if k.startswith('tau'))
    logger.info(f"Decay fit ({n_components} components): {taus}, converged={result.converged}")
    return result


def _swap_components(result: FitResult) -> None:
    for table in (result.params, result.stderr):
        table['A1'], table['A2'] = table['A2'], table['A1']
        table['tau1'], table['tau2'] = table['tau2'], table['tau1']


def normalize_to_bulk(trace: DecayTrace, result: FitResult) -> Tuple[np.ndarray, np.ndarray]:
    """(times, (counts - background) / A1): curves scaled by the bulk-component coefficient."""
    A1 = result.params.get('A1', 0.0)
    if not A1 > 0:
        raise DomainError("bulk amplitude A1 must be positive to normalize")
    return trace.times, (trace.counts - result.params.get('background', 0.0)) / A1
