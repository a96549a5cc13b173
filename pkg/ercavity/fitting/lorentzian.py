"""
ercavity/fitting/lorentzian.py
Lorentzian transmission fit and the quality factor it implies.

    T(ν) = baseline + amplitude · (fwhm/2)² / ((ν - nu0)² + (fwhm/2)²)

Frequencies are shifted to the centre of the scan before fitting so the
optimiser works on offsets of order the linewidth, not absolute optical
frequencies.
"""

from __future__ import annotations

import logging
import math

import numpy as np

from ercavity.errors import DomainError
from ercavity.fitting.engine import nlls_fit
from ercavity.models.record import FitResult, Spectrum

logger = logging.getLogger(__name__)

MIN_POINTS = 5
PEAK_SIGNIFICANCE = 5.0     # minimum amplitude/stderr for a peak with free centre and width
MAX_WIDTH_SPANS = 4.0
MIN_WIDTH_SAMPLES = 2.0
PARAM_NAMES = ('nu0', 'fwhm', 'amplitude', 'baseline')


def lorentzian(x: np.ndarray, p: np.ndarray) -> np.ndarray:
    x0, fwhm, amplitude, baseline = p
    hw2 = (0.5 * fwhm) ** 2
    return baseline + amplitude * hw2 / ((x - x0) ** 2 + hw2)


def lorentzian_jacobian(x: np.ndarray, p: np.ndarray) -> np.ndarray:
    x0, fwhm, amplitude, _ = p
    hw = 0.5 * fwhm
    dx = x - x0
    D = dx ** 2 + hw ** 2
    return np.column_stack([
        amplitude * hw ** 2 * 2.0 * dx / D ** 2,
        amplitude * hw * dx ** 2 / D ** 2,
        hw ** 2 / D,
        np.ones_like(x),
    ])


def initial_guess(x: np.ndarray, T: np.ndarray) -> np.ndarray:
    """Peak location and height above the floor; width from the half-maximum crossing span."""
    baseline = float(T.min())
    peak = int(np.argmax(T))
    amplitude = float(T[peak]) - baseline
    above = np.flatnonzero(T >= baseline + 0.5 * amplitude)
    spacing = float(np.min(np.diff(x)))
    fwhm = float(x[above[-1]] - x[above[0]]) if above.size > 1 else 2.0 * spacing
    return np.array([x[peak], max(fwhm, spacing), amplitude, baseline])


def fit_lorentzian(scan: Spectrum) -> FitResult:
    if len(scan) < MIN_POINTS:
        raise DomainError(f"need at least {MIN_POINTS} points for a Lorentzian fit, got {len(scan)}")
    centre = 0.5 * (scan.nu[0] + scan.nu[-1])
    x = scan.nu - centre
    init = initial_guess(x, scan.T)
    span = float(x[-1] - x[0])

    result = nlls_fit(
        lorentzian, x, scan.T, init,
        sigma      = scan.sigma,
        bounds     = [(None, None), (1e-9 * span, None), (None, None), (None, None)],
        names      = PARAM_NAMES,
        jac        = lorentzian_jacobian,
        label      = 'lorentzian',
    )
    problem = _unidentified_peak(result, x, span)
    result.params['nu0'] += centre

    if problem:
        result.converged = False
        result.message = f"no identifiable peak: {problem}"
        logger.warning(f"Lorentzian fit: {result.message}")
    elif result.params['fwhm'] * 2 > span:
        result.warnings.append("scan covers less than two linewidths")

    nu0, fwhm = result.params['nu0'], result.params['fwhm']
    Q = nu0 / fwhm
    rel = math.hypot(result.stderr['nu0'] / nu0, result.stderr['fwhm'] / fwhm)
    result.derived.update(Q=Q, Q_stderr=Q * rel)
    logger.info(f"Lorentzian fit: nu0={nu0:.9g} Hz fwhm={fwhm:.6g} Hz Q={Q:.6g} converged={result.converged}")
    return result


def _unidentified_peak(result: FitResult, x: np.ndarray, span: float) -> str:
    """Why the fitted curve is not a resolved peak inside the scan; empty when it is."""
    amp, amp_err = result.params['amplitude'], result.stderr['amplitude']
    x0, fwhm = result.params['nu0'], result.params['fwhm']
    spacing = float(np.min(np.diff(x)))
    if not math.isfinite(amp_err) or amp <= PEAK_SIGNIFICANCE * amp_err:
        return f"amplitude {amp:.4g} +/- {amp_err:.2g}"
    if not x[0] <= x0 <= x[-1]:
        return f"centre lies {x0:.4g} Hz from the middle of a {span:.4g} Hz scan"
    if fwhm > MAX_WIDTH_SPANS * span:
        return f"width {fwhm:.4g} Hz exceeds {MAX_WIDTH_SPANS:g} scan spans"
    if fwhm < MIN_WIDTH_SAMPLES * spacing:
        return f"width {fwhm:.4g} Hz is below {MIN_WIDTH_SAMPLES:g} sample spacings"
    return ''
