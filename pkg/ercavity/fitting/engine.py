"""
ercavity/fitting/engine.py
Levenberg-Marquardt least squares with bounds and frozen parameters.

Minimises Σ ((y - model(x, p)) / sigma)². Each trial step solves the
column-scaled damped normal equations

    (Â + λI)·u = ĝ,   Â = D⁻¹JᵀJD⁻¹,  ĝ = D⁻¹Jᵀr,  δ = D⁻¹u,  D = diag(|J_i|)

so damping acts evenly on parameters of very different magnitude. λ starts
at 1e-3 and moves ×10 on a rejected step, ÷10 on an accepted one; a step is
accepted when it does not increase rss. Numerical trouble never raises: the
result comes back with converged=False and a message.
"""

from __future__ import annotations

import logging
from typing import Callable, List, Optional, Sequence, Tuple

import numpy as np

from ercavity.errors import DomainError
from ercavity.models.record import FitResult

logger = logging.getLogger(__name__)

LAMBDA_INIT = 1e-3
LAMBDA_UP = 10.0
LAMBDA_DOWN = 10.0
LAMBDA_MAX = 1e20
MAX_ITER = 500
FTOL = 1e-10        # relative rss change
GTOL = 1e-8         # column-scaled gradient, max norm
XTOL = 1e-12        # relative step
FD_STEP = 6e-6      # ~ cube root of machine epsilon

Model = Callable[[np.ndarray, np.ndarray], np.ndarray]
Jacobian = Callable[[np.ndarray, np.ndarray], np.ndarray]


def nlls_fit(
    model:      Model,
    x:          np.ndarray,
    y:          np.ndarray,
    init:       Sequence[float],
    sigma:      Optional[np.ndarray] = None,
    bounds:     Optional[Sequence[Tuple[float, float]]] = None,
    fixed_mask: Optional[Sequence[bool]] = None,
    names:      Optional[Sequence[str]] = None,
    jac:        Optional[Jacobian] = None,
    max_iter:   int = MAX_ITER,
    label:      str = 'custom',
) -> FitResult:
    """
    model(x, p) -> prediction with the shape of y.
    jac(x, p) -> (len(y), len(p)) derivative of the prediction; central
    differences are used when omitted.
    sigma: per-point standard deviations. When given, stderr is absolute;
    otherwise the covariance is rescaled by rss/dof.
    """
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    p = np.array(init, dtype=float)
    n_par = p.size
    names = list(names) if names is not None else [f"p{i}" for i in range(n_par)]
    if len(names) != n_par:
        raise DomainError(f"{len(names)} names for {n_par} parameters")
    w = _weights(sigma, y)
    lo, hi = _bounds(bounds, n_par)
    if np.any(p < lo) or np.any(p > hi):
        raise DomainError(f"initial parameters {p.tolist()} lie outside the bounds")
    free = ~np.asarray(fixed_mask, dtype=bool) if fixed_mask is not None else np.ones(n_par, dtype=bool)
    if free.shape != (n_par,):
        raise DomainError("fixed_mask must have one entry per parameter")

    def residuals(params: np.ndarray) -> np.ndarray:
        return (y - model(x, params)) * w

    def jacobian(params: np.ndarray) -> np.ndarray:
        full = jac(x, params) if jac is not None else _central_difference(model, x, params, free)
        return full[:, free] * w[:, None]

    def result(params, rss, n_iter, converged, message, history) -> FitResult:
        stderr, grad_norm = _diagnostics(jacobian, residuals, params, free, rss, y.size, sigma is not None)
        if not converged:
            logger.warning(f"{label} fit did not converge: {message}")
        return FitResult(
            params      = dict(zip(names, (float(v) for v in params))),
            stderr      = dict(zip(names, (float(v) for v in stderr))),
            rss         = float(rss),
            n_iter      = n_iter,
            converged   = converged,
            model       = label,
            message     = message,
            grad_norm   = float(grad_norm),
            rss_history = history,
        )

    r = residuals(p)
    rss = float(r @ r)
    history: List[float] = [rss]
    if not np.isfinite(rss):
        return result(p, rss, 0, False, "model is not finite at the initial parameters", history)
    if not free.any():
        return result(p, rss, 0, True, "all parameters fixed", history)

    lam = LAMBDA_INIT
    for it in range(max_iter):
        if rss == 0.0:
            return result(p, rss, it, True, "exact fit", history)
        try:
            J = jacobian(p)
        except (FloatingPointError, ValueError) as e:
            return result(p, rss, it, False, f"jacobian failed: {e}", history)
        if not np.all(np.isfinite(J)):
            return result(p, rss, it, False, "jacobian is not finite", history)
        d = np.sqrt(np.einsum('ij,ij->j', J, J))
        if np.any(d == 0):
            stuck = [n for n, f in zip(np.array(names)[free], d == 0) if f]
            return result(p, rss, it, False, f"singular normal equations: {stuck} do not affect the model",
                          history)
        Js = J / d
        A = Js.T @ Js
        g = Js.T @ r
        grad_norm = float(np.max(np.abs(g)))
        if grad_norm < GTOL:
            return result(p, rss, it, True, "gradient below tolerance", history)

        while True:
            try:
                u = np.linalg.solve(A + lam * np.eye(A.shape[0]), g)
            except np.linalg.LinAlgError:
                return result(p, rss, it, False, "singular normal equations", history)
            step = np.zeros(n_par)
            step[free] = u / d
            trial = np.clip(p + step, lo, hi)
            r_trial = residuals(trial)
            rss_trial = float(r_trial @ r_trial)
            if np.isfinite(rss_trial) and rss_trial <= rss:
                break
            lam *= LAMBDA_UP
            if lam > LAMBDA_MAX:
                return result(p, rss, it + 1, False, "damping exceeded its limit without progress",
                              history)

        predicted = Js @ u
        pred_rel = float(2.0 * (u @ g) - predicted @ predicted) / rss
        actual_rel = (rss - rss_trial) / rss
        moved = float(np.linalg.norm(trial - p))
        scale = float(np.linalg.norm(p)) + XTOL

        p, r, rss = trial, r_trial, rss_trial
        history.append(rss)
        lam = max(lam / LAMBDA_DOWN, 1e-300)
        logger.debug(f"{label} iter {it + 1}: rss={rss:.10g} lambda={lam:.3g}")

        if rss == 0.0:
            return result(p, rss, it + 1, True, "exact fit", history)
        if actual_rel < FTOL and abs(pred_rel) < FTOL:
            return result(p, rss, it + 1, True, "relative rss change below tolerance", history)
        if moved <= XTOL * scale:
            return result(p, rss, it + 1, True, "relative step below tolerance", history)

    return result(p, rss, max_iter, False, f"no convergence in {max_iter} iterations", history)


def _weights(sigma, y: np.ndarray) -> np.ndarray:
    if sigma is None:
        return np.ones_like(y)
    sigma = np.asarray(sigma, dtype=float)
    if sigma.shape != y.shape or np.any(~(sigma > 0)):
        raise DomainError("sigma must match y and be strictly positive")
    return 1.0 / sigma


def _bounds(bounds, n_par: int) -> Tuple[np.ndarray, np.ndarray]:
    if bounds is None:
        return np.full(n_par, -np.inf), np.full(n_par, np.inf)
    pairs = np.array([(-np.inf if a is None else a, np.inf if b is None else b) for a, b in bounds], dtype=float)
    if pairs.shape != (n_par, 2) or np.any(pairs[:, 0] > pairs[:, 1]):
        raise DomainError("bounds must give one (low, high) pair per parameter with low <= high")
    return pairs[:, 0], pairs[:, 1]


def _central_difference(model: Model, x: np.ndarray, p: np.ndarray, free: np.ndarray) -> np.ndarray:
    base = model(x, p)
    J = np.zeros((base.size, p.size))
    for i in np.flatnonzero(free):
        h = FD_STEP * (abs(p[i]) if p[i] != 0 else 1.0)
        up, down = p.copy(), p.copy()
        up[i] += h
        down[i] -= h
        J[:, i] = (model(x, up) - model(x, down)) / (2.0 * h)
    return J


def _diagnostics(jacobian, residuals, p, free, rss, n_points, absolute) -> Tuple[np.ndarray, float]:
    """
    Standard errors (0 for fixed parameters) and column-scaled gradient norm at p.

    The covariance is inverted in the same column-scaled coordinates as the
    step, cov = D⁻¹·pinv(ÂᵀÂ)·D⁻¹, so parameters differing by many orders of
    magnitude keep their weak directions. A parameter the model does not
    depend on gets stderr = inf.
    """
    stderr = np.zeros(p.size)
    n_free = int(free.sum())
    if n_free == 0:
        return stderr, 0.0
    try:
        J = jacobian(p)
        r = residuals(p)
        norms = np.sqrt(np.einsum('ij,ij->j', J, J))
        live = norms > 0
        scale = np.where(live, norms, 1.0)
        Js = J / scale
        cov = np.linalg.pinv(Js.T @ Js) / np.outer(scale, scale)
    except (np.linalg.LinAlgError, ValueError, FloatingPointError):
        stderr[free] = np.nan
        return stderr, np.nan
    if not np.all(np.isfinite(cov)):
        stderr[free] = np.nan
        return stderr, np.nan
    scaled = np.where(live, (J.T @ r) / scale, 0.0)
    grad_norm = float(np.max(np.abs(scaled))) if np.all(np.isfinite(scaled)) else np.nan
    if not absolute:
        dof = n_points - n_free
        cov = cov * (rss / dof) if dof > 0 else np.full_like(cov, np.nan)
    errors = np.sqrt(np.clip(np.diag(cov), 0.0, None))
    stderr[free] = np.where(live, errors, np.inf)
    return stderr, grad_norm
