"""
ercavity/pumping.py
Three-level optical pumping between two Zeeman ground levels |1>, |2> and
an optically excited level |e>.

    dne/dt = R·(n1 - ne) - γ·ne
    dn2/dt = γ·(1 - p)·ne - W·(n2 - n1)
    dn1/dt = -(dne/dt + dn2/dt)

The pump drives |1> <-> |e> at rate R in both directions; an excited ion
returns to |1> with probability p and otherwise lands in |2>. Spin
relaxation pulls the ground populations together with W = 1/(2·T_Z), so the
population difference decays at 1/T_Z. Efficiency η is n2.
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass, replace
from typing import List, Sequence, Tuple

import numpy as np
from scipy.optimize import bisect

from ercavity.errors import ConfigurationError, DomainError

logger = logging.getLogger(__name__)

STRONG_PUMP_RATIO = 1e6
CALIBRATION_XTOL = 1e-9
POPULATION_TOL = 1e-9
THERMAL = (0.5, 0.5, 0.0)


@dataclass(frozen=True)
class PumpState:
    n1: float
    n2: float
    ne: float

    @property
    def efficiency(self) -> float:
        return self.n2

    def as_tuple(self) -> Tuple[float, float, float]:
        return (self.n1, self.n2, self.ne)


@dataclass(frozen=True)
class PumpModel:
    gamma_opt:   float                              # Hz, total excited-state decay rate
    T_Z:         float                              # s, Zeeman population lifetime
    p_return:    float                              # probability of decaying back to |1>
    R:           float = 0.0                        # Hz
    populations: Tuple[float, float, float] = THERMAL

    def __post_init__(self):
        if not self.gamma_opt > 0:
            raise DomainError(f"gamma_opt must be positive, got {self.gamma_opt}")
        if not self.T_Z > 0:
            raise DomainError(f"T_Z must be positive, got {self.T_Z}")
        if not 0 <= self.p_return <= 1:
            raise DomainError(f"p_return must lie in [0, 1], got {self.p_return}")
        if not (self.R >= 0 and math.isfinite(self.R)):
            raise DomainError(f"pump rate must be finite and >= 0, got {self.R}")
        pops = tuple(float(x) for x in self.populations)
        if len(pops) != 3 or min(pops) < 0 or abs(sum(pops) - 1.0) > POPULATION_TOL:
            raise DomainError(f"populations must be three non-negative values summing to 1, got {pops}")
        object.__setattr__(self, 'populations', pops)

    @property
    def W(self) -> float:
        return 0.5 / self.T_Z

    def rate_matrix(self) -> np.ndarray:
        """M with d(n1, n2, ne)/dt = M·(n1, n2, ne); every column sums to 0."""
        R, W, g, p = self.R, self.W, self.gamma_opt, self.p_return
        return np.array([
            [-(R + W),  W,  R + g * p],
            [W,        -W,  g * (1.0 - p)],
            [R,        0.0, -(R + g)],
        ])


def strong_pump(model: PumpModel) -> PumpModel:
    return replace(model, R=STRONG_PUMP_RATIO * model.gamma_opt)


def steady_state(model: PumpModel) -> PumpState:
    """Exact algebraic fixed point of the rate equations."""
    a = model.R / (model.R + model.gamma_opt)
    W = model.W
    transfer = model.gamma_opt * (1.0 - model.p_return) * a
    denom = W * (2.0 + a) + transfer
    if denom == 0:
        raise DomainError("steady state is not unique: no relaxation and no transfer to |2>")
    return PumpState(n1=W / denom, n2=(W + transfer) / denom, ne=a * W / denom)


@dataclass(frozen=True)
class PumpTrajectory:
    times:       np.ndarray     # (n_steps + 1,)
    populations: np.ndarray     # (n_steps + 1, 3) columns n1, n2, ne

    @property
    def final(self) -> PumpState:
        return PumpState(*(float(x) for x in self.populations[-1]))


def integrate(model: PumpModel, duration: float, dt: float) -> PumpTrajectory:
    """
    Classical fourth-order Runge-Kutta from model.populations. For a linear
    system one RK4 step is the propagator I + hM + (hM)²/2 + (hM)³/6 + (hM)⁴/24.
    The last step is shortened so the trajectory ends exactly at duration.
    """
    if not duration >= 0:
        raise DomainError(f"duration must be >= 0, got {duration}")
    if not dt > 0:
        raise ConfigurationError(f"time step must be positive, got {dt}")
    fastest = min(1.0 / model.R if model.R > 0 else math.inf, 1.0 / model.gamma_opt, model.T_Z)
    if not dt < fastest / 10:
        raise ConfigurationError(
            f"time step {dt:.3g} s is too coarse; it must be below {fastest / 10:.3g} s"
        )

    y0 = np.array(model.populations)
    n_full = int(math.floor(duration / dt + 1e-9))
    remainder = duration - n_full * dt
    steps = [dt] * n_full + ([remainder] if remainder > 1e-9 * dt else [])

    M = model.rate_matrix()
    propagators = {}
    times = np.empty(len(steps) + 1)
    pops = np.empty((len(steps) + 1, 3))
    times[0], pops[0] = 0.0, y0
    for i, h in enumerate(steps, start=1):
        P = propagators.get(h)
        if P is None:
            P = _rk4_propagator(M, h)
            propagators[h] = P
        pops[i] = P @ pops[i - 1]
        times[i] = times[i - 1] + h

    logger.debug(f"Integrated {len(steps)} RK4 steps of {dt:.3g} s; final n2={pops[-1, 1]:.9f}")
    return PumpTrajectory(times=times, populations=pops)


def _rk4_propagator(M: np.ndarray, h: float) -> np.ndarray:
    A = h * M
    P = np.eye(3)
    term = np.eye(3)
    for k in range(1, 5):
        term = term @ A / k
        P = P + term
    return P


def _strong_efficiency(p: float, gamma_opt: float, T_Z: float) -> float:
    return steady_state(strong_pump(PumpModel(gamma_opt=gamma_opt, T_Z=T_Z, p_return=p))).efficiency


def achievable_efficiency_range(gamma_opt: float, T_Z: float) -> Tuple[float, float]:
    """Strong-pump efficiency at p = 1 and p = 0."""
    return _strong_efficiency(1.0, gamma_opt, T_Z), _strong_efficiency(0.0, gamma_opt, T_Z)


def calibrate_return_branching(eta_target: float, gamma_opt: float, T_Z: float) -> float:
    """p_return at which the strong-pump steady state reaches eta_target."""
    lo, hi = achievable_efficiency_range(gamma_opt, T_Z)
    if not lo <= eta_target <= hi:
        raise DomainError(
            f"efficiency {eta_target} is not achievable; the strong-pump range is [{lo:.6f}, {hi:.6f}]"
        )
    p = bisect(lambda q: _strong_efficiency(q, gamma_opt, T_Z) - eta_target, 0.0, 1.0, xtol=CALIBRATION_XTOL)
    logger.info(f"Calibrated p_return={p:.6f} for eta={eta_target}")
    return float(p)


def efficiency_vs_purcell(model: PumpModel, reduction_factors: Sequence[float]) -> List[float]:
    """Strong-pump η with the optical decay rate scaled by each lifetime reduction factor."""
    etas = []
    for k in reduction_factors:
        if not k >= 1:
            raise DomainError(f"lifetime reduction factors must be >= 1, got {k}")
        scaled = strong_pump(replace(model, gamma_opt=k * model.gamma_opt))
        etas.append(steady_state(scaled).efficiency)
    return etas
