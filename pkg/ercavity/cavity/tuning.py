"""
ercavity/cavity/tuning.py
Gas-deposition tuning as a linear resonance shift.

Nitrogen condensing on the cold nanobeam adds an equivalent uniform layer of
thickness t; the resonance moves by sensitivity·t (negative sensitivity =
red shift). First-order model: Q, V_norm and n are unchanged.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass, replace
from typing import List, Tuple

from ercavity.cavity.purcell import CavityMode
from ercavity.errors import DomainError

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class TuningState:
    deposited_thickness: float = 0.0     # m
    sensitivity:         float = 0.0     # Hz per m

    def __post_init__(self):
        if self.deposited_thickness < 0:
            raise DomainError(f"deposited thickness must be >= 0, got {self.deposited_thickness}")

    def deposit(self, thickness: float) -> 'TuningState':
        return replace(self, deposited_thickness=self.deposited_thickness + thickness)

    @property
    def shift(self) -> float:
        return self.sensitivity * self.deposited_thickness


def tuned_resonance(mode: CavityMode, state: TuningState) -> CavityMode:
    """Copy of mode with its resonance frequency shifted by the deposited layer."""
    if state.deposited_thickness == 0:
        return mode
    nu = float(mode.nu0) + state.shift
    if not nu > 0:
        raise DomainError(f"tuned resonance would be non-positive ({nu} Hz)")
    return mode.with_frequency(nu)


def thickness_for_resonance(mode: CavityMode, target_nu: float, sensitivity: float) -> float:
    """Layer thickness that brings the resonance onto target_nu."""
    if sensitivity == 0:
        raise DomainError("sensitivity must be non-zero")
    thickness = (target_nu - float(mode.nu0)) / sensitivity
    if thickness < 0:
        raise DomainError(
            f"target {target_nu:.6g} Hz is on the wrong side of {float(mode.nu0):.6g} Hz for this sensitivity"
        )
    return thickness


def tuning_schedule(
    mode:        CavityMode,
    target_nu:   float,
    sensitivity: float,
    steps:       int = 3,
) -> List[Tuple[TuningState, CavityMode]]:
    """Equal deposition steps ending on target_nu; the resonance approaches it monotonically."""
    if steps < 1:
        raise DomainError(f"steps must be >= 1, got {steps}")
    total = thickness_for_resonance(mode, target_nu, sensitivity)
    state = TuningState(0.0, sensitivity)
    schedule = []
    for _ in range(steps):
        state = state.deposit(total / steps)
        schedule.append((state, tuned_resonance(mode, state)))
    logger.debug(f"Tuning schedule: {steps} steps, total layer {total:.4g} m")
    return schedule
