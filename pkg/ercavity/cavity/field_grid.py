"""
ercavity/cavity/field_grid.py
Discretized cavity mode on a regular 3D grid, and the Purcell mode volume.

Cell (i, j, k) is centred at ((i - nx//2)·dx, (j - ny//2)·dy, (k - nz//2)·dz),
so the centre cell always sits at the origin.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass
from typing import Optional, Tuple

import numpy as np

from ercavity.errors import DomainError, GridValidationError

logger = logging.getLogger(__name__)


@dataclass(frozen=True, eq=False)
class FieldGrid:
    spacing: Tuple[float, float, float]     # m
    E:       np.ndarray                     # (nx, ny, nz, 3), arbitrary common scale
    eps:     np.ndarray                     # (nx, ny, nz), relative permittivity

    def __post_init__(self):
        E   = np.array(self.E, dtype=float, order='C')
        eps = np.array(self.eps, dtype=float, order='C')
        object.__setattr__(self, 'E', E)
        object.__setattr__(self, 'eps', eps)
        object.__setattr__(self, 'spacing', tuple(float(d) for d in self.spacing))
        E.setflags(write=False)
        eps.setflags(write=False)

        if eps.ndim != 3 or E.shape != eps.shape + (3,):
            raise GridValidationError(f"field shape {E.shape} does not match permittivity shape {eps.shape}")
        if any(n < 2 for n in eps.shape):
            raise GridValidationError(f"every grid dimension must be >= 2, got {eps.shape}")
        if len(self.spacing) != 3 or any(not d > 0 for d in self.spacing):
            raise GridValidationError(f"grid spacings must be positive, got {self.spacing}")
        if not np.all(np.isfinite(E)) or not np.all(np.isfinite(eps)):
            raise GridValidationError("field grid contains non-finite values")
        if np.any(eps < 1.0):
            raise GridValidationError(f"permittivity below 1 (min {eps.min():.6g})")
        if not np.max(self.energy_density) > 0:
            raise GridValidationError("field is zero everywhere")

    @property
    def dims(self) -> Tuple[int, int, int]:
        return tuple(int(n) for n in self.eps.shape)

    @property
    def cell_volume(self) -> float:
        dx, dy, dz = self.spacing
        return dx * dy * dz

    @property
    def total_volume(self) -> float:
        return self.cell_volume * self.eps.size

    @property
    def intensity(self) -> np.ndarray:
        """|E|² per cell."""
        return np.einsum('...i,...i->...', self.E, self.E)

    @property
    def energy_density(self) -> np.ndarray:
        """eps·|E|² per cell."""
        return self.eps * self.intensity

    def axis(self, index: int) -> np.ndarray:
        n = self.dims[index]
        return (np.arange(n) - n // 2) * self.spacing[index]

    def coordinates(self) -> Tuple[np.ndarray, np.ndarray, np.ndarray]:
        return np.meshgrid(self.axis(0), self.axis(1), self.axis(2), indexing='ij')

    def peak_index(self) -> Tuple[int, int, int]:
        """Cell maximising eps·|E|²."""
        return tuple(int(i) for i in np.unravel_index(np.argmax(self.energy_density), self.dims))


@dataclass(frozen=True)
class ModeVolume:
    V_physical: float   # m³
    V_norm:     float   # (λ0/n)³ units
    n:          float   # sqrt(eps) at the field maximum
    lambda0:    float


def mode_volume(grid: FieldGrid, lambda0: float) -> ModeVolume:
    """
    Purcell mode volume  V = Σ eps·|E|²·dV / max(eps·|E|²),
    normalized by (λ0/n)³ with n taken at the maximising cell.
    """
    if not lambda0 > 0:
        raise DomainError(f"wavelength must be positive, got {lambda0}")
    u = grid.energy_density
    peak = float(u.max())
    if not peak > 0:
        raise DomainError("mode volume undefined for an all-zero field")
    V = float(u.sum()) * grid.cell_volume / peak
    n = float(np.sqrt(grid.eps[grid.peak_index()]))
    V_norm = V / (lambda0 / n) ** 3
    logger.debug(f"Mode volume {V:.6g} m^3 = {V_norm:.6g} (lambda/n)^3 with n={n:.6g}")
    return ModeVolume(V_physical=V, V_norm=V_norm, n=n, lambda0=lambda0)


def material_mask(grid: FieldGrid, z_extent: Optional[float] = None) -> np.ndarray:
    """Dielectric cells (eps > 1), optionally limited to |z| <= z_extent."""
    mask = grid.eps > 1.0
    if z_extent is not None:
        if not z_extent > 0:
            raise DomainError(f"z_extent must be positive, got {z_extent}")
        z = grid.axis(2)
        mask = mask & (np.abs(z) <= z_extent)[None, None, :]
    return mask
