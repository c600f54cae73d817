"""Harmonic-plus-quartic potential family, in 1D and as a radial 2D potential."""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import DomainError

DIMS = ("1", "2-radial")


@dataclass(frozen=True)
class PotentialSpec:
    """V(x) = m*omega**2*x**2/2 + g*x**4, minimum V(0) = 0 at the origin.

    For ``dim == "2-radial"`` the same formula is read as a function of the
    radius r >= 0.
    """

    m: float = 1.0
    omega: float = 1.0
    g: float = 0.0
    dim: str = "1"

    def __post_init__(self):
        for name in ("m", "omega", "g"):
            if not math.isfinite(getattr(self, name)):
                raise DomainError(f"{name} must be finite")
        if self.m <= 0 or self.omega <= 0:
            raise DomainError("m and omega must be positive")
        if self.g < 0:
            raise DomainError("g must be non-negative")
        if self.dim not in DIMS:
            raise DomainError(f"dim must be one of {DIMS}, got {self.dim!r}")

    @property
    def c(self) -> float:
        """Dimensionless-per-length**2 coupling 2g/(m omega**2)."""
        return 2.0 * self.g / (self.m * self.omega**2)

    @property
    def curvature(self) -> float:
        """V''(0)."""
        return self.m * self.omega**2

    # raw evaluators, no validation; accept real or complex arrays
    def V(self, x):
        x2 = x * x
        return 0.5 * self.m * self.omega**2 * x2 + self.g * x2 * x2

    def dV(self, x):
        return self.m * self.omega**2 * x + 4.0 * self.g * x * x * x


def eval_potential(spec: PotentialSpec, x):
    """Return ``(V(x), V'(x))`` for real scalar or array input."""
    xa = np.asarray(x, dtype=float)
    if not np.all(np.isfinite(xa)):
        raise DomainError("potential argument must be finite")
    if spec.dim == "2-radial" and np.any(xa < 0):
        raise DomainError("radius must be non-negative")
    value, grad = spec.V(xa), spec.dV(xa)
    if xa.ndim == 0:
        return float(value), float(grad)
    return value, grad


def small_oscillation_frequency(spec: PotentialSpec) -> float:
    return math.sqrt(spec.curvature / spec.m)
