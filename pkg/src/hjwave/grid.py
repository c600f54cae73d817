"""Uniform periodic grids and the wave functions that live on them."""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .errors import GridError

CONTAINMENT_TOL = 1e-12


@dataclass(frozen=True)
class GridSpec:
    """Nodes x_j = -L + j*dx, j = 0..N-1, dx = 2L/N (the same axis in 2D).

    ``dt=None`` means "use :func:`default_dt`".
    """

    L: float
    N: int
    hbar: float
    dt: float | None = None

    def __post_init__(self):
        if not (math.isfinite(self.L) and self.L > 0):
            raise GridError("L must be positive and finite")
        if self.N < 256 or self.N & (self.N - 1):
            raise GridError("N must be a power of two, at least 256")
        if not (math.isfinite(self.hbar) and self.hbar > 0):
            raise GridError("hbar must be positive")
        if self.dt is not None and not self.dt > 0:
            raise GridError("dt must be positive")

    @property
    def dx(self):
        return 2.0 * self.L / self.N

    @property
    def x(self):
        return -self.L + self.dx * np.arange(self.N)

    @property
    def k(self):
        return 2.0 * np.pi * np.fft.fftfreq(self.N, self.dx)

    def mesh(self):
        return np.meshgrid(self.x, self.x, indexing="ij")

    def max_dt(self, m):
        """Largest step keeping the top kinetic phase per step at pi/2."""
        return m * self.dx**2 / (math.pi * self.hbar)


def default_dt(grid: GridSpec, m: float, omega: float) -> float:
    return min(0.02 / omega, grid.max_dt(m))


@dataclass
class WaveFunctionGrid:
    """Complex amplitudes on a 1D (shape (N,)) or 2D (shape (N, N)) grid."""

    psi: np.ndarray
    L: float
    normalized: bool = False
    meta: dict = field(default_factory=dict)

    @property
    def N(self):
        return self.psi.shape[0]

    @property
    def dim(self):
        return self.psi.ndim

    @property
    def dx(self):
        return 2.0 * self.L / self.N

    @property
    def x(self):
        return -self.L + self.dx * np.arange(self.N)

    @property
    def cell(self):
        return self.dx**self.dim

    def norm(self):
        return float(np.sum(np.abs(self.psi) ** 2) * self.cell)

    def normalize(self):
        return WaveFunctionGrid(self.psi / math.sqrt(self.norm()), self.L, True, dict(self.meta))

    def inner(self, other):
        """<self|other> by the rectangle (trapezoidal on a periodic grid) rule."""
        return complex(np.vdot(self.psi, other.psi) * self.cell)

    def boundary_ratio(self):
        """max |psi|^2 on the outer ring of nodes over the global max."""
        rho = np.abs(self.psi) ** 2
        top = rho.max()
        if self.dim == 1:
            edge = max(rho[0], rho[-1])
        else:
            edge = max(rho[0].max(), rho[-1].max(), rho[:, 0].max(), rho[:, -1].max())
        return float(edge / top) if top > 0 else 0.0

    def check_contained(self, tol=CONTAINMENT_TOL):
        ratio = self.boundary_ratio()
        if ratio > tol:
            raise GridError(
                f"boundary density {ratio:.3g} of the peak exceeds {tol:g}; enlarge L"
            )
