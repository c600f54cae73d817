"""Semiclassical action of the imaginary Hamilton-Jacobi equation.

With the ground energy pinned at zero the equation reads
``-(1/2m) S'(x)**2 + V(x) = 0``; its even, increasing solution with S(0) = 0
is ``S(x) = sqrt(2m) * integral_0^|x| sqrt(V)``.
"""
from __future__ import annotations

import math

import numpy as np

from .errors import BranchError, DomainError
from .potential import PotentialSpec, small_oscillation_frequency
from .quadrature import CumulativeTable, gl_panels

MODES = ("quadrature", "closed_form")
# minimum distance of 1 + c*x**2 from the cut (-inf, 0] for complex input
BRANCH_EPS = 1e-12


def _check_finite(x):
    if not np.all(np.isfinite(x)):
        raise DomainError("argument must be finite")


def branch_sqrt(w):
    """Principal sqrt of ``w = 1 + c*x**2``, refusing points on the cut."""
    w = np.asarray(w)
    if np.iscomplexobj(w):
        on_cut = (w.real <= 0) & (np.abs(w.imag) <= BRANCH_EPS * np.maximum(1.0, np.abs(w)))
        if np.any(on_cut):
            raise BranchError("1 + c*x**2 lies on the negative real axis")
    return np.sqrt(w)


class ActionModel:
    """S_cl and its derivative for a :class:`PotentialSpec`.

    Quadrature tables are built at construction; instances are read-only.
    """

    def __init__(self, spec: PotentialSpec, xmax: float = 64.0):
        self.spec = spec
        self.omega_list = (small_oscillation_frequency(spec),)
        root2m = math.sqrt(2.0 * spec.m)
        self._table = CumulativeTable(lambda y: root2m * np.sqrt(spec.V(y)), xmax=xmax)

    @property
    def omega(self):
        return self.omega_list[0]

    @property
    def nodes(self):
        """Breakpoints of the cached quadrature table."""
        return self._table.nodes

    def closed_form(self, x):
        s = self.spec
        x = np.asarray(x, dtype=float)
        if s.c == 0.0:
            return 0.5 * s.m * s.omega * x * x
        # (1 + c x^2)^{3/2} - 1 without cancellation for small c x^2
        return s.m * s.omega / (3.0 * s.c) * np.expm1(1.5 * np.log1p(s.c * x * x))

    def quadrature(self, x):
        return self._table(np.abs(np.asarray(x, dtype=float)))

    def grad(self, x):
        s = self.spec
        return s.m * s.omega * x * branch_sqrt(1.0 + s.c * x * x)


def scl_eval(model: ActionModel, x, mode="closed_form"):
    """S_cl(x) with S_cl(0) = 0, in units of action."""
    _check_finite(x)
    if mode == "closed_form":
        out = model.closed_form(x)
    elif mode == "quadrature":
        out = model.quadrature(x)
    else:
        raise ValueError(f"mode must be one of {MODES}")
    return float(out) if np.ndim(out) == 0 else out


def scl_grad(model: ActionModel, x):
    """dS_cl/dx; complex input uses the principal branch."""
    _check_finite(x)
    out = model.grad(np.asarray(x) if not np.isscalar(x) else x)
    return out.item() if np.ndim(out) == 0 else out


def hj_residual(model: ActionModel, x):
    """-(1/2m) S_cl'**2 + V, identically zero for the exact action."""
    x = np.asarray(x)
    s = model.spec
    return -0.5 / s.m * model.grad(x) ** 2 + s.V(x)


def turning_point(spec: PotentialSpec, energy: float) -> float:
    """Positive root of V(a) = E."""
    half_k = 0.5 * spec.m * spec.omega**2
    a2 = 2.0 * energy / (half_k + math.sqrt(half_k**2 + 4.0 * spec.g * energy))
    return math.sqrt(a2)


def classical_action(spec: PotentialSpec, energy: float, order: int = 64) -> float:
    """I(E) = (1/pi) * integral of sqrt(2m(E - V)) over the allowed interval.

    With x = a*sin(theta), E - V factorizes as cos(theta)**2 times a smooth
    positive function, so the integrand is smooth on [-pi/2, pi/2].
    """
    a = turning_point(spec, energy)
    half_k = 0.5 * spec.m * spec.omega**2

    def integrand(theta):
        s = np.sin(theta)
        inner = half_k * a * a + spec.g * a**4 * (1.0 + s * s)
        return a * np.cos(theta) ** 2 * np.sqrt(2.0 * spec.m * inner)

    total = gl_panels(integrand, np.array([-math.pi / 2]), np.array([math.pi / 2]), order)[0]
    return total / math.pi


def omega_from_action(model: ActionModel, energies=(1e-3, 1e-4, 1e-5), rel_step=1e-3) -> float:
    """dE/dI at I = 0 from small-energy action integrals.

    dI/dE is taken by central differences at each energy, then the frequencies
    are extrapolated to E -> 0 with the interpolating polynomial in E.
    """
    e = np.asarray(energies, dtype=float)
    if e.ndim != 1 or e.size < 1 or np.any(e <= 0) or not np.all(np.isfinite(e)):
        raise ValueError("energies must be finite and strictly positive")
    if len(set(e.tolist())) != e.size:
        raise ValueError("energies must be distinct")
    e = np.sort(e)
    freqs = []
    for E in e:
        h = rel_step * E
        dI = (classical_action(model.spec, E + h) - classical_action(model.spec, E - h)) / (2 * h)
        freqs.append(1.0 / dI)
    if e.size == 1:
        return float(freqs[0])
    coeffs = np.polyfit(e / e[-1], freqs, e.size - 1)
    return float(coeffs[-1])
