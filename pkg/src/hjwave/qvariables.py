"""The multiplicatively evolving coordinate Q(x) of the 1D quartic family.

Q is fixed by ln Q = ln x + integral_0^x [omega sqrt(m) / sqrt(2V(y)) - 1/y] dy,
which makes it odd with Q'(0) = 1 and gives the closed form
Q(x) = 2x / (1 + sqrt(1 + c x**2)).
"""
from __future__ import annotations

import math

import numpy as np

from .action import branch_sqrt
from .errors import ConvergenceError, DomainError, RangeError
from .potential import PotentialSpec
from .quadrature import CumulativeTable


class QMap:
    def __init__(self, spec: PotentialSpec, xmax: float = 64.0):
        self.spec = spec
        w_root_m = spec.omega * math.sqrt(spec.m)
        # bounded at 0: sqrt(2V) ~ sqrt(m) omega y
        self._log_table = CumulativeTable(
            lambda y: w_root_m / np.sqrt(2.0 * spec.V(y)) - 1.0 / y, xmax=xmax
        )

    @property
    def bound(self):
        """sup |Q|; infinite for the harmonic case."""
        c = self.spec.c
        return math.inf if c == 0 else 2.0 / math.sqrt(c)

    def closed_form(self, x):
        return 2.0 * x / (1.0 + branch_sqrt(1.0 + self.spec.c * x * x))

    def quadrature(self, x):
        x = np.asarray(x, dtype=float)
        ax = np.abs(x)
        with np.errstate(divide="ignore"):
            out = np.sign(x) * np.exp(np.log(ax) + self._log_table(ax))
        return out

    def grad(self, x):
        s = branch_sqrt(1.0 + self.spec.c * x * x)
        return 2.0 / (s * (1.0 + s))

    def inverse_closed_form(self, q):
        """x with Q(x) = q, solved algebraically."""
        return q / (1.0 - 0.25 * self.spec.c * q * q)


def _finite(x):
    if not np.all(np.isfinite(x)):
        raise DomainError("argument must be finite")


def q_eval(qmap: QMap, x, mode="closed_form"):
    _finite(x)
    if mode == "closed_form":
        out = qmap.closed_form(np.asarray(x) if not np.isscalar(x) else x)
    elif mode == "quadrature":
        if np.iscomplexobj(x):
            raise DomainError("quadrature mode is defined on the real axis")
        out = qmap.quadrature(x)
    else:
        raise ValueError("mode must be 'quadrature' or 'closed_form'")
    return out.item() if np.ndim(out) == 0 else out


def q_grad(qmap: QMap, x):
    _finite(x)
    out = qmap.grad(np.asarray(x) if not np.isscalar(x) else x)
    return out.item() if np.ndim(out) == 0 else out


def _invert_scalar(qmap, q, tol):
    if q == 0.0:
        return 0.0
    target = abs(q)
    lo, hi = 0.0, max(1.0, target)
    while qmap.closed_form(hi) < target:
        lo, hi = hi, 2.0 * hi
    for _ in range(200):
        mid = 0.5 * (lo + hi)
        if qmap.closed_form(mid) < target:
            lo = mid
        else:
            hi = mid
        if hi - lo <= 1e-6 * hi:
            break
    x = 0.5 * (lo + hi)
    for _ in range(20):
        step = (qmap.closed_form(x) - target) / qmap.grad(x)
        x -= step
        if abs(step) <= 1e-16 * max(1.0, x):
            break
    if abs(qmap.closed_form(x) - target) > tol * max(1.0, target):
        raise ConvergenceError(f"q_invert did not reach |Q(x) - q| <= {tol:g} for q = {q!r}")
    return math.copysign(x, q)


def q_invert(qmap: QMap, q, tol=1e-12):
    """Unique x with Q(x) = q (bisection, then Newton polish)."""
    qa = np.asarray(q, dtype=float)
    _finite(qa)
    if np.any(np.abs(qa) >= qmap.bound):
        raise RangeError(f"|q| must be below the bound 2/sqrt(c) = {qmap.bound:.17g}")
    out = np.vectorize(lambda v: _invert_scalar(qmap, float(v), tol), otypes=[float])(qa)
    return float(out) if out.ndim == 0 else out
