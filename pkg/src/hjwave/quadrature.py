"""Cached cumulative integrals of smooth integrands on [0, x].

The integrands handled here (action density, regularized Q and u densities)
are analytic on the positive axis and bounded at 0, so Gauss-Legendre panels
on a geometric breakpoint set converge extremely fast. Panels are split until
a low/high order pair agrees to ``tol``.
"""
from __future__ import annotations

from functools import lru_cache

import numpy as np
from scipy.special import roots_legendre

LOW_ORDER = 20
HIGH_ORDER = 40


@lru_cache(maxsize=None)
def _gauss_legendre(order):
    nodes, weights = roots_legendre(order)
    nodes.flags.writeable = False
    weights.flags.writeable = False
    return nodes, weights


def gl_panels(f, a, b, order=HIGH_ORDER):
    """Integrate ``f`` over each panel ``[a[i], b[i]]`` (vectorized)."""
    a = np.asarray(a, dtype=float)
    b = np.asarray(b, dtype=float)
    t, w = _gauss_legendre(order)
    half = 0.5 * (b - a)[..., None]
    mid = 0.5 * (b + a)[..., None]
    y = mid + half * t
    return np.sum(w * f(y), axis=-1) * half[..., 0]


def _refine(f, a, b, tol, depth=0):
    lo = gl_panels(f, np.array([a]), np.array([b]), LOW_ORDER)[0]
    hi = gl_panels(f, np.array([a]), np.array([b]), HIGH_ORDER)[0]
    if abs(hi - lo) <= tol or depth >= 30:
        return [b]
    mid = 0.5 * (a + b)
    return _refine(f, a, mid, tol, depth + 1) + _refine(f, mid, b, tol, depth + 1)


class CumulativeTable:
    """F(x) = integral of f from 0 to x for x >= 0.

    The breakpoints are built eagerly up to ``xmax``; evaluation adds one
    Gauss-Legendre panel from the nearest breakpoint below ``x``. Points past
    ``xmax`` continue on geometric panels from ``xmax``.
    """

    def __init__(self, f, xmax=64.0, first=1e-2, ratio=1.5, tol=1e-13):
        self._f = f
        base = [0.0]
        x = first
        while x < xmax:
            base.append(x)
            x *= ratio
        base.append(xmax)
        nodes = [0.0]
        for a, b in zip(base[:-1], base[1:]):
            nodes.extend(_refine(f, a, b, tol))
        self.nodes = np.array(nodes)
        pieces = gl_panels(f, self.nodes[:-1], self.nodes[1:])
        self.values = np.concatenate([[0.0], np.cumsum(pieces)])
        self.nodes.flags.writeable = False
        self.values.flags.writeable = False
        self.xmax = float(xmax)
        self.ratio = ratio

    def __call__(self, x):
        x = np.asarray(x, dtype=float)
        if np.any(x < 0):
            raise ValueError("CumulativeTable is defined for x >= 0")
        flat = x.ravel()
        out = np.empty_like(flat)
        inside = flat <= self.xmax
        xi = flat[inside]
        k = np.clip(np.searchsorted(self.nodes, xi, side="right") - 1, 0, len(self.nodes) - 1)
        tail = np.zeros_like(xi)
        part = xi > self.nodes[k]
        tail[part] = gl_panels(self._f, self.nodes[k][part], xi[part])
        out[inside] = self.values[k] + tail
        for j in np.flatnonzero(~inside):
            out[j] = self._beyond(flat[j])
        return out.reshape(x.shape) if x.ndim else float(out[0])

    def _beyond(self, x):
        total = self.values[-1]
        a = self.xmax
        while a < x:
            b = min(a * self.ratio, x)
            edges = [a] + _refine(self._f, a, b, 1e-13)
            total += gl_panels(self._f, np.array(edges[:-1]), np.array(edges[1:])).sum()
            a = b
        return total
