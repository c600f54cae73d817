"""Coherent packets built on the action, the generalized annihilation operator,
and the predicted density peak."""
from __future__ import annotations

import cmath
import math
from dataclasses import dataclass

import numpy as np

from .action import ActionModel
from .errors import DomainError, GridError
from .grid import GridSpec, WaveFunctionGrid
from .qvariables import QMap
from .quantum_grid import GroundStateResult, numeric_action

SOURCES = ("semiclassical", "numeric")


@dataclass(frozen=True)
class CoherentParams:
    hbar: float
    z: complex = 0j
    action_source: str = "semiclassical"

    def __post_init__(self):
        if not (math.isfinite(self.hbar) and self.hbar > 0):
            raise DomainError("hbar must be positive and finite")
        if not cmath.isfinite(complex(self.z)):
            raise DomainError("z must be finite")
        if self.action_source not in SOURCES:
            raise DomainError(f"action_source must be one of {SOURCES}")

    def rotated(self, omega, t):
        """Same packet with the label advanced to exp(-i omega t) z."""
        return CoherentParams(self.hbar, cmath.exp(-1j * omega * t) * self.z, self.action_source)


def action_on_grid(params: CoherentParams, action: ActionModel, x, ground=None):
    """S on the nodes ``x`` for the chosen action source.

    In numeric mode the tail where chi is below 1e-14 of its peak is filled
    with S_cl shifted to be continuous at the mask edge.
    """
    s_cl = action.closed_form(x)
    if params.action_source == "semiclassical":
        return s_cl
    if ground is None:
        raise DomainError("numeric action source needs a ground state")
    if ground.chi.N != len(x):
        raise GridError("ground state lives on a different grid")
    S, mask = numeric_action(ground, params.hbar)
    idx = np.flatnonzero(mask)
    lo, hi = idx[0], idx[-1]
    if not np.all(mask[lo:hi + 1]):
        raise DomainError("ground state is not positive on its core")
    out = S.copy()
    out[:lo] = s_cl[:lo] - s_cl[lo] + S[lo]
    out[hi + 1:] = s_cl[hi + 1:] - s_cl[hi] + S[hi]
    return out


def build_state_1d(params: CoherentParams, action: ActionModel, qmap: QMap, grid: GridSpec,
                   ground: GroundStateResult | None = None) -> WaveFunctionGrid:
    """Normalized exp(-S/hbar + sqrt(2/hbar) sqrt(omega) z Q(x)) on ``grid``."""
    x0 = predict_peak(params, action, qmap, 0.0, ground=ground, grid=grid)
    if abs(x0) > grid.L / 2:
        raise GridError(f"predicted peak {x0:.4g} lies outside L/2 = {grid.L / 2:.4g}; enlarge L")
    x = grid.x
    h = params.hbar
    S = action_on_grid(params, action, x, ground)
    expo = -S / h + math.sqrt(2.0 / h) * math.sqrt(action.omega) * params.z * qmap.closed_form(x)
    expo = expo - expo.real.max()
    state = WaveFunctionGrid(np.exp(expo), grid.L).normalize()
    state.check_contained()
    return state


def _d_dx(psi, dx):
    """4th-order central differences; 2nd-order one-sided at the two edge nodes."""
    d = np.empty_like(psi)
    d[2:-2] = (psi[:-4] - 8.0 * psi[1:-3] + 8.0 * psi[3:-1] - psi[4:]) / (12.0 * dx)
    d[:2] = np.gradient(psi[:4], dx, edge_order=2)[:2]
    d[-2:] = np.gradient(psi[-4:], dx, edge_order=2)[-2:]
    return d


def apply_annihilation(state: WaveFunctionGrid, action: ActionModel, qmap: QMap, hbar: float,
                       ground: GroundStateResult | None = None, source="semiclassical"):
    """alpha psi = sqrt(hbar/2w) dpsi/dQ + (2 hbar w)^(-1/2) dS/dQ psi, unnormalized.

    d/dQ is taken through the chain rule, (Q')^{-1} d/dx.
    """
    if state.dim != 1:
        raise NotImplementedError("the annihilation operator is implemented in 1D only")
    w = action.omega
    x = state.x
    qp = qmap.grad(x)
    if source == "numeric":
        S, mask = numeric_action(ground, hbar)
        S = np.where(mask, S, np.nan)
        sp = np.nan_to_num(_d_dx(S, state.dx))
    else:
        sp = action.grad(x)
    out = (math.sqrt(hbar / (2 * w)) * _d_dx(state.psi, state.dx) + sp * state.psi / math.sqrt(2 * hbar * w)) / qp
    return WaveFunctionGrid(out, state.L, normalized=False)


def eigen_residual(state, action, qmap, hbar, z):
    """||alpha psi - z psi|| / ||psi||."""
    a = apply_annihilation(state, action, qmap, hbar).psi
    return float(np.linalg.norm(a - z * state.psi) / np.linalg.norm(state.psi))


def expected_z(state: WaveFunctionGrid, action: ActionModel, qmap: QMap, hbar: float,
               norm_tol=1e-10) -> complex:
    """<alpha> = <(alpha + alpha^+)/2> + i <(alpha - alpha^+)/2i> on a normalized state."""
    if abs(state.norm() - 1.0) > norm_tol:
        raise ValueError("expected_z needs a normalized state")
    return state.inner(apply_annihilation(state, action, qmap, hbar))


def _dsdq_semiclassical(action, qmap):
    return lambda x: action.grad(x) / qmap.grad(x)


def _dsdq_numeric(ground, qmap, hbar):
    S, mask = numeric_action(ground, hbar)
    x = ground.chi.x
    slope = np.gradient(np.where(mask, S, np.nan), x) / qmap.grad(x)
    keep = np.isfinite(slope)
    xs, ys = x[keep], slope[keep]

    def f(v):
        return np.interp(v, xs, ys)

    return f, xs[0], xs[-1]


def predict_peak(params: CoherentParams, action: ActionModel, qmap: QMap, t: float,
                 ground: GroundStateResult | None = None, grid: GridSpec | None = None) -> float:
    """Position x*(t) with dS/dQ(x*) = sqrt(2 hbar w) Re(exp(-i w t) z)."""
    w = action.omega
    target = math.sqrt(2.0 * params.hbar * w) * (cmath.exp(-1j * w * t) * params.z).real
    if target == 0.0:
        return 0.0
    if params.action_source == "numeric":
        if ground is None:
            raise DomainError("numeric action source needs a ground state")
        f, lo, hi = _dsdq_numeric(ground, qmap, params.hbar)
        if not f(lo) < target < f(hi):
            raise GridError("predicted peak falls outside the resolved ground-state core")
        for _ in range(200):
            mid = 0.5 * (lo + hi)
            lo, hi = (mid, hi) if f(mid) < target else (lo, mid)
        return 0.5 * (lo + hi)

    f = _dsdq_semiclassical(action, qmap)
    sign = math.copysign(1.0, target)
    goal = abs(target)
    lo, hi = 0.0, 1.0
    while f(hi) < goal:
        lo, hi = hi, 2.0 * hi
    for _ in range(100):
        mid = 0.5 * (lo + hi)
        lo, hi = (mid, hi) if f(mid) < goal else (lo, mid)
        if hi - lo <= 1e-8 * hi:
            break
    x = 0.5 * (lo + hi)
    for _ in range(10):
        # d/dx (S'/Q') by a small symmetric difference; f is smooth and increasing
        h = 1e-6 * max(1.0, x)
        step = (f(x) - goal) / ((f(x + h) - f(x - h)) / (2 * h))
        x -= step
        if abs(step) < 1e-15 * max(1.0, x):
            break
    return sign * x
