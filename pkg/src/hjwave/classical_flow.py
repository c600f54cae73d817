"""Complex classical flow dxi/dt = -(i/m) S_cl'(xi) and the Q rotation law."""
from __future__ import annotations

import cmath
import math
from dataclasses import dataclass

import numpy as np

from . import kernels
from .action import ActionModel
from .errors import BranchError, StepSizeError
from .potential import PotentialSpec
from .qvariables import QMap

# minimum distance of 1 + c*xi**2 from the cut (-inf, 0]
BRANCH_MARGIN = 0.25


@dataclass(frozen=True)
class TrajectoryState:
    xi: complex
    t: float


@dataclass
class Trajectory:
    times: np.ndarray
    xi: np.ndarray
    dt: float
    branch_safe: bool = True

    def __getitem__(self, i):
        return TrajectoryState(complex(self.xi[i]), float(self.times[i]))

    def __len__(self):
        return len(self.xi)


def cut_distance(c, xi):
    w = 1.0 + c * xi * xi
    return abs(w) if w.real >= 0 else abs(w.imag)


def _run(xi0, spec, nsteps, dt, stride, margin):
    # S_cl'/m = omega*xi*sqrt(1 + c xi^2), independent of m
    xi, status, step = kernels.rk4_flow(xi0, spec.omega, spec.c, dt, nsteps, stride, margin)
    if status == 1:
        raise BranchError(
            f"1 + c*xi^2 came within {margin:g} of the branch cut at step {step} (t = {step * dt:.6g})"
        )
    if status == 2:
        raise BranchError(f"square-root argument jumped by more than pi/2 at step {step}")
    times = dt * stride * np.arange(len(xi))
    return Trajectory(times, xi, dt)


def integrate_flow(xi0, spec: PotentialSpec, action: ActionModel | None, T: float, dt: float,
                   stride: int = 1, margin: float = BRANCH_MARGIN, step_tol: float | None = 1e-10):
    """Classic RK4 on the complex flow, sampled every ``stride`` steps.

    dt is shrunk so that a whole number of strides ends exactly at T.

    With ``step_tol`` set, a second run at dt/2 estimates the endpoint error
    (Richardson, 4th order) and a StepSizeError is raised above ``step_tol``.
    ``action`` is accepted for interface symmetry; the quartic S_cl' is
    evaluated inside the kernel.
    """
    xi0 = complex(xi0)
    if not cmath.isfinite(xi0):
        raise ValueError("xi0 must be finite")
    if cut_distance(spec.c, xi0) < margin:
        raise BranchError(f"xi0 = {xi0} is within {margin:g} of the branch cut of sqrt(1 + c xi^2)")
    if not (T > 0 and dt > 0):
        raise StepSizeError("T and dt must be positive")
    if stride < 1:
        raise ValueError("stride must be >= 1")
    # a whole number of strides, so the last stored sample sits at t = T
    nsteps = stride * math.ceil(max(1, math.ceil(T / dt - 1e-9)) / stride)
    dt = T / nsteps
    traj = _run(xi0, spec, nsteps, dt, stride, margin)
    if step_tol is not None:
        fine = _run(xi0, spec, 2 * nsteps, dt / 2, 2 * stride, margin)
        err = abs(traj.xi[-1] - fine.xi[-1]) * 16.0 / 15.0
        if err > step_tol:
            raise StepSizeError(f"estimated step error {err:.3g} exceeds {step_tol:g}; reduce dt")
    return traj


def q_rotation_residual(traj: Trajectory, qmap: QMap, omega: float) -> float:
    """max_t |Q(xi_t) - exp(-i omega t) Q(xi_0)|."""
    q = qmap.closed_form(traj.xi)
    predicted = np.exp(-1j * omega * traj.times) * q[0]
    return float(np.max(np.abs(q - predicted)))


def energy_invariant(traj: Trajectory, spec: PotentialSpec, action: ActionModel):
    """max |-(1/2m) S_cl'(xi)^2 + V(xi)| along the trajectory."""
    xi = traj.xi
    return float(np.max(np.abs(-0.5 / spec.m * action.grad(xi) ** 2 + spec.V(xi))))
