"""Rotationally symmetric 2D potentials: radial action, the pair (Q1, Q2),
2D packets, Cartesian split-step evolution and the angular rate of Q1."""
from __future__ import annotations

import math

import numpy as np
from scipy import fft
from scipy.special import logsumexp

from .action import ActionModel
from .errors import DomainError, GridError, NormalizabilityError, SignalError
from .grid import GridSpec, WaveFunctionGrid
from .potential import PotentialSpec, small_oscillation_frequency
from .quadrature import CumulativeTable, gl_panels
from .quantum_grid import Snapshots, propagate

CONVENTIONS = {"paper": 2, "derived": 1}


# ---- radial action and frequencies -----------------------------------------

def _cubic_roots(spec, E, ell):
    """Roots in u = r^2 of P(u) = 2mEu - m^2 w^2 u^2 - 2mg u^3 - ell^2."""
    m, w, g = spec.m, spec.omega, spec.g
    coeffs = [-2 * m * g, -(m * w) ** 2, 2 * m * E, -ell * ell]
    if g == 0:
        coeffs = coeffs[1:]
    roots = np.roots(coeffs)
    roots = np.sort(roots.real[np.abs(roots.imag) <= 1e-9 * np.abs(roots).max()])
    poly, dpoly = np.poly1d(coeffs), np.poly1d(coeffs).deriv()
    roots = np.array([r - poly(r) / dpoly(r) for r in roots])
    roots = np.array([r - poly(r) / dpoly(r) for r in roots])
    return roots


def radial_action(spec: PotentialSpec, E: float, ell: float, order: int = 64) -> float:
    """I_2(E, ell) = (1/pi) integral of sqrt(2m(E - V) - ell^2/r^2) dr between turning points.

    In u = r^2 the radicand is P(u)/u with P a polynomial; the substitution
    u = mid + half*sin(theta) removes both endpoint square roots.
    """
    ell = abs(ell)
    roots = _cubic_roots(spec, E, ell)
    pos = roots[roots >= 0]
    if ell == 0:
        u1, u2 = 0.0, pos.max()
    else:
        u1, u2 = pos[-2], pos[-1]
    mid, half = 0.5 * (u1 + u2), 0.5 * (u2 - u1)
    if spec.g == 0:
        def k(u):
            return (spec.m * spec.omega) ** 2 + 0 * u
    else:
        u3 = roots.min()

        def k(u):
            return 2 * spec.m * spec.g * (u - u3)

    def integrand(theta):
        u = mid + half * np.sin(theta)
        return half * half * np.cos(theta) ** 2 * np.sqrt(k(u)) / (2.0 * u)

    return gl_panels(integrand, np.array([-math.pi / 2]), np.array([math.pi / 2]), order)[0] / math.pi


def radial_frequencies(spec: PotentialSpec, scales=(1e-3, 1e-4, 1e-5), rel_step=1e-3):
    """(omega1, omega2) = (dE/dI1, dE/dI2) extrapolated to zero action.

    At each scale eps the radial action is differentiated at E = eps,
    ell = eps/(2 omega) by central differences; the implicit-function
    relations give omega2 = 1/dI2dE and omega1 = -dI2dell/dI2dE.
    """
    w1, w2 = [], []
    for eps in scales:
        E, ell = eps, 0.5 * eps / spec.omega
        hE, hl = rel_step * E, rel_step * ell
        dIdE = (radial_action(spec, E + hE, ell) - radial_action(spec, E - hE, ell)) / (2 * hE)
        dIdl = (radial_action(spec, E, ell + hl) - radial_action(spec, E, ell - hl)) / (2 * hl)
        w2.append(1.0 / dIdE)
        w1.append(-dIdl / dIdE)
    s = np.asarray(scales) / max(scales)
    deg = len(scales) - 1
    return float(np.polyfit(s, w1, deg)[-1]), float(np.polyfit(s, w2, deg)[-1])


# ---- model -----------------------------------------------------------------------

class RadialModel:
    """Radial action, regularized u(r) and the frequencies (omega1, omega2)."""

    def __init__(self, spec: PotentialSpec, convention: str = "derived", xmax: float = 64.0):
        if spec.dim != "2-radial":
            raise DomainError("RadialModel needs a 2-radial potential")
        if convention not in CONVENTIONS:
            raise DomainError(f"convention must be one of {sorted(CONVENTIONS)}")
        self.spec = spec
        self.convention = convention
        self.omega0 = small_oscillation_frequency(spec)
        self.action = ActionModel(spec, xmax=xmax)
        m, w0 = spec.m, self.omega0
        # (2mV)^{-1/2} - 1/(m w0 rho), bounded at 0
        self._u_table = CumulativeTable(
            lambda r: 1.0 / np.sqrt(2 * m * spec.V(r)) - 1.0 / (m * w0 * r), xmax=xmax
        )
        self.omega1, self.omega2 = radial_frequencies(spec)

    def u_regular_part(self, r):
        return self._u_table(np.asarray(r, dtype=float))

    def q1_modulus(self, r):
        """exp(m omega1 u_reg(r)), with its r -> 0 limit 0."""
        r = np.asarray(r, dtype=float)
        m = self.spec.m
        with np.errstate(divide="ignore"):
            return np.power(r, self.omega1 / self.omega0) * np.exp(m * self.omega1 * self.u_regular_part(r))

    def q2(self, r):
        k = CONVENTIONS[self.convention]
        r = np.asarray(r, dtype=float)
        m = self.spec.m
        return np.power(r, k * self.omega2 / self.omega0) * np.exp(k * m * self.omega2 * self.u_regular_part(r))


def u_eval(model: RadialModel, r):
    """u_reg(r) = ln(r)/(m w0) + integral_0^r [(2mV)^{-1/2} - 1/(m w0 rho)] d rho."""
    ra = np.asarray(r, dtype=float)
    if not np.all(np.isfinite(ra)) or np.any(ra <= 0):
        raise DomainError("u_eval needs finite r > 0")
    out = np.log(ra) / (model.spec.m * model.omega0) + model.u_regular_part(ra)
    return float(out) if np.ndim(out) == 0 else out


def build_q12(model: RadialModel, r, phi):
    """(Q1, Q2) = (exp(i phi + m w1 u), exp(k m w2 u)), k = 2 (paper) or 1 (derived)."""
    r = np.asarray(r, dtype=float)
    if np.any(r < 0):
        raise DomainError("radius must be non-negative")
    q1 = np.exp(1j * np.asarray(phi)) * model.q1_modulus(r)
    q2 = model.q2(r)
    if q1.ndim == 0:
        return complex(q1), float(q2)
    return q1, q2


# ---- packets -----------------------------------------------------------------------

def _envelope(model, hbar, z1, z2, r):
    """Angular maximum of ln|psi| along the radius."""
    s = model.action.closed_form(r)
    return -s / hbar + math.sqrt(2.0 / hbar) * (
        math.sqrt(model.omega1) * abs(z1) * model.q1_modulus(r)
        + math.sqrt(model.omega2) * z2.real * model.q2(r)
    )


def normalizability(model: RadialModel, hbar, z1, z2, L):
    """(ok, growth_exponent, log norm change under extent doubling L -> 2L).

    The growth exponent is the log-log slope of the envelope at r = 4L; a
    positive envelope there means the packet grows like exp(+r^p).
    """
    r = np.array([4 * L * (1 - 1e-3), 4 * L, 4 * L * (1 + 1e-3)])
    env = _envelope(model, hbar, z1, z2, r)
    with np.errstate(divide="ignore", invalid="ignore"):
        p = float((np.log(abs(env[2])) - np.log(abs(env[0]))) / (np.log(r[2]) - np.log(r[0])))
    growth = p if env[1] > 0 else -p

    def log_norm(R):
        t, w = np.polynomial.legendre.leggauss(400)
        rr = 0.5 * R * (t + 1)
        return logsumexp(2 * _envelope(model, hbar, z1, z2, rr) + np.log(2 * np.pi * rr * w * 0.5 * R))

    change = float(log_norm(2 * L) - log_norm(L))
    ok = env[1] < 0 and env[2] < env[0] and change <= 1e-10
    return ok, growth, change


def build_state_2d(model: RadialModel, hbar: float, z1: complex, z2: complex, grid: GridSpec) -> WaveFunctionGrid:
    """Normalized exp(-S_cl(r)/hbar + sqrt(2/hbar)(sqrt(w1) z1 Q1 + sqrt(w2) z2 Q2))."""
    z1, z2 = complex(z1), complex(z2)
    ok, growth, change = normalizability(model, hbar, z1, z2, grid.L)
    if not ok:
        raise NormalizabilityError(
            f"packet is not normalizable ({model.convention} convention, z2 = {z2}): "
            f"envelope grows like r^{growth:.3g}, log-norm change under doubling {change:.3g}",
            growth,
        )
    X, Y = grid.mesh()
    r = np.hypot(X, Y)
    phi = np.arctan2(Y, X)
    q1, q2 = build_q12(model, r, phi)
    expo = -model.action.closed_form(r) / hbar + math.sqrt(2.0 / hbar) * (
        math.sqrt(model.omega1) * z1 * q1 + math.sqrt(model.omega2) * z2 * q2
    )
    expo = expo - expo.real.max()
    state = WaveFunctionGrid(np.exp(expo), grid.L).normalize()
    state.check_contained()
    return state


def propagate_2d(state: WaveFunctionGrid, model: RadialModel, grid: GridSpec, T: float,
                 stride: int = 100, dt: float | None = None, precision: str = "double") -> Snapshots:
    if state.dim != 2:
        raise GridError("propagate_2d needs a 2D state")
    return propagate(state, model.spec, grid, T, stride=stride, dt=dt, precision=precision)


def angular_momentum(state: WaveFunctionGrid, hbar: float) -> float:
    """<L_z> = <psi| -i hbar (x d/dy - y d/dx) |psi> / <psi|psi>, spectral derivatives."""
    k = 2.0 * np.pi * np.fft.fftfreq(state.N, state.dx)
    kx, ky = np.meshgrid(k, k, indexing="ij")
    phat = fft.fft2(state.psi)
    dpx = fft.ifft2(1j * kx * phat)
    dpy = fft.ifft2(1j * ky * phat)
    X, Y = np.meshgrid(state.x, state.x, indexing="ij")
    lz = -1j * hbar * (X * dpy - Y * dpx)
    return float((np.vdot(state.psi, lz) * state.cell).real / state.norm())


def q1_expectation(state: WaveFunctionGrid, model: RadialModel) -> complex:
    X, Y = np.meshgrid(state.x, state.x, indexing="ij")
    q1, _ = build_q12(model, np.hypot(X, Y), np.arctan2(Y, X))
    rho = np.abs(state.psi) ** 2
    return complex(np.sum(rho * q1) / np.sum(rho))


def angular_rate(snapshots: Snapshots, model: RadialModel, noise_floor=1e-8) -> float:
    """Fitted d/dt arg of the packet label z1(t).

    The density of a packet with label z1 sits at conj(z1) in the x + iy
    plane, so the label phase is arg conj(<Q1>). Its slope is -omega1 when
    the label rotates as exp(-i omega1 t).
    """
    X, Y = np.meshgrid(snapshots.states[0].x, snapshots.states[0].x, indexing="ij")
    q1, _ = build_q12(model, np.hypot(X, Y), np.arctan2(Y, X))
    scale = np.abs(q1)
    means = []
    for st in snapshots.states:
        rho = np.abs(st.psi) ** 2
        mean = np.sum(rho * q1) / np.sum(rho)
        if abs(mean) < noise_floor * np.sum(rho * scale) / np.sum(rho):
            raise SignalError("<Q1> is below the noise floor; is z1 = 0?")
        means.append(np.conj(mean))
    phase = np.unwrap(np.angle(np.array(means)))
    slope, _ = np.polyfit(snapshots.times, phase, 1)
    return float(slope)


def convention_report(spec: PotentialSpec, hbar: float, z1: complex, z2: complex, L: float) -> dict:
    """Normalizability of the packet under both Q2 conventions, for this
    potential and for its harmonic (g = 0) counterpart."""
    out = {}
    for label, s in (("model", spec), ("harmonic", PotentialSpec(spec.m, spec.omega, 0.0, "2-radial"))):
        for conv in sorted(CONVENTIONS):
            model = RadialModel(s, conv)
            ok, growth, change = normalizability(model, hbar, complex(z1), complex(z2), L)
            out[f"{label}.{conv}"] = {
                "q2_exponent_factor": CONVENTIONS[conv],
                "normalizable": bool(ok),
                "growth_exponent": growth,
                "log_norm_change_on_doubling": change,
            }
    return out
