"""Verification metrics: fidelity, peak tracking, shape drift and hbar scaling."""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .action import ActionModel
from .coherent import CoherentParams, build_state_1d, predict_peak
from .errors import FitError, GridError
from .grid import GridSpec
from .potential import PotentialSpec
from .qvariables import QMap
from .quantum_grid import (Snapshots, ground_state, numeric_action, propagate,
                           refined_argmax)

SERIES_COLUMNS = ("t", "fidelity", "x_peak_measured", "x_peak_predicted", "shape_drift")


@dataclass
class ExperimentReport:
    subcommand: str
    config: dict
    series: dict = field(default_factory=lambda: {c: [] for c in SERIES_COLUMNS})
    results: dict = field(default_factory=dict)
    fits: dict = field(default_factory=dict)
    checks: dict = field(default_factory=dict)
    status: str = "ok"
    reason: str = ""

    def check(self, name, value, threshold, passed):
        self.checks[name] = {"value": value, "threshold": threshold, "passed": bool(passed)}

    @property
    def passed(self):
        return all(c["passed"] for c in self.checks.values())

    def to_dict(self):
        return {
            "subcommand": self.subcommand,
            "status": self.status,
            "reason": self.reason,
            "passed": self.passed,
            "config": self.config,
            "results": self.results,
            "fits": self.fits,
            "checks": self.checks,
            "series": {k: list(map(float, v)) for k, v in self.series.items()},
        }


def _same_grid(snapshots: Snapshots, grid: GridSpec):
    st = snapshots.states[0]
    if st.N != grid.N or st.L != grid.L:
        raise GridError("snapshots and grid disagree")


def fidelity_curve(snapshots: Snapshots, params: CoherentParams, action: ActionModel, qmap: QMap,
                   grid: GridSpec, ground=None) -> np.ndarray:
    """|<z(t)|psi(t)>|^2 / (<z(t)|z(t)> <psi(t)|psi(t)>) with z(t) = exp(-i w t) z."""
    _same_grid(snapshots, grid)
    out = []
    for t, st in zip(snapshots.times, snapshots.states):
        ref = build_state_1d(params.rotated(action.omega, t), action, qmap, grid, ground)
        ov = abs(ref.inner(st)) ** 2 / (ref.norm() * st.norm())
        out.append(ov)
    return np.array(out)


def density_sigma(state):
    rho = np.abs(state.psi) ** 2
    x = state.x
    mu = np.sum(x * rho) / np.sum(rho)
    return float(math.sqrt(np.sum((x - mu) ** 2 * rho) / np.sum(rho)))


def peak_track_compare(snapshots: Snapshots, params: CoherentParams, action: ActionModel, qmap: QMap,
                       grid: GridSpec, ground=None) -> dict:
    """Refined argmax |psi(t)|^2 against the predicted trajectory x*(t)."""
    _same_grid(snapshots, grid)
    measured, predicted, sigma = [], [], []
    for t, st in zip(snapshots.times, snapshots.states):
        measured.append(refined_argmax(st.x, np.abs(st.psi) ** 2))
        predicted.append(predict_peak(params, action, qmap, t, ground=ground, grid=grid))
        sigma.append(density_sigma(st))
    measured, predicted, sigma = map(np.array, (measured, predicted, sigma))
    dev = np.abs(measured - predicted)
    return {
        "measured": measured,
        "predicted": predicted,
        "sigma": sigma,
        "max_deviation": float(dev.max()),
        "max_deviation_over_sigma": float((dev / sigma).max()),
        "max_deviation_over_dx": float(dev.max() / grid.dx),
    }


def centered_density(state):
    """|psi|^2 translated so its mean sits at x = 0 (exact Fourier shift)."""
    rho = np.abs(state.psi) ** 2
    x = state.x
    mu = np.sum(x * rho) / np.sum(rho)
    k = 2.0 * np.pi * np.fft.fftfreq(state.N, state.dx)
    # x = -L + j dx, so x = 0 sits at node N/2
    return np.real(np.fft.ifft(np.fft.fft(rho) * np.exp(1j * k * mu)))


def shape_drift(snapshots: Snapshots, threshold: float = 0.05) -> dict:
    """D(t) = || rho_t(. + <x>_t) - rho_0(. + <x>_0) ||_2 and its first crossing of ``threshold``."""
    ref = centered_density(snapshots.states[0])
    dx = snapshots.states[0].dx
    D = np.array([math.sqrt(np.sum((centered_density(st) - ref) ** 2) * dx) for st in snapshots.states])
    above = np.flatnonzero(D > threshold)
    first = float(snapshots.times[above[0]]) if above.size else None
    return {"D": D, "first_crossing": first, "threshold": threshold}


def fit_power_law(h, y):
    """Least squares ln y = p ln h + ln a; returns (p, a, rms residual)."""
    h = np.asarray(h, dtype=float)
    y = np.asarray(y, dtype=float)
    if h.size < 2 or np.any(y <= 0) or np.any(h <= 0):
        raise FitError("power-law fit needs >= 2 points with positive values")
    A = np.vstack([np.log(h), np.ones_like(h)]).T
    coef, *_ = np.linalg.lstsq(A, np.log(y), rcond=None)
    resid = np.log(y) - A @ coef
    return float(coef[0]), float(math.exp(coef[1])), float(math.sqrt(np.mean(resid**2)))


def action_gap(spec: PotentialSpec, hbars, L: float, N: int, core_floor: float = 1e-6) -> dict:
    """sup |S - S_cl| with S = -hbar ln chi, over a core shared by every hbar.

    Each run's core is where chi >= core_floor * max chi; the comparison uses
    their intersection, which is the core of the smallest hbar.
    """
    action = ActionModel(spec)
    runs = []
    for h in hbars:
        grid = GridSpec(L, N, h)
        gs = ground_state(spec, grid)
        S, mask = numeric_action(gs, h)
        chi = gs.chi.psi.real
        core = chi >= core_floor * chi.max()
        runs.append((h, grid, gs, S, core))
    common = np.logical_and.reduce([r[4] for r in runs])
    x = runs[0][1].x
    out = {"hbar": list(map(float, hbars)), "core_halfwidth": float(np.abs(x[common]).max()),
           "sup_gap": [], "sup_gap_own_core": [], "E_q": []}
    for h, grid, gs, S, core in runs:
        diff = np.abs(S - action.closed_form(x))
        out["sup_gap"].append(float(diff[common].max()))
        out["sup_gap_own_core"].append(float(diff[core].max()))
        out["E_q"].append(gs.energy)
    return out


def extrapolate_to_zero(h, y):
    """Value at h = 0 of the interpolating polynomial through (h, y)."""
    h = np.asarray(h, dtype=float)
    return float(np.polyfit(h / h.max(), np.asarray(y, dtype=float), h.size - 1)[-1])


def hbar_scaling(spec: PotentialSpec, hbars, claims=("S_vs_Scl", "Eq_vs_Ecl", "fidelity_deficit"),
                 L=4.0, N=2048, z=0.5, periods=10.0, stride=200, evolve_L=None, evolve_N=None) -> dict:
    """Log-log exponents of the O(hbar) claims over a geometric hbar list."""
    hbars = sorted(map(float, hbars), reverse=True)
    if len(hbars) < 3:
        raise FitError("hbar_scaling needs at least 3 hbar values")
    ratios = np.array(hbars[:-1]) / np.array(hbars[1:])
    if not np.allclose(ratios, ratios[0], rtol=1e-9):
        raise FitError("hbar values must be geometrically spaced")
    fits = {}
    gap = action_gap(spec, hbars, L, N) if {"S_vs_Scl", "Eq_vs_Ecl"} & set(claims) else None
    if "S_vs_Scl" in claims:
        if spec.g == 0:
            fits["S_vs_Scl"] = {"status": "exact", "values": gap["sup_gap"]}
        else:
            p, a, res = fit_power_law(hbars, gap["sup_gap"])
            fits["S_vs_Scl"] = {"status": "fit", "exponent": p, "prefactor": a, "residual": res,
                                "values": gap["sup_gap"], "core_halfwidth": gap["core_halfwidth"]}
    if "Eq_vs_Ecl" in claims:
        p, a, res = fit_power_law(hbars, gap["E_q"])
        scaled = [e / h for e, h in zip(gap["E_q"], hbars)]
        fits["Eq_vs_Ecl"] = {"status": "fit", "exponent": p, "prefactor": a, "residual": res,
                             "values": gap["E_q"], "Eq_over_hbar_intercept": extrapolate_to_zero(hbars, scaled)}
    if "fidelity_deficit" in claims:
        deficits = []
        action, qmap = ActionModel(spec), QMap(spec)
        for h in hbars:
            grid = GridSpec(evolve_L or L, evolve_N or N, h)
            params = CoherentParams(h, z)
            psi0 = build_state_1d(params, action, qmap, grid)
            snaps = propagate(psi0, spec, grid, periods * 2 * math.pi / spec.omega, stride=stride)
            deficits.append(float(1.0 - fidelity_curve(snaps, params, action, qmap, grid).min()))
        entry = {"values": deficits}
        try:
            p, a, res = fit_power_law(hbars, deficits)
            entry.update(status="fit", exponent=p, prefactor=a, residual=res)
        except FitError as exc:
            entry.update(status="unfit", reason=str(exc))
        fits["fidelity_deficit"] = entry
    fits["hbar"] = hbars
    return fits
