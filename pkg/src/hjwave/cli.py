"""``hjwave <subcommand> --config <path> [--out <dir>]``.

Exit codes: 0 all enabled checks pass, 1 a check failed, 2 invalid config or
grid precondition, 3 numerical abort.
"""
from __future__ import annotations

import argparse
import json
import math
import os
import sys

import numpy as np

from . import config as cfgmod
from .action import ActionModel
from .analysis import (SERIES_COLUMNS, ExperimentReport, action_gap, fidelity_curve,
                       hbar_scaling, peak_track_compare, shape_drift)
from .classical_flow import energy_invariant, integrate_flow, q_rotation_residual
from .coherent import (CoherentParams, build_state_1d, eigen_residual, expected_z, predict_peak)
from .errors import (BranchError, ConfigError, ConvergenceError, FitError, GridError, HJWaveError,
                     LeakError, NormalizabilityError, SignalError, StepSizeError)
from .grid import GridSpec
from .potential import PotentialSpec
from .qvariables import QMap
from .quantum_grid import ground_state, observables, propagate, refined_argmax
from .radial2d import (RadialModel, angular_momentum, angular_rate, build_q12, build_state_2d,
                       convention_report, propagate_2d)

PRECONDITION_ERRORS = (ConfigError, GridError, NormalizabilityError)
NUMERICAL_ERRORS = (BranchError, ConvergenceError, FitError, LeakError, SignalError, StepSizeError)


def _spec(cfg, dim=None):
    return PotentialSpec(cfg["potential.m"], cfg["potential.omega"], cfg["potential.g"],
                         dim or cfg["potential.dim"])


def _grid(cfg, hbar=None):
    return GridSpec(cfg["grid.L"], cfg["grid.N"], hbar or cfg["state.hbar"], cfg["grid.dt"])


def _z(cfg, prefix="z"):
    return complex(cfg[f"state.{prefix}_re"], cfg[f"state.{prefix}_im"])


def _check_max(report, name, value, threshold):
    if threshold is not None:
        report.check(name, value, threshold, value <= threshold)


def _need_1d(cfg):
    if cfg["potential.dim"] != "1":
        raise ConfigError("this subcommand needs potential.dim = 1")


def run_gs(cfg, report):
    _need_1d(cfg)
    spec, grid = _spec(cfg), _grid(cfg)
    main = ground_state(spec, grid, cfg["experiment.ground_method"])
    other_method = ("imaginary_time" if main.method == "tridiagonal_eigensolver"
                    else "tridiagonal_eigensolver")
    other = ground_state(spec, grid, other_method)
    gap = action_gap(spec, [grid.hbar], grid.L, grid.N)
    report.results.update(
        E_q=main.energy, E_q_over_hbar=main.energy / grid.hbar, residual=main.residual,
        method=main.method, iterations=main.iterations, E_q_other_method=other.energy,
        sup_S_minus_Scl=gap["sup_gap"][0], core_halfwidth=gap["core_halfwidth"],
    )
    _check_max(report, "gs_residual", main.residual, cfg["checks.gs_residual_max"])
    _check_max(report, "gs_methods_agree", abs(main.energy - other.energy), cfg["checks.gs_methods_agree"])
    return None


def _coherent_setup(cfg):
    _need_1d(cfg)
    spec, grid = _spec(cfg), _grid(cfg)
    action, qmap = ActionModel(spec), QMap(spec)
    params = CoherentParams(cfg["state.hbar"], _z(cfg), cfg["state.action_source"])
    ground = ground_state(spec, grid) if params.action_source == "numeric" else None
    return spec, grid, action, qmap, params, ground


def run_coherent(cfg, report):
    spec, grid, action, qmap, params, ground = _coherent_setup(cfg)
    state = build_state_1d(params, action, qmap, grid, ground)
    obs = observables(state, spec, grid)
    x_pred = predict_peak(params, action, qmap, 0.0, ground=ground, grid=grid)
    report.results.update(observables=obs, x_peak_predicted=x_pred, dx=grid.dx)
    if params.action_source == "semiclassical":
        res = eigen_residual(state, action, qmap, params.hbar, params.z)
        ez = expected_z(state, action, qmap, params.hbar)
        report.results.update(alpha_residual=res, expected_z=[ez.real, ez.imag])
        _check_max(report, "alpha_residual", res, cfg["checks.alpha_residual_max"])
        _check_max(report, "expected_z", abs(ez - params.z), cfg["checks.alpha_residual_max"])
    report.check("peak_within_2dx", abs(obs["peak_x"] - x_pred) / grid.dx, 2.0,
                 abs(obs["peak_x"] - x_pred) <= 2 * grid.dx)
    return None


def run_evolve(cfg, report):
    spec, grid, action, qmap, params, ground = _coherent_setup(cfg)
    state = build_state_1d(params, action, qmap, grid, ground)
    T = cfg["experiment.periods"] * 2 * math.pi / action.omega
    snaps = propagate(state, spec, grid, T, stride=cfg["grid.stride"], precision=cfg["grid.precision"])
    fid = fidelity_curve(snaps, params, action, qmap, grid, ground)
    track = peak_track_compare(snaps, params, action, qmap, grid, ground)
    drift = shape_drift(snaps, cfg["experiment.drift_threshold"])
    report.series.update(t=snaps.times, fidelity=fid, x_peak_measured=track["measured"],
                         x_peak_predicted=track["predicted"], shape_drift=drift["D"])
    report.results.update(
        dt=snaps.dt, steps=snaps.steps, min_fidelity=float(fid.min()),
        max_peak_deviation=track["max_deviation"],
        max_peak_deviation_over_sigma=track["max_deviation_over_sigma"],
        max_peak_deviation_over_dx=track["max_deviation_over_dx"],
        drift_first_crossing=drift["first_crossing"], max_drift=float(drift["D"].max()),
        norm_drift=abs(snaps.states[-1].norm() - snaps.states[0].norm()),
    )
    if cfg["checks.fidelity_min"] is not None:
        report.check("fidelity_min", float(fid.min()), cfg["checks.fidelity_min"],
                     fid.min() >= cfg["checks.fidelity_min"])
    _check_max(report, "peak_over_sigma", track["max_deviation_over_sigma"], cfg["checks.peak_sigma_max"])
    _check_max(report, "peak_over_dx", track["max_deviation_over_dx"], cfg["checks.peak_dx_max"])
    return snaps


def run_flow(cfg, report):
    spec = _spec(cfg, "1")
    action, qmap = ActionModel(spec), QMap(spec)
    xi0 = complex(cfg["experiment.xi0_re"], cfg["experiment.xi0_im"])
    T, dt = cfg["experiment.flow_T"], cfg["experiment.flow_dt"]
    stride = max(1, int(round(T / dt)) // 1000)
    traj = integrate_flow(xi0, spec, action, T, dt, stride=stride, margin=cfg["experiment.flow_margin"])
    res = q_rotation_residual(traj, qmap, action.omega)
    end = traj.xi[-1]
    report.results.update(rotation_residual=res, energy_invariant=energy_invariant(traj, spec, action),
                          xi_end=[end.real, end.imag], samples=len(traj))
    _check_max(report, "rotation_residual", res, cfg["checks.rotation_residual_max"])
    return None


def run_radial(cfg, report):
    spec = _spec(cfg, "2-radial")
    hbar = cfg["state.hbar"]
    grid = _grid(cfg)
    model = RadialModel(spec, cfg["experiment.q2_convention"])
    z1, z2 = _z(cfg), _z(cfg, "z2")
    r = np.linspace(0.05, grid.L, 64)
    phi = np.linspace(-math.pi, math.pi, 64)
    q1, _ = build_q12(model, r, phi)
    if spec.g == 0:
        q1_err = float(np.max(np.abs(q1 - r * np.exp(1j * phi))))
        report.results["q1_vs_r_exp_iphi"] = q1_err
        _check_max(report, "q1_harmonic", q1_err, cfg["checks.q1_tol"])
    report.results.update(omega0=model.omega0, omega1=model.omega1, omega2=model.omega2,
                          conventions=convention_report(spec, hbar, z1, z2, grid.L),
                          conventions_probe=convention_report(spec, hbar, z1, cfg["experiment.probe_z2_re"],
                                                              grid.L))
    state = build_state_2d(model, hbar, z1, z2, grid)
    T = cfg["experiment.periods"] * 2 * math.pi / model.omega1
    snaps = propagate_2d(state, model, grid, T, stride=cfg["grid.stride"], precision=cfg["grid.precision"])
    rate = angular_rate(snaps, model)
    lz = [angular_momentum(s, hbar) for s in (snaps.states[0], snaps.states[-1])]
    report.results.update(angular_rate=rate, angular_rate_rel_error=abs(rate + model.omega1) / model.omega1,
                          Lz_start=lz[0], Lz_end=lz[1], dt=snaps.dt, steps=snaps.steps)
    _check_max(report, "angular_rate", abs(rate + model.omega1) / model.omega1, cfg["checks.angular_rel_tol"])
    return None


def run_sweep(cfg, report):
    _need_1d(cfg)
    spec = _spec(cfg)
    fits = hbar_scaling(spec, cfg["experiment.hbar_list"], claims=cfg["experiment.claims"],
                        L=cfg["grid.L"], N=cfg["grid.N"], z=abs(_z(cfg)),
                        periods=cfg["experiment.periods"], stride=cfg["grid.stride"])
    report.fits.update(fits)
    band = cfg["checks.s_exponent_band"]
    s_fit = fits.get("S_vs_Scl", {})
    if band is not None and s_fit.get("status") == "fit":
        p = s_fit["exponent"]
        report.check("S_vs_Scl_exponent", p, list(band), band[0] <= p <= band[1])
    tol = cfg["checks.intercept_rel_tol"]
    if tol is not None and "Eq_vs_Ecl" in fits:
        half = 0.5 * spec.omega
        rel = abs(fits["Eq_vs_Ecl"]["Eq_over_hbar_intercept"] - half) / half
        report.check("Eq_over_hbar_intercept", rel, tol, rel <= tol)
    return None


RUNNERS = {"gs": run_gs, "coherent": run_coherent, "evolve": run_evolve, "flow": run_flow,
           "radial": run_radial, "sweep": run_sweep}


def run_experiment(subcommand, cfg):
    """Run one subcommand; returns ``(report, snapshots_or_None, exit_code)``."""
    report = ExperimentReport(subcommand, cfgmod.to_echo(cfg))
    snaps = None
    try:
        snaps = RUNNERS[subcommand](cfg, report)
    except PRECONDITION_ERRORS as exc:
        report.status, report.reason = "invalid", f"{type(exc).__name__}: {exc}"
        return report, None, 2
    except NUMERICAL_ERRORS as exc:
        report.status, report.reason = "aborted", f"{type(exc).__name__}: {exc}"
        return report, None, 3
    except HJWaveError as exc:
        report.status, report.reason = "aborted", f"{type(exc).__name__}: {exc}"
        return report, None, 3
    if not report.passed:
        failed = sorted(k for k, v in report.checks.items() if not v["passed"])
        report.status, report.reason = "failed", "checks failed: " + ", ".join(failed)
        return report, snaps, 1
    return report, snaps, 0


def _num(v):
    return format(float(v), ".17g")


def emit_report(report, out_dir, formats=("json", "csv"), snapshots=None):
    """Write report.json, series.csv and optionally snapshots/NNNN.csv."""
    os.makedirs(out_dir, exist_ok=True)
    written = []
    if "json" in formats:
        path = os.path.join(out_dir, "report.json")
        with open(path, "w", newline="\n") as fh:
            json.dump(report.to_dict(), fh, indent=2, allow_nan=False, default=_json_default)
            fh.write("\n")
        written.append(path)
    if "csv" in formats:
        path = os.path.join(out_dir, "series.csv")
        cols = [report.series.get(c, []) for c in SERIES_COLUMNS]
        with open(path, "w", newline="\n") as fh:
            fh.write(",".join(SERIES_COLUMNS) + "\n")
            for row in zip(*cols):
                fh.write(",".join(_num(v) for v in row) + "\n")
        written.append(path)
    if "snapshots" in formats and snapshots is not None and snapshots.states[0].dim == 1:
        sdir = os.path.join(out_dir, "snapshots")
        os.makedirs(sdir, exist_ok=True)
        width = max(4, len(str(len(snapshots) - 1)))
        for i, st in enumerate(snapshots.states):
            path = os.path.join(sdir, f"{i:0{width}d}.csv")
            with open(path, "w", newline="\n") as fh:
                fh.write("x,re_psi,im_psi\n")
                for x, p in zip(st.x, st.psi):
                    fh.write(f"{_num(x)},{_num(p.real)},{_num(p.imag)}\n")
            written.append(path)
    return written


def _json_default(obj):
    if isinstance(obj, np.generic):
        return obj.item()
    if isinstance(obj, np.ndarray):
        return obj.tolist()
    if isinstance(obj, complex):
        return [obj.real, obj.imag]
    raise TypeError(f"cannot serialize {type(obj).__name__}")


def main(argv=None):
    parser = argparse.ArgumentParser(prog="hjwave", description=__doc__.splitlines()[0])
    parser.add_argument("subcommand", choices=sorted(RUNNERS))
    parser.add_argument("--config", required=True, help="flat key = value config file")
    parser.add_argument("--out", help="output directory (overrides output.dir)")
    args = parser.parse_args(argv)
    try:
        with open(args.config) as fh:
            cfg = cfgmod.parse_config(fh.read())
    except (OSError, ConfigError) as exc:
        print(f"hjwave: {exc}", file=sys.stderr)
        if args.out:
            report = ExperimentReport(args.subcommand, {}, status="invalid",
                                      reason=f"{type(exc).__name__}: {exc}")
            emit_report(report, args.out, ("json",))
        return 2
    if args.out:
        cfg["output.dir"] = args.out
    report, snaps, code = run_experiment(args.subcommand, cfg)
    emit_report(report, cfg["output.dir"], cfg["output.formats"], snaps)
    if code:
        print(f"hjwave {args.subcommand}: {report.reason}", file=sys.stderr)
    else:
        print(f"hjwave {args.subcommand}: ok ({len(report.checks)} checks passed)")
    return code


if __name__ == "__main__":
    sys.exit(main())
