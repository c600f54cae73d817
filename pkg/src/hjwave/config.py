"""Flat ``section.key = value`` run configuration.

Every key has a type and a default; unknown keys are errors. ``none`` disables
an optional threshold.
"""
from __future__ import annotations

import math

from .errors import ConfigError

SUBCOMMANDS = ("gs", "coherent", "evolve", "flow", "radial", "sweep")


def _float_list(text):
    return tuple(float(v) for v in text.split(",") if v.strip())


def _str_list(text):
    return tuple(v.strip() for v in text.split(",") if v.strip())


def _opt_float(text):
    return None if text.strip().lower() in ("none", "") else float(text)


def _opt_band(text):
    if text.strip().lower() in ("none", ""):
        return None
    lo, hi = _float_list(text)
    return (lo, hi)


_PARSERS = {
    "float": float,
    "int": int,
    "str": str.strip,
    "opt_float": _opt_float,
    "float_list": _float_list,
    "str_list": _str_list,
    "opt_band": _opt_band,
}

# key -> (type, default)
SCHEMA = {
    "potential.m": ("float", 1.0),
    "potential.omega": ("float", 1.0),
    "potential.g": ("float", 0.0),
    "potential.dim": ("str", "1"),
    "grid.L": ("float", 4.0),
    "grid.N": ("int", 1024),
    "grid.dt": ("opt_float", None),
    "grid.stride": ("int", 100),
    "grid.precision": ("str", "double"),
    "state.hbar": ("float", 0.1),
    "state.z_re": ("float", 1.0),
    "state.z_im": ("float", 0.0),
    "state.z2_re": ("float", 0.0),
    "state.z2_im": ("float", 0.0),
    "state.action_source": ("str", "semiclassical"),
    "experiment.periods": ("float", 10.0),
    "experiment.ground_method": ("str", "tridiagonal_eigensolver"),
    "experiment.hbar_list": ("float_list", (0.2, 0.1, 0.05)),
    "experiment.claims": ("str_list", ("S_vs_Scl", "Eq_vs_Ecl")),
    "experiment.xi0_re": ("float", 0.5),
    "experiment.xi0_im": ("float", 0.0),
    "experiment.flow_T": ("float", 4 * math.pi),
    "experiment.flow_dt": ("float", 1e-4),
    "experiment.flow_margin": ("float", 0.25),
    "experiment.q2_convention": ("str", "derived"),
    "experiment.probe_z2_re": ("float", 0.3),
    "experiment.drift_threshold": ("float", 0.05),
    "checks.fidelity_min": ("opt_float", None),
    "checks.peak_sigma_max": ("opt_float", None),
    "checks.peak_dx_max": ("opt_float", None),
    "checks.alpha_residual_max": ("opt_float", 1e-6),
    "checks.gs_residual_max": ("opt_float", 1e-8),
    "checks.gs_methods_agree": ("opt_float", 1e-8),
    "checks.rotation_residual_max": ("opt_float", 1e-8),
    "checks.angular_rel_tol": ("opt_float", None),
    "checks.q1_tol": ("opt_float", 1e-8),
    "checks.s_exponent_band": ("opt_band", None),
    "checks.intercept_rel_tol": ("opt_float", None),
    "output.dir": ("str", "hjwave_out"),
    "output.formats": ("str_list", ("json", "csv")),
}

FORMATS = ("json", "csv", "snapshots")


def defaults() -> dict:
    return {k: d for k, (_, d) in SCHEMA.items()}


def _coerce(key, text):
    kind = SCHEMA[key][0]
    try:
        return _PARSERS[kind](text)
    except (ValueError, TypeError) as exc:
        raise ConfigError(f"{key}: cannot parse {text!r} as {kind}") from exc


def parse_config(text: str) -> dict:
    cfg = defaults()
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError(f"line {lineno}: expected 'key = value'")
        key, value = (p.strip() for p in line.split("=", 1))
        if key not in SCHEMA:
            raise ConfigError(f"line {lineno}: unknown key {key!r}")
        cfg[key] = _coerce(key, value)
    validate(cfg)
    return cfg


def _fmt(value):
    if value is None:
        return "none"
    if isinstance(value, tuple):
        return ",".join(_fmt(v) for v in value)
    if isinstance(value, float):
        return repr(value)
    return str(value)


def format_config(cfg: dict) -> str:
    return "".join(f"{k} = {_fmt(cfg[k])}\n" for k in SCHEMA)


def to_echo(cfg: dict) -> dict:
    """JSON-safe echo of the effective config (tuples become lists)."""
    return {k: list(v) if isinstance(v, tuple) else v for k, v in cfg.items()}


def from_echo(echo: dict) -> dict:
    unknown = set(echo) - set(SCHEMA)
    if unknown:
        raise ConfigError(f"unknown keys {sorted(unknown)}")
    cfg = defaults()
    for k, v in echo.items():
        cfg[k] = tuple(v) if isinstance(v, list) else v
    validate(cfg)
    return cfg


def validate(cfg: dict):
    def need(cond, msg):
        if not cond:
            raise ConfigError(msg)

    for key in ("potential.m", "potential.omega", "grid.L", "state.hbar", "experiment.periods",
                "experiment.flow_T", "experiment.flow_dt"):
        need(math.isfinite(cfg[key]) and cfg[key] > 0, f"{key} must be positive and finite")
    need(math.isfinite(cfg["potential.g"]) and cfg["potential.g"] >= 0, "potential.g must be >= 0")
    need(cfg["potential.dim"] in ("1", "2-radial"), "potential.dim must be 1 or 2-radial")
    n = cfg["grid.N"]
    need(n >= 256 and n & (n - 1) == 0, "grid.N must be a power of two >= 256")
    need(cfg["grid.stride"] >= 1, "grid.stride must be >= 1")
    need(cfg["grid.precision"] in ("double", "extended"), "grid.precision must be double or extended")
    need(cfg["grid.dt"] is None or cfg["grid.dt"] > 0, "grid.dt must be positive")
    need(cfg["state.action_source"] in ("semiclassical", "numeric"),
         "state.action_source must be semiclassical or numeric")
    need(cfg["experiment.ground_method"] in ("tridiagonal_eigensolver", "imaginary_time"),
         "experiment.ground_method must be tridiagonal_eigensolver or imaginary_time")
    need(cfg["experiment.q2_convention"] in ("derived", "paper"),
         "experiment.q2_convention must be derived or paper")
    need(all(h > 0 for h in cfg["experiment.hbar_list"]), "experiment.hbar_list must be positive")
    need(set(cfg["experiment.claims"]) <= {"S_vs_Scl", "Eq_vs_Ecl", "fidelity_deficit"},
         "experiment.claims must be drawn from S_vs_Scl, Eq_vs_Ecl, fidelity_deficit")
    need(set(cfg["output.formats"]) <= set(FORMATS), f"output.formats must be drawn from {FORMATS}")
    need(cfg["experiment.flow_margin"] >= 0, "experiment.flow_margin must be >= 0")
