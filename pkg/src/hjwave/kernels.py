"""Kernel dispatch: the compiled extension when it was built, else pure Python.

``BACKEND`` names the active implementation. :func:`use_backend` switches it
(used by the benchmark and the equivalence tests).
"""
import numpy as np

from . import _fallback

try:
    from . import _core
except ImportError:  # extension not built
    _core = None

BACKENDS = {"python": _fallback}
if _core is not None:
    BACKENDS["compiled"] = _core

BACKEND = "compiled" if _core is not None else "python"


def use_backend(name):
    global BACKEND
    if name not in BACKENDS:
        raise ValueError(f"backend {name!r} unavailable; have {sorted(BACKENDS)}")
    BACKEND = name


def rk4_flow(xi0, omega, c, dt, nsteps, stride=1, margin=0.0):
    return BACKENDS[BACKEND].rk4_flow(
        complex(xi0), float(omega), float(c), float(dt), int(nsteps), int(stride), float(margin)
    )


def thomas_solve(lower, diag, upper, rhs):
    arrs = [np.ascontiguousarray(a, dtype=float) for a in (lower, diag, upper, rhs)]
    return BACKENDS[BACKEND].thomas_solve(*arrs)
