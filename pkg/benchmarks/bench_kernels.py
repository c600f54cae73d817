"""Compare the compiled kernels against the pure-Python fallback.

Usage::

    python benchmarks/bench_kernels.py [--repeat 3]

Each kernel runs on both backends with identical inputs. The script prints the
best wall time of each, the speedup, and the largest difference between the
two outputs.
"""
import argparse
import math
import timeit

import numpy as np

from hjwave import kernels


def _flow_case():
    dt = 1e-4
    nsteps = int(round(4 * math.pi / dt))
    return lambda: kernels.rk4_flow(0.5 + 0.0j, 1.0, 1.0, dt, nsteps, 100, 0.25)


def _thomas_case(n=200_000):
    rng = np.random.default_rng(0)
    off = -np.ones(n)
    diag = 2.5 + rng.random(n)
    rhs = rng.standard_normal(n)
    return lambda: kernels.thomas_solve(off, diag, off, rhs)


def _outputs_differ(a, b):
    if isinstance(a, tuple):
        return max(_outputs_differ(x, y) for x, y in zip(a, b) if isinstance(x, np.ndarray))
    return float(np.max(np.abs(np.asarray(a) - np.asarray(b))))


def main(argv=None):
    parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    parser.add_argument("--repeat", type=int, default=3)
    args = parser.parse_args(argv)
    if "compiled" not in kernels.BACKENDS:
        print("compiled extension not built; only the python backend is available")
        return 1
    cases = {"rk4_flow (T=4pi, dt=1e-4)": _flow_case(), "thomas_solve (n=2e5)": _thomas_case()}
    print(f"{'kernel':<28}{'compiled [s]':>14}{'python [s]':>14}{'speedup':>10}{'max |diff|':>13}")
    for name, fn in cases.items():
        times, outs = {}, {}
        for backend in ("compiled", "python"):
            kernels.use_backend(backend)
            outs[backend] = fn()
            times[backend] = min(timeit.repeat(fn, number=1, repeat=args.repeat))
        diff = _outputs_differ(outs["compiled"], outs["python"])
        print(f"{name:<28}{times['compiled']:>14.4f}{times['python']:>14.4f}"
              f"{times['python'] / times['compiled']:>10.1f}{diff:>13.1e}")
    kernels.use_backend("compiled")
    return 0


if __name__ == "__main__":
    raise SystemExit(main())
