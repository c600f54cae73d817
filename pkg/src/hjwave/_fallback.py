"""Pure-Python versions of the compiled kernels in ``_core.pyx``."""
import cmath
import math

import numpy as np


def _cut_distance(w):
    return abs(w) if w.real >= 0.0 else abs(w.imag)


def rk4_flow(xi0, omega, c, dt, nsteps, stride, margin):
    xi = complex(xi0)
    mi = -1j * omega
    out = np.empty(nsteps // stride + 1, dtype=complex)
    w = 1.0 + c * xi * xi
    if _cut_distance(w) < margin:
        return out[:0], 1, 0
    arg_prev = cmath.phase(cmath.sqrt(w))
    out[0] = xi
    j = 1
    sqrt = cmath.sqrt
    for n in range(1, nsteps + 1):
        s = sqrt(1.0 + c * xi * xi)
        arg_now = cmath.phase(s)
        if abs(arg_now - arg_prev) > 0.5 * math.pi:
            return out[:j], 2, n
        arg_prev = arg_now
        k1 = mi * xi * s
        y = xi + 0.5 * dt * k1
        w = 1.0 + c * y * y
        if _cut_distance(w) < margin:
            return out[:j], 1, n
        k2 = mi * y * sqrt(w)
        y = xi + 0.5 * dt * k2
        w = 1.0 + c * y * y
        if _cut_distance(w) < margin:
            return out[:j], 1, n
        k3 = mi * y * sqrt(w)
        y = xi + dt * k3
        w = 1.0 + c * y * y
        if _cut_distance(w) < margin:
            return out[:j], 1, n
        k4 = mi * y * sqrt(w)
        xi = xi + dt / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4)
        if _cut_distance(1.0 + c * xi * xi) < margin:
            return out[:j], 1, n
        if n % stride == 0:
            out[j] = xi
            j += 1
    return out, 0, nsteps


def thomas_solve(lower, diag, upper, rhs):
    n = len(diag)
    lower = lower.tolist()
    diag = diag.tolist()
    upper = upper.tolist()
    rhs = rhs.tolist()
    cp = [0.0] * n
    dp = [0.0] * n
    cp[0] = upper[0] / diag[0] if n > 1 else 0.0
    dp[0] = rhs[0] / diag[0]
    for i in range(1, n):
        denom = diag[i] - lower[i - 1] * cp[i - 1]
        if i < n - 1:
            cp[i] = upper[i] / denom
        dp[i] = (rhs[i] - lower[i - 1] * dp[i - 1]) / denom
    x = [0.0] * n
    x[-1] = dp[-1]
    for i in range(n - 2, -1, -1):
        x[i] = dp[i] - cp[i] * x[i + 1]
    return np.array(x)
