# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True
"""Compiled inner loops. Signatures mirror hjwave._fallback exactly."""
import numpy as np
cimport numpy as cnp
from libc.math cimport fabs, atan2, M_PI

cdef extern from "complex.h" nogil:
    double complex csqrt(double complex)
    double creal(double complex)
    double cimag(double complex)
    double cabs(double complex)

cnp.import_array()


cdef inline double cut_distance(double complex w) nogil:
    if creal(w) >= 0.0:
        return cabs(w)
    return fabs(cimag(w))


def rk4_flow(double complex xi0, double omega, double c, double dt,
             Py_ssize_t nsteps, Py_ssize_t stride, double margin):
    """RK4 for dxi/dt = -i*omega*xi*sqrt(1 + c*xi**2).

    Returns (samples, status, step). status 0 = ok, 1 = within ``margin`` of
    the branch cut, 2 = argument of the square root jumped by more than pi/2.
    """
    cdef Py_ssize_t nsamp = nsteps // stride + 1
    cdef cnp.ndarray[cnp.complex128_t, ndim=1] out = np.empty(nsamp, dtype=np.complex128)
    cdef double complex xi = xi0, k1, k2, k3, k4, y, w, s
    cdef double complex mi = -1j * omega
    cdef double arg_prev, arg_now
    cdef Py_ssize_t n, j = 0
    cdef int status = 0
    w = 1.0 + c * xi * xi
    if cut_distance(w) < margin:
        return out[:0], 1, 0
    arg_prev = atan2(cimag(csqrt(w)), creal(csqrt(w)))
    out[0] = xi
    j = 1
    with nogil:
        for n in range(1, nsteps + 1):
            w = 1.0 + c * xi * xi
            s = csqrt(w)
            arg_now = atan2(cimag(s), creal(s))
            if fabs(arg_now - arg_prev) > 0.5 * M_PI:
                status = 2
                break
            arg_prev = arg_now
            k1 = mi * xi * s
            y = xi + 0.5 * dt * k1
            w = 1.0 + c * y * y
            if cut_distance(w) < margin:
                status = 1
                break
            k2 = mi * y * csqrt(w)
            y = xi + 0.5 * dt * k2
            w = 1.0 + c * y * y
            if cut_distance(w) < margin:
                status = 1
                break
            k3 = mi * y * csqrt(w)
            y = xi + dt * k3
            w = 1.0 + c * y * y
            if cut_distance(w) < margin:
                status = 1
                break
            k4 = mi * y * csqrt(w)
            xi = xi + dt / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4)
            w = 1.0 + c * xi * xi
            if cut_distance(w) < margin:
                status = 1
                break
            if n % stride == 0:
                out[j] = xi
                j += 1
    if status:
        return out[:j], status, n
    return out, 0, nsteps


def thomas_solve(double[::1] lower, double[::1] diag, double[::1] upper, double[::1] rhs):
    """Solve a tridiagonal system; lower[i] couples row i+1 to column i."""
    cdef Py_ssize_t n = diag.shape[0], i
    cdef cnp.ndarray[cnp.float64_t, ndim=1] x = np.empty(n)
    cdef double[::1] cp = np.empty(n)
    cdef double[::1] dp = np.empty(n)
    cdef double denom
    with nogil:
        cp[0] = upper[0] / diag[0] if n > 1 else 0.0
        dp[0] = rhs[0] / diag[0]
        for i in range(1, n):
            denom = diag[i] - lower[i - 1] * cp[i - 1]
            if i < n - 1:
                cp[i] = upper[i] / denom
            dp[i] = (rhs[i] - lower[i - 1] * dp[i - 1]) / denom
        x[n - 1] = dp[n - 1]
        for i in range(n - 2, -1, -1):
            x[i] = dp[i] - cp[i] * x[i + 1]
    return x
