# cython: boundscheck=False, wraparound=False, cdivision=True
"""Compiled Bernoulli-inversion kernel (same contract as _kernels_py)."""

import numpy as np

cimport numpy as cnp
from libc.math cimport fabs, isfinite, pow, NAN

BACKEND = "cython"

OK = 0
NO_SUBSONIC_ROOT = 1


def invert_bernoulli(t, s, double gamma, double A, double rho0, double g,
                     double tol=1e-13, int max_iter=120):
    """Scalar-loop twin of ``_kernels_py.invert_bernoulli``."""
    t_arr = np.asarray(t, dtype=np.float64)
    s_arr = np.asarray(s, dtype=np.float64)
    t_arr, s_arr = np.broadcast_arrays(t_arr, s_arr)
    shape = t_arr.shape
    cdef cnp.ndarray[cnp.float64_t, ndim=1] tv = np.ascontiguousarray(t_arr.ravel())
    cdef cnp.ndarray[cnp.float64_t, ndim=1] sv = np.ascontiguousarray(s_arr.ravel())
    cdef Py_ssize_t n = tv.shape[0]
    cdef cnp.ndarray[cnp.float64_t, ndim=1] rho = np.empty(n)
    cdef cnp.ndarray[cnp.float64_t, ndim=1] d1 = np.empty(n)
    cdef cnp.ndarray[cnp.float64_t, ndim=1] d2 = np.empty(n)
    cdef cnp.ndarray[cnp.int32_t, ndim=1] flag = np.zeros(n, dtype=np.int32)

    cdef double gm1 = gamma - 1.0
    cdef double c0 = A * gamma / gm1
    cdef double e0 = pow(rho0, gm1)
    cdef double ti, si, base, hi, lo, x, f, fp, xn, lob, hib
    cdef Py_ssize_t i
    cdef int k, bad

    for i in range(n):
        ti = tv[i]
        si = sv[i]
        bad = 0
        if not isfinite(ti) or ti < 0.0:
            bad = 1
        else:
            base = e0 + gm1 * g * si / (A * gamma)
            if not base > 0.0:
                bad = 1
        if bad:
            rho[i] = NAN
            d1[i] = NAN
            d2[i] = NAN
            flag[i] = NO_SUBSONIC_ROOT
            continue
        hi = pow(base, 1.0 / gm1)
        if ti == 0.0:
            x = hi
        else:
            lo = pow(2.0 * g * rho0 * rho0 * ti / (A * gamma), 1.0 / (gamma + 1.0))
            f = g * rho0 * rho0 * ti / (lo * lo) + c0 * (pow(lo, gm1) - e0) - g * si
            if f >= 0.0 or lo >= hi:
                rho[i] = NAN
                d1[i] = NAN
                d2[i] = NAN
                flag[i] = NO_SUBSONIC_ROOT
                continue
            lob = lo
            hib = hi
            x = hi
            for k in range(max_iter):
                f = g * rho0 * rho0 * ti / (x * x) + c0 * (pow(x, gm1) - e0) - g * si
                fp = A * gamma * pow(x, gamma - 2.0) - 2.0 * g * rho0 * rho0 * ti / (x * x * x)
                if f < 0.0:
                    lob = x
                else:
                    hib = x
                if fp != 0.0:
                    xn = x - f / fp
                else:
                    xn = 0.5 * (lob + hib)
                if not isfinite(xn) or xn <= lob or xn >= hib:
                    xn = 0.5 * (lob + hib)
                if fabs(f) <= tol and fabs(xn - x) <= 1e-15 * (1.0 + fabs(x)):
                    x = xn
                    break
                x = xn
        rho[i] = x
        fp = A * gamma * pow(x, gamma - 2.0) - 2.0 * g * rho0 * rho0 * ti / (x * x * x)
        d1[i] = -(g * rho0 * rho0 / (x * x)) / fp
        d2[i] = g / fp

    return (rho.reshape(shape), d1.reshape(shape), d2.reshape(shape),
            flag.reshape(shape))
