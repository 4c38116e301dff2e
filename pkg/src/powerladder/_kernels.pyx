# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True
"""Compiled kernels: pairwise preference matrix and the shares-equation step.

Numerically identical in structure to ``_kernels_py``. Must not be built with
-ffast-math: the exact summation relies on strict IEEE rounding.
"""

import numpy as np

from libc.math cimport erfc, fabs, sqrt

BACKEND = "cython"

cdef double PREF_MIN = 1e-300
cdef double PREF_MAX = 1.0 - 2.0 ** -53
cdef enum:
    MAX_PARTIALS = 128


cdef double _exact_sum(const double* x, Py_ssize_t n) noexcept nogil:
    # Shewchuk partials with half-even correction, as in CPython's math.fsum
    # for finite inputs.
    cdef double p[MAX_PARTIALS]
    cdef Py_ssize_t k, i, j, m = 0
    cdef double xv, y, t, hi, lo = 0.0, yr

    for k in range(n):
        xv = x[k]
        i = 0
        for j in range(m):
            y = p[j]
            if fabs(xv) < fabs(y):
                t = xv
                xv = y
                y = t
            hi = xv + y
            yr = hi - xv
            lo = y - yr
            if lo != 0.0:
                p[i] = lo
                i += 1
            xv = hi
        m = i
        if xv != 0.0:
            p[m] = xv
            m += 1

    hi = 0.0
    if m > 0:
        m -= 1
        hi = p[m]
        while m > 0:
            xv = hi
            m -= 1
            y = p[m]
            hi = xv + y
            yr = hi - xv
            lo = y - yr
            if lo != 0.0:
                break
        if m > 0 and ((lo < 0.0 and p[m - 1] < 0.0) or (lo > 0.0 and p[m - 1] > 0.0)):
            y = lo * 2.0
            xv = hi + y
            yr = xv - hi
            if y == yr:
                hi = xv
    return hi


def exact_sum(values):
    cdef double[::1] v = np.ascontiguousarray(values, dtype=np.float64)
    if v.shape[0] == 0:
        return 0.0
    return _exact_sum(&v[0], v.shape[0])


def preference_matrix(median, spread):
    cdef double[::1] m = np.ascontiguousarray(median, dtype=np.float64)
    cdef double[::1] s = np.ascontiguousarray(spread, dtype=np.float64)
    cdef Py_ssize_t n = m.shape[0], i, j
    out = np.empty((n, n), dtype=np.float64)
    cdef double[:, ::1] f = out
    cdef double v
    with nogil:
        for i in range(n):
            for j in range(n):
                v = 0.5 * erfc((m[i] - m[j]) / sqrt(2.0 * (s[i] * s[i] + s[j] * s[j])))
                if v < PREF_MIN:
                    v = PREF_MIN
                elif v > PREF_MAX:
                    v = PREF_MAX
                f[i, j] = v
    return out


def pair_flows(shares, freq, pref, gmax, gmin):
    cdef double[::1] s = np.ascontiguousarray(shares, dtype=np.float64)
    cdef double[:, ::1] a = np.ascontiguousarray(freq, dtype=np.float64)
    cdef double[:, ::1] f = np.ascontiguousarray(pref, dtype=np.float64)
    cdef double[::1] gx = np.ascontiguousarray(gmax, dtype=np.float64)
    cdef double[::1] gn = np.ascontiguousarray(gmin, dtype=np.float64)
    cdef Py_ssize_t n = s.shape[0]
    out = np.empty((n, n), dtype=np.float64)
    cdef double[:, ::1] t = out
    with nogil:
        _pair_flows(&s[0], &a[0, 0], &f[0, 0], &gx[0], &gn[0], n, &t[0, 0])
    return out


cdef void _pair_flows(const double* s, const double* a, const double* f,
                      const double* gx, const double* gn, Py_ssize_t n,
                      double* t) noexcept nogil:
    cdef Py_ssize_t i, j
    cdef double into_i, into_j, v
    for i in range(n):
        t[i * n + i] = 0.0
        for j in range(i + 1, n):
            # a[j, i]: frequency of j being replaced by i
            into_i = a[j * n + i] * f[i * n + j] * gx[i] * gn[j]
            into_j = a[i * n + j] * f[j * n + i] * gx[j] * gn[i]
            v = (s[i] * s[j]) * (into_i - into_j)
            t[i * n + j] = v
            t[j * n + i] = (s[j] * s[i]) * (into_j - into_i)


def share_deltas(shares, freq, pref, gmax, gmin, double dt):
    cdef double[::1] s = np.ascontiguousarray(shares, dtype=np.float64)
    cdef double[:, ::1] a = np.ascontiguousarray(freq, dtype=np.float64)
    cdef double[:, ::1] f = np.ascontiguousarray(pref, dtype=np.float64)
    cdef double[::1] gx = np.ascontiguousarray(gmax, dtype=np.float64)
    cdef double[::1] gn = np.ascontiguousarray(gmin, dtype=np.float64)
    cdef Py_ssize_t n = s.shape[0], i
    flows = np.empty((n, n), dtype=np.float64)
    cdef double[:, ::1] t = flows
    out = np.empty(n, dtype=np.float64)
    cdef double[::1] d = out
    with nogil:
        _pair_flows(&s[0], &a[0, 0], &f[0, 0], &gx[0], &gn[0], n, &t[0, 0])
        for i in range(n):
            d[i] = _exact_sum(&t[i, 0], n) * dt
    return out
