# cython: language_level=3
"""Compiled hot kernels: product-limit scan and calibration sums."""

import numpy as np

cimport numpy as cnp

cnp.import_array()


def km_curve(z_in, delta_in, double t):
    """Same contract as ``_fallback.km_curve``; see there for details."""
    cdef cnp.ndarray[cnp.float64_t, ndim=1] z = np.ascontiguousarray(z_in, dtype=np.float64)
    cdef cnp.ndarray[cnp.int8_t, ndim=1] delta = np.ascontiguousarray(delta_in, dtype=np.int8)
    cdef Py_ssize_t n = z.shape[0]

    sub = z <= t
    cdef cnp.ndarray[cnp.float64_t, ndim=1] zs = np.ascontiguousarray(z[sub])
    cdef cnp.ndarray[cnp.int8_t, ndim=1] ds_all = delta[sub]
    order = np.argsort(zs, kind="stable")
    zs = np.ascontiguousarray(zs[order])
    cdef cnp.ndarray[cnp.int8_t, ndim=1] ds = np.ascontiguousarray(ds_all[order])

    cdef Py_ssize_t m = zs.shape[0]
    cdef cnp.ndarray[cnp.float64_t, ndim=1] times = np.empty(m, dtype=np.float64)
    cdef cnp.ndarray[cnp.int64_t, ndim=1] risk = np.empty(m, dtype=np.int64)
    cdef cnp.ndarray[cnp.int64_t, ndim=1] events = np.empty(m, dtype=np.int64)

    cdef double survival = 1.0
    cdef double greenwood = 0.0
    cdef bint degenerate = 0
    cdef Py_ssize_t i = 0, k = 0
    cdef Py_ssize_t at_risk = n
    cdef Py_ssize_t d, c
    cdef double u

    while i < m:
        u = zs[i]
        d = 0
        c = 0
        while i < m and zs[i] == u:
            if ds[i] != 0:
                d += 1
            else:
                c += 1
            i += 1
        if d > 0:
            times[k] = u
            risk[k] = at_risk
            events[k] = d
            k += 1
            if d == at_risk:
                degenerate = 1
                survival = 0.0
            else:
                survival *= 1.0 - (<double>d) / (<double>at_risk)
                greenwood += (<double>d) / ((<double>at_risk) * (<double>(at_risk - d)))
        at_risk -= d + c

    if k == 0:
        return times[:0], risk[:0], events[:0], 1.0, 0.0, False
    if degenerate:
        return (np.ascontiguousarray(times[:k]), np.ascontiguousarray(risk[:k]),
                np.ascontiguousarray(events[:k]), 0.0, float("nan"), True)
    return (np.ascontiguousarray(times[:k]), np.ascontiguousarray(risk[:k]),
            np.ascontiguousarray(events[:k]), survival,
            survival * survival * greenwood, False)


def calibration_sums(z_in, delta_in, e_t0_in, e_z_in, double t0):
    """Same contract as ``_fallback.calibration_sums``."""
    cdef cnp.ndarray[cnp.float64_t, ndim=1] z = np.ascontiguousarray(z_in, dtype=np.float64)
    cdef cnp.ndarray[cnp.int8_t, ndim=1] delta = np.ascontiguousarray(delta_in, dtype=np.int8)
    cdef cnp.ndarray[cnp.float64_t, ndim=1] e_t0 = np.ascontiguousarray(e_t0_in, dtype=np.float64)
    cdef cnp.ndarray[cnp.float64_t, ndim=1] e_z = np.ascontiguousarray(e_z_in, dtype=np.float64)

    cdef Py_ssize_t n = z.shape[0]
    cdef Py_ssize_t n_uks = 0, o_ks = 0
    cdef double e_full = 0.0, e_ks = 0.0, e_uks = 0.0, e_m1 = 0.0, e_m2 = 0.0
    cdef Py_ssize_t i
    cdef bint unknown

    for i in range(n):
        unknown = delta[i] == 0 and z[i] < t0
        e_full += e_t0[i]
        if unknown:
            n_uks += 1
            e_uks += e_t0[i]
            e_m2 += e_z[i]
        else:
            e_ks += e_t0[i]
            e_m2 += e_t0[i]
            if delta[i] != 0 and z[i] <= t0:
                o_ks += 1
        if z[i] < t0:
            e_m1 += e_z[i]
        else:
            e_m1 += e_t0[i]

    return n - n_uks, n_uks, o_ks, e_full, e_ks, e_uks, e_m1, e_m2
