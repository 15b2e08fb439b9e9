# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True
"""Compiled kernels: capped-fidelity waterfilling scan and the simplex grid oracle.

Mirrors ``_kernels_py`` exactly; see that module for the contracts.
"""
import numpy as np
cimport numpy as cnp
from libc.math cimport sqrt, floor, INFINITY

cnp.import_array()

cdef double FEASIBILITY_TOL = 1e-12


def capped_fidelity(values, mults, double cap, double n_pad):
    cdef cnp.ndarray[cnp.float64_t, ndim=1] v = np.ascontiguousarray(values, dtype=np.float64)
    cdef cnp.ndarray[cnp.float64_t, ndim=1] m = np.ascontiguousarray(mults, dtype=np.float64)
    cdef Py_ssize_t g = v.shape[0]
    cdef Py_ssize_t i, k
    cdef double n_support = 0.0, head = 0.0, n_capped = 0.0, t
    for i in range(g):
        n_support += m[i]
    if cap * (n_support + n_pad) < 1.0 - FEASIBILITY_TOL:
        raise ValueError(f"cap {cap!r} infeasible for {n_support + n_pad:g} outcomes")
    # suffix sums, not 1 - prefix, to keep small tails accurate
    cdef cnp.ndarray[cnp.float64_t, ndim=1] suffix = np.empty(g + 1, dtype=np.float64)
    suffix[g] = 0.0
    for i in range(g - 1, -1, -1):
        suffix[i] = suffix[i + 1] + m[i] * v[i]
    for k in range(g):
        t = (1.0 - cap * n_capped) / suffix[k]
        if t * v[k] <= cap * (1.0 + 1e-15):
            return sqrt(cap) * head + sqrt(t) * suffix[k], t, k, 0.0
        head += m[k] * sqrt(v[k])
        n_capped += m[k]
    cdef double pad_mass = 1.0 - cap * n_support
    if pad_mass < 0.0:
        pad_mass = 0.0
    return sqrt(cap) * head, cap / v[g - 1], g, pad_mass


def grid_search(p, double threshold, double step, lo, hi):
    cdef cnp.ndarray[cnp.float64_t, ndim=1] pp = np.ascontiguousarray(p, dtype=np.float64)
    cdef cnp.ndarray[cnp.float64_t, ndim=1] l = np.ascontiguousarray(lo, dtype=np.float64)
    cdef cnp.ndarray[cnp.float64_t, ndim=1] h = np.ascontiguousarray(hi, dtype=np.float64)
    cdef Py_ssize_t d = pp.shape[0]
    cdef double eps_edge = 1e-12
    cdef double s0, s1, s2, a, b, c, f, mx
    cdef double best = INFINITY, ba = 0.0, bb = 0.0, bc = 0.0
    cdef Py_ssize_t i, j, na, nb
    if d == 1:
        if pp[0] >= threshold:
            return 1.0, np.ones(1)
        return INFINITY, None
    s0 = sqrt(pp[0])
    s1 = sqrt(pp[1])
    s2 = sqrt(pp[2]) if d == 3 else 0.0
    na = <Py_ssize_t>floor((h[0] - l[0]) / step + 1e-9) + 1
    if d == 2:
        for i in range(na):
            a = l[0] + step * i
            b = 1.0 - a
            if b < l[1] - eps_edge or b > h[1] + eps_edge or b < -eps_edge:
                continue
            if b < 0.0:
                b = 0.0
            f = s0 * sqrt(a) + s1 * sqrt(b)
            if f * f >= threshold:
                mx = a if a > b else b
                if mx < best:
                    best = mx
                    ba = a
                    bb = b
        if best == INFINITY:
            return INFINITY, None
        return best, np.array([ba, bb])
    nb = <Py_ssize_t>floor((h[1] - l[1]) / step + 1e-9) + 1
    for i in range(na):
        a = l[0] + step * i
        for j in range(nb):
            b = l[1] + step * j
            c = 1.0 - a - b
            if c < l[2] - eps_edge or c > h[2] + eps_edge or c < -eps_edge:
                continue
            if c < 0.0:
                c = 0.0
            f = s0 * sqrt(a) + s1 * sqrt(b) + s2 * sqrt(c)
            if f * f >= threshold:
                mx = a
                if b > mx:
                    mx = b
                if c > mx:
                    mx = c
                if mx < best:
                    best = mx
                    ba = a
                    bb = b
                    bc = c
    if best == INFINITY:
        return INFINITY, None
    return best, np.array([ba, bb, bc])


def grid_bbox(p, double threshold, double step, lo, hi, double cutoff):
    cdef cnp.ndarray[cnp.float64_t, ndim=1] pp = np.ascontiguousarray(p, dtype=np.float64)
    cdef cnp.ndarray[cnp.float64_t, ndim=1] l = np.ascontiguousarray(lo, dtype=np.float64)
    cdef cnp.ndarray[cnp.float64_t, ndim=1] h = np.ascontiguousarray(hi, dtype=np.float64)
    cdef Py_ssize_t d = pp.shape[0]
    cdef double eps_edge = 1e-12
    cdef double s0, s1, s2, a, b, c, f, mx
    cdef double lo0 = INFINITY, lo1 = INFINITY, lo2 = INFINITY
    cdef double hi0 = -INFINITY, hi1 = -INFINITY, hi2 = -INFINITY
    cdef Py_ssize_t i, j, na, nb
    cdef bint found = False
    if d == 1:
        if pp[0] >= threshold and cutoff >= 1.0:
            return np.ones(1), np.ones(1)
        return None
    s0 = sqrt(pp[0])
    s1 = sqrt(pp[1])
    s2 = sqrt(pp[2]) if d == 3 else 0.0
    na = <Py_ssize_t>floor((h[0] - l[0]) / step + 1e-9) + 1
    nb = <Py_ssize_t>floor((h[1] - l[1]) / step + 1e-9) + 1 if d == 3 else 1
    for i in range(na):
        a = l[0] + step * i
        for j in range(nb):
            if d == 2:
                b = 1.0 - a
                c = 0.0
                if b < l[1] - eps_edge or b > h[1] + eps_edge or b < -eps_edge:
                    continue
                if b < 0.0:
                    b = 0.0
            else:
                b = l[1] + step * j
                c = 1.0 - a - b
                if c < l[2] - eps_edge or c > h[2] + eps_edge or c < -eps_edge:
                    continue
                if c < 0.0:
                    c = 0.0
            f = s0 * sqrt(a) + s1 * sqrt(b) + s2 * sqrt(c)
            if f * f < threshold:
                continue
            mx = a
            if b > mx:
                mx = b
            if c > mx:
                mx = c
            if mx > cutoff:
                continue
            found = True
            lo0 = a if a < lo0 else lo0
            hi0 = a if a > hi0 else hi0
            lo1 = b if b < lo1 else lo1
            hi1 = b if b > hi1 else hi1
            lo2 = c if c < lo2 else lo2
            hi2 = c if c > hi2 else hi2
    if not found:
        return None
    if d == 2:
        return np.array([lo0, lo1]), np.array([hi0, hi1])
    return np.array([lo0, lo1, lo2]), np.array([hi0, hi1, hi2])
