# cython: boundscheck=False, wraparound=False, cdivision=True
"""Compiled hot kernels: simplex pivot loop and co-activation SINR.

Must stay operation-for-operation identical to ``pure.py`` (same entering
rule, same two-pass ratio test, same update order) so both backends agree
to the last bit on well-conditioned inputs. No fused multiply-add: builds
use plain -O3 without -march so the multiply and subtract stay separate,
matching NumPy.
"""

import numpy as np

cimport numpy as cnp

cnp.import_array()

DEF PIVOT_TOL = 1e-9
DEF RATIO_TIE_TOL = 1e-12
DEF STALL_LIMIT = 100

STATUS_OPTIMAL = 0
STATUS_UNBOUNDED = 1
STATUS_ITER_LIMIT = 2


def simplex_iterate(double[:, ::1] T, cnp.int64_t[::1] basis,
                    cnp.uint8_t[::1] allowed, long max_iter):
    """Same contract as pure.simplex_iterate; mutates T and basis in place."""
    cdef Py_ssize_t m = T.shape[0] - 1
    cdef Py_ssize_t ncols = T.shape[1]
    cdef Py_ssize_t last = ncols - 1
    cdef long iters = 0
    cdef long stall = 0
    cdef Py_ssize_t i, j, c, pr
    cdef double best_ratio, best_cost, r, piv, factor
    cdef bint found

    while True:
        if stall < STALL_LIMIT:
            # Dantzig: most negative reduced cost, first index on ties.
            j = -1
            best_cost = -PIVOT_TOL
            for c in range(last):
                if allowed[c] != 0 and T[m, c] < best_cost:
                    best_cost = T[m, c]
                    j = c
            if j < 0:
                return STATUS_OPTIMAL, iters
        else:
            # Bland: lowest eligible index, immune to cycling.
            found = False
            j = 0
            while j < last:
                if allowed[j] != 0 and T[m, j] < -PIVOT_TOL:
                    found = True
                    break
                j += 1
            if not found:
                return STATUS_OPTIMAL, iters
        if iters >= max_iter:
            return STATUS_ITER_LIMIT, iters

        best_ratio = np.inf
        for i in range(m):
            if T[i, j] > PIVOT_TOL:
                r = T[i, last] / T[i, j]
                if r < best_ratio:
                    best_ratio = r
        if best_ratio == np.inf:
            return STATUS_UNBOUNDED, iters
        pr = -1
        for i in range(m):
            if T[i, j] > PIVOT_TOL and T[i, last] / T[i, j] <= best_ratio + RATIO_TIE_TOL:
                if pr < 0 or basis[i] < basis[pr]:
                    pr = i

        piv = T[pr, j]
        for c in range(ncols):
            T[pr, c] /= piv
        for i in range(m + 1):
            if i == pr:
                continue
            factor = T[i, j]
            for c in range(ncols):
                T[i, c] -= factor * T[pr, c]
        basis[pr] = j
        iters += 1
        if best_ratio < RATIO_TIE_TOL:
            stall += 1
        else:
            stall = 0


def pattern_sinr(double[:, ::1] gain, double noise_w,
                 cnp.int64_t[::1] tx, cnp.int64_t[::1] rx,
                 double[::1] power_w, double[::1] out):
    """Same contract as pure.pattern_sinr; fills ``out`` with linear SINR."""
    cdef Py_ssize_t k = tx.shape[0]
    cdef Py_ssize_t a, b
    cdef double sig, interf

    for a in range(k):
        sig = power_w[a] * gain[tx[a], rx[a]]
        interf = 0.0
        for b in range(k):
            if b != a:
                interf += power_w[b] * gain[tx[b], rx[a]]
        out[a] = sig / (noise_w + interf)
    return np.asarray(out)
