"""Pure NumPy implementations of the hot kernels.

These mirror the compiled versions in ``_speedups.pyx`` operation for
operation (same pivot arithmetic, same tie-breaking scans) so that both
backends produce numerically indistinguishable results.
"""

import numpy as np

PIVOT_TOL = 1e-9
RATIO_TIE_TOL = 1e-12
STALL_LIMIT = 100  # consecutive degenerate pivots before Bland kicks in

STATUS_OPTIMAL = 0
STATUS_UNBOUNDED = 1
STATUS_ITER_LIMIT = 2


def simplex_iterate(T, basis, allowed, max_iter):
    """Run simplex pivots on a dense tableau until optimal/unbounded/limit.

    T is (m+1, ncols): m constraint rows, a reduced-cost row last, and the
    rhs in the last column. ``basis`` holds the basic column of each row.
    ``allowed`` masks columns eligible to enter (artificials are excluded
    in phase two). Entering variable: most negative reduced cost below
    -PIVOT_TOL, first index on ties (Dantzig); after STALL_LIMIT
    consecutive degenerate pivots the rule drops to lowest eligible index
    (Bland) until a pivot makes progress again, which rules out cycling.
    Leaving row: minimum ratio, ties broken by smallest basic column
    index.

    Mutates T and basis in place; returns (status, iterations).
    """
    m = T.shape[0] - 1
    last = T.shape[1] - 1
    iters = 0
    stall = 0
    cost_row = T[m]
    while True:
        if stall < STALL_LIMIT:
            masked = np.where(allowed != 0, cost_row[:last], np.inf)
            j = int(np.argmin(masked))
            if not (masked[j] < -PIVOT_TOL):
                return STATUS_OPTIMAL, iters
        else:
            enterable = np.nonzero(
                (cost_row[:last] < -PIVOT_TOL) & (allowed != 0))[0]
            if enterable.size == 0:
                return STATUS_OPTIMAL, iters
            j = int(enterable[0])
        if iters >= max_iter:
            return STATUS_ITER_LIMIT, iters

        col = T[:m, j]
        rhs = T[:m, last]
        best_ratio = np.inf
        for i in range(m):
            if col[i] > PIVOT_TOL:
                r = rhs[i] / col[i]
                if r < best_ratio:
                    best_ratio = r
        if not np.isfinite(best_ratio):
            return STATUS_UNBOUNDED, iters
        pr = -1
        for i in range(m):
            if col[i] > PIVOT_TOL and rhs[i] / col[i] <= best_ratio + RATIO_TIE_TOL:
                if pr < 0 or basis[i] < basis[pr]:
                    pr = i

        piv = T[pr, j]
        T[pr] /= piv
        colvals = T[:, j].copy()
        colvals[pr] = 0.0
        T -= np.outer(colvals, T[pr])
        basis[pr] = j
        iters += 1
        if best_ratio < RATIO_TIE_TOL:
            stall += 1
        else:
            stall = 0


def pattern_sinr(gain, noise_w, tx, rx, power_w, out):
    """Per-link linear SINR for a set of co-active transmissions.

    gain[u, v] is the linear channel gain from node u transmitting to a
    receiver at node v. Link a receives power_w[a] * gain[tx[a], rx[a]]
    and interference from every other active transmitter at its receiver.
    Results are written into ``out``.
    """
    k = tx.shape[0]
    for a in range(k):
        sig = power_w[a] * gain[tx[a], rx[a]]
        interf = 0.0
        for b in range(k):
            if b != a:
                interf += power_w[b] * gain[tx[b], rx[a]]
        out[a] = sig / (noise_w + interf)
    return out
