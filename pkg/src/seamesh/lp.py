"""Dense two-phase simplex for small linear programs.

Minimizes c'x subject to rows of A x {<=,=,>=} b with x >= 0. Bland's rule
guarantees termination; the iteration cap (50 per row-plus-column of the
standard form) is a defect detector, never returned as a result. The pivot
loop itself lives in the kernel backends; this module owns problem setup,
phase handling, and solution extraction.

Tolerances used package-wide: FEAS_TOL = 1e-6 absolute feasibility,
PIVOT_TOL = 1e-9 pivot threshold.
"""

import math
from dataclasses import dataclass, field

import numpy as np

from . import _kernels as kern

FEAS_TOL = 1e-6
PIVOT_TOL = 1e-9

OPTIMAL = "Optimal"
INFEASIBLE = "Infeasible"
UNBOUNDED = "Unbounded"

LEQ = "<="
EQ = "="
GEQ = ">="


class MaxIterations(Exception):
    """Pivot budget exhausted; indicates a solver defect, not a result."""


@dataclass
class LinearProgram:
    c: np.ndarray
    A: np.ndarray
    senses: list
    b: np.ndarray

    def __post_init__(self):
        self.c = np.asarray(self.c, dtype=float)
        self.A = np.asarray(self.A, dtype=float)
        if self.A.ndim == 1:
            self.A = self.A.reshape(1, -1)
        self.b = np.asarray(self.b, dtype=float)
        m, n = self.A.shape
        if self.c.shape != (n,) or self.b.shape != (m,) or len(self.senses) != m:
            raise ValueError("inconsistent LP dimensions")
        for s in self.senses:
            if s not in (LEQ, EQ, GEQ):
                raise ValueError(f"unknown sense {s!r}")
        if not (np.all(np.isfinite(self.c)) and np.all(np.isfinite(self.A))
                and np.all(np.isfinite(self.b))):
            raise ValueError("LP entries must be finite")

    @property
    def n(self):
        return self.A.shape[1]

    @property
    def m(self):
        return self.A.shape[0]


@dataclass
class LpSolution:
    status: str
    x: np.ndarray = None
    objective_value: float = math.nan
    iterations: int = 0


def _pivot(T, pr, j):
    # Same arithmetic as the kernel pivot so phase transitions do not
    # perturb cross-backend agreement.
    T[pr] /= T[pr, j]
    colvals = T[:, j].copy()
    colvals[pr] = 0.0
    T -= np.outer(colvals, T[pr])


def solve_lp(lp):
    """Two-phase simplex. Returns LpSolution; raises MaxIterations on a
    blown pivot budget."""
    m, n = lp.m, lp.n
    A = lp.A.copy()
    b = lp.b.copy()
    senses = list(lp.senses)
    for i in range(m):
        if b[i] < 0.0:
            A[i] = -A[i]
            b[i] = -b[i]
            senses[i] = {LEQ: GEQ, GEQ: LEQ, EQ: EQ}[senses[i]]

    ineq_rows = [i for i in range(m) if senses[i] != EQ]
    n_slack = len(ineq_rows)
    art_rows = [i for i in range(m) if senses[i] == EQ or senses[i] == GEQ]
    n_art = len(art_rows)
    ncols = n + n_slack + n_art + 1
    last = ncols - 1

    T = np.zeros((m + 1, ncols))
    T[:m, :n] = A
    T[:m, last] = b
    basis = np.empty(m, dtype=np.int64)
    slack_of = {}
    for k, i in enumerate(ineq_rows):
        T[i, n + k] = 1.0 if senses[i] == LEQ else -1.0
        slack_of[i] = n + k
    for k, i in enumerate(art_rows):
        T[i, n + n_slack + k] = 1.0
        basis[i] = n + n_slack + k
    for i in range(m):
        if senses[i] == LEQ:
            basis[i] = slack_of[i]

    budget = 50 * (m + ncols - 1)
    iters = 0

    if n_art:
        # Phase 1: minimize the artificial sum. Cost row starts as the
        # artificial indicator and is reduced against the initial basis.
        T[m, n + n_slack:last] = 1.0
        for i in art_rows:
            T[m] -= T[i]
        allowed = np.ones(last, dtype=np.uint8)
        status, it1 = kern.simplex_iterate(T, basis, allowed, budget)
        iters += it1
        if status == kern.STATUS_ITER_LIMIT:
            raise MaxIterations(f"phase 1 exceeded {budget} pivots")
        if status == kern.STATUS_UNBOUNDED:
            raise AssertionError("phase 1 objective is bounded below by 0")
        if -T[m, last] > FEAS_TOL:
            return LpSolution(INFEASIBLE, iterations=iters)

        # Drive remaining artificials out of the basis; a row offering no
        # pivot among real columns is redundant and dropped.
        redundant = []
        for i in range(m):
            if basis[i] >= n + n_slack:
                piv_col = -1
                for j in range(n + n_slack):
                    if abs(T[i, j]) > PIVOT_TOL:
                        piv_col = j
                        break
                if piv_col < 0:
                    redundant.append(i)
                else:
                    _pivot(T, i, piv_col)
                    basis[i] = piv_col
        if redundant:
            keep = [i for i in range(m) if i not in set(redundant)]
            T = np.ascontiguousarray(np.vstack([T[keep], T[m:]]))
            basis = basis[np.array(keep, dtype=np.int64)]

    # Drop artificial columns and install the real objective.
    mm = len(basis)
    T = np.ascontiguousarray(
        np.hstack([T[: mm + 1, : n + n_slack], T[: mm + 1, last:]]))
    c_ext = np.zeros(n + n_slack)
    c_ext[:n] = lp.c
    costrow = np.zeros(n + n_slack + 1)
    costrow[: n + n_slack] = c_ext
    for i in range(mm):
        cb = c_ext[basis[i]]
        if cb != 0.0:
            costrow -= cb * T[i]
    T[mm] = costrow

    allowed = np.ones(n + n_slack, dtype=np.uint8)
    status, it2 = kern.simplex_iterate(T, basis, allowed, budget - iters)
    iters += it2
    if status == kern.STATUS_ITER_LIMIT:
        raise MaxIterations(f"phase 2 exceeded {budget} pivots")
    if status == kern.STATUS_UNBOUNDED:
        return LpSolution(UNBOUNDED, objective_value=-math.inf, iterations=iters)

    x = np.zeros(n)
    for i in range(mm):
        if basis[i] < n:
            x[basis[i]] = T[i, -1]
    return LpSolution(OPTIMAL, x, float(lp.c @ x), iters)


def check_solution(lp, sol, feas_tol=FEAS_TOL):
    """Independent verifier: re-evaluates feasibility and the objective
    from the raw problem data. Shares nothing with the pivoting path."""
    if sol.status != OPTIMAL:
        return True
    x = np.asarray(sol.x, dtype=float)
    if x.shape != (lp.n,) or not np.all(np.isfinite(x)):
        return False
    if np.min(x, initial=0.0) < -1e-9:
        return False
    lhs = lp.A @ x
    for i, s in enumerate(lp.senses):
        if s == LEQ and lhs[i] > lp.b[i] + feas_tol:
            return False
        if s == GEQ and lhs[i] < lp.b[i] - feas_tol:
            return False
        if s == EQ and abs(lhs[i] - lp.b[i]) > feas_tol:
            return False
    cx = float(lp.c @ x)
    denom = max(abs(cx), abs(sol.objective_value), 1.0)
    return abs(cx - sol.objective_value) / denom <= 1e-9


def dump_lp(lp):
    """Plain-text tableau for debugging. Not a stable interface."""
    lines = ["# minimize", " ".join(repr(v) for v in lp.c)]
    lines.append("# constraints")
    for i in range(lp.m):
        row = " ".join(repr(v) for v in lp.A[i])
        lines.append(f"{row} {lp.senses[i]} {lp.b[i]!r}")
    return "\n".join(lines) + "\n"
