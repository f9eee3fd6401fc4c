"""Two-phase revised simplex for ``min c.x  s.t.  A x = b, x >= 0``.

Dantzig pricing, switching to Bland's rule after every degenerate pivot so the
method cannot cycle.  Ties go to the lowest variable index.  Optimal results
are basic feasible solutions.
"""
from __future__ import annotations

import enum
from dataclasses import dataclass

import numpy as np

from .errors import LpNumericalError

FEAS_TOL = 1e-9
OPT_TOL = 1e-9
PIVOT_TOL = 1e-11


class LpStatus(enum.Enum):
    OPTIMAL = "optimal"
    INFEASIBLE = "infeasible"
    UNBOUNDED = "unbounded"


@dataclass(frozen=True)
class LinearProgram:
    c: np.ndarray
    A: np.ndarray
    b: np.ndarray

    def __post_init__(self):
        c = np.asarray(self.c, dtype=float)
        A = np.atleast_2d(np.asarray(self.A, dtype=float))
        b = np.asarray(self.b, dtype=float)
        if A.shape != (b.size, c.size):
            raise ValueError(f"inconsistent dimensions: A {A.shape}, b {b.size}, c {c.size}")
        if not (np.all(np.isfinite(A)) and np.all(np.isfinite(b)) and np.all(np.isfinite(c))):
            raise ValueError("LP data must be finite")
        object.__setattr__(self, "c", c)
        object.__setattr__(self, "A", A)
        object.__setattr__(self, "b", b)


@dataclass(frozen=True)
class LpSolution:
    status: LpStatus
    x: np.ndarray | None = None
    objective: float | None = None
    basic: np.ndarray | None = None
    iterations: int = 0

    @property
    def optimal(self) -> bool:
        return self.status is LpStatus.OPTIMAL


def _solve(B, rhs):
    try:
        return np.linalg.solve(B, rhs)
    except np.linalg.LinAlgError:
        raise LpNumericalError("singular basis", float(np.linalg.cond(B))) from None


def _iterate(A, b, c, basis, max_iter):
    """Run simplex pivots from a feasible basis.  Returns (status, basis, iterations)."""
    m, n = A.shape
    degenerate = False
    for it in range(max_iter):
        B = A[:, basis]
        xB = _solve(B, b)
        y = _solve(B.T, c[basis])
        d = c - A.T @ y
        d[basis] = 0.0
        candidates = np.flatnonzero(d < -OPT_TOL)
        if candidates.size == 0:
            return LpStatus.OPTIMAL, basis, it
        if degenerate:
            j = int(candidates[0])
        else:
            j = int(candidates[np.argmin(d[candidates])])
        u = _solve(B, A[:, j])
        rows = np.flatnonzero(u > PIVOT_TOL)
        if rows.size == 0:
            return LpStatus.UNBOUNDED, basis, it
        ratios = np.maximum(xB[rows], 0.0) / u[rows]
        best = ratios.min()
        ties = rows[ratios <= best + FEAS_TOL]
        r = int(min(ties, key=lambda i: basis[i]))
        degenerate = best <= FEAS_TOL
        basis = basis.copy()
        basis[r] = j
    raise LpNumericalError(f"no convergence within {max_iter} pivots",
                           float(np.linalg.cond(A[:, basis])))


def solve_lp(lp: LinearProgram, max_iter: int | None = None) -> LpSolution:
    A, b, c = lp.A.copy(), lp.b.copy(), lp.c
    m, n = A.shape
    if max_iter is None:
        max_iter = 50 * (m + n) + 100
    neg = b < 0
    A[neg] *= -1
    b[neg] *= -1

    # phase 1: artificial variables n..n+m-1
    A1 = np.hstack([A, np.eye(m)])
    c1 = np.concatenate([np.zeros(n), np.ones(m)])
    basis = np.arange(n, n + m)
    status, basis, it1 = _iterate(A1, b, c1, basis, max_iter)
    xB = _solve(A1[:, basis], b)
    infeasibility = float(c1[basis] @ xB)
    if infeasibility > FEAS_TOL * (1 + np.abs(b).max(initial=0.0)):
        return LpSolution(LpStatus.INFEASIBLE, iterations=it1)

    # drive zero-level artificials out of the basis; drop redundant rows
    keep_rows = list(range(m))
    r = 0
    while r < len(basis):
        if basis[r] < n:
            r += 1
            continue
        B = A1[np.ix_(keep_rows, basis)]
        e = np.zeros(len(basis))
        e[r] = 1.0
        row = _solve(B.T, e) @ A[keep_rows]
        nonbasic = [j for j in range(n) if j not in set(basis) and abs(row[j]) > 1e-9]
        if nonbasic:
            basis = basis.copy()
            basis[r] = nonbasic[0]
            r += 1
        else:
            del keep_rows[r]
            basis = np.delete(basis, r)

    A2, b2 = A[keep_rows], b[keep_rows]
    if basis.size == 0:
        # every row was redundant (b must be zero): x = 0 is the only vertex
        if np.any(c < -OPT_TOL):
            return LpSolution(LpStatus.UNBOUNDED, iterations=it1)
        return LpSolution(LpStatus.OPTIMAL, np.zeros(n), 0.0, np.zeros(n, dtype=bool), it1)
    status, basis, it2 = _iterate(A2, b2, c, basis, max_iter)
    if status is LpStatus.UNBOUNDED:
        return LpSolution(status, iterations=it1 + it2)
    x = np.zeros(n)
    x[basis] = _solve(A2[:, basis], b2)
    x[np.abs(x) < FEAS_TOL] = 0.0
    residual = np.abs(A @ x - b).max(initial=0.0)
    if residual > FEAS_TOL * (1 + np.abs(b).max(initial=0.0)) or x.min(initial=0.0) < -FEAS_TOL:
        raise LpNumericalError(f"final basis infeasible (residual {residual:.3g})",
                               float(np.linalg.cond(A2[:, basis])))
    x = np.maximum(x, 0.0)
    indicator = np.zeros(n, dtype=bool)
    indicator[basis] = True
    return LpSolution(LpStatus.OPTIMAL, x, float(c @ x), indicator, it1 + it2)
