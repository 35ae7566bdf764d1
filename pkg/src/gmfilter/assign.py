"""Rectangular linear assignment.

Solves ``n_c x n`` problems (``n_c <= n``) directly with shortest augmenting
paths in the style of Jonker and Volgenant, keeping the dual potentials.  The
duals are then used to pick the lexicographically smallest optimum, which
makes the answer independent of incidental floating-point tie order.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
import scipy.sparse as sp
from scipy.sparse.csgraph import maximum_bipartite_matching

from .graph import Injection, TransportPlan

__all__ = ["AssignmentProblem", "solve", "linear_assignment", "project_to_injection"]


@dataclass(frozen=True, eq=False)
class AssignmentProblem:
    rewards: np.ndarray
    sense: str = "maximize"

    def __post_init__(self):
        r = np.array(self.rewards, dtype=float)
        if r.ndim != 2:
            raise ValueError("rewards must be a matrix")
        if r.shape[0] > r.shape[1]:
            raise ValueError(f"need n_c <= n, got shape {r.shape}")
        if not np.all(np.isfinite(r)):
            raise ValueError("rewards contain NaN or infinite entries")
        if self.sense not in ("maximize", "minimize"):
            raise ValueError(f"sense must be 'maximize' or 'minimize', not {self.sense!r}")
        object.__setattr__(self, "rewards", r)


def _augmenting_paths(cost: np.ndarray):
    """Min-cost assignment of every row; returns ``(col4row, u, v)``.

    On exit ``cost - u[:, None] - v`` is non-negative, zero on the assignment,
    ``v <= 0`` and ``v == 0`` on unassigned columns.
    """
    nr, nc = cost.shape
    u = np.zeros(nr)
    v = np.zeros(nc)
    col4row = np.full(nr, -1, dtype=np.int64)
    row4col = np.full(nc, -1, dtype=np.int64)
    for cur in range(nr):
        shortest = np.full(nc, np.inf)
        path = np.full(nc, -1, dtype=np.int64)
        scanned = np.zeros(nc, dtype=bool)
        scanned_rows = []
        i = cur
        min_val = 0.0
        sink = -1
        while sink < 0:
            scanned_rows.append(i)
            r = min_val + cost[i] - u[i] - v
            better = (r < shortest) & ~scanned
            path[better] = i
            shortest[better] = r[better]
            open_ = np.where(scanned, np.inf, shortest)
            min_val = open_.min()
            cand = np.flatnonzero(open_ == min_val)
            free = cand[row4col[cand] < 0]
            # prefer a free column (ends the search), then the lowest index
            j = free[0] if free.size else cand[0]
            scanned[j] = True
            if row4col[j] < 0:
                sink = j
            else:
                i = row4col[j]
        u[cur] += min_val
        for r_ in scanned_rows[1:]:
            u[r_] += min_val - shortest[col4row[r_]]
        v[scanned] -= min_val - shortest[scanned]
        j = sink
        while True:
            i = path[j]
            row4col[j] = i
            col4row[i], j = j, col4row[i]
            if i == cur:
                break
    return col4row, u, v


def _completable(tight: np.ndarray, must: np.ndarray, rows, cols) -> bool:
    """Can ``rows`` be matched into ``cols`` along tight edges covering every must-cover column?

    A matching saturating the rows and one saturating the must-cover columns
    together imply one saturating both (Mendelsohn-Dulmage).
    """
    need = must[cols]
    if len(rows) == 0:
        return not need.any()
    sub = tight[np.ix_(rows, cols)]
    m = maximum_bipartite_matching(sp.csr_matrix(sub), perm_type="column")
    if np.any(m < 0):
        return False
    if need.any():
        mc = maximum_bipartite_matching(sp.csr_matrix(sub[:, need].T), perm_type="column")
        if np.any(mc < 0):
            return False
    return True


def _lex_smallest(cost, col4row, u, v) -> np.ndarray:
    """Lexicographically smallest assignment among all optima.

    Optimal assignments are exactly the row-saturating matchings on tight
    edges that also cover every column with a strictly negative dual.
    """
    scale = max(1.0, float(np.abs(cost).max()))
    tol = 1e-10 * scale
    tight = (cost - u[:, None] - v[None, :]) <= tol
    first_tight = tight.argmax(axis=1)
    if np.all(first_tight >= col4row):
        return col4row
    must = v < -tol
    nr, nc = cost.shape
    used = np.zeros(nc, dtype=bool)
    out = np.empty(nr, dtype=np.int64)
    for i in range(nr):
        cands = np.flatnonzero(tight[i] & ~used)
        chosen = cands[-1]
        for j in cands[:-1]:
            used[j] = True
            ok = _completable(tight, must, np.arange(i + 1, nr), np.flatnonzero(~used))
            used[j] = False
            if ok:
                chosen = j
                break
        out[i] = chosen
        used[chosen] = True
    return out


def solve(problem: AssignmentProblem) -> tuple[Injection, float]:
    """Optimal injection for a rectangular assignment problem.

    Returns the injection and its total reward.  Among several optima the
    lexicographically smallest map is returned.
    """
    R = problem.rewards
    nr, nc = R.shape
    if nr == 0:
        return Injection(np.zeros(0, dtype=np.int64), nc), 0.0
    if problem.sense == "maximize":
        cost = R.max(axis=1, keepdims=True) - R
    else:
        cost = R - R.min(axis=1, keepdims=True)
    col4row, u, v = _augmenting_paths(cost)
    col4row = _lex_smallest(cost, col4row, u, v)
    value = float(R[np.arange(nr), col4row].sum())
    return Injection(col4row, nc), value


def linear_assignment(rewards, maximize: bool = True) -> tuple[Injection, float]:
    return solve(AssignmentProblem(rewards, "maximize" if maximize else "minimize"))


def project_to_injection(plan: TransportPlan) -> Injection:
    """Injection with the largest total mass under ``plan``."""
    return solve(AssignmentProblem(plan.rows, "maximize"))[0]
