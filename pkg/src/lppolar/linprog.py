"""Self-contained dense two-phase simplex solver.

Bodies at desk scale have at most a few dozen vertices, so the LPs driving
fiber queries are tiny dense problems.  Bland's rule is used for both the
entering and leaving variable, which rules out cycling on the degenerate
tableaus that chord queries through a vertex produce.
"""

from __future__ import annotations

import numpy as np

from .errors import UnboundedLP

_TOL = 1e-9


def _run_simplex(T: np.ndarray, basis: np.ndarray, ncols: int) -> None:
    """Drive the tableau T to optimality in place.

    T has shape (m+1, ncols+1): m constraint rows, one cost row, and a
    right-hand-side column.  basis[i] is the variable index basic in row i.
    """
    m = T.shape[0] - 1
    while True:
        costs = T[-1, :ncols]
        entering = -1
        for j in range(ncols):
            if costs[j] < -_TOL:
                entering = j
                break
        if entering < 0:
            return
        # Ratio test, Bland tie-break on the basic variable index.
        best_ratio = np.inf
        leaving = -1
        for i in range(m):
            a = T[i, entering]
            if a > _TOL:
                ratio = T[i, -1] / a
                if ratio < best_ratio - _TOL or (
                    ratio < best_ratio + _TOL
                    and (leaving < 0 or basis[i] < basis[leaving])
                ):
                    best_ratio = ratio
                    leaving = i
        if leaving < 0:
            raise UnboundedLP("unbounded direction in simplex method")
        _pivot(T, basis, leaving, entering)


def _pivot(T: np.ndarray, basis: np.ndarray, row: int, col: int) -> None:
    T[row] /= T[row, col]
    piv = T[row]
    for i in range(T.shape[0]):
        if i != row and T[i, col] != 0.0:
            T[i] -= T[i, col] * piv
    basis[row] = col


def solve_lp(c: np.ndarray, A: np.ndarray, b: np.ndarray):
    """Solve min c.z subject to A z = b, z >= 0.

    Returns (value, z) at an optimal basic solution, or None if infeasible.
    Raises UnboundedLP when the objective is unbounded below.
    """
    c = np.asarray(c, dtype=float)
    A = np.asarray(A, dtype=float)
    b = np.asarray(b, dtype=float).copy()
    m, n = A.shape
    A = A.copy()
    neg = b < 0
    A[neg] *= -1.0
    b[neg] *= -1.0

    # Phase 1 tableau: [A | I | b] with artificial cost row.
    T = np.zeros((m + 1, n + m + 1))
    T[:m, :n] = A
    T[:m, n : n + m] = np.eye(m)
    T[:m, -1] = b
    T[-1, n : n + m] = 1.0
    T[-1] -= T[:m].sum(axis=0)
    basis = np.arange(n, n + m)
    _run_simplex(T, basis, n + m)

    scale = max(1.0, float(np.abs(b).max(initial=0.0)))
    if T[-1, -1] < -1e-7 * scale:
        return None  # infeasible

    # Pivot artificials out of the basis where possible; a row where no
    # structural column can enter is redundant and dropped.
    keep = np.ones(m, dtype=bool)
    for i in range(m):
        if basis[i] >= n:
            for j in range(n):
                if abs(T[i, j]) > 1e-7:
                    _pivot(T, basis, i, j)
                    break
            else:
                keep[i] = False
    if not keep.all():
        T = np.vstack([T[:m][keep], T[-1:]])
        basis = basis[keep]
        m = int(keep.sum())

    # Phase 2: restore the true cost row over structural columns only.
    T2 = np.zeros((m + 1, n + 1))
    T2[:m, :n] = T[:m, :n]
    T2[:m, -1] = T[:m, -1]
    T2[-1, :n] = c
    for i in range(m):
        T2[-1] -= c[basis[i]] * T2[i]
    _run_simplex(T2, basis, n)

    z = np.zeros(n)
    z[basis] = T2[:m, -1]
    return float(c @ z), z


def line_body_extent(vertices: np.ndarray, point: np.ndarray, direction: np.ndarray):
    """Extent of {t : point + t*direction in conv(vertices)}.

    Returns (t_min, t_max) or None when the line misses the hull.  Solved as
    an LP over convex-combination weights with the signed offset t split into
    a positive and a negative part.
    """
    V = np.asarray(vertices, dtype=float)
    m, n = V.shape
    scale = max(1.0, float(np.abs(V).max()), float(np.abs(point).max()))
    Vs = V / scale
    ps = np.asarray(point, dtype=float) / scale
    u = np.asarray(direction, dtype=float)

    # Columns: lambda_1..lambda_m, t_plus, t_minus.
    A = np.zeros((n + 1, m + 2))
    A[:n, :m] = Vs.T
    A[:n, m] = -u
    A[:n, m + 1] = u
    A[n, :m] = 1.0
    b = np.concatenate([ps, [1.0]])

    c = np.zeros(m + 2)
    c[m], c[m + 1] = 1.0, -1.0  # minimize t
    lo = solve_lp(c, A, b)
    if lo is None:
        return None
    hi = solve_lp(-c, A, b)
    if hi is None:  # pragma: no cover - feasibility cannot differ
        return None
    return lo[0] * scale, -hi[0] * scale
