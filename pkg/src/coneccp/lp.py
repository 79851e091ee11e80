"""Dense linear programming front end for the cutting-plane masters.

Solves   min c'y   s.t.  A y <= b,  lo <= y <= hi   (entries of lo/hi may be
infinite) by a textbook two-phase tableau simplex with Dantzig pricing and a
Bland anti-cycling switch.  Problem sizes here are tiny, so exact dense
pivoting is both simple and reliable.

The pivot loop itself lives in a kernel module with two interchangeable
implementations: a compiled Cython extension and a numpy fallback.  The
compiled one is picked at import time when available; set the environment
variable ``CONECCP_PURE_PYTHON=1`` to force the fallback.
"""

from __future__ import annotations

import os
from dataclasses import dataclass

import numpy as np

from . import _simplex_py

if os.environ.get("CONECCP_PURE_PYTHON"):
    _kernel = _simplex_py
    KERNEL_BACKEND = "python"
else:
    try:
        from . import _simplex_cy as _kernel  # type: ignore[no-redef]

        KERNEL_BACKEND = "cython"
    except ImportError:
        _kernel = _simplex_py
        KERNEL_BACKEND = "python"

OPTIMAL = "optimal"
INFEASIBLE = "infeasible"
UNBOUNDED = "unbounded"
ITER_LIMIT = "iter_limit"

_PIVOT_TOL = 1e-10


@dataclass
class LpResult:
    status: str
    x: np.ndarray | None
    value: float


def solve_lp(c, A, b, lo, hi, *, max_pivots=None, kernel=None) -> LpResult:
    """Minimize c'y over A y <= b, lo <= y <= hi."""
    c = np.asarray(c, dtype=float)
    lo = np.asarray(lo, dtype=float)
    hi = np.asarray(hi, dtype=float)
    n = c.size
    if A is None or np.size(A) == 0:
        A = np.zeros((0, n))
        b = np.zeros(0)
    A = np.asarray(A, dtype=float).reshape(-1, n)
    b = np.asarray(b, dtype=float).reshape(-1)
    kern = kernel if kernel is not None else _kernel

    # Shift/split variables so every simplex variable is >= 0.
    col_A: list[np.ndarray] = []
    col_c: list[float] = []
    recover: list[tuple[int, float]] = []  # (orig index, sign) per kernel column
    ub_rows: list[tuple[int, float]] = []  # (kernel column, upper bound)
    offsets = np.zeros(n)  # constant part of each original variable
    shift = 0.0  # objective constant introduced by the shifts
    base = np.zeros(A.shape[0])  # rhs correction introduced by the shifts

    for j in range(n):
        a_col = A[:, j]
        if np.isfinite(lo[j]):
            # y_j = lo_j + u,  u >= 0  (and u <= hi_j - lo_j when hi finite)
            offsets[j] = lo[j]
            shift += c[j] * lo[j]
            base += a_col * lo[j]
            col_A.append(a_col)
            col_c.append(c[j])
            recover.append((j, 1.0))
            if np.isfinite(hi[j]):
                ub_rows.append((len(col_A) - 1, hi[j] - lo[j]))
        elif np.isfinite(hi[j]):
            # y_j = hi_j - u,  u >= 0
            offsets[j] = hi[j]
            shift += c[j] * hi[j]
            base += a_col * hi[j]
            col_A.append(-a_col)
            col_c.append(-c[j])
            recover.append((j, -1.0))
        else:
            # free: y_j = u+ - u-
            col_A.append(a_col)
            col_c.append(c[j])
            recover.append((j, 1.0))
            col_A.append(-a_col)
            col_c.append(-c[j])
            recover.append((j, -1.0))

    nk = len(col_A)
    m0 = A.shape[0]
    m = m0 + len(ub_rows)
    Ak = np.zeros((m, nk))
    bk = np.zeros(m)
    for jj, a_col in enumerate(col_A):
        Ak[:m0, jj] = a_col
    bk[:m0] = b - base
    for r, (col_idx, bound) in enumerate(ub_rows):
        Ak[m0 + r, col_idx] = 1.0
        bk[m0 + r] = bound

    status, u, val = _two_phase(Ak, bk, np.asarray(col_c), kern, max_pivots)
    if u is None:
        return LpResult(status, None, np.nan)

    y = offsets.copy()
    for jj, (j, sgn) in enumerate(recover):
        y[j] += sgn * u[jj]
    return LpResult(status, y, val + shift)


def _two_phase(A, b, c, kern, max_pivots):
    """Simplex on  min c'u  s.t.  A u <= b, u >= 0  (b of any sign)."""
    m, n = A.shape
    if max_pivots is None:
        max_pivots = 200 + 25 * (m + n)

    neg = b < 0
    n_art = int(np.count_nonzero(neg))
    width = n + m + n_art + 1
    T = np.zeros((m + 1, width))
    basis = np.zeros(m, dtype=np.int64)

    T[:m, :n] = A
    T[:m, -1] = b
    art = n + m
    for i in range(m):
        T[i, n + i] = 1.0  # slack
        if neg[i]:
            T[i, :] *= -1.0
            T[i, art] = 1.0
            basis[i] = art
            art += 1
        else:
            basis[i] = n + i

    if n_art:
        # Phase 1: minimize the sum of artificials.
        T[m, n + m:n + m + n_art] = 1.0
        for i in range(m):
            if basis[i] >= n + m:
                T[m, :] -= T[i, :]
        status, _ = kern.pivot_loop(T, basis, n + m + n_art, _PIVOT_TOL,
                                    max_pivots)
        if status == _simplex_py.ITER_LIMIT:
            return ITER_LIMIT, None, np.nan
        if -T[m, -1] > 1e-9 * (1.0 + float(np.abs(b).sum())):
            return INFEASIBLE, None, np.nan
        # Drive any lingering artificial out of the basis when possible.
        for i in range(m):
            if basis[i] >= n + m:
                cols = np.nonzero(np.abs(T[i, :n + m]) > _PIVOT_TOL)[0]
                if cols.size:
                    _simplex_py._pivot(T, i, int(cols[0]))
                    basis[i] = int(cols[0])

    # Phase 2 objective row, priced through the current basis.
    T[m, :] = 0.0
    T[m, :n] = c
    for i in range(m):
        bj = basis[i]
        if bj < n and c[bj] != 0.0:
            T[m, :] -= c[bj] * T[i, :]

    status, _ = kern.pivot_loop(T, basis, n + m, _PIVOT_TOL, max_pivots)
    if status == _simplex_py.ITER_LIMIT:
        return ITER_LIMIT, None, np.nan
    if status == _simplex_py.UNBOUNDED:
        return UNBOUNDED, None, np.nan

    u = np.zeros(n + m + n_art)
    u[basis] = T[:m, -1]
    return OPTIMAL, u[:n], float(-T[m, -1])
