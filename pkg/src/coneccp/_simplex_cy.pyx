# cython: boundscheck=False, wraparound=False, cdivision=True, language_level=3
"""Compiled simplex pivot kernel.

Keep the pivot selection rules in lockstep with ``_simplex_py``: both
backends must visit the same basis sequence on the same tableau.
"""

OPTIMAL = 0
UNBOUNDED = 1
ITER_LIMIT = 2

cdef double INF = float("inf")


def pivot_loop(double[:, ::1] T, long[::1] basis, Py_ssize_t ncols,
               double tol, long max_pivots, long bland_after=50):
    cdef Py_ssize_t m = T.shape[0] - 1
    cdef Py_ssize_t width = T.shape[1]
    cdef Py_ssize_t rhs_col = width - 1
    cdef long pivots = 0
    cdef long degenerate_run = 0
    cdef bint bland = False
    cdef Py_ssize_t col, row, i, j
    cdef double best_obj, ratio, best, tie_cut, piv, f

    while pivots < max_pivots:
        # --- entering column ---
        col = -1
        if bland:
            for j in range(ncols):
                if T[m, j] < -tol:
                    col = j
                    break
        else:
            best_obj = -tol
            for j in range(ncols):
                if T[m, j] < best_obj:
                    best_obj = T[m, j]
                    col = j
        if col < 0:
            return OPTIMAL, pivots

        # --- ratio test ---
        best = INF
        for i in range(m):
            if T[i, col] > tol:
                ratio = T[i, rhs_col] / T[i, col]
                if ratio < best:
                    best = ratio
        if best == INF:
            return UNBOUNDED, pivots
        tie_cut = best + tol * (1.0 + (best if best >= 0 else -best))
        row = -1
        for i in range(m):
            if T[i, col] > tol:
                ratio = T[i, rhs_col] / T[i, col]
                if ratio <= tie_cut:
                    if row < 0 or basis[i] < basis[row]:
                        row = i
        if best <= tol:
            degenerate_run += 1
            if degenerate_run >= bland_after:
                bland = True
        else:
            degenerate_run = 0

        # --- pivot ---
        piv = T[row, col]
        for j in range(width):
            T[row, j] /= piv
        for i in range(m + 1):
            if i != row:
                f = T[i, col]
                if f != 0.0:
                    for j in range(width):
                        T[i, j] -= f * T[row, j]
        for i in range(m + 1):
            T[i, col] = 0.0
        T[row, col] = 1.0
        basis[row] = col
        pivots += 1

    return ITER_LIMIT, pivots
