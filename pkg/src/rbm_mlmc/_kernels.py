"""Compiled inner loops for the reflection map.

Every routine returns a status code instead of raising, so the Python-level
wrappers in ``skorokhod`` can attach step indices and typed exceptions.
Status values: 0 ok, 1 sweep cap exceeded, 2 singular principal submatrix.
"""

import numpy as np
from numba import njit

OK = 0
SWEEP_CAP = 1
SINGULAR = 2
NEG_PUSH = 3

PUSH_TOL = 1e-6  # matches the complementarity tolerance


@njit(cache=True)
def _solve_inplace(a, b):
    """Gaussian elimination with partial pivoting on the k x k system a x = b.

    Overwrites both arguments; returns False when a pivot falls below the
    singularity threshold.
    """
    k = a.shape[0]
    if k == 0:
        return True
    scale = 0.0
    for i in range(k):
        for j in range(k):
            v = abs(a[i, j])
            if v > scale:
                scale = v
    tiny = 1e-13 * scale
    for col in range(k):
        piv = col
        best = abs(a[col, col])
        for row in range(col + 1, k):
            v = abs(a[row, col])
            if v > best:
                best = v
                piv = row
        if best <= tiny:
            return False
        if piv != col:
            for j in range(k):
                tmp = a[col, j]
                a[col, j] = a[piv, j]
                a[piv, j] = tmp
            tmp = b[col]
            b[col] = b[piv]
            b[piv] = tmp
        inv_piv = 1.0 / a[col, col]
        for row in range(col + 1, k):
            factor = a[row, col] * inv_piv
            if factor != 0.0:
                for j in range(col + 1, k):
                    a[row, j] -= factor * a[col, j]
                b[row] -= factor * b[col]
    for col in range(k - 1, -1, -1):
        acc = b[col]
        for j in range(col + 1, k):
            acc -= a[col, j] * b[j]
        b[col] = acc / a[col, col]
    return True


@njit(cache=True)
def lcp_active_set(refl, x, eps, max_sweeps):
    """One static complementarity step: find y >= 0 with y = x + refl @ push.

    Starts from y = x and repeatedly solves for the push amounts on the
    active set {i: y_i < eps} until no coordinate is below -eps. The active
    set only grows for M-matrices, so the sweep count is at most d; the cap
    guards non-M inputs.
    """
    d = x.shape[0]
    y = x.copy()
    push = np.zeros(d)
    idx = np.empty(d, np.int64)
    sweeps = 0
    while True:
        feasible = True
        for i in range(d):
            if y[i] < -eps:
                feasible = False
                break
        if feasible:
            # non-M inputs can terminate with invalid negative pushes
            for i in range(d):
                if push[i] < -PUSH_TOL:
                    return y, push, sweeps, NEG_PUSH
            return y, push, sweeps, OK
        if sweeps >= max_sweeps:
            return y, push, sweeps, SWEEP_CAP
        sweeps += 1
        k = 0
        for i in range(d):
            if y[i] < eps:
                idx[k] = i
                k += 1
        sub = np.empty((k, k))
        rhs = np.empty(k)
        for p in range(k):
            rhs[p] = -x[idx[p]]
            for q in range(k):
                sub[p, q] = refl[idx[p], idx[q]]
        if not _solve_inplace(sub, rhs):
            return y, push, sweeps, SINGULAR
        for i in range(d):
            acc = x[i]
            for p in range(k):
                acc += refl[i, idx[p]] * rhs[p]
            y[i] = acc
        for i in range(d):
            push[i] = 0.0
        for p in range(k):
            push[idx[p]] = rhs[p]


@njit(cache=True)
def reflect_terminal(x_values, refl, y0, eps, max_sweeps):
    """Terminal state and accumulated push of the reflected path.

    ``x_values`` holds the driving input at the grid points; only increments
    between consecutive rows enter. Returns (y, cum_push, status, bad_step).
    """
    n1, d = x_values.shape
    y = y0.copy()
    cum = np.zeros(d)
    w = np.empty(d)
    for k in range(n1 - 1):
        clean = True
        for i in range(d):
            w[i] = y[i] + (x_values[k + 1, i] - x_values[k, i])
            if w[i] < -eps:
                clean = False
        if clean:
            for i in range(d):
                y[i] = w[i]
            continue
        ynew, push, _, status = lcp_active_set(refl, w, eps, max_sweeps)
        if status != OK:
            return ynew, cum, status, k
        for i in range(d):
            y[i] = ynew[i]
            cum[i] += push[i]
    return y, cum, OK, -1


@njit(cache=True)
def reflect_full(x_values, refl, y0, eps, max_sweeps):
    """Reflected path at every grid point plus cumulative push per coordinate.

    Returns (y_values, cum_push, status, bad_step), where both arrays have
    one row per grid point.
    """
    n1, d = x_values.shape
    y_values = np.empty((n1, d))
    cum_push = np.zeros((n1, d))
    w = np.empty(d)
    for i in range(d):
        y_values[0, i] = y0[i]
    for k in range(n1 - 1):
        clean = True
        for i in range(d):
            w[i] = y_values[k, i] + (x_values[k + 1, i] - x_values[k, i])
            if w[i] < -eps:
                clean = False
        if clean:
            for i in range(d):
                y_values[k + 1, i] = w[i]
                cum_push[k + 1, i] = cum_push[k, i]
            continue
        ynew, push, _, status = lcp_active_set(refl, w, eps, max_sweeps)
        if status != OK:
            return y_values, cum_push, status, k
        for i in range(d):
            y_values[k + 1, i] = ynew[i]
            cum_push[k + 1, i] = cum_push[k, i] + push[i]
    return y_values, cum_push, OK, -1
