"""Numba-compiled pairwise reduction kernels (the hot inner loops).

Every grid kernel writes one partial sum per first-cycle node, computed
serially inside its own prange iteration with Kahan compensation, so results
are bit-identical for any thread count; the caller combines the partials
with a fixed-order numpy sum.  fastmath stays off: compensated summation
needs strict IEEE ordering.
"""

import numpy as np
from numba import njit, prange


@njit(cache=True)
def _det_destroy(a):
    """Determinant by Gaussian elimination with partial pivoting; destroys a."""
    n = a.shape[0]
    det = 1.0
    for k in range(n):
        piv_row = k
        amax = abs(a[k, k])
        for i in range(k + 1, n):
            v = abs(a[i, k])
            if v > amax:
                amax = v
                piv_row = i
        if amax == 0.0:
            return 0.0
        if piv_row != k:
            for j in range(k, n):
                tmp = a[piv_row, j]
                a[piv_row, j] = a[k, j]
                a[k, j] = tmp
            det = -det
        piv = a[k, k]
        det *= piv
        for i in range(k + 1, n):
            f = a[i, k] / piv
            for j in range(k + 1, n):
                a[i, j] -= f * a[k, j]
    return det


@njit(parallel=True, cache=True)
def grid_reduce_det(X, JX, WX, Y, JY, WY, l):
    m1 = X.shape[0]
    m2 = Y.shape[0]
    n = X.shape[1]
    p = JX.shape[2]
    partials = np.zeros(m1)
    min_r2 = np.full(m1, np.inf)
    for a in prange(m1):
        mat = np.empty((n, n))
        acc = 0.0
        comp = 0.0
        mr = np.inf
        for b in range(m2):
            r2 = 0.0
            for i in range(n):
                d = X[a, i] - Y[b, i]
                mat[i, n - 1] = d
                r2 += d * d
            if r2 < mr:
                mr = r2
            for j in range(p):
                for i in range(n):
                    mat[i, j] = JX[a, i, j]
                    mat[i, p + j] = JY[b, i, j]
            det = _det_destroy(mat)
            denom = r2 ** (2 * l + 1) * np.sqrt(r2)
            v = WY[b] * det / denom
            t = acc + v
            if abs(acc) >= abs(v):
                comp += (acc - t) + v
            else:
                comp += (v - t) + acc
            acc = t
        partials[a] = WX[a] * (acc + comp)
        min_r2[a] = mr
    return partials, min_r2


@njit(parallel=True, cache=True)
def grid_reduce_minor(X, MX, WX, Y, MY, WY, ix, iy, rho, sign, l):
    m1 = X.shape[0]
    m2 = Y.shape[0]
    n = X.shape[1]
    nterms = ix.shape[0]
    partials = np.zeros(m1)
    min_r2 = np.full(m1, np.inf)
    for a in prange(m1):
        dv = np.empty(n)
        acc = 0.0
        comp = 0.0
        mr = np.inf
        for b in range(m2):
            r2 = 0.0
            for i in range(n):
                d = X[a, i] - Y[b, i]
                dv[i] = d
                r2 += d * d
            if r2 < mr:
                mr = r2
            contr = 0.0
            for t in range(nterms):
                contr += sign[t] * MX[a, ix[t]] * MY[b, iy[t]] * dv[rho[t]]
            denom = r2 ** (2 * l + 1) * np.sqrt(r2)
            v = WY[b] * contr / denom
            t2 = acc + v
            if abs(acc) >= abs(v):
                comp += (acc - t2) + v
            else:
                comp += (v - t2) + acc
            acc = t2
        partials[a] = WX[a] * (acc + comp)
        min_r2[a] = mr
    return partials, min_r2


@njit(parallel=True, cache=True)
def pairs_det(X, JX, Y, JY, l):
    m = X.shape[0]
    n = X.shape[1]
    p = JX.shape[2]
    vals = np.empty(m)
    min_r2 = np.full(m, np.inf)
    for a in prange(m):
        mat = np.empty((n, n))
        r2 = 0.0
        for i in range(n):
            d = X[a, i] - Y[a, i]
            mat[i, n - 1] = d
            r2 += d * d
        for j in range(p):
            for i in range(n):
                mat[i, j] = JX[a, i, j]
                mat[i, p + j] = JY[a, i, j]
        det = _det_destroy(mat)
        denom = r2 ** (2 * l + 1) * np.sqrt(r2)
        vals[a] = det / denom
        min_r2[a] = r2
    return vals, min_r2


@njit(parallel=True, cache=True)
def pairs_minor(X, MX, Y, MY, ix, iy, rho, sign, l):
    m = X.shape[0]
    n = X.shape[1]
    nterms = ix.shape[0]
    vals = np.empty(m)
    min_r2 = np.full(m, np.inf)
    for a in prange(m):
        dv = np.empty(n)
        r2 = 0.0
        for i in range(n):
            d = X[a, i] - Y[a, i]
            dv[i] = d
            r2 += d * d
        contr = 0.0
        for t in range(nterms):
            contr += sign[t] * MX[a, ix[t]] * MY[a, iy[t]] * dv[rho[t]]
        denom = r2 ** (2 * l + 1) * np.sqrt(r2)
        vals[a] = contr / denom
        min_r2[a] = r2
    return vals, min_r2
