"""Compiled inner loops shared by the depth estimators.

Every kernel works on a *pool* of curves and a matrix of non-negative
integer weights (one row per weighting).  A row of weights describes a
reference sample as a multiset over the pool, which lets one bootstrap
replicate be expressed without copying curves.
"""

import math

import numpy as np
from numba import njit


@njit(cache=True, nogil=True)
def _in_window(ax, ay, bx, by):
    # b lies in the half-open angular arc [angle(a), angle(a) + pi)
    cross = ax * by - ay * bx
    if cross > 0.0:
        return True
    if cross == 0.0:
        return ax * bx + ay * by > 0.0
    return False


@njit(cache=True, nogil=True)
def halfspace_pairs_kernel(X, pairs, queries, WT, augment):
    """Mean bivariate halfspace depth over grid pairs.

    ``WT`` holds integer weights transposed, shape (len(X), R), so the
    replicate axis is contiguous.  Returns an array of shape
    (R, len(queries)).  With ``augment`` each query is counted once more
    in its own reference sample.
    """
    N = X.shape[0]
    P = pairs.shape[0]
    Q = queries.shape[0]
    R = WT.shape[1]
    out = np.zeros((R, Q))
    totals = np.zeros(R, dtype=np.int64)
    for j in range(N):
        for r in range(R):
            totals[r] += WT[j, r]
    if augment:
        for r in range(R):
            totals[r] += 1

    idx = np.empty(N, dtype=np.int64)
    ang = np.empty(N)
    vx = np.empty(N)
    vy = np.empty(N)
    sx = np.empty(N)
    sy = np.empty(N)
    sidx = np.empty(N, dtype=np.int64)
    ends = np.empty(N, dtype=np.int64)
    pre = np.empty((N + 1, R), dtype=WT.dtype)
    best = np.empty(R, dtype=WT.dtype)
    acc = np.zeros((R, Q), dtype=np.int64)

    for qi in range(Q):
        q = queries[qi]
        for p in range(P):
            a = pairs[p, 0]
            b = pairs[p, 1]
            qx = X[q, a]
            qy = X[q, b]
            m = 0
            for j in range(N):
                dx = X[j, a] - qx
                dy = X[j, b] - qy
                if dx == 0.0 and dy == 0.0:
                    continue
                idx[m] = j
                vx[m] = dx
                vy[m] = dy
                ang[m] = math.atan2(dy, dx)
                m += 1
            if m == 0:
                for r in range(R):
                    acc[r, qi] += totals[r]
                continue
            order = np.argsort(ang[:m])
            for s in range(m):
                o = order[s]
                sx[s] = vx[o]
                sy[s] = vy[o]
                sidx[s] = idx[o]
            e = 0
            for k in range(m):
                if e < k + 1:
                    e = k + 1
                while e < k + m and _in_window(sx[k], sy[k], sx[e % m], sy[e % m]):
                    e += 1
                ends[k] = e
            for r in range(R):
                pre[0, r] = 0
                best[r] = 0
            for s in range(m):
                row = WT[sidx[s]]
                for r in range(R):
                    pre[s + 1, r] = pre[s, r] + row[r]
            for k in range(m):
                e = ends[k]
                if e <= m:
                    for r in range(R):
                        v = pre[e, r] - pre[k, r]
                        if v > best[r]:
                            best[r] = v
                else:
                    e -= m
                    for r in range(R):
                        v = pre[m, r] - pre[k, r] + pre[e, r]
                        if v > best[r]:
                            best[r] = v
            for r in range(R):
                acc[r, qi] += totals[r] - best[r]
    for qi in range(Q):
        for r in range(R):
            out[r, qi] = acc[r, qi] / (totals[r] * P)
    return out
