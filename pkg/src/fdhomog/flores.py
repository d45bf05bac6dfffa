"""Flores et al. depth-based homogeneity statistics and their bootstrap test.

``d_F(g)`` denotes the depth of ``g`` in ``F`` with ``g`` appended, and
``D_F(G)`` the curve of ``G`` maximizing ``d_F``.  The statistics are::

    P1(F, G) = d_F(D_G(G))
    P2(F, G) = P1(F, F) - P1(F, G)
    P3(F, G) = d_F(D_F(G))
    P4(F, G) = |P3(F, G) - P1(F, F)| * |P3(F, G) - P1(G, G)|

Argmax ties go to the lowest curve index.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from sklearn.base import BaseEstimator

from ._seeding import check_seed, generator
from .curves import pool
from .ddplot import MIN_BOOT, TestResult, _check_pair, group_weights
from .depth import as_sample, make_depth

NULL_SCHEME = "pooled"


@dataclass(frozen=True)
class FloresStats:
    p1: float
    p2: float
    p3: float
    p4: float
    deepest_in_g: int
    deepest_of_g_in_f: int


def depth_in_augmented(g_curve, f, method="fm", **depth_params) -> float:
    """Depth of ``g_curve`` in the sample ``f`` with ``g_curve`` appended."""
    f = as_sample(f)
    g = as_sample(np.asarray(g_curve, dtype=float).reshape(1, -1), f.grid)
    depth = make_depth(method, **depth_params)
    H = pool(g, f)
    weights = np.concatenate([[0], np.ones(f.n, dtype=np.int64)])
    return float(depth.pool_depths(H, weights[None, :], augment=True, queries=[0])[0, 0])


def _stats_from_augmented(dF_on_F, dF_on_G, dG_on_G) -> FloresStats:
    i_gg = int(np.argmax(dG_on_G))
    i_fg = int(np.argmax(dF_on_G))
    p1_ff = dF_on_F.max()
    p1_gg = dG_on_G.max()
    p1_fg = dF_on_G[i_gg]
    p3 = dF_on_G[i_fg]
    p4 = abs(p3 - p1_ff) * abs(p3 - p1_gg)
    return FloresStats(float(p1_fg), float(p1_ff - p1_fg), float(p3), float(p4), i_gg, i_fg)


def flores_statistics(f, g, method="fm", **depth_params) -> FloresStats:
    """P1-P4 for samples ``f`` and ``g``.

    ``deepest_in_g`` and ``deepest_of_g_in_f`` index into ``g``.
    """
    f, g = _check_pair(f, g)
    depth = make_depth(method, **depth_params)
    A = depth.pool_depths(pool(f, g), group_weights(f.n, g.n), augment=True)
    n = f.n
    return _stats_from_augmented(A[0, :n], A[0, n:], A[1, n:])


def _p4_replicates(depth, H, draws, n) -> np.ndarray:
    R, N = draws.shape
    W = np.zeros((2 * R, N), dtype=np.int64)
    rows = np.arange(R)
    np.add.at(W, (2 * rows[:, None], draws[:, :n]), 1)
    np.add.at(W, (2 * rows[:, None] + 1, draws[:, n:]), 1)
    A = depth.pool_depths(H, W, augment=True)
    AF = np.take_along_axis(A[0::2], draws, axis=1)
    AG = np.take_along_axis(A[1::2], draws, axis=1)
    p1_ff = AF[:, :n].max(axis=1)
    p1_gg = AG[:, n:].max(axis=1)
    p3 = AF[:, n:].max(axis=1)
    return np.abs(p3 - p1_ff) * np.abs(p3 - p1_gg)


class FloresTest(BaseEstimator):
    """Bootstrap homogeneity test on the P4 statistic.

    Each replicate draws ``F*`` and ``G*`` (original sizes) with
    replacement from the pooled sample; the p-value is the fraction of
    replicate statistics at least as large as the observed one.
    """

    def __init__(self, depth="fm", alpha=0.05, num_boot=500, random_state=0):
        self.depth = depth
        self.alpha = alpha
        self.num_boot = num_boot
        self.random_state = random_state

    def fit(self, X, y):
        if not 0.0 < self.alpha < 1.0:
            raise ValueError(f"alpha must be in (0, 1), got {self.alpha}")
        if int(self.num_boot) != self.num_boot or self.num_boot < MIN_BOOT:
            raise ValueError(f"num_boot must be an integer >= {MIN_BOOT}, got {self.num_boot}")
        seed = check_seed(self.random_state)
        f, g = _check_pair(X, y)
        n, N, B = f.n, f.n + g.n, int(self.num_boot)
        depth = make_depth(self.depth)
        H = pool(f, g)
        A = depth.pool_depths(H, group_weights(n, g.n), augment=True)
        self.stats_ = _stats_from_augmented(A[0, :n], A[0, n:], A[1, n:])
        draws = np.stack([generator(seed, b).integers(0, N, N) for b in range(B)])
        self.p4_boot_ = _p4_replicates(depth, H, draws, n)
        s = self.stats_.p4
        p = np.count_nonzero(self.p4_boot_ >= s) / B
        self.result_ = TestResult("flores-" + depth.method, n, g.n, s, None, p, None, p,
                                  bool(p < self.alpha), float(self.alpha), B, seed, NULL_SCHEME)
        return self


def flores_test(f, g, method="fm", depth_params=None, alpha=0.05, num_boot=500, seed=0) -> TestResult:
    depth = make_depth(method, **(depth_params or {}))
    return FloresTest(depth, alpha, num_boot, seed).fit(f, g).result_
