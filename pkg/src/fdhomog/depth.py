"""Functional depth measures.

Three depths are provided as scikit-learn style estimators:

* :class:`FMDepth` -- Fraiman-Muniz integrated univariate depth.
* :class:`RPDepth` -- random projection depth.
* :class:`FD2Depth` -- second-order integrated depth built from the
  bivariate Tukey (halfspace) depth of ``(x(s), x(t))`` pairs.

``fit`` stores the reference sample, ``score_samples`` returns the depth
of each evaluation curve.  All three also expose :meth:`pool_depths`,
which evaluates every curve of a pool against many weightings of that
same pool in one pass; the bootstrap tests are built on it.

The empirical CDF uses ``F(x) = #{r <= x} / n`` everywhere.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass

import numpy as np
from sklearn.base import BaseEstimator
from sklearn.utils.validation import check_is_fitted

from ._kernels import halfspace_pairs_kernel
from ._seeding import check_seed, generator
from .curves import FunctionalSample, Grid, check_same_grid, make_grid

FD2_MAX_PAIRS = 2000
ORACLE_MAX_POINTS = 2000


@dataclass(frozen=True)
class DepthVector:
    """Depth of each evaluation curve with respect to one reference sample."""

    values: np.ndarray
    reference_size: int
    method: str

    def __len__(self):
        return len(self.values)


def as_sample(X, grid: Grid | None = None) -> FunctionalSample:
    """Coerce ``X`` to a :class:`FunctionalSample`.

    Plain arrays are taken to be observed on ``grid``, or on an
    equispaced grid over ``[0, 1]`` when no grid is given.
    """
    if isinstance(X, FunctionalSample):
        return X
    values = np.asarray(X, dtype=float)
    if values.ndim == 1:
        values = values[None, :]
    if grid is None:
        grid = make_grid(0.0, 1.0, values.shape[1])
    return FunctionalSample(grid, values)


def _weights_T(weights, n_pool: int) -> np.ndarray:
    W = np.atleast_2d(np.asarray(weights))
    if W.shape[1] != n_pool:
        raise ValueError(f"weights have {W.shape[1]} columns for a pool of {n_pool} curves")
    if np.any(W < 0) or np.any(W != np.round(W)):
        raise ValueError("weights must be non-negative integers")
    if np.any(W.sum(axis=1) == 0):
        raise ValueError("every weighting must give the reference sample at least one curve")
    return np.ascontiguousarray(W.T, dtype=np.int32)


def _ecdf_depth_sum(values: np.ndarray, WT: np.ndarray, augment: bool, kind: str) -> np.ndarray:
    """Sum over columns of a univariate ECDF depth.

    ``values`` is (N, K): pool curves by coordinate.  Returns (R, N).
    """
    N, K = values.shape
    R = WT.shape[1]
    totals = WT.sum(axis=0, dtype=np.int64) + (1 if augment else 0)
    out = np.zeros((R, N))
    for k in range(K):
        col = values[:, k]
        order = np.argsort(col, kind="stable")
        # number of sorted entries <= each value
        pos = np.searchsorted(col[order], col, side="right")
        cum = np.zeros((N + 1, R), dtype=np.int64)
        np.cumsum(WT[order], axis=0, out=cum[1:])
        counts = cum[pos].T
        if augment:
            counts = counts + 1
        F = counts / totals[:, None]
        if kind == "fm":
            out += 1.0 - np.abs(0.5 - F)
        else:
            out += np.minimum(F, 1.0 - F)
    return out


class _BaseDepth(BaseEstimator):
    method = ""

    def fit(self, X, y=None):
        """Store the reference sample."""
        self.reference_ = as_sample(X)
        self.grid_ = self.reference_.grid
        return self

    def score_samples(self, X) -> np.ndarray:
        """Depth of every curve of ``X`` in the fitted reference sample."""
        check_is_fitted(self, "reference_")
        X = as_sample(X, self.grid_)
        check_same_grid(self.reference_, X)
        n_eval = X.n
        pool = np.vstack([X.values, self.reference_.values])
        weights = np.concatenate([np.zeros(n_eval, int), np.ones(self.reference_.n, int)])
        return self.pool_depths(pool, weights[None, :], grid=self.grid_,
                                queries=np.arange(n_eval))[0]

    def depth_vector(self, X) -> DepthVector:
        return DepthVector(self.score_samples(X), self.reference_.n, self.method)

    def pool_depths(self, pool, weights, grid: Grid | None = None, augment=False, queries=None):
        """Depths of pool curves under several weightings of the pool.

        Args:
            pool: ``(N, G)`` curve values, or a FunctionalSample.
            weights: ``(R, N)`` non-negative integer multiplicities; row
                ``r`` describes reference sample ``r`` as a multiset of
                pool curves.
            grid: evaluation grid (taken from ``pool`` if it is a sample).
            augment: if True, each query curve is added once to its own
                reference sample before its depth is computed.
            queries: pool indices to evaluate (default: all).

        Returns:
            ``(R, len(queries))`` array of depths.
        """
        if isinstance(pool, FunctionalSample):
            grid = pool.grid
            pool = pool.values
        pool = np.ascontiguousarray(pool, dtype=float)
        if grid is None:
            grid = make_grid(0.0, 1.0, pool.shape[1])
        WT = _weights_T(weights, pool.shape[0])
        queries = np.arange(pool.shape[0]) if queries is None else np.asarray(queries, dtype=np.int64)
        return self._pool_depths(pool, WT, grid, augment, queries)

    def _pool_depths(self, pool, WT, grid, augment, queries):  # pragma: no cover
        raise NotImplementedError


class FMDepth(_BaseDepth):
    """Fraiman-Muniz depth: grid average of ``1 - |1/2 - F_t(x(t))|``.

    Values lie in ``[1/2, 1]``.

    Examples:
        >>> ref = np.array([[1.0, 1.0], [2.0, 2.0], [3.0, 3.0]])
        >>> FMDepth().fit(ref).score_samples([[2.0, 2.0]])
        array([0.83333333])
    """

    method = "fm"

    def _pool_depths(self, pool, WT, grid, augment, queries):
        total = _ecdf_depth_sum(pool, WT, augment, "fm")
        return total[:, queries] / pool.shape[1]


class RPDepth(_BaseDepth):
    """Random projection depth.

    Each direction is a vector of independent standard normals at the grid
    points, scaled to unit trapezoid norm.  A curve is projected with the
    trapezoid rule and scored by ``min(F, 1 - F)`` of the reference
    projections; the result is averaged over directions.

    Parameters:
        n_projections: number of random directions.
        direction_seed: seed for the directions.  Two estimators with the
            same seed and grid use identical directions.
        directions: optional fixed ``(p, G)`` direction values, used as
            given instead of random ones.
    """

    method = "rp"

    def __init__(self, n_projections: int = 50, direction_seed: int = 0, directions=None):
        self.n_projections = n_projections
        self.direction_seed = direction_seed
        self.directions = directions

    def direction_matrix(self, grid: Grid) -> np.ndarray:
        if self.directions is not None:
            V = np.atleast_2d(np.asarray(self.directions, dtype=float))
            if V.shape[1] != len(grid):
                raise ValueError(f"directions have {V.shape[1]} values for a grid of {len(grid)}")
            return V
        if int(self.n_projections) < 1:
            raise ValueError("n_projections must be >= 1")
        rng = generator(check_seed(self.direction_seed))
        V = rng.standard_normal((int(self.n_projections), len(grid)))
        w = grid.trapezoid_weights
        V /= np.sqrt((V * V) @ w)[:, None]
        return V

    def project(self, values: np.ndarray, grid: Grid) -> np.ndarray:
        """Trapezoid inner products of curves with each direction, (N, p)."""
        return values @ (self.direction_matrix(grid) * grid.trapezoid_weights).T

    def _pool_depths(self, pool, WT, grid, augment, queries):
        proj = self.project(pool, grid)
        total = _ecdf_depth_sum(proj, WT, augment, "rp")
        return total[:, queries] / proj.shape[1]


class FD2Depth(_BaseDepth):
    """Second-order integrated depth with the bivariate halfspace depth.

    The depth of a curve is the average, over unordered pairs of distinct
    grid points ``(s, t)``, of the Tukey depth of ``(x(s), x(t))`` in the
    reference cloud ``{(y(s), y(t))}``.

    Parameters:
        pair_budget: ``"all"``, a positive integer, or ``None``.  ``None``
            uses every pair when there are at most 2000 of them and a
            random subset of 2000 otherwise.  Budgets above the number of
            pairs fall back to all pairs with a warning.
        pair_seed: seed for the pair subset.
    """

    method = "fd2"

    def __init__(self, pair_budget: int | str | None = None, pair_seed: int = 0):
        self.pair_budget = pair_budget
        self.pair_seed = pair_seed

    def pairs(self, grid_size: int) -> np.ndarray:
        if grid_size < 2:
            raise ValueError("FD2 depth needs at least 2 grid points")
        a, b = np.triu_indices(grid_size, k=1)
        all_pairs = np.column_stack([a, b])
        budget = self.pair_budget
        if budget is None:
            budget = "all" if len(all_pairs) <= FD2_MAX_PAIRS else FD2_MAX_PAIRS
        if budget == "all":
            return all_pairs
        budget = int(budget)
        if budget < 1:
            raise ValueError(f"pair_budget must be >= 1, got {budget}")
        if budget >= len(all_pairs):
            if budget > len(all_pairs):
                warnings.warn(
                    f"pair_budget {budget} exceeds the {len(all_pairs)} available pairs; using all",
                    stacklevel=2,
                )
            return all_pairs
        rng = generator(check_seed(self.pair_seed))
        chosen = np.sort(rng.choice(len(all_pairs), size=budget, replace=False))
        return all_pairs[chosen]

    def _pool_depths(self, pool, WT, grid, augment, queries):
        pairs = self.pairs(pool.shape[1]).astype(np.int64)
        return halfspace_pairs_kernel(pool, pairs, queries, WT, bool(augment))


DEPTHS = {"fm": FMDepth, "rp": RPDepth, "fd2": FD2Depth}


def make_depth(method="fm", **params) -> _BaseDepth:
    """Build a depth estimator from a method tag, or pass an instance through."""
    if isinstance(method, _BaseDepth):
        return method
    try:
        cls = DEPTHS[str(method).lower()]
    except KeyError:
        raise ValueError(f"unknown depth method {method!r}; choose from {sorted(DEPTHS)}") from None
    return cls(**params)


# -- functional interface ----------------------------------------------------


def univariate_fm_depth(x0: float, reference) -> float:
    """``1 - |1/2 - F(x0)|`` with ``F`` the empirical CDF of ``reference``."""
    ref = np.asarray(reference, dtype=float).ravel()
    if ref.size == 0:
        raise ValueError("reference must be non-empty")
    F = np.count_nonzero(ref <= x0) / ref.size
    return 1.0 - abs(0.5 - F)


def fm_depth(eval_sample, reference) -> DepthVector:
    return FMDepth().fit(reference).depth_vector(eval_sample)


def rp_depth(eval_sample, reference, n_projections=50, direction_seed=0) -> DepthVector:
    return RPDepth(n_projections, direction_seed).fit(reference).depth_vector(eval_sample)


def fd2_depth(eval_sample, reference, pair_budget=None, pair_seed=0) -> DepthVector:
    return FD2Depth(pair_budget, pair_seed).fit(reference).depth_vector(eval_sample)


def halfspace_depth_2d(point, cloud) -> float:
    """Exact Tukey depth of ``point`` in a planar point cloud.

    Computed by sorting the cloud by angle around ``point`` and sweeping
    a half-open semicircle; O(n log n).
    """
    cloud = np.asarray(cloud, dtype=float).reshape(-1, 2)
    if len(cloud) == 0:
        raise ValueError("cloud must be non-empty")
    pts = np.vstack([np.asarray(point, dtype=float).reshape(1, 2), cloud])
    WT = np.ones((len(pts), 1), dtype=np.int32)
    WT[0] = 0
    out = halfspace_pairs_kernel(pts, np.array([[0, 1]], dtype=np.int64),
                                 np.array([0], dtype=np.int64), WT, False)
    return float(out[0, 0])


def halfspace_depth_2d_oracle(point, cloud) -> float:
    """Brute-force Tukey depth used to check :func:`halfspace_depth_2d`.

    The count of cloud points in a closed halfplane bounded by a line
    through ``point`` only changes when the normal becomes perpendicular
    to some ``c - point``.  Every such critical normal is checked after a
    tiny rotation to each side, which visits every constant piece.
    O(n^2).
    """
    cloud = np.asarray(cloud, dtype=float).reshape(-1, 2)
    n = len(cloud)
    if n == 0:
        raise ValueError("cloud must be non-empty")
    if n > ORACLE_MAX_POINTS:
        raise ValueError(f"oracle limited to {ORACLE_MAX_POINTS} points, got {n}")
    p = np.asarray(point, dtype=float).reshape(2)
    vx = cloud[:, 0] - p[0]
    vy = cloud[:, 1] - p[1]
    nonzero = (vx != 0.0) | (vy != 0.0)
    best = n
    for dx, dy in zip(vx[nonzero], vy[nonzero]):
        side = dx * vy - dy * vx
        along = dx * vx + dy * vy
        for normal in (1.0, -1.0):
            s = normal * side
            for tilt in (1.0, -1.0):
                inside = (s > 0.0) | ((s == 0.0) & (tilt * along >= 0.0))
                best = min(best, int(np.count_nonzero(inside)))
    return best / n
