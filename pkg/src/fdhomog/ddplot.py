"""DD-plots and the bootstrap-t homogeneity test built on them.

The DD-plot of samples F and G pairs, for every curve x of the pooled
sample H = F + G, its depth in F with its depth in G.  Under homogeneity
the points gather around the diagonal, so the test regresses
``D_F = b0 + b1 * D_G`` and checks ``b0 = 0`` and ``b1 = 1`` with
bootstrap-t statistics, combining the two p-values by Holm-Bonferroni.
"""

from __future__ import annotations

import json
import math
from dataclasses import asdict, dataclass

import numpy as np
from sklearn.base import BaseEstimator
from sklearn.utils.validation import check_is_fitted

from ._seeding import check_seed, generator
from .curves import FunctionalSample, check_same_grid, pool
from .depth import as_sample, make_depth
from .exceptions import DegenerateFitError, InsufficientVariationError

NULL_SCHEMES = ("permutation", "relabel", "literal")
DEFAULT_NULL_SCHEME = "permutation"
MIN_BOOT = 50


@dataclass(frozen=True, eq=False)
class DDPlot:
    """Depth-versus-depth coordinates of the pooled sample.

    ``points[i] = (D_F(h_i), D_G(h_i))``; F's curves come first.
    """

    points: np.ndarray
    n: int
    m: int
    method: str

    @property
    def depth_f(self) -> np.ndarray:
        return self.points[:, 0]

    @property
    def depth_g(self) -> np.ndarray:
        return self.points[:, 1]

    def transpose(self) -> DDPlot:
        return DDPlot(self.points[:, ::-1].copy(), self.m, self.n, self.method)


@dataclass(frozen=True, eq=False)
class OlsFit:
    beta0: float
    beta1: float
    se0: float
    se1: float
    residuals: np.ndarray

    @property
    def degenerate(self) -> bool:
        return self.se0 == 0.0 or self.se1 == 0.0


@dataclass
class TestResult:
    """Outcome of a homogeneity test.

    For the Flores test ``t0`` holds the observed P4 statistic, ``p0``
    and ``p_adjusted`` its p-value, and ``t1``/``p1`` are None.
    """

    __test__ = False  # not a pytest class

    method: str
    n: int
    m: int
    t0: float | None
    t1: float | None
    p0: float | None
    p1: float | None
    p_adjusted: float
    reject: bool
    alpha: float
    num_boot: int
    seed: int
    null_scheme: str

    def to_dict(self) -> dict:
        out = asdict(self)
        for key, value in out.items():
            if isinstance(value, float) and not math.isfinite(value):
                out[key] = None
        return out

    def to_json(self, **kwargs) -> str:
        return json.dumps(self.to_dict(), **kwargs)

    @property
    def verdict(self) -> str:
        word = "REJECT" if self.reject else "FAIL-TO-REJECT"
        return f"{word} p={self.p_adjusted:.6g}"


def _check_pair(f, g) -> tuple[FunctionalSample, FunctionalSample]:
    f = as_sample(f)
    g = as_sample(g, f.grid)
    check_same_grid(f, g)
    return f, g


def group_weights(n: int, m: int) -> np.ndarray:
    """Weights of F and G as subsets of the pooled sample, shape (2, n + m)."""
    W = np.zeros((2, n + m), dtype=np.int64)
    W[0, :n] = 1
    W[1, n:] = 1
    return W


def build_ddplot(f, g, method="fm", **depth_params) -> DDPlot:
    """DD-plot of ``f`` against ``g`` using one depth on both axes.

    ``method`` is a tag (``fm``, ``rp``, ``fd2``) or a depth estimator;
    ``depth_params`` configure a tagged estimator.
    """
    f, g = _check_pair(f, g)
    depth = make_depth(method, **depth_params)
    D = depth.pool_depths(pool(f, g), group_weights(f.n, g.n))
    return DDPlot(np.column_stack([D[0], D[1]]), f.n, g.n, depth.method)


def _ols(x: np.ndarray, y: np.ndarray):
    """Least squares of ``y`` on ``x`` along the last axis.

    Returns ``(beta0, beta1, se0, se1, residuals, constant_x)``.  Standard
    errors use the textbook formulas
    ``se1^2 = sum(u^2) / ((N - 2) * sum((x - xbar)^2))`` and
    ``se0^2 = se1^2 * sum(x^2) / N``.
    """
    N = x.shape[-1]
    constant_x = np.ptp(x, axis=-1) == 0
    xbar = x.mean(axis=-1, keepdims=True)
    ybar = y.mean(axis=-1, keepdims=True)
    dx = x - xbar
    sxx = np.sum(dx * dx, axis=-1)
    sxy = np.sum(dx * (y - ybar), axis=-1)
    with np.errstate(divide="ignore", invalid="ignore"):
        beta1 = sxy / sxx
        beta0 = ybar[..., 0] - beta1 * xbar[..., 0]
        res = y - beta0[..., None] - beta1[..., None] * x
        var1 = np.sum(res * res, axis=-1) / ((N - 2) * sxx)
        se1 = np.sqrt(var1)
        se0 = np.sqrt(var1 * np.sum(x * x, axis=-1) / N)
    return beta0, beta1, se0, se1, res, constant_x


def fit_ols(dd: DDPlot) -> OlsFit:
    """Regress ``D_F`` on ``D_G``.

    Raises:
        DegenerateFitError: fewer than 3 points or constant ``D_G``.
    """
    x, y = dd.depth_g, dd.depth_f
    if len(x) < 3:
        raise DegenerateFitError(f"need at least 3 DD-plot points, got {len(x)}")
    b0, b1, se0, se1, res, constant_x = _ols(x, y)
    if constant_x:
        raise DegenerateFitError("degenerate regressor: all D_G values are equal")
    return OlsFit(float(b0), float(b1), float(se0), float(se1), res)


def t_statistics(fit: OlsFit) -> tuple[float, float]:
    """``T0 = b0 / se0`` and ``T1 = (b1 - 1) / se1``."""
    if fit.degenerate:
        raise DegenerateFitError("zero standard error: the DD-plot lies exactly on a line")
    return fit.beta0 / fit.se0, (fit.beta1 - 1.0) / fit.se1


def two_sided_p(t_boot: np.ndarray, t_obs: float) -> float:
    """``2 * min(P*(T* > T), P*(T* < T))``; ties count for neither tail."""
    above = np.count_nonzero(t_boot > t_obs) / len(t_boot)
    below = np.count_nonzero(t_boot < t_obs) / len(t_boot)
    return min(1.0, 2.0 * min(above, below))


def holm_bonferroni(p0: float, p1: float, alpha: float) -> tuple[float, bool]:
    """Combine two p-values: returns ``(min(2 p_[1], p_[2]), reject)``."""
    lo, hi = sorted((p0, p1))
    reject = lo < alpha / 2 or hi < alpha
    return min(2.0 * lo, hi), reject


def _check_test_params(alpha, num_boot, null_scheme):
    if not 0.0 < alpha < 1.0:
        raise ValueError(f"alpha must be in (0, 1), got {alpha}")
    if int(num_boot) != num_boot or num_boot < MIN_BOOT:
        raise ValueError(f"num_boot must be an integer >= {MIN_BOOT}, got {num_boot}")
    if null_scheme not in NULL_SCHEMES:
        raise ValueError(f"null_scheme must be one of {NULL_SCHEMES}, got {null_scheme!r}")


class DDPlotTest(BaseEstimator):
    """Bootstrap-t test of DD-plot diagonality.

    Parameters:
        depth: ``"fm"``, ``"rp"``, ``"fd2"`` or a depth estimator instance.
        alpha: significance level.
        num_boot: number of bootstrap replicates ``B``.
        null_scheme: how replicates are drawn.  ``"permutation"`` splits
            a random permutation of the pooled sample into ``F*`` (first
            ``n``) and ``G*`` (last ``m``) and evaluates ``DD(F*, G*, H)``;
            under homogeneity the observed split is one of these draws, so
            the test has exact size.  ``"relabel"`` does the same with
            ``H*`` drawn with replacement and evaluates ``DD(F*, G*, H*)``.
            ``"literal"`` keeps F and G as references and evaluates
            ``DD(F, G, H*)``; its replicates are centred on the observed
            statistic, so it has almost no power.
        random_state: u64 seed; replicate ``b`` uses the substream
            ``(random_state, b)``.

    Attributes:
        result_: :class:`TestResult`.
        ddplot_: observed :class:`DDPlot`.
        ols_: observed :class:`OlsFit`.
        t_boot_: ``(B, 2)`` bootstrap statistics (empty when the observed
            fit is degenerate).
        n_discarded_: degenerate replicates that were redrawn.
    """

    def __init__(self, depth="fd2", alpha=0.05, num_boot=500, null_scheme=DEFAULT_NULL_SCHEME, random_state=0):
        self.depth = depth
        self.alpha = alpha
        self.num_boot = num_boot
        self.null_scheme = null_scheme
        self.random_state = random_state

    def fit(self, X, y):
        """Test homogeneity of samples ``X`` (F) and ``y`` (G)."""
        _check_test_params(self.alpha, self.num_boot, self.null_scheme)
        seed = check_seed(self.random_state)
        f, g = _check_pair(X, y)
        n, m = f.n, g.n
        N = n + m
        B = int(self.num_boot)
        depth = make_depth(self.depth)
        H = pool(f, g)

        D_obs = depth.pool_depths(H, group_weights(n, m))
        self.ddplot_ = DDPlot(np.column_stack([D_obs[0], D_obs[1]]), n, m, depth.method)
        self.ols_ = fit_ols(self.ddplot_)
        self.n_discarded_ = 0

        if self.ols_.degenerate:
            self.t_boot_ = np.empty((0, 2))
            self.result_ = TestResult(depth.method, n, m, math.nan, math.nan, 1.0, 1.0, 1.0,
                                      False, float(self.alpha), B, seed, self.null_scheme)
            return self
        t0, t1 = t_statistics(self.ols_)

        stats = []
        next_b = 0
        while len(stats) < B:
            if next_b >= 10 * B:
                raise InsufficientVariationError(
                    f"only {len(stats)} of {B} bootstrap replicates were usable after {next_b} draws"
                )
            want = min(B - len(stats), 10 * B - next_b)
            draws = np.stack([self._draw(generator(seed, b), N)
                              for b in range(next_b, next_b + want)])
            next_b += want
            t_rep = self._replicate_stats(depth, H, D_obs, draws, n)
            ok = np.all(np.isfinite(t_rep), axis=1)
            self.n_discarded_ += int(np.count_nonzero(~ok))
            stats.extend(t_rep[ok])
        self.t_boot_ = np.array(stats[:B])

        p0 = two_sided_p(self.t_boot_[:, 0], t0)
        p1 = two_sided_p(self.t_boot_[:, 1], t1)
        p_adj, reject = holm_bonferroni(p0, p1, self.alpha)
        self.result_ = TestResult(depth.method, n, m, t0, t1, p0, p1, p_adj, bool(reject),
                                  float(self.alpha), B, seed, self.null_scheme)
        return self

    def _draw(self, rng, N):
        if self.null_scheme == "permutation":
            return rng.permutation(N)
        return rng.integers(0, N, N)

    def _replicate_stats(self, depth, H, D_obs, draws, n):
        """Bootstrap (T0*, T1*) per row of ``draws``; NaN rows are degenerate."""
        R, N = draws.shape
        if self.null_scheme == "literal":
            y = D_obs[0][draws]
            x = D_obs[1][draws]
        else:
            W = np.zeros((2 * R, N), dtype=np.int64)
            rows = np.arange(R)
            np.add.at(W, (2 * rows[:, None], draws[:, :n]), 1)
            np.add.at(W, (2 * rows[:, None] + 1, draws[:, n:]), 1)
            D = depth.pool_depths(H, W)
            y = np.take_along_axis(D[0::2], draws, axis=1)
            x = np.take_along_axis(D[1::2], draws, axis=1)
        b0, b1, se0, se1, _, constant_x = _ols(x, y)
        with np.errstate(divide="ignore", invalid="ignore"):
            t = np.column_stack([b0 / se0, (b1 - 1.0) / se1])
        t[constant_x | (se0 == 0) | (se1 == 0)] = np.nan
        return t

    def summary(self) -> TestResult:
        check_is_fitted(self, "result_")
        return self.result_


def bootstrap_test(f, g, method="fd2", depth_params=None, alpha=0.05, num_boot=500,
                   seed=0, null_scheme=DEFAULT_NULL_SCHEME) -> TestResult:
    """Run :class:`DDPlotTest` and return its :class:`TestResult`."""
    depth = make_depth(method, **(depth_params or {}))
    test = DDPlotTest(depth, alpha=alpha, num_boot=num_boot, null_scheme=null_scheme,
                      random_state=seed)
    return test.fit(f, g).result_
