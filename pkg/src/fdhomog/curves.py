"""Grids, functional samples, Gaussian-process simulation and curve files.

Curves are kept as values on a shared grid; nothing here smooths or
expands data in a basis.
"""

from __future__ import annotations

import csv
import functools
import math
import os
from dataclasses import dataclass
from typing import Callable

import numpy as np

from ._seeding import check_seed, generator
from .exceptions import (
    CovarianceError,
    EmptyGroupError,
    GridError,
    ParseError,
    ShapeError,
)

GRID_ATOL = 1e-9


@dataclass(frozen=True, eq=False)
class Grid:
    """Strictly increasing evaluation points ``t_1 < ... < t_G``."""

    points: np.ndarray

    def __post_init__(self):
        pts = np.array(self.points, dtype=float).ravel()
        if pts.size < 2:
            raise GridError(f"a grid needs at least 2 points, got {pts.size}")
        if not np.all(np.isfinite(pts)):
            raise GridError("grid points must be finite")
        if np.any(np.diff(pts) <= 0):
            raise GridError("grid points must be strictly increasing")
        pts.flags.writeable = False
        object.__setattr__(self, "points", pts)

    def __len__(self):
        return self.points.size

    def __repr__(self):
        return f"Grid({self.points[0]:g}..{self.points[-1]:g}, size={len(self)})"

    def matches(self, other: Grid, atol: float = GRID_ATOL) -> bool:
        return len(self) == len(other) and bool(
            np.all(np.abs(self.points - other.points) <= atol)
        )

    @property
    def trapezoid_weights(self) -> np.ndarray:
        """Quadrature weights so that ``w @ f`` is the trapezoid integral."""
        h = np.diff(self.points)
        w = np.zeros(len(self))
        w[:-1] += h / 2
        w[1:] += h / 2
        return w


def make_grid(a: float, b: float, count: int) -> Grid:
    """Uniform grid of ``count`` points from ``a`` to ``b`` inclusive."""
    if not (math.isfinite(a) and math.isfinite(b)) or a >= b:
        raise GridError(f"invalid range [{a}, {b}]")
    if int(count) != count or count < 2:
        raise GridError(f"count must be an integer >= 2, got {count}")
    return Grid(np.linspace(a, b, int(count)))


@dataclass(frozen=True, eq=False)
class FunctionalSample:
    """``n`` curves observed on a common grid.

    Attributes:
        grid: shared evaluation grid.
        values: read-only ``(n, G)`` array, row ``i`` is ``x_i(t_j)``.
        labels: optional per-curve identifiers.
    """

    grid: Grid
    values: np.ndarray
    labels: tuple[str, ...] | None = None

    def __post_init__(self):
        vals = np.array(self.values, dtype=float)
        if vals.ndim == 1:
            vals = vals[None, :]
        if vals.ndim != 2 or vals.shape[0] < 1:
            raise ShapeError(f"expected a non-empty (n, G) matrix, got shape {vals.shape}")
        if vals.shape[1] != len(self.grid):
            raise ShapeError(
                f"curves have {vals.shape[1]} values but the grid has {len(self.grid)} points"
            )
        if not np.all(np.isfinite(vals)):
            raise ShapeError("curve values must be finite")
        vals.flags.writeable = False
        object.__setattr__(self, "values", vals)
        if self.labels is not None:
            labels = tuple(str(lab) for lab in self.labels)
            if len(labels) != vals.shape[0]:
                raise ShapeError(f"{len(labels)} labels for {vals.shape[0]} curves")
            object.__setattr__(self, "labels", labels)

    @property
    def n(self) -> int:
        return self.values.shape[0]

    def __len__(self):
        return self.n

    def __repr__(self):
        return f"FunctionalSample(n={self.n}, grid={self.grid!r})"

    def subset(self, index) -> FunctionalSample:
        index = np.asarray(index)
        labels = None if self.labels is None else tuple(np.asarray(self.labels, dtype=object)[index])
        return FunctionalSample(self.grid, self.values[index], labels)

    def shift(self, constant: float) -> FunctionalSample:
        return FunctionalSample(self.grid, self.values + constant, self.labels)


def check_same_grid(*samples: FunctionalSample, atol: float = GRID_ATOL) -> Grid:
    """Raise :class:`GridError` unless every sample shares the first one's grid."""
    grid = samples[0].grid
    for s in samples[1:]:
        if not grid.matches(s.grid, atol):
            raise GridError(f"grid mismatch: {grid!r} vs {s.grid!r}")
    return grid


def pool(*samples: FunctionalSample) -> FunctionalSample:
    """Concatenate samples on a shared grid, order preserved."""
    grid = check_same_grid(*samples)
    if all(s.labels is not None for s in samples):
        labels = sum((s.labels for s in samples), ())
    else:
        labels = None
    return FunctionalSample(grid, np.vstack([s.values for s in samples]), labels)


def peak32(t):
    return 30.0 * t**1.5 * (1.0 - t)


def peak12(t):
    return 30.0 * t * (1.0 - t) ** 2


MEAN_FUNCTIONS: dict[str, Callable[[np.ndarray], np.ndarray]] = {
    "peak32": peak32,
    "peak12": peak12,
}


@dataclass(frozen=True)
class ModelSpec:
    """Gaussian-process model ``x(t) = mean(t) + delta + e(t)``.

    ``e`` has zero mean and covariance ``amp * exp(-rate * |s - t|)``.
    """

    mean: str = "peak32"
    delta: float = 0.0
    amp: float = 0.3
    rate: float = 3.33

    def __post_init__(self):
        if self.mean not in MEAN_FUNCTIONS:
            raise ValueError(f"unknown mean function {self.mean!r}; choose from {sorted(MEAN_FUNCTIONS)}")
        if not math.isfinite(self.delta):
            raise ValueError("delta must be finite")
        if not (self.amp > 0 and math.isfinite(self.amp)):
            raise ValueError(f"amp must be positive, got {self.amp}")
        if not (self.rate > 0 and math.isfinite(self.rate)):
            raise ValueError(f"rate must be positive, got {self.rate}")

    def mean_curve(self, grid: Grid) -> np.ndarray:
        return MEAN_FUNCTIONS[self.mean](grid.points) + self.delta

    def covariance(self, grid: Grid) -> np.ndarray:
        t = grid.points
        return self.amp * np.exp(-self.rate * np.abs(t[:, None] - t[None, :]))


@functools.lru_cache(maxsize=64)
def _cholesky(amp: float, rate: float, points: bytes) -> np.ndarray:
    t = np.frombuffer(points)
    cov = amp * np.exp(-rate * np.abs(t[:, None] - t[None, :]))
    try:
        return np.linalg.cholesky(cov)
    except np.linalg.LinAlgError:
        pass
    try:
        return np.linalg.cholesky(cov + 1e-10 * amp * np.eye(t.size))
    except np.linalg.LinAlgError as exc:
        raise CovarianceError(
            f"covariance (amp={amp}, rate={rate}) is not positive definite on this grid"
        ) from exc


def simulate_sample(spec: ModelSpec, n: int, grid: Grid, seed: int) -> FunctionalSample:
    """Draw ``n`` independent curves from ``spec`` on ``grid``.

    Curve ``i`` uses the random substream ``(seed, i)``, so the first
    curves do not change when ``n`` grows.
    """
    if int(n) != n or n < 1:
        raise ValueError(f"n must be a positive integer, got {n}")
    seed = check_seed(seed)
    chol = _cholesky(float(spec.amp), float(spec.rate), grid.points.tobytes())
    z = np.empty((int(n), len(grid)))
    for i in range(int(n)):
        z[i] = generator(seed, i).standard_normal(len(grid))
    values = spec.mean_curve(grid)[None, :] + z @ chol.T
    return FunctionalSample(grid, values)


# -- curve files -------------------------------------------------------------

LABEL_HEADER = "label"


def _parse_float(text: str, where: str) -> float:
    try:
        value = float(text)
    except ValueError:
        raise ParseError(f"{where}: cannot parse {text!r} as a number") from None
    if not math.isfinite(value):
        raise ParseError(f"{where}: non-finite value {text!r}")
    return value


def load_sample_csv(path: str | os.PathLike, labeled: bool | None = None) -> FunctionalSample:
    """Read curves from a CSV file.

    The header row holds the grid values, optionally preceded by a
    ``label`` column; each following row is one curve.

    Args:
        path: file to read.
        labeled: whether the first column holds labels.  ``None`` detects
            it from a header cell equal to ``label``.

    Raises:
        ParseError: malformed number.
        ShapeError: ragged rows or no curves.
        GridError: non-increasing header.
    """
    with open(path, newline="", encoding="utf-8") as fh:
        rows = [row for row in csv.reader(fh) if row and any(c.strip() for c in row)]
    if not rows:
        raise ShapeError(f"{path}: empty file")
    header = [c.strip() for c in rows[0]]
    if labeled is None:
        labeled = header[0].lower() == LABEL_HEADER
    if labeled:
        header = header[1:]
    points = [_parse_float(c, f"{path}:1") for c in header]
    try:
        grid = Grid(points)
    except GridError as exc:
        raise GridError(f"{path}: header is not a valid grid ({exc})") from None
    values, labels = [], []
    for lineno, row in enumerate(rows[1:], start=2):
        cells = [c.strip() for c in row]
        if labeled:
            labels.append(cells[0])
            cells = cells[1:]
        if len(cells) != len(grid):
            raise ShapeError(
                f"{path}:{lineno}: expected {len(grid)} values, found {len(cells)}"
            )
        values.append([_parse_float(c, f"{path}:{lineno}") for c in cells])
    if not values:
        raise ShapeError(f"{path}: no curves after the header")
    return FunctionalSample(grid, np.array(values), tuple(labels) if labeled else None)


def _fmt(x: float) -> str:
    return format(float(x), ".17g")


def write_sample_csv(sample: FunctionalSample, path: str | os.PathLike) -> None:
    """Write ``sample`` in the format read by :func:`load_sample_csv`."""
    with open(path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        head = [_fmt(t) for t in sample.grid.points]
        if sample.labels is not None:
            head.insert(0, LABEL_HEADER)
        writer.writerow(head)
        for i, row in enumerate(sample.values):
            cells = [_fmt(v) for v in row]
            if sample.labels is not None:
                cells.insert(0, sample.labels[i])
            writer.writerow(cells)


def split_by_label(sample: FunctionalSample, label: str) -> tuple[FunctionalSample, FunctionalSample]:
    """Split into (curves labelled ``label``, all other curves)."""
    if sample.labels is None:
        raise EmptyGroupError("sample has no labels to split on")
    mask = np.array([lab == str(label) for lab in sample.labels])
    if mask.all() or not mask.any():
        side = "other" if mask.all() else f"{label!r}"
        raise EmptyGroupError(f"splitting on {label!r} leaves the {side} group empty")
    return sample.subset(np.flatnonzero(mask)), sample.subset(np.flatnonzero(~mask))
