"""Exception hierarchy.

All errors raised deliberately by the package derive from
:class:`FDHomogError`, which is itself a :class:`ValueError` so callers
that only care about bad input can catch the builtin.
"""


class FDHomogError(ValueError):
    """Base class for package errors."""


class GridError(FDHomogError):
    """Invalid grid, or two samples evaluated on different grids."""


class ShapeError(FDHomogError):
    """Curve matrix with the wrong shape (ragged rows, empty sample...)."""


class ParseError(FDHomogError):
    """Malformed number or header in a curve file."""


class EmptyGroupError(FDHomogError):
    """A label split would leave one side empty."""


class CovarianceError(FDHomogError):
    """Covariance matrix could not be factorized."""


class DegenerateFitError(FDHomogError):
    """Least-squares fit is degenerate (constant regressor or zero residuals)."""


class InsufficientVariationError(FDHomogError):
    """Too many bootstrap replicates were degenerate."""
