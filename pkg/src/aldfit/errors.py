"""Exception types shared across the package."""


class AldfitError(Exception):
    """Base class for all aldfit errors."""


# --- container I/O ---------------------------------------------------------

class BadMagic(AldfitError):
    """File is neither an ALDW container nor parseable CSV."""


class ShapeMismatch(AldfitError):
    """Declared shape disagrees with the data, or the shape is invalid."""


class NonFinite(AldfitError):
    """A weight matrix contains NaN or infinite entries."""


class IoFailure(AldfitError):
    """Filesystem-level failure while writing an artifact."""


# --- distribution / regression --------------------------------------------

class InvalidParams(AldfitError):
    """Distribution parameters outside their domain (lambda or kappa <= 0)."""


class AtKink(AldfitError):
    """Log-density slope requested exactly at the location parameter."""


class DegenerateBranch(AldfitError):
    """Branch has fewer than two values; no regression is possible."""


class ConstantBranch(AldfitError):
    """All branch values are equal; the regression target has zero variance."""


class NonPositive(AldfitError):
    """A value <= 0 reached the log-space regression."""


class InvalidRate(AldfitError):
    """A branch rate estimate is not a positive finite number."""


# --- tree / pruning --------------------------------------------------------

class EmptyVector(AldfitError):
    """Tree construction was asked to split an empty weight vector."""


class MissingFit(AldfitError):
    """Residual pruning needs a branch fit that could not be computed."""
