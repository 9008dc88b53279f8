"""Exception hierarchy shared across the package."""


class UpdateError(ValueError):
    """Base class for domain errors raised by factorization updates.

    ``step_index`` is filled in by the streaming tracker when the error
    surfaces while replaying a sequence of updates.
    """

    step_index = None


class SingularMatrixError(UpdateError):
    """The W factor failed the pivot test of the transposed solve."""


class InRangeError(UpdateError):
    """The update vector ``a`` lies (numerically) in the range of U."""


class ZeroUpdateError(UpdateError):
    """The update direction ``b`` (or ``W^{-T} b``) is zero."""


class DeflatingUpdateError(UpdateError):
    """The update reduces the rank of X; no p-column representative exists."""


class RankDeficientError(UpdateError):
    """A from-scratch factorization met a (numerically) zero pivot."""


class NoConvergenceError(ArithmeticError):
    """Jacobi sweeps did not converge."""


class ParseError(ValueError):
    """Malformed text input. ``line`` is the 1-based offending line, if known."""

    def __init__(self, message, line=None):
        self.line = line
        if line is not None:
            message = f"line {line}: {message}"
        super().__init__(message)


class DimensionMismatchError(ParseError):
    """Parsed data disagrees with the declared or expected dimensions."""
