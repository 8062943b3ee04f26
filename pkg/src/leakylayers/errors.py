"""Exception hierarchy shared by all solvers."""


class LeakyLayersError(Exception):
    """Base class for every error raised by this package."""


class DomainError(LeakyLayersError, ValueError):
    """Argument outside the mathematical domain of an operation."""


class RangeError(LeakyLayersError, OverflowError):
    """Result would overflow or lose all accuracy."""


class NoConvergenceError(LeakyLayersError, RuntimeError):
    """An iteration hit its cap.

    ``last`` holds the final iterate and ``residual`` the size of the
    function (or correction) there.
    """

    def __init__(self, message, last=None, residual=None):
        super().__init__(message)
        self.last = last
        self.residual = residual


class GeometryError(LeakyLayersError, ValueError):
    """Degenerate, self-intersecting or inadmissible geometry."""


class NoBoundStateError(LeakyLayersError):
    """No discrete eigenvalue where one was requested."""


class NormalizationError(LeakyLayersError):
    """Bilinear self-pairing vanished, so ``int psi^2 = 1`` is impossible."""


class ConsistencyError(LeakyLayersError):
    """Two independent evaluations of the same quantity disagree."""
