"""Exception types raised across the package."""


class NoRegretError(Exception):
    """Base class for all package errors."""


class InvalidInputError(NoRegretError, ValueError):
    """Non-finite, empty or malformed numerical input."""


class DomainError(NoRegretError, ValueError):
    """A point lies outside the convex body an operation requires."""


class UnsupportedError(NoRegretError, NotImplementedError):
    """The requested operation is not available for this body or regularizer."""


class ConvergenceError(NoRegretError, RuntimeError):
    """An iterative solver stopped before meeting its tolerance."""

    def __init__(self, message, residual):
        super().__init__(f"{message} (residual={residual:.3e})")
        self.residual = residual


class ScheduleError(NoRegretError, ValueError):
    """Invalid parameter schedule or query."""


class ConfigError(NoRegretError, ValueError):
    """Experiment configuration is incomplete or inconsistent."""
