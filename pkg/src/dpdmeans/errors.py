"""Exception types shared across the package."""


class DomainError(ValueError):
    """An argument lies outside the domain of the requested computation."""


class ConvergenceError(RuntimeError):
    """An iterative solver stopped before meeting its tolerance."""

    def __init__(self, message, estimate=None):
        super().__init__(message)
        self.estimate = estimate


class QuadratureError(ArithmeticError):
    """Numerical integration failed to reach the requested accuracy."""
