"""Exception types shared across the package."""


class DiracGapError(Exception):
    """Base class for all package errors."""


class DomainError(DiracGapError, ValueError):
    """An argument lies outside the mathematical domain of an operation."""


class SingularityError(DomainError):
    """Evaluation requested at a singular point (e.g. a kernel at x = 0)."""


class ConvergenceError(DiracGapError, RuntimeError):
    """An iterative method failed to reach its tolerance.

    Carries the best residual seen so that callers can report partial
    progress.
    """

    def __init__(self, message, best_residual=None):
        super().__init__(message)
        self.best_residual = best_residual


class SupercriticalError(DiracGapError, RuntimeError):
    """The ground state has dived below the spectral gap.

    Raised when the largest Birman-Schwinger eigenvalue already exceeds 1
    at the bottom of the gap, i.e. the potential norm is at or beyond the
    critical value.
    """


class IntegrationError(DiracGapError, RuntimeError):
    """An ODE integration failed (step underflow or amplitude blow-up)."""


class NoSolutionError(DiracGapError, RuntimeError):
    """A bracketing search found no sign change in the allowed range."""


class ValidationError(DiracGapError, ValueError):
    """A run configuration failed validation before any compute."""
