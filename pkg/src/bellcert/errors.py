"""Exception hierarchy shared by every module."""


class BellCertError(Exception):
    """Base class for all package errors."""


class DomainError(BellCertError, ValueError):
    """An argument lies outside the domain an operation is defined on."""


class DegeneratePostSelectionError(BellCertError):
    """Post-selection keeps (numerically) nothing, so no output state exists."""

    def __init__(self, message, completed=None):
        super().__init__(message)
        # Trajectory prefix computed before the failure, if any.
        self.completed = completed


class LowParityError(DomainError):
    """Parity proportions at locations 1/2 fall below the estimation regime."""


class InfeasibleProportionsError(BellCertError):
    """No Bell-diagonal root reproduces the given parity proportions."""


class SingularGradientError(DomainError):
    """The inversion map is not differentiable at the requested point."""


class UnreachableThresholdError(BellCertError):
    """Purification cannot push fidelity past the requested threshold."""


class CircuitSelfCheckError(BellCertError):
    """The compiled circuit disagrees with the analytic outcome tables."""
