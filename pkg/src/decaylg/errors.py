"""Exception types raised across the package."""


class DecayError(Exception):
    """Base class for all package errors."""


class ParameterDomainError(DecayError, ValueError):
    """Model parameters outside their admissible domain."""


class IntegrationError(DecayError, ArithmeticError):
    """Quadrature did not reach the requested tolerance.

    The best available estimate is kept so callers can decide whether it is
    usable anyway.
    """

    def __init__(self, message, value=None, error_estimate=None):
        super().__init__(message)
        self.value = value
        self.error_estimate = error_estimate


class PoleOrderError(IntegrationError):
    """Principal-value extrapolation diverged: the pole is not simple."""


class ConvergenceError(DecayError, ArithmeticError):
    """A fixed-point iteration failed to contract."""

    def __init__(self, message, iterates=()):
        super().__init__(message)
        self.iterates = tuple(iterates)


class BracketingError(DecayError, ValueError):
    """No sign change inside the search bracket."""


class DegenerateStateError(DecayError, ArithmeticError):
    """Requested eigenstate is degenerate (typically zero coupling)."""


class IllConditionedOverlapError(DecayError, ArithmeticError):
    """Overlap of decaying and antidecaying states is too small to divide by."""


class GridDomainError(DecayError, ValueError):
    """Sampling grid does not cover the region the computation needs."""


class RangeError(DecayError, OverflowError):
    """Result would overflow or a query lies outside the sampled range."""


class StepSizeError(DecayError, ArithmeticError):
    """Time-stepping became unstable; a smaller step is required."""
