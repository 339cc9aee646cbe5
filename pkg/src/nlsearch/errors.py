"""Exception hierarchy shared by every module in the package."""


class NLSearchError(Exception):
    """Base class; carries the CLI exit code for the failure category."""

    exit_code = 3


class DomainError(NLSearchError, ValueError):
    """A parameter lies outside the range where the formulas are defined."""

    exit_code = 2


class DimensionMismatch(NLSearchError, ValueError):
    exit_code = 2


class AssumptionError(NLSearchError, ValueError):
    """Input violates an assumption of the algorithm (e.g. more than one marked item)."""

    exit_code = 2


class NormError(NLSearchError, ArithmeticError):
    """State norm too far from 1 for a probability or trace to be meaningful."""


class SingularCoefficient(NLSearchError, ArithmeticError):
    """A ratio inside a nonlinear coefficient has a vanishing denominator."""

    def __init__(self, message, partial=None):
        super().__init__(message)
        # partial Trajectory when raised from inside the integrator
        self.partial = partial


class StepError(NLSearchError, ArithmeticError):
    """Integrator step too coarse for the generator's spectral radius."""
