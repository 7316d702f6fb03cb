"""Exception types shared across the package."""


class LDStatsError(Exception):
    """Base class for all package errors."""


class DomainError(LDStatsError, ValueError):
    """An argument is outside the mathematical domain of the operation."""


class BracketError(LDStatsError):
    """A root finder was given a bracket without a sign change."""


class IntegrationError(LDStatsError):
    """Adaptive quadrature ran out of subdivisions before reaching the
    requested tolerance.  ``estimate`` carries the best value obtained."""

    def __init__(self, message, estimate=None, error=None):
        super().__init__(message)
        self.estimate = estimate
        self.error = error


class BudgetError(LDStatsError):
    """A computation would exceed its configured size budget (e.g. a pmf
    table whose quadratic cost is no longer practical)."""


class EstimationError(LDStatsError):
    """An estimator could not produce a result on this sample."""


class DegenerateSampleError(EstimationError):
    """The sample carries no usable signal for the requested estimator
    (e.g. all counts are zero for the generating-function method)."""


class RatioOutOfRangeError(EstimationError):
    """The empirical log-ratio lies outside the attainable range of the
    fitness ratio curve, even on the widest search bracket."""

    def __init__(self, message, y=None, bracket=None):
        super().__init__(message)
        self.y = y
        self.bracket = bracket


class InferenceError(LDStatsError):
    """Confidence machinery refused to run (non-converged fit or a
    covariance matrix that is not positive semidefinite)."""


class InputError(LDStatsError):
    """A sample file or CLI parameter could not be parsed."""
