"""Exception types shared across the package."""


class ValidationError(ValueError):
    """Input violates a documented precondition or type invariant."""


class DomainError(ValueError):
    """Parameters lie outside the domain where a quantity is defined."""


class BudgetError(ValueError):
    """Requested computation exceeds a desk-scale size or method budget."""


class DeltaDistributionError(ValueError):
    """The wrapped normal density degenerates to a delta at gamma = 0."""


class ConvergenceError(RuntimeError):
    """A numerical procedure exhausted its budget before meeting tolerance.

    Attributes
    ----------
    estimate : float
        Best estimate available when the budget ran out.
    residual : float
        Error indicator at that point.
    """

    def __init__(self, message, estimate=float("nan"), residual=float("nan")):
        super().__init__(message)
        self.estimate = estimate
        self.residual = residual
