"""Exception types shared across the toolkit."""


class ToolkitError(Exception):
    """Base class for errors raised by this package."""


class ValidationError(ToolkitError):
    """Input rejected before any computation ran."""


class InfeasibleConstraintError(ValidationError):
    """Constraint set is empty (e.g. target mean outside the level range)."""


class ConvergenceError(ToolkitError):
    """Iteration budget exhausted before reaching tolerance.

    Carries the best iterate seen so the caller can inspect it.
    """

    def __init__(self, message, best=None, residual=None, iterations=None):
        super().__init__(message)
        self.best = best
        self.residual = residual
        self.iterations = iterations
