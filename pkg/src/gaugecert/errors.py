"""Exception and warning types shared across the package."""


class InvalidInputError(ValueError):
    """Raised for malformed numerical input (non-finite points, bad radii...)."""


class OutOfDomainError(ValueError):
    """Raised when a point lies outside the open set a quantity is defined on."""


class EmptyGraphError(ValueError):
    """Raised when a subgradient graph has no samples."""


class PreconditionError(ValueError):
    """Raised when a documented precondition fails; carries the measured slack."""

    def __init__(self, message, slack=None):
        super().__init__(message)
        self.slack = slack


class ConvergenceWarning(UserWarning):
    """Diagnostics did not fall below their tolerance schedule."""
