"""Exception types shared across the package."""


class InvalidArgumentError(ValueError):
    """An argument is outside the domain an operation accepts."""


class InsufficientDataError(ValueError):
    """Not enough data (shots, samples, records) to compute a result."""


class InfeasibleBudgetError(InvalidArgumentError):
    """The shot budget cannot accommodate the requested allocation."""
