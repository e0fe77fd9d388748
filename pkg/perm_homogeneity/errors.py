# Exceptions shared across modules


class BudgetExhaustedError(RuntimeError):
    """A bounded search or construction ran out of budget.

    ``partial`` carries whatever was built before giving up, when there is
    something useful to report.
    """

    def __init__(self, message: str, partial: object = None) -> None:
        super().__init__(message)
        self.partial = partial


class PropertyViolationError(RuntimeError):
    """A checked property of a construction failed."""
