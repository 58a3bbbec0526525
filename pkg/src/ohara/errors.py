class OharaError(Exception):
    pass


class DomainError(OharaError, ValueError):
    """An input violates a documented precondition (CLI exit code 1)."""


class InvariantError(OharaError, AssertionError):
    """An internal invariant was breached; this is a bug (CLI exit code 2)."""


class StepBudgetExceeded(DomainError):
    """The stepping engine ran past its step budget.

    ``trace`` holds the partial trace up to the point of abort.
    """

    def __init__(self, message, trace=None):
        super().__init__(message)
        self.trace = trace
