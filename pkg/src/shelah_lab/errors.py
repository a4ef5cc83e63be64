class LabError(ValueError):
    """Raised when an operation's precondition fails.

    ``code`` is a short stable identifier (``"vocab-mismatch"``,
    ``"arity-mismatch"`` ...) that callers and the CLI dispatch on.
    """

    def __init__(self, code, message=None):
        self.code = code
        super().__init__(message or code)


class RestrictionUndefined(LabError):
    """The restriction to a unary predicate does not yield a structure."""


class BudgetExceeded(LabError):
    pass
