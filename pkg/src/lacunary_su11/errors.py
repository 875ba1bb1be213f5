"""Exception hierarchy. CLI exit codes are keyed off these classes."""


class LacunaryError(Exception):
    pass


class InvalidInputError(LacunaryError, ValueError):
    """Malformed or non-finite input, or a sequence that fails validation."""


class DomainError(InvalidInputError):
    """Input outside the mathematical domain of an operation (e.g. |F| >= 1)."""


class DivergentIntegralError(DomainError):
    pass


class GridTooCoarseError(LacunaryError, ValueError):
    pass


class BudgetExceededError(LacunaryError):
    """A size cap (window length, enumeration budget, grid size) was hit."""


class FrequencyOverflowError(BudgetExceededError, OverflowError):
    pass
