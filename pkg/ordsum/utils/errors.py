class OrdsumError(Exception):
    """Base class of every error raised by ordsum."""


class DomainError(OrdsumError, ValueError):
    """An operation was called outside the range where it is defined."""


class WorkBudgetExceeded(OrdsumError):
    """The input is too hard for the configured work budget.

    Raised instead of returning an unverified answer; enlarging the budget
    (``rho_iterations`` or ``max_discriminant``) and retrying is always safe.
    """


class PrecisionExhausted(OrdsumError):
    """A certified comparison stayed undecided at the maximum precision."""

    def __init__(self, message, precision_bits):
        super().__init__(f"{message} (undecided at {precision_bits} bits)")
        self.precision_bits = precision_bits


class IntegralityError(OrdsumError, ArithmeticError):
    """A quantity that must be an integer came out fractional."""
