"""Exception types shared across the package."""


class DomainError(ValueError):
    """A precondition on physical or numerical parameters is violated."""


class StabilityError(DomainError):
    """A model's drift matrix has an eigenvalue with non-negative real part."""


class EvaluationError(ArithmeticError):
    """A quantity cannot be evaluated reliably at the requested point
    (pole on the evaluation axis, confluent partial fractions, or a
    truncation window too small for the declared tail tolerance)."""
