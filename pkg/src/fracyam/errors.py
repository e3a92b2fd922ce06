class DomainError(ValueError):
    """Input outside the admissible parameter domain."""


class NumericError(RuntimeError):
    """A numerical routine failed to reach its tolerance."""

    def __init__(self, message, estimate=None):
        super().__init__(message)
        self.estimate = estimate
