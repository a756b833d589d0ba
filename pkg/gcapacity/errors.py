'''
Exception hierarchy of the package. Input problems derive from `ValidationError`
(a `ValueError`), numerical failures derive from `NumericalError` (an
`ArithmeticError`). The command line maps the two families to exit codes 2 and 3.
'''


class GCapacityError(Exception):
    """Root of every error raised by the package."""


class ValidationError(GCapacityError, ValueError):
    """Malformed or inconsistent input."""


class DomainError(ValidationError):
    """Argument outside the domain of a function."""


class ConfigurationError(ValidationError):
    """Grid, time step or simulation configuration that cannot be used."""


class UnsupportedRegimeError(ValidationError):
    """Closed-form formula requested outside the degenerate regime."""


class UnsupportedSizeError(ValidationError):
    """Problem larger than the evaluator supports."""


class NumericalError(GCapacityError, ArithmeticError):
    """A computation did not produce a trustworthy number."""


class SeriesConvergenceError(NumericalError):
    """
    The truncation cap of a series was reached before the tolerance.

    Attributes
    ----------
    partial_sum : float
        Sum of the terms accumulated so far.
    remainder_bound : float
        Last computed bound on the neglected tail.
    n_terms : int
        Index at which the summation stopped.
    """

    def __init__(self, message: str, partial_sum: float, remainder_bound: float, n_terms: int):
        super().__init__(message)
        self.partial_sum = partial_sum
        self.remainder_bound = remainder_bound
        self.n_terms = n_terms


class NumericalBlowupError(NumericalError):
    """Non-finite values appeared while time stepping."""

    def __init__(self, message: str, step: int):
        super().__init__(message)
        self.step = step


class InternalConsistencyError(NumericalError):
    """A probability left [0, 1] (or a density went negative) by more than the tolerance."""
