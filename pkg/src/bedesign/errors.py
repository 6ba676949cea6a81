"""Exception and warning types shared across the package."""


class BedesignError(Exception):
    """Base class for all package-specific errors."""


class NumericalFailure(BedesignError):
    """A numerical routine failed (non-convergence, invalid operand)."""


class SingularMatrix(NumericalFailure):
    """A matrix that must be invertible is singular to tolerance."""


class ParseError(BedesignError):
    """Malformed input data; carries the 1-based line number when known."""

    def __init__(self, message, line=None):
        if line is not None:
            message = f"line {line}: {message}"
        super().__init__(message)
        self.line = line


class TooLarge(BedesignError):
    """Exact enumeration requested beyond the supported instance size."""


class InfeasibleWeights(BedesignError):
    """A weight vector violates its box or sum constraints."""


class NoSizeFeasibleDraw(BedesignError):
    """Every sampling attempt exceeded the subset size budget."""


class AllZeroRows(BedesignError):
    """A length-weighted draw is undefined because every row has norm zero."""


class TooFewValues(BedesignError):
    """Not enough values to form the requested statistic."""


class GuaranteeRegimeWarning(UserWarning):
    """The requested subset size is outside the approximation-guarantee regime."""
