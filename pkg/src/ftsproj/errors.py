"""Exception hierarchy shared across the package.

The CLI maps these onto exit codes: usage problems exit 1, data/domain
problems exit 2, numeric failures exit 3.
"""


class FtsError(Exception):
    """Base class for all package errors."""


class DomainError(FtsError, ValueError):
    """An argument or precondition violation (bad range, too few curves, ...)."""


class DataError(FtsError, ValueError):
    """Malformed input data (CSV parse failures, ragged rows, ...)."""


class NumericError(FtsError, ArithmeticError):
    """A numeric procedure failed (factorization, degenerate covariance, ...)."""
