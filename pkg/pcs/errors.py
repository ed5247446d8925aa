"""Exceptions raised by pcs.

Every error kind carries a builtin base as well, so callers that only know about
``ValueError`` or ``ArithmeticError`` keep working.
"""

__all__ = [
    'PcsError', 'InvalidArgumentError', 'FactorizationError', 'NumericalError', 'DegenerateWeightsError',
    'DivergenceError', 'UnsupportedConfigurationError', 'SizeLimitError', 'OutOfRegimeError', 'ConfigurationError'
]


class PcsError(Exception):
    """Base class of all pcs errors."""


class InvalidArgumentError(PcsError, ValueError):
    """Bad shapes, counts or non-finite inputs."""


class NumericalError(PcsError, ArithmeticError):
    """A numerical routine could not produce a finite answer."""


class FactorizationError(NumericalError):
    """Cholesky factorization met a pivot at or below the SPD tolerance."""


class DegenerateWeightsError(NumericalError):
    """All importance weights underflowed to zero."""


class DivergenceError(NumericalError):
    """An iterative sampler or optimizer left the region it can recover from."""


class UnsupportedConfigurationError(PcsError, ValueError):
    """The inputs are valid but the requested operation does not handle them."""


class SizeLimitError(PcsError, ValueError):
    """An exhaustive routine was asked to run on a too large instance."""


class OutOfRegimeError(PcsError, ValueError):
    """A bound was evaluated outside the parameter range it is stated for."""


class ConfigurationError(PcsError, ValueError):
    """The experiment options are inconsistent; raised before any trial runs."""
