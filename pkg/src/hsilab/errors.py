"""Exception hierarchy shared across the package.

Two broad categories matter to callers (and map onto CLI exit codes):
``DataError`` for malformed files, configs and shape contracts, and
``NumericalError`` for algorithmic failures (non-convergence, divergence).
"""


class HsilabError(Exception):
    """Base class for package-specific failures."""


class DataError(HsilabError):
    """Malformed input data, file or configuration."""


class NumericalError(HsilabError):
    """A numerical procedure failed (non-convergence, NaN blow-up, ...)."""
