"""Error types shared across the package.

Two failure families are kept apart because the command-line driver maps
them to different exit codes: bad inputs (exit 2) versus computations
that ran but broke a numerical guarantee (exit 3).
"""


class NltomoError(Exception):
    """Base class for all package-specific errors."""


class ValidationError(NltomoError):
    """Raised when inputs, configuration, or parameters are unusable."""


class NumericalInvariantError(NltomoError):
    """Raised when a computed quantity violates a guaranteed invariant.

    Examples: a density matrix losing trace or hermiticity beyond
    tolerance, a tomogram slice with significant negative values, or an
    entropy pair dropping below the uncertainty bound.
    """
