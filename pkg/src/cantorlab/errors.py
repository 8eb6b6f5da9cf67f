"""Exception hierarchy shared by all cantorlab modules."""


class CantorLabError(Exception):
    """Base class for all package-specific failures."""


class LengthError(CantorLabError, ValueError):
    """A requested prefix/order exceeds the available data."""


class DomainError(CantorLabError, ValueError):
    """Inputs lie outside the admissible region of an operation."""


class ResourceCapError(CantorLabError, RuntimeError):
    """A configured resource cap (atom count, precision cap) was exceeded."""


class NumericalFailureError(CantorLabError, RuntimeError):
    """A numerical routine failed to converge or produced an impossible value.

    `index` identifies the coefficient/eigenvalue index at which the
    failure was detected, when that is meaningful.
    """

    def __init__(self, message: str, index: int | None = None):
        super().__init__(message)
        self.index = index


class PrecisionExhaustedError(NumericalFailureError):
    """Working precision was insufficient to continue a computation."""


class ConsistencyError(CantorLabError, RuntimeError):
    """An internal identity that must hold exactly was violated."""


class ConfigError(CantorLabError, ValueError):
    """An experiment configuration failed validation."""
