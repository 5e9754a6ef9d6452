"""Exception types and process exit codes shared across the package."""

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_PARSE = 3
EXIT_DEGENERATE = 4


class FdaoaError(Exception):
    """Base class for package-specific failures."""


class ConfigError(FdaoaError):
    """Invalid or out-of-range configuration value.

    ``key`` carries the dotted path of the offending entry, e.g.
    ``elements[0][3].f0_hz``.
    """

    def __init__(self, message: str, key: str | None = None):
        if key:
            message = f"{key}: {message}"
        super().__init__(message)
        self.key = key


class FileFormatError(FdaoaError):
    """Malformed artifact file; the message names the row or header item."""


class ShapeMismatchError(FdaoaError, ValueError):
    """Array dimensions do not match the declared grids."""


class DegenerateInputError(FdaoaError, ValueError):
    """Input carries no usable signal (e.g. an all-zero measurement)."""


class BelowCutoffError(FdaoaError, ValueError):
    """Frequency at or below the guided-mode cutoff of the waveguide."""
