"""Exception types shared across the package."""


class AlphaTSError(Exception):
    """Base class for all package errors."""


class DegenerateInputError(AlphaTSError, ValueError):
    """Input carries no usable information (empty, all-zero, zero scale)."""


class IllConditionedGridError(AlphaTSError, ValueError):
    """ECF evaluation points give a numerically singular inversion."""

    def __init__(self, message, u=None):
        super().__init__(message)
        self.u = u


class UnwrapError(AlphaTSError, ValueError):
    """ECF phase jumps too much between neighbouring points to unwrap."""


class PoleError(AlphaTSError, ValueError):
    """Auxiliary transform evaluated where it vanishes or diverges."""


class ResampleY(AlphaTSError):
    """The sign-compatible interval for the location is empty.

    Raised by the location update; the caller refreshes the auxiliary
    variables and retries.
    """


class DataError(AlphaTSError, ValueError):
    """Malformed or non-finite data."""


class ConfigError(AlphaTSError, ValueError):
    """Invalid experiment configuration."""


class EndOfData(AlphaTSError):
    """A replay column has no rewards left."""

    def __init__(self, arm):
        super().__init__(f"replay column for arm {arm} is exhausted")
        self.arm = arm
