"""Exception types raised across the package."""


class GloveError(Exception):
    """Base class for all package errors."""


class BlackKeyError(GloveError, ValueError):
    pass


class RangeError(GloveError, ValueError):
    pass


class FormatError(GloveError, ValueError):
    pass


class OrderError(GloveError, ValueError):
    pass


class UnsupportedStatus(GloveError, ValueError):
    pass


class EmptyStream(GloveError, ValueError):
    pass


class OverlapError(GloveError, ValueError):
    pass


class EmptyWindow(GloveError, ValueError):
    pass


class EmptyData(GloveError, ValueError):
    pass


class DimensionMismatch(GloveError, ValueError):
    pass


class UnknownTier(GloveError, ValueError):
    pass


class EmptyDev(GloveError, ValueError):
    pass


class ConfigError(GloveError, ValueError):
    """Invalid pipeline configuration; ``line`` points into the config text when known."""

    def __init__(self, message, line=None):
        self.line = line
        if line is not None:
            message = f"line {line}: {message}"
        super().__init__(message)
