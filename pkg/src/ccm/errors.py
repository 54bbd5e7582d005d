"""Exception types raised across the package."""


class CCMError(Exception):
    """Base class for all package errors."""


class DimensionMismatch(CCMError, ValueError):
    pass


class NotPositiveSemidefinite(CCMError, ValueError):
    pass


class ConvergenceFailure(CCMError, RuntimeError):
    pass


class QuadratureFailure(CCMError, RuntimeError):
    pass


class OverlapError(CCMError, ValueError):
    pass


class KTooLarge(CCMError, ValueError):
    pass


class SingularModalPower(CCMError, ZeroDivisionError):
    pass


class ZeroColumn(CCMError, ValueError):
    pass


class AmbiguousMatch(CCMError, RuntimeError):
    """Raised when a subspace mode has no full-space partner with |cosine| >= 0.5."""

    def __init__(self, message, match=None):
        super().__init__(message)
        self.match = match


class ConfigParseError(CCMError, ValueError):
    pass
