"""Exception types shared across the package."""


class MbrepError(Exception):
    """Base class for all package errors."""


class ValidationError(MbrepError):
    """Structurally invalid input (bad file, bad table, shape mismatch)."""


class DegenerateSystemError(MbrepError):
    """All transfer paths die out; no meaningful normalization exists."""


class NormalizationError(MbrepError):
    """Fixed-point solver did not converge within its iteration budget."""

    def __init__(self, message, residual=None):
        super().__init__(message)
        self.residual = residual


class CapExceededError(MbrepError):
    """An enumeration would exceed the configured sphere/word cap."""


class LayoutError(MbrepError):
    """Inconsistent induced-system layout; indicates corrupt subgroup data."""


class MembershipError(MbrepError):
    """A word does not belong to the subgroup it was claimed to lie in."""


class DepthError(MbrepError):
    """A finite table is too shallow to evaluate the requested word."""
