"""Exception types shared across the package."""

__all__ = ["DimensionError", "DataFormatError", "NumericalError"]


class DimensionError(ValueError):
    """Raised when vector or operator dimensions are inconsistent."""


class DataFormatError(ValueError):
    """Raised when an input file cannot be parsed into a valid object."""


class NumericalError(RuntimeError):
    """Raised when a numerical procedure fails (factorization, inner solve)."""
