"""Conversion error type shared across the package."""


class ConversionError(Exception):
    """Raised when a source artifact is missing, corrupt, or inconsistent."""
