"""Exception types raised across the pipeline.

Everything derives from ``ValueError`` so callers that only care about
"bad input" can catch one thing.
"""

from __future__ import annotations


class EEGPrefError(ValueError):
    """Base class for pipeline errors."""


class FormatError(EEGPrefError):
    """An on-disk file does not match its declared format."""

    def __init__(self, message: str, field: str | None = None):
        super().__init__(message)
        self.field = field


class PayloadLengthError(FormatError):
    pass


class ValidationError(EEGPrefError):
    pass


class DuplicateKeyError(EEGPrefError):
    pass


class FilterDesignError(EEGPrefError):
    pass


class SignalLengthError(EEGPrefError):
    pass


class NoUsableChannelsError(EEGPrefError):
    pass


class ReReferenceError(EEGPrefError):
    """Re-referencing is impossible (fewer than two good channels)."""


class ConfigurationError(EEGPrefError):
    pass


class DegenerateSignalError(EEGPrefError):
    pass


class AssemblyError(EEGPrefError):
    pass


class ParameterError(EEGPrefError):
    pass


class CrossValidationError(EEGPrefError):
    pass


class TrainingError(EEGPrefError):
    pass


class NumericalError(EEGPrefError):
    pass


class DimensionError(EEGPrefError):
    pass


class StageError(EEGPrefError):
    """Wraps an error with the pipeline stage it came from."""

    def __init__(self, stage: str, cause: Exception):
        super().__init__(f"[{stage}] {cause}")
        self.stage = stage
        self.cause = cause
