"""
This module defines custom exceptions for the PyMGCMA library.
"""

from enum import IntEnum


class ExitCode(IntEnum):
    Succeed = 0
    RuntimeFailure = 1
    UsageError = 2


class MGCMAError(Exception):
    """Base exception for all PyMGCMA errors."""

    default_code = ExitCode.RuntimeFailure

    def __init__(self, message: str, error_code: ExitCode | None = None):
        super().__init__(message)
        self.error_code = error_code if error_code is not None else self.default_code


class DimensionError(MGCMAError):
    """Raised when tensor extents do not agree."""

    pass


class EmptyInputError(MGCMAError):
    """Raised for an empty sequence or an empty batch."""

    pass


class DegenerateInputError(MGCMAError):
    """Raised when an input has no direction, e.g. a zero vector."""

    pass


class ContractError(MGCMAError):
    """Raised when a caller breaks an operation contract."""

    pass


class NonFiniteError(MGCMAError):
    """Raised when an operation produces NaN or Inf."""

    pass


class FeatureFormatError(MGCMAError):
    """Raised when a feature file header is not recognised."""

    pass


class FeatureCorruptionError(FeatureFormatError):
    """Raised when a feature file payload is truncated or oversized."""

    pass


class CheckpointError(MGCMAError):
    """Raised when a model checkpoint cannot be decoded."""

    pass


class DatasetError(MGCMAError):
    """Raised for manifest, session or dimension problems in a dataset."""

    pass


class ConfigError(MGCMAError):
    """Raised for unknown keys or invalid configuration combinations."""

    default_code = ExitCode.UsageError


class UnknownVariantError(ConfigError):
    """Raised for an ablation system id outside S0-S9."""

    pass


def to_exit_code(error: BaseException) -> ExitCode:
    if isinstance(error, MGCMAError):
        return ExitCode(error.error_code)
    return ExitCode.RuntimeFailure
