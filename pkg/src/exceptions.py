"""
Exceptions Module
=================

Error hierarchy for the exposure toolkit. Every error carries the exit code
the CLI terminates with.
"""

from typing import Any, Dict, Optional


class ExposureError(Exception):
    """Base class for all toolkit errors."""

    exit_code = 4

    def to_dict(self) -> Dict[str, Any]:
        """Machine-readable error report."""
        return {
            "error": type(self).__name__,
            "message": str(self),
            "exit_code": self.exit_code,
        }


class ValidationError(ExposureError, ValueError):
    """Input violates a documented precondition or invariant."""

    exit_code = 2


class ConfigurationError(ExposureError, ValueError):
    """Configuration is missing, inconsistent, or of an unknown schema."""

    exit_code = 2


class RasterParseError(ValidationError):
    """Malformed ESRI ASCII grid."""

    def __init__(self, message: str, line: Optional[int] = None):
        self.line = line
        if line is not None:
            message = f"line {line}: {message}"
        super().__init__(message)


class PlotSchemaError(ValidationError):
    """CSV handed to the plotter has no known column layout."""


class MustImputeFirstError(ValidationError):
    """Aggregation was asked to work on a series that still has gaps."""


class UnusableSeriesError(ExposureError, ValueError):
    """Too few observations to fit the imputation model."""

    exit_code = 3


class UndefinedRateError(ExposureError):
    """At-risk rate requested for an empty assessed population."""


class ReplicateError(ExposureError):
    """A replicate run failed; the seed is kept so it can be re-run."""

    def __init__(self, seed: int, cause: BaseException):
        self.seed = seed
        self.cause = cause
        super().__init__(f"replicate with seed {seed} failed: {cause}")

    def __reduce__(self):
        return (type(self), (self.seed, self.cause))


class CalibrationFailedError(ExposureError):
    """No calibration candidate produced a result."""


class TableParseError(ValidationError):
    """Malformed CSV input table."""

    def __init__(self, message: str, path=None, line: Optional[int] = None):
        self.path = path
        self.line = line
        if line is not None:
            message = f"line {line}: {message}"
        if path is not None:
            message = f"{path}: {message}"
        super().__init__(message)
