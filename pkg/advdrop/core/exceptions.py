"""
Custom exception classes for advdrop.

Every exception carries a process exit code so the CLI can map failures
without inspecting messages.
"""
from typing import Any, Dict, Optional


class AdvDropException(Exception):
    """Base exception class for advdrop."""

    def __init__(
        self,
        message: str,
        code: str = "INTERNAL_ERROR",
        exit_code: int = 1,
        details: Optional[Dict[str, Any]] = None,
    ):
        self.message = message
        self.code = code
        self.exit_code = exit_code
        self.details = details or {}
        super().__init__(message)


class DimensionError(AdvDropException):
    """Raised when tensor or dataset shapes disagree."""

    def __init__(
        self,
        message: str = "Dimension mismatch",
        code: str = "DIMENSION_ERROR",
        details: Optional[Dict[str, Any]] = None,
    ):
        super().__init__(message=message, code=code, exit_code=1, details=details)


class DomainError(AdvDropException):
    """Raised when a value lies outside a function's domain."""

    def __init__(
        self,
        message: str = "Value outside domain",
        code: str = "DOMAIN_ERROR",
        details: Optional[Dict[str, Any]] = None,
    ):
        super().__init__(message=message, code=code, exit_code=1, details=details)


class ContractError(AdvDropException):
    """Raised when an API is called in a way its contract forbids."""

    def __init__(
        self,
        message: str = "Contract violated",
        code: str = "CONTRACT_ERROR",
        details: Optional[Dict[str, Any]] = None,
    ):
        super().__init__(message=message, code=code, exit_code=1, details=details)


class LabelRangeError(AdvDropException):
    """Raised when a class index falls outside [0, C)."""

    def __init__(
        self,
        message: str = "Label out of range",
        code: str = "LABEL_RANGE_ERROR",
        details: Optional[Dict[str, Any]] = None,
    ):
        super().__init__(message=message, code=code, exit_code=1, details=details)


class EmptyBatchError(AdvDropException):
    """Raised when an operation receives zero samples."""

    def __init__(
        self,
        message: str = "Empty batch",
        code: str = "EMPTY_BATCH",
        details: Optional[Dict[str, Any]] = None,
    ):
        super().__init__(message=message, code=code, exit_code=1, details=details)


class TelemetryStateError(AdvDropException):
    """Raised when rate telemetry is requested before any prior evaluation."""

    def __init__(
        self,
        message: str = "Dropout telemetry is empty",
        code: str = "TELEMETRY_EMPTY",
        details: Optional[Dict[str, Any]] = None,
    ):
        super().__init__(message=message, code=code, exit_code=1, details=details)


class UndefinedMomentsError(AdvDropException):
    """Raised when a distribution lacks the moments a fit needs."""

    def __init__(
        self,
        message: str = "Moments undefined",
        code: str = "UNDEFINED_MOMENTS",
        details: Optional[Dict[str, Any]] = None,
    ):
        super().__init__(message=message, code=code, exit_code=1, details=details)


class DivergenceError(AdvDropException):
    """Raised when a KL divergence is infinite on the support grid."""

    def __init__(
        self,
        message: str = "Divergence is infinite",
        code: str = "INFINITE_DIVERGENCE",
        details: Optional[Dict[str, Any]] = None,
    ):
        super().__init__(message=message, code=code, exit_code=1, details=details)


class QuadratureError(AdvDropException):
    """Raised when numerical integration or root search fails."""

    def __init__(
        self,
        message: str = "Quadrature failed",
        code: str = "QUADRATURE_ERROR",
        details: Optional[Dict[str, Any]] = None,
    ):
        super().__init__(message=message, code=code, exit_code=3, details=details)


class ArgumentError(AdvDropException):
    """Raised for invalid call arguments."""

    def __init__(
        self,
        message: str = "Invalid argument",
        code: str = "ARGUMENT_ERROR",
        details: Optional[Dict[str, Any]] = None,
    ):
        super().__init__(message=message, code=code, exit_code=1, details=details)


class UndefinedMetricError(AdvDropException):
    """Raised when a metric is undefined for the given inputs."""

    def __init__(
        self,
        message: str = "Metric undefined",
        code: str = "UNDEFINED_METRIC",
        details: Optional[Dict[str, Any]] = None,
    ):
        super().__init__(message=message, code=code, exit_code=1, details=details)


class TrainingDivergedError(AdvDropException):
    """Raised when the training loss becomes non-finite."""

    def __init__(
        self,
        message: str = "Training loss is not finite",
        code: str = "TRAINING_DIVERGED",
        details: Optional[Dict[str, Any]] = None,
    ):
        super().__init__(message=message, code=code, exit_code=1, details=details)


class PruneExhaustedError(AdvDropException):
    """Raised when no prunable entries remain."""

    def __init__(
        self,
        message: str = "Nothing left to prune",
        code: str = "PRUNE_EXHAUSTED",
        details: Optional[Dict[str, Any]] = None,
    ):
        super().__init__(message=message, code=code, exit_code=1, details=details)


class DataFormatError(AdvDropException):
    """Raised when a data file has an unexpected binary layout."""

    def __init__(
        self,
        message: str = "Invalid data format",
        code: str = "DATA_FORMAT_ERROR",
        details: Optional[Dict[str, Any]] = None,
    ):
        super().__init__(message=message, code=code, exit_code=1, details=details)


class DataConsistencyError(AdvDropException):
    """Raised when paired data files disagree."""

    def __init__(
        self,
        message: str = "Inconsistent data files",
        code: str = "DATA_CONSISTENCY_ERROR",
        details: Optional[Dict[str, Any]] = None,
    ):
        super().__init__(message=message, code=code, exit_code=1, details=details)


class DataParseError(AdvDropException):
    """Raised when a table cell cannot be parsed."""

    def __init__(
        self,
        message: str = "Could not parse data",
        row: Optional[int] = None,
        column: Optional[int] = None,
        value: Optional[str] = None,
        details: Optional[Dict[str, Any]] = None,
    ):
        details = details or {}
        details.update({"row": row, "column": column, "value": value})
        super().__init__(message=message, code="DATA_PARSE_ERROR", exit_code=1, details=details)


class MissingDataError(AdvDropException):
    """Raised when a dataset file is not present."""

    def __init__(
        self,
        message: str = "Data file not found",
        code: str = "MISSING_DATA",
        details: Optional[Dict[str, Any]] = None,
    ):
        super().__init__(message=message, code=code, exit_code=2, details=details)


class CheckpointMismatchError(AdvDropException):
    """Raised when a checkpoint does not belong to the requested config."""

    def __init__(
        self,
        message: str = "Checkpoint does not match config",
        code: str = "CHECKPOINT_MISMATCH",
        details: Optional[Dict[str, Any]] = None,
    ):
        super().__init__(message=message, code=code, exit_code=4, details=details)


class ConfigError(AdvDropException):
    """Raised for invalid experiment configuration."""

    def __init__(
        self,
        message: str = "Invalid configuration",
        code: str = "CONFIG_ERROR",
        details: Optional[Dict[str, Any]] = None,
    ):
        super().__init__(message=message, code=code, exit_code=1, details=details)


class SplitError(AdvDropException):
    """Raised when a split would leave a side empty."""

    def __init__(
        self,
        message: str = "Degenerate split",
        code: str = "SPLIT_ERROR",
        details: Optional[Dict[str, Any]] = None,
    ):
        super().__init__(message=message, code=code, exit_code=1, details=details)
