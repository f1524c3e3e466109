"""
Utilities for standardized error handling across CLI commands.
"""
from typing import Any, Dict, Optional, Union
import logging

from pydantic import ValidationError as PydanticValidationError

from advdrop.core.exceptions import (
    AdvDropException,
    ArgumentError,
    CheckpointMismatchError,
    ConfigError,
    MissingDataError,
    QuadratureError,
)

logger = logging.getLogger("advdrop.errors")

EXIT_OK = 0
EXIT_FAILURE = 1


class ErrorResponse:
    """Standard error body printed by the CLI."""

    @staticmethod
    def model(
        exit_code: int,
        code: str,
        message: str,
        details: Optional[Dict[str, Any]] = None
    ) -> Dict[str, Any]:
        """
        Create a standardized error body.

        Args:
            exit_code: Process exit code
            code: Error code
            message: Error message
            details: Additional error details

        Returns:
            Dict: Standardized error body
        """
        return {
            "status": "error",
            "exit_code": exit_code,
            "code": code,
            "message": message,
            "details": details or {}
        }

    @staticmethod
    def from_exception(exception: Union[Exception, AdvDropException]) -> Dict[str, Any]:
        """
        Create an error body from an exception.

        Args:
            exception: Exception to process

        Returns:
            Dict: Standardized error body
        """
        if isinstance(exception, AdvDropException):
            return ErrorResponse.model(
                exit_code=exception.exit_code,
                code=exception.code,
                message=exception.message,
                details=exception.details
            )
        elif isinstance(exception, PydanticValidationError):
            return ErrorResponse.model(
                exit_code=EXIT_FAILURE,
                code="CONFIG_ERROR",
                message="Invalid configuration",
                details={"errors": exception.errors(include_url=False, include_input=False)}
            )
        else:
            return ErrorResponse.model(
                exit_code=EXIT_FAILURE,
                code="INTERNAL_ERROR",
                message=str(exception),
                details={"type": type(exception).__name__}
            )


def handle_exception(exception: Exception) -> int:
    """
    Log an exception and convert it to a process exit code.

    Args:
        exception: Exception to handle

    Returns:
        int: Exit code for the CLI
    """
    if isinstance(exception, (MissingDataError, CheckpointMismatchError, ConfigError, ArgumentError)):
        logger.info(f"Expected exception: {exception}")
    elif isinstance(exception, QuadratureError):
        logger.warning(f"Numerical failure: {exception}")
    else:
        logger.error(f"Exception: {exception}", exc_info=True)

    if isinstance(exception, AdvDropException):
        return exception.exit_code
    return EXIT_FAILURE
