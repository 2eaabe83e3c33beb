"""Custom exceptions for the gaussian-locality package."""

from pathlib import Path
from typing import Any, Dict, Optional, Union


class LocalityError(Exception):
    """Base exception for all gaussian-locality errors."""

    def __init__(self, message: str, details: Optional[Dict[str, Any]] = None) -> None:
        """Initialize the exception with a message and optional details.

        Args:
            message: The error message
            details: Optional dictionary with additional error details
        """
        super().__init__(message)
        self.message = message
        self.details = details or {}


class ValidationError(LocalityError):
    """Raised when an argument is out of range, malformed or of the wrong shape."""

    def __init__(self, message: str, field: Optional[str] = None, value: Any = None) -> None:
        """Initialize validation error.

        Args:
            message: The error message
            field: The argument that failed validation
            value: The invalid value
        """
        details: Dict[str, Any] = {}
        if field:
            details["field"] = field
        if value is not None:
            details["value"] = str(value)
        super().__init__(message, details)


class TruncationError(LocalityError):
    """Raised when a Fock-space cutoff cannot represent the state accurately."""

    def __init__(self, message: str, cutoff: int, tail_bound: float) -> None:
        """Initialize truncation error.

        Args:
            message: The error message
            cutoff: The Fock cutoff that was requested
            tail_bound: Probability weight discarded by the cutoff
        """
        super().__init__(message, {"cutoff": cutoff, "tail_bound": tail_bound})


class CertificateError(LocalityError):
    """Raised when a locality certificate does not fit the state or measurements."""

    def __init__(self, message: str, reason: Optional[str] = None) -> None:
        """Initialize certificate error.

        Args:
            message: The error message
            reason: Short machine-readable reason
        """
        details = {"reason": reason} if reason else {}
        super().__init__(message, details)


class OutputError(LocalityError):
    """Raised when an artifact cannot be written."""

    def __init__(self, message: str, path: Union[str, Path]) -> None:
        """Initialize output error.

        Args:
            message: The error message
            path: The path that could not be written
        """
        super().__init__(message, {"path": str(path)})


class ConfigError(LocalityError):
    """Raised when a run configuration file is malformed."""

    def __init__(
        self,
        message: str,
        field: Optional[str] = None,
        line: Optional[int] = None,
        column: Optional[int] = None,
    ) -> None:
        """Initialize configuration error.

        Args:
            message: The error message
            field: The offending configuration key
            line: Line of a syntax error, when known
            column: Column of a syntax error, when known
        """
        details: Dict[str, Any] = {}
        if field:
            details["field"] = field
        if line is not None:
            details["line"] = line
        if column is not None:
            details["column"] = column
        super().__init__(message, details)
