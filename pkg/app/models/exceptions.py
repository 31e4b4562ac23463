"""Custom exceptions for the totient-gaps toolkit."""

from typing import Optional, Dict, Any


class ToolkitException(Exception):
    """Base exception for toolkit errors."""

    def __init__(
        self,
        message: str,
        error_code: Optional[str] = None,
        details: Optional[Dict[str, Any]] = None
    ):
        self.message = message
        self.error_code = error_code
        self.details = details or {}
        super().__init__(self.message)


class RangeException(ToolkitException):
    """Exception raised when an argument lies outside the sieve range."""

    def __init__(self, name: str, value: int, limit: int):
        message = f"{name}={value} is outside the sieve range [1, {limit}]"
        super().__init__(message, "RANGE_ERROR", {"name": name, "value": value, "limit": limit})


class DomainException(ToolkitException):
    """Exception raised when an argument lies outside a function's domain."""

    def __init__(self, message: str, parameter: str, value: Any):
        super().__init__(message, "DOMAIN_ERROR", {"parameter": parameter, "value": value})


class ResourceLimitException(ToolkitException):
    """Exception raised when a computation would exceed the memory ceiling."""

    def __init__(self, limit: int, requested_bytes: int, ceiling_bytes: int):
        message = (
            f"Sieve of limit {limit} needs {requested_bytes} bytes, "
            f"above the memory ceiling of {ceiling_bytes} bytes"
        )
        super().__init__(
            message,
            "RESOURCE_LIMIT",
            {"limit": limit, "requested_bytes": requested_bytes, "ceiling_bytes": ceiling_bytes},
        )


class CompletenessException(ToolkitException):
    """Exception raised when a sieve is too short to certify a totient image."""

    def __init__(self, x: int, required_limit: int, actual_limit: int):
        message = (
            f"Totient values up to {x} need a sieve limit of at least {required_limit}, "
            f"got {actual_limit}"
        )
        super().__init__(
            message,
            "INCOMPLETE_SIEVE",
            {"x": x, "required_limit": required_limit, "actual_limit": actual_limit},
        )


class CacheCorruptionException(ToolkitException):
    """Exception raised when a sieve cache file fails verification."""

    def __init__(self, path: str, reason: str):
        message = f"Sieve cache '{path}' rejected: {reason}"
        super().__init__(message, "CACHE_CORRUPTED", {"path": path, "reason": reason})


class ValidationException(ToolkitException):
    """Exception raised when input validation fails."""

    def __init__(self, message: str, field: str, value: Any):
        super().__init__(message, "VALIDATION_ERROR", {"field": field, "value": value})
