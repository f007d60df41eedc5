"""
Custom exceptions for the CHP market power engine.
"""
from typing import Any, Dict, Optional, Sequence

from chp_power.core.config.constants import ExitCode


class ChpError(Exception):
    """Base exception for the CHP market power engine."""

    def __init__(
        self,
        message: str = "An error occurred",
        code: str = "E_INTERNAL",
        details: Optional[Dict[str, Any]] = None,
        exit_code: int = ExitCode.DOMAIN_ERROR,
    ):
        self.message = message
        self.code = code
        self.details = details or {}
        self.exit_code = int(exit_code)
        super().__init__(self.message)

    def to_dict(self) -> Dict[str, Any]:
        """Convert exception to a dictionary for structured logs."""
        return {
            "error": True,
            "code": self.code,
            "message": self.message,
            "details": self.details,
            "exit_code": self.exit_code,
        }

    def to_line(self) -> str:
        """Single greppable line printed by the command line."""
        return f"{self.code}: {self.message}"


# Domain exceptions
class DomainError(ChpError):
    """Argument outside the mathematical domain of an operation."""

    def __init__(self, message: str = "Value outside domain", details: Optional[Dict] = None):
        super().__init__(message, "E_DOMAIN", details, ExitCode.DOMAIN_ERROR)


class InfeasibleDemandError(ChpError):
    """Demand exceeds the capacity left after exclusions."""

    def __init__(self, demand: float, available_capacity: float):
        shortfall = demand - available_capacity
        message = (
            f"demand {demand:g} MW exceeds available capacity "
            f"{available_capacity:g} MW (shortfall {shortfall:g} MW)"
        )
        details = {
            "demand": demand,
            "available_capacity": available_capacity,
            "shortfall": shortfall,
        }
        super().__init__(message, "E_INFEASIBLE", details, ExitCode.DOMAIN_ERROR)
        self.shortfall = shortfall


class InstanceTooLargeError(ChpError):
    """Brute-force enumeration bound exceeded."""

    def __init__(self, what: str, size: int, limit: int):
        message = f"{what} has {size} cases, above the limit of {limit}"
        super().__init__(
            message, "E_TOO_LARGE", {"what": what, "size": size, "limit": limit}, ExitCode.DOMAIN_ERROR
        )


# Scenario exceptions
class ScenarioSchemaError(ChpError):
    """Scenario document does not match the schema."""

    def __init__(self, field: str, message: str = "invalid value", errors: Optional[Sequence[Any]] = None):
        full_message = f"scenario field '{field}': {message}"
        super().__init__(
            full_message, "E_SCHEMA", {"field": field, "errors": list(errors or [])}, ExitCode.DOMAIN_ERROR
        )
        self.field = field


class ScenarioConfigError(ChpError):
    """Scenario is well-formed but violates a model requirement."""

    def __init__(self, message: str = "Invalid scenario configuration", details: Optional[Dict] = None):
        super().__init__(message, "E_CONFIG", details, ExitCode.DOMAIN_ERROR)


# Command line exceptions
class UsageError(ChpError):
    """Command line does not match the grammar."""

    def __init__(self, message: str = "invalid usage", details: Optional[Dict] = None):
        super().__init__(message, "E_USAGE", details, ExitCode.USAGE_ERROR)


# Utility functions
def handle_exception(error: Exception) -> ChpError:
    """Convert generic exceptions to ChpError."""
    if isinstance(error, ChpError):
        return error

    if isinstance(error, FileNotFoundError):
        return UsageError(f"file not found: {error.filename or error}")
    elif isinstance(error, KeyError):
        return DomainError(f"unknown key: {error}")
    elif isinstance(error, (ValueError, ArithmeticError)):
        return DomainError(str(error))

    return ChpError(
        message=str(error) or "An unexpected error occurred",
        details={"original_error": type(error).__name__},
    )
