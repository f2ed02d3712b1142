"""
Custom exceptions raised by the Lie-group analysis modules.

Library code raises these; only the command-line front end turns them into
exit codes.
"""

from typing import Any, Dict, List


class LieCtlError(Exception):
    """Base exception for all liectl errors."""


class InvalidInputError(LieCtlError, ValueError):
    """Exception raised for non-finite entries or malformed matrix shapes."""


class DimensionMismatchError(InvalidInputError):
    """Exception raised when operands have incompatible dimensions."""


class SchemaError(InvalidInputError):
    """Exception raised when a system, law or matrix document is malformed."""


class SingularMatrixError(InvalidInputError):
    """Exception raised when a group element cannot be inverted."""


class InvariantViolationError(LieCtlError):
    """Exception raised when a domain invariant or precondition does not hold."""


class BoundViolationError(InvariantViolationError):
    """Exception raised when a control law exceeds the amplitude bound."""


class GridResolutionError(LieCtlError):
    """Exception raised when a trajectory step is too large for the matrix logarithm."""


class ClosureDiagnosticsError(LieCtlError):
    """Exception raised when the bracket closure fails to stabilize."""

    def __init__(self, message: str, dims: List[int]) -> None:
        super().__init__(message)
        self.dims = dims


class DegeneracyError(LieCtlError):
    """Exception raised when a simultaneous diagonalization keeps failing."""

    def __init__(self, message: str, diagnostics: List[Dict[str, Any]]) -> None:
        super().__init__(message)
        self.diagnostics = diagnostics
