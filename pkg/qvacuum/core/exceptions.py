from typing import Optional


class QVacuumError(Exception):
    """Base exception for qvacuum errors"""
    pass

class FockValidationError(QVacuumError, ValueError):
    """Raised when inputs violate a precondition (bad mode, mismatched spaces, bad config)"""
    pass

class ResourceLimitError(QVacuumError):
    """Raised when a space or a dense matrix would exceed the configured limits"""
    pass

class NumericError(QVacuumError, ArithmeticError):
    """Raised when a numerical procedure fails to meet its tolerance"""

    def __init__(self, message: str, residual: Optional[float] = None):
        super().__init__(message)
        self.residual = residual

class ReportIOError(QVacuumError, OSError):
    """Raised when a report or manifest cannot be written"""
    pass
