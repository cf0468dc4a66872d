"""
Exception hierarchy for seisforge.
"""

from typing import Any, Dict, List, Optional, Sequence


class SeisForgeError(Exception):
    """Base class for every error raised by seisforge."""

    def __init__(self, message: str):
        self.message = message
        super().__init__(message)


class ConfigError(SeisForgeError):
    """Invalid configuration, invalid input file, or violated precondition."""

    def __init__(self, message: str, key: Optional[str] = None):
        self.key = key
        super().__init__(message)


class ParseError(ConfigError):
    """A text document could not be parsed."""

    def __init__(self, message: str, line: Optional[int] = None):
        self.line = line
        if line is not None:
            message = f"line {line}: {message}"
        super().__init__(message)


class DataError(ConfigError):
    """A document parsed but carries unusable values (non-finite, out of range)."""

    def __init__(self, message: str, row: Optional[int] = None):
        self.row = row
        if row is not None:
            message = f"row {row}: {message}"
        super().__init__(message)


class DomainError(ConfigError):
    """A numeric argument lies outside the domain of the operation."""
    pass


class ScalingError(SeisForgeError):
    """A record cannot be scaled (for example it has zero peak)."""
    pass


class GenerationError(SeisForgeError):
    """Dataset or building generation failed."""
    pass


class RegenerationError(GenerationError):
    """
    Raised when a rejection-sampling loop runs out of attempts.

    The attempt ledger is preserved for inspection.
    """

    def __init__(self, message: str, attempts: Sequence[Dict[str, Any]]):
        self.attempts: List[Dict[str, Any]] = list(attempts)
        super().__init__(message)


class NumericalError(SeisForgeError):
    """A numerical procedure failed to converge or produced non-finite values."""

    def __init__(self, message: str, iterations: Optional[int] = None):
        self.iterations = iterations
        super().__init__(message)


class TrainingAbortedError(NumericalError):
    """Training hit a non-finite loss."""

    def __init__(self, message: str, step: int, batch_ids: Sequence[str]):
        self.step = step
        self.batch_ids = list(batch_ids)
        super().__init__(f"{message} (step {step}, batch {', '.join(self.batch_ids)})")


class CompatibilityError(SeisForgeError):
    """Checkpoint, adapter, or manifest versions do not match."""
    pass


class UsageError(SeisForgeError):
    """An API was called out of order (for example backward without forward)."""
    pass
