"""
Error handling for seisforge.

This package contains the exception hierarchy, the error classifier used for
exit codes and sample recovery, the regeneration policy for rejection
sampling, and generation telemetry.
"""

from seisforge.errors.exceptions import (
    SeisForgeError,
    ConfigError,
    ParseError,
    DataError,
    DomainError,
    ScalingError,
    GenerationError,
    RegenerationError,
    NumericalError,
    TrainingAbortedError,
    CompatibilityError,
    UsageError,
)
from seisforge.errors.classifier import ErrorClassifier
from seisforge.errors.retry import (
    RegenerationPolicy,
    RegenerationState,
    RegenerationHandler,
)
from seisforge.errors.telemetry import GenerationTelemetry

__all__ = [
    "SeisForgeError",
    "ConfigError",
    "ParseError",
    "DataError",
    "DomainError",
    "ScalingError",
    "GenerationError",
    "RegenerationError",
    "NumericalError",
    "TrainingAbortedError",
    "CompatibilityError",
    "UsageError",
    "ErrorClassifier",
    "RegenerationPolicy",
    "RegenerationState",
    "RegenerationHandler",
    "GenerationTelemetry",
]
