"""
Error classification for exit codes and sample-level recovery.
"""

import re
from typing import Dict, Type

from seisforge.errors.exceptions import (
    CompatibilityError,
    ConfigError,
    GenerationError,
    NumericalError,
    ScalingError,
    SeisForgeError,
    UsageError,
)


class ErrorClassifier:
    """
    Classifier for seisforge errors.

    Maps exceptions onto a small set of categories, which in turn decide the
    CLI exit code and whether dataset generation may skip a failed sample.
    """

    # Error categories with increasing severity
    CATEGORIES = {
        'NUMERICAL': 10,      # Solver divergence, non-finite values
        'GENERATION': 20,     # Rejection sampling exhausted, dataset failures
        'CONFIG': 30,         # Bad configuration or input files
        'COMPATIBILITY': 40,  # Checkpoint/manifest/adapter mismatch
        'FATAL': 90,          # Anything else
    }

    EXIT_CODES = {
        'CONFIG': 2,
        'GENERATION': 3,
        'COMPATIBILITY': 4,
        'NUMERICAL': 5,
        'FATAL': 1,
    }

    # Mapping of exception types to categories
    ERROR_MAPPING: Dict[Type[BaseException], str] = {
        ConfigError: 'CONFIG',
        ScalingError: 'CONFIG',
        GenerationError: 'GENERATION',
        NumericalError: 'NUMERICAL',
        CompatibilityError: 'COMPATIBILITY',
        UsageError: 'FATAL',
        FileNotFoundError: 'CONFIG',
        IsADirectoryError: 'CONFIG',
        FloatingPointError: 'NUMERICAL',
        ArithmeticError: 'NUMERICAL',
        SeisForgeError: 'FATAL',
        Exception: 'FATAL',
    }

    # Message keywords, matched as whole words
    NUMERICAL_WORDS = re.compile(r"\b(singular|nan|inf|converge[ds]?|convergence|diverged?)\b", re.IGNORECASE)
    COMPATIBILITY_WORDS = re.compile(r"\b(version|hash)\b", re.IGNORECASE)

    @classmethod
    def categorize(cls, error: BaseException) -> str:
        """
        Categorize an error based on exception type and message.

        Args:
            error: Exception that occurred

        Returns:
            Error category
        """
        error_type = type(error)
        if error_type in cls.ERROR_MAPPING and error_type not in (
            SeisForgeError, Exception
        ):
            return cls.ERROR_MAPPING[error_type]

        # Check parent classes if exact type not found
        for base_cls, category in cls.ERROR_MAPPING.items():
            if base_cls in (SeisForgeError, Exception):
                continue
            if isinstance(error, base_cls):
                return category

        # Use message content for third-party errors
        error_msg = str(error)
        if cls.NUMERICAL_WORDS.search(error_msg):
            return 'NUMERICAL'
        if cls.COMPATIBILITY_WORDS.search(error_msg):
            return 'COMPATIBILITY'

        return 'FATAL'

    @classmethod
    def exit_code(cls, category: str) -> int:
        """
        Exit code for an error category.

        Args:
            category: Error category

        Returns:
            Process exit code
        """
        return cls.EXIT_CODES.get(category, 1)

    @classmethod
    def is_sample_recoverable(cls, category: str) -> bool:
        """
        Determine if a sample that failed with this category can be skipped.

        Args:
            category: Error category

        Returns:
            True if generation should log and continue, False to abort
        """
        return cls.CATEGORIES[category] < cls.CATEGORIES['CONFIG']
