"""
Telemetry for samples skipped during dataset generation.
"""

import collections
import logging
import threading
from typing import Any, Counter, Dict, List, Optional

# Logger
logger = logging.getLogger("seisforge.errors.telemetry")


class GenerationTelemetry:
    """
    Collector for per-sample failures.

    Dataset generation records every skipped sample here; the report is
    embedded in the manifest so a skip is never silent.
    """

    def __init__(self, recent_limit: int = 10):
        self._lock = threading.Lock()
        self._total = 0
        self._categories: Counter[str] = collections.Counter()
        self._stages: Counter[str] = collections.Counter()
        self._skipped: List[Dict[str, Any]] = []
        self._recent: "collections.deque[Dict[str, Any]]" = collections.deque(
            maxlen=recent_limit
        )

    def record_skip(
        self,
        sample_id: str,
        stage: str,
        category: str,
        message: Optional[str] = None,
    ) -> None:
        """
        Record a skipped sample.

        Args:
            sample_id: Identifier of the sample that failed
            stage: Pipeline stage where it failed (e.g. "oracle", "sdr")
            category: Error category from the classifier
            message: Error message
        """
        detail = {
            'sample_id': sample_id,
            'stage': stage,
            'category': category,
            'message': message or '',
        }
        with self._lock:
            self._total += 1
            self._categories[category] += 1
            self._stages[stage] += 1
            self._skipped.append(detail)
            self._recent.append(detail)
        logger.warning(f"Skipped sample {sample_id} at {stage}: {category} {message}")

    @property
    def total_skipped(self) -> int:
        """Get the number of skipped samples."""
        with self._lock:
            return self._total

    def skipped_ids(self) -> List[str]:
        """Get the identifiers of skipped samples, sorted."""
        with self._lock:
            return sorted(item['sample_id'] for item in self._skipped)

    def get_report(self) -> Dict[str, Any]:
        """
        Get a report suitable for persisting in the manifest.

        Returns:
            Report dictionary with deterministic ordering
        """
        with self._lock:
            return {
                'total_skipped': self._total,
                'categories': dict(sorted(self._categories.items())),
                'stages': dict(sorted(self._stages.items())),
                'skipped': sorted(self._skipped, key=lambda item: item['sample_id']),
            }
