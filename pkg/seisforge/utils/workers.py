"""
Worker pool for independent per-sample computations.
"""

import logging
import os
from concurrent.futures import Executor, ProcessPoolExecutor
from typing import Any, Callable, Dict, Iterable, List, Optional, TypeVar

import torch

# Logger
logger = logging.getLogger("seisforge.utils.workers")

THREADS_ENV = "SEISFORGE_THREADS"

T = TypeVar("T")
R = TypeVar("R")


def thread_cap(default: int = 1) -> int:
    """
    Read the worker cap from the environment.

    Args:
        default: Value used when the variable is unset

    Returns:
        Positive worker count
    """
    raw = os.environ.get(THREADS_ENV)
    if raw is None or not raw.strip():
        return default
    try:
        value = int(raw)
    except ValueError:
        logger.warning(f"Ignoring non-integer {THREADS_ENV}={raw!r}")
        return default
    return max(1, value)


def configure_torch(threads: Optional[int] = None) -> None:
    """
    Put torch into deterministic single-process mode.

    Args:
        threads: Intra-op thread count (defaults to the environment cap)
    """
    torch.use_deterministic_algorithms(True)
    torch.set_num_threads(threads or thread_cap())


class WorkerPool:
    """
    Ordered parallel map over independent items.

    With one worker everything runs inline in the calling process, which keeps
    tracebacks simple; with more, items are dispatched to a process pool and
    results are returned in input order so outputs never depend on
    scheduling.
    """

    def __init__(self, max_workers: Optional[int] = None):
        cap = thread_cap()
        if max_workers is None:
            self._max_workers = cap
        else:
            self._max_workers = max(1, min(max_workers, cap))
        self._executor: Optional[Executor] = None
        self._stats: Dict[str, int] = {"batches": 0, "items": 0}

    @property
    def max_workers(self) -> int:
        """Get the effective worker count."""
        return self._max_workers

    def map(self, fn: Callable[[T], R], items: Iterable[T]) -> List[R]:
        """
        Apply a function to every item.

        Args:
            fn: Picklable top-level function
            items: Inputs

        Returns:
            Results in input order
        """
        work = list(items)
        self._stats["batches"] += 1
        self._stats["items"] += len(work)
        if self._max_workers == 1 or len(work) <= 1:
            return [fn(item) for item in work]

        if self._executor is None:
            logger.debug(f"Starting process pool with {self._max_workers} workers")
            self._executor = ProcessPoolExecutor(max_workers=self._max_workers)
        return list(self._executor.map(fn, work))

    def close(self) -> None:
        """Shut down the underlying executor."""
        if self._executor is not None:
            self._executor.shutdown(wait=True)
            self._executor = None

    def get_stats(self) -> Dict[str, Any]:
        """Get pool statistics."""
        stats: Dict[str, Any] = dict(self._stats)
        stats["max_workers"] = self._max_workers
        return stats

    def __enter__(self) -> "WorkerPool":
        return self

    def __exit__(self, exc_type: Any, exc_val: Any, exc_tb: Any) -> None:
        self.close()
