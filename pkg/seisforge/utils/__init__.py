"""
Utility modules for seisforge.

This package contains deterministic random number generation, learning-rate
schedules, and the worker pool used for per-sample parallelism.
"""

from seisforge.utils.rng import make_rng, make_torch_generator
from seisforge.utils.schedule import (
    LearningRateSchedule,
    ConstantSchedule,
    WarmupCosineSchedule,
)
from seisforge.utils.workers import WorkerPool, configure_torch, thread_cap

__all__ = [
    "make_rng",
    "make_torch_generator",
    "LearningRateSchedule",
    "ConstantSchedule",
    "WarmupCosineSchedule",
    "WorkerPool",
    "configure_torch",
    "thread_cap",
]
