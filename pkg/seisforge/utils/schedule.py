"""
Learning-rate schedules for the trainer.
"""

import abc
import logging
import math

# Logger
logger = logging.getLogger("seisforge.utils.schedule")


class LearningRateSchedule(abc.ABC):
    """
    Base class for learning-rate schedules.

    A schedule maps the optimizer step index to the learning rate used for
    that step.
    """

    @abc.abstractmethod
    def learning_rate(self, step: int) -> float:
        """
        Calculate the learning rate for an optimizer step.

        Args:
            step: The optimizer step (0-based)

        Returns:
            Learning rate
        """
        pass


class ConstantSchedule(LearningRateSchedule):
    """Constant learning rate."""

    def __init__(self, rate: float):
        if rate < 0:
            raise ValueError("learning rate must be non-negative")
        self.rate = rate

    def learning_rate(self, step: int) -> float:
        return self.rate


class WarmupCosineSchedule(LearningRateSchedule):
    """
    Linear warmup followed by cosine decay.

    The rate rises linearly to ``peak`` over the first ``warmup_fraction`` of
    ``total_steps`` and then follows half a cosine down to
    ``final_fraction * peak`` at the last step.
    """

    def __init__(
        self,
        peak: float = 3e-4,
        total_steps: int = 1000,
        warmup_fraction: float = 0.05,
        final_fraction: float = 0.1,
    ):
        """
        Initialize the schedule.

        Args:
            peak: Peak learning rate
            total_steps: Number of optimizer steps in the run
            warmup_fraction: Fraction of steps spent warming up
            final_fraction: Final rate as a fraction of the peak
        """
        if peak < 0:
            raise ValueError("peak learning rate must be non-negative")
        if total_steps < 1:
            raise ValueError("total_steps must be at least 1")
        if not 0.0 <= warmup_fraction < 1.0:
            raise ValueError("warmup_fraction must lie in [0, 1)")
        self.peak = peak
        self.total_steps = total_steps
        self.warmup_steps = int(math.ceil(warmup_fraction * total_steps))
        self.final_rate = final_fraction * peak

    def learning_rate(self, step: int) -> float:
        if self.warmup_steps and step < self.warmup_steps:
            return self.peak * (step + 1) / self.warmup_steps

        decay_steps = max(1, self.total_steps - self.warmup_steps - 1)
        progress = min(1.0, max(0.0, (step - self.warmup_steps) / decay_steps))
        cosine = 0.5 * (1.0 + math.cos(math.pi * progress))
        return self.final_rate + (self.peak - self.final_rate) * cosine
