"""
Teacher-forced windowing of training samples.

A window starting at step ``t`` covers ``[t, t + W)``. Its history channel
holds the oracle response over ``[t - W, t)`` and its targets the oracle
response over ``[t, t + W)``; steps outside the record read as zeros. A
record shorter than ``W`` becomes one window padded at the front.
"""

import math
from dataclasses import dataclass
from typing import List, NamedTuple, Optional, Sequence, Tuple

import numpy as np
import torch

from seisforge.model.srfd import StepInputs
from seisforge.training.dataset import TrainingSample
from seisforge.training.normalization import NormalizationStats, story_vectors


def window_starts(n_steps: int, window: int, hop: int) -> List[int]:
    """
    Start steps of the windows over a record.

    Args:
        n_steps: Record length
        window: Window length ``W``
        hop: Step between window starts

    Returns:
        ``[n_steps - W]`` when the record is shorter than ``W``, otherwise
        ``ceil((n_steps - W) / hop) + 1`` starts spaced by ``hop``
    """
    if window < 1 or hop < 1:
        raise ValueError("window and hop must be positive")
    if n_steps <= window:
        return [n_steps - window]
    count = math.ceil((n_steps - window) / hop) + 1
    return [i * hop for i in range(count)]


def segment(values: np.ndarray, start: int, length: int) -> np.ndarray:
    """Slice ``values[start:start + length]`` along axis 0, zero outside the array."""
    values = np.asarray(values)
    out = np.zeros((length,) + values.shape[1:], dtype=values.dtype)
    lo = max(start, 0)
    hi = min(start + length, values.shape[0])
    if hi > lo:
        out[lo - start : hi - start] = values[lo:hi]
    return out


def time_mask(n_steps: int, start: int, length: int) -> np.ndarray:
    """Boolean mask of the window positions that fall inside the record."""
    positions = start + np.arange(length)
    return (positions >= 0) & (positions < n_steps)


class Window(NamedTuple):
    inputs: StepInputs
    target: np.ndarray
    time_mask: np.ndarray
    sample_id: str
    start: int


@dataclass
class SampleChannels:
    """
    Normalized full-length channels of one sample.

    Attributes:
        sample_id: Sample identifier
        wave: Normalized ground acceleration, (n_steps,)
        target: Normalized oracle response, (n_steps, 2 * n_max)
        sdr: Normalized simplified response, (n_steps, 2 * n_max)
        m_vec: Normalized story masses, (n_max,)
        k_vec: Normalized story stiffnesses, (n_max,)
        story_mask: Real stories, (n_max,)
    """

    sample_id: str
    wave: np.ndarray
    target: np.ndarray
    sdr: np.ndarray
    m_vec: np.ndarray
    k_vec: np.ndarray
    story_mask: np.ndarray

    @classmethod
    def from_sample(cls, sample: TrainingSample, stats: NormalizationStats, n_max: int) -> "SampleChannels":
        m_vec, k_vec, mask = story_vectors(sample.model, n_max)
        return cls(
            sample_id=sample.sample_id,
            wave=stats.normalize_wave(sample.motion.samples),
            target=stats.response_channels(sample.oracle.u, sample.oracle.a, n_max),
            sdr=stats.response_channels(sample.sdr.u, sample.sdr.a, n_max),
            m_vec=m_vec,
            k_vec=k_vec,
            story_mask=mask,
        )

    @property
    def n_steps(self) -> int:
        return int(self.wave.shape[0])

    def window(self, start: int, length: int, history: Optional[np.ndarray] = None) -> Window:
        """
        Build the window starting at ``start``.

        Args:
            start: First step (negative for a front-padded window)
            length: Window length
            history: Replacement history channel, (length, 2 * n_max);
                defaults to the oracle over the preceding ``length`` steps

        Returns:
            Window with unbatched inputs
        """
        if history is None:
            history = segment(self.target, start - length, length)
        inputs = StepInputs.from_arrays(
            wave=segment(self.wave, start, length),
            history=history,
            sdr=segment(self.sdr, start, length),
            m_vec=self.m_vec,
            k_vec=self.k_vec,
            story_mask=self.story_mask,
        )
        return Window(
            inputs=inputs,
            target=segment(self.target, start, length),
            time_mask=time_mask(self.n_steps, start, length),
            sample_id=self.sample_id,
            start=start,
        )

    def windows(self, length: int, hop: Optional[int] = None) -> List[Window]:
        return [self.window(start, length) for start in window_starts(self.n_steps, length, hop or length)]


def make_windows(
    sample: TrainingSample,
    stats: NormalizationStats,
    n_max: int,
    window: int,
    hop: Optional[int] = None,
) -> List[Window]:
    """
    Cut a sample into teacher-forced windows.

    Args:
        sample: Training sample
        stats: Frozen normalization statistics
        n_max: Decoder story capacity
        window: Window length ``W``
        hop: Step between window starts (defaults to ``W``)

    Returns:
        Windows in time order
    """
    return SampleChannels.from_sample(sample, stats, n_max).windows(window, hop)


def collate(windows: Sequence[Window]) -> Tuple[StepInputs, torch.Tensor, torch.Tensor]:
    """
    Stack windows into a batch.

    Returns:
        Tuple of (batched inputs, targets (B, W, C), time mask (B, W))
    """
    names = ("wave", "history", "sdr", "m_vec", "k_vec", "story_mask")
    inputs = StepInputs(**{name: torch.stack([getattr(w.inputs, name) for w in windows]) for name in names})
    target = torch.as_tensor(np.stack([w.target for w in windows]))
    mask = torch.as_tensor(np.stack([w.time_mask for w in windows]))
    return inputs, target, mask
