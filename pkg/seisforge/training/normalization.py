"""
Frozen normalization statistics and channel layout.

Signals are divided by their train-split standard deviation (means are
recorded but not subtracted, so a quiet input stays exactly zero) and
clipped. Story masses are divided by the total mass and story stiffnesses
by the largest story stiffness.
"""

from dataclasses import asdict, dataclass, fields
from typing import Any, Dict, Iterable, Tuple

import numpy as np

from seisforge.errors import ConfigError
from seisforge.formats import kvtree
from seisforge.physics.structure import LumpedMassModel


@dataclass(frozen=True)
class NormalizationStats:
    """Per-quantity statistics in physical units."""

    wave_mean: float = 0.0
    wave_std: float = 1.0
    displacement_mean: float = 0.0
    displacement_std: float = 1.0
    acceleration_mean: float = 0.0
    acceleration_std: float = 1.0
    clip: float = 50.0

    def __post_init__(self) -> None:
        for name in ("wave_std", "displacement_std", "acceleration_std", "clip"):
            if not getattr(self, name) > 0:
                raise ConfigError(f"normalization '{name}' must be positive", key=f"normalization.{name}")

    @classmethod
    def from_signals(
        cls,
        waves: Iterable[np.ndarray],
        displacements: Iterable[np.ndarray],
        accelerations: Iterable[np.ndarray],
        clip: float = 50.0,
    ) -> "NormalizationStats":
        """
        Compute statistics over collections of arrays.

        A zero standard deviation falls back to 1.
        """
        stats: Dict[str, float] = {}
        for name, arrays in (("wave", waves), ("displacement", displacements), ("acceleration", accelerations)):
            count, total, squares = 0, 0.0, 0.0
            for array in arrays:
                values = np.asarray(array, dtype=np.float64).ravel()
                count += values.size
                total += float(np.sum(values))
                squares += float(np.sum(values * values))
            mean = total / count if count else 0.0
            variance = max(0.0, squares / count - mean * mean) if count else 0.0
            std = float(np.sqrt(variance))
            stats[f"{name}_mean"] = mean
            stats[f"{name}_std"] = std if std > 0 else 1.0
        return cls(clip=clip, **stats)

    def normalize_wave(self, samples: np.ndarray) -> np.ndarray:
        return np.clip(np.asarray(samples) / self.wave_std, -self.clip, self.clip)

    def response_channels(self, u: np.ndarray, a: np.ndarray, n_max: int) -> np.ndarray:
        """
        Lay out a response as normalized quantity-major channels.

        Args:
            u: Displacements, (n_stories, n_steps)
            a: Accelerations, (n_stories, n_steps)
            n_max: Channel capacity per quantity

        Returns:
            Array of shape (n_steps, 2 * n_max), zero on padded stories
        """
        n_stories, n_steps = np.shape(u)
        if n_stories > n_max:
            raise ConfigError(f"{n_stories} stories exceed the model capacity n_max={n_max}", key="n_max")
        channels = np.zeros((n_steps, 2 * n_max))
        channels[:, :n_stories] = np.asarray(u).T / self.displacement_std
        channels[:, n_max : n_max + n_stories] = np.asarray(a).T / self.acceleration_std
        return np.clip(channels, -self.clip, self.clip)

    def split_channels(self, channels: np.ndarray, n_stories: int, n_max: int) -> Tuple[np.ndarray, np.ndarray]:
        """
        Invert ``response_channels`` for the real stories.

        Returns:
            Tuple of (u, a), each (n_stories, n_steps), in physical units
        """
        channels = np.asarray(channels, dtype=np.float64)
        u = channels[:, :n_stories].T * self.displacement_std
        a = channels[:, n_max : n_max + n_stories].T * self.acceleration_std
        return u, a

    def to_document(self) -> Dict[str, Any]:
        return asdict(self)

    @classmethod
    def from_document(cls, document: Dict[str, Any], path: str = "normalization") -> "NormalizationStats":
        kvtree.check_keys(document, [f.name for f in fields(cls)], path)
        return cls(**{k: float(v) for k, v in document.items()})


def story_vectors(model: LumpedMassModel, n_max: int) -> Tuple[np.ndarray, np.ndarray, np.ndarray]:
    """
    Padded story vectors of a model.

    Args:
        model: Simplified model
        n_max: Vector length

    Returns:
        Tuple of (m_vec, k_vec, story_mask)
    """
    n = model.n_stories
    if n > n_max:
        raise ConfigError(f"{n} stories exceed the model capacity n_max={n_max}", key="n_max")
    m_vec = np.zeros(n_max)
    k_vec = np.zeros(n_max)
    mask = np.zeros(n_max, dtype=bool)
    m_vec[:n] = model.masses / model.total_mass
    k_vec[:n] = model.story_stiffness / np.max(model.story_stiffness)
    mask[:n] = True
    return m_vec, k_vec, mask
