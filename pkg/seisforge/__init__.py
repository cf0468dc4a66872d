# Package exports
"""
seisforge: physics-conditioned seismic response prediction.

This library generates synthetic building and ground-motion datasets with a
lumped-mass structural oracle, trains a causal decoder that predicts floor
response histories from the ground motion and a simplified dynamic
response, and adapts it to new buildings with low-rank adapters.
"""

__version__ = "0.1.0"

from seisforge.physics import GroundMotion, LumpedMassModel, ResponseHistory  # noqa: E402
from seisforge.model import SeismicResponseDecoder, SrfdConfig  # noqa: E402
from seisforge.training import build_dataset, evaluate, finetune_lora, predict_rollout, train  # noqa: E402

__all__ = [
    "GroundMotion",
    "LumpedMassModel",
    "ResponseHistory",
    "SeismicResponseDecoder",
    "SrfdConfig",
    "build_dataset",
    "evaluate",
    "finetune_lora",
    "predict_rollout",
    "train",
]
