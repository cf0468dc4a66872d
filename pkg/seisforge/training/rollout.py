"""
Free-running rollout prediction and evaluation.
"""

import logging
import math
from pathlib import Path
from typing import List, Optional, Tuple, Union

import numpy as np
import torch

from seisforge.errors import CompatibilityError, ConfigError
from seisforge.model.srfd import SeismicResponseDecoder, StepInputs, load_adapters, load_checkpoint
from seisforge.physics.dynamics import IntegratorParams, ResponseHistory, sdr_response
from seisforge.physics.ground_motion import GroundMotion
from seisforge.physics.structure import LumpedMassModel
from seisforge.training.dataset import Dataset, Split, TrainingSample
from seisforge.training.metrics import EvalReport, SamplePrediction, build_report
from seisforge.training.normalization import NormalizationStats, story_vectors
from seisforge.training.windows import segment, window_starts
from seisforge.utils.workers import WorkerPool, configure_torch

# Logger
logger = logging.getLogger("seisforge.training.rollout")


class ResponsePredictor:
    """
    A decoder bound to the normalization and time step it was trained with.

    Args:
        decoder: Trained decoder
        stats: Normalization statistics frozen at training time
        dt: Time step of the training data
        sha256: Content hash of the base checkpoint, if loaded from one
    """

    def __init__(
        self,
        decoder: SeismicResponseDecoder,
        stats: NormalizationStats,
        dt: float,
        sha256: Optional[str] = None,
    ):
        self.decoder = decoder
        self.stats = stats
        self.dt = dt
        self.sha256 = sha256

    @classmethod
    def from_checkpoint(
        cls,
        path: Union[str, Path],
        adapter: Optional[Union[str, Path]] = None,
    ) -> "ResponsePredictor":
        """
        Load a predictor from a base checkpoint and optional adapter file.

        Raises:
            CompatibilityError: If the checkpoint lacks normalization or dt,
                or the adapters belong to another base
        """
        decoder, metadata, sha = load_checkpoint(path)
        if "normalization" not in metadata or "dt" not in metadata.get("provenance", {}):
            raise CompatibilityError(f"{path}: checkpoint carries no normalization statistics or dt")
        if adapter is not None:
            load_adapters(decoder, adapter, sha)
            logger.info(f"Applied adapters from {adapter}")
        stats = NormalizationStats.from_document(metadata["normalization"])
        return cls(decoder, stats, float(metadata["provenance"]["dt"]), sha)

    @property
    def window(self) -> int:
        return self.decoder.cfg.window

    @property
    def n_max(self) -> int:
        return self.decoder.cfg.n_max

    def check_motion(self, gm: GroundMotion) -> None:
        if not math.isclose(gm.dt, self.dt, rel_tol=1e-9):
            raise ConfigError(f"record dt {gm.dt} differs from the checkpoint dt {self.dt}; resample first", key="dt")

    def predict_channels(
        self,
        model: LumpedMassModel,
        gm: GroundMotion,
        sdr: Optional[ResponseHistory] = None,
    ) -> np.ndarray:
        """
        Free-run the decoder over a whole record.

        Window 0 sees a zero history; every later window sees the clipped
        predictions of the window before it.

        Args:
            model: Simplified model
            gm: Ground motion at the checkpoint dt
            sdr: Precomputed simplified response (computed when omitted)

        Returns:
            Normalized channels, (gm.n_steps, 2 * n_max)

        Raises:
            ConfigError: If the model has more than ``n_max`` stories or the
                record dt differs from the checkpoint's
        """
        self.check_motion(gm)
        m_vec, k_vec, mask = story_vectors(model, self.n_max)
        if sdr is None:
            sdr = sdr_response(model, gm, IntegratorParams.average_acceleration(gm.dt))
        wave = self.stats.normalize_wave(gm.samples)
        sdr_channels = self.stats.response_channels(sdr.u, sdr.a, self.n_max)

        n, w = gm.n_steps, self.window
        out = np.zeros((n, 2 * self.n_max))
        history = np.zeros((w, 2 * self.n_max))
        self.decoder.eval()
        with torch.no_grad():
            for start in window_starts(n, w, w):
                inputs = StepInputs.from_arrays(
                    wave=segment(wave, start, w),
                    history=history,
                    sdr=segment(sdr_channels, start, w),
                    m_vec=m_vec,
                    k_vec=k_vec,
                    story_mask=mask,
                )
                pred = self.decoder(inputs).to(torch.float64).numpy()
                lo, hi = max(start, 0), min(start + w, n)
                out[lo:hi] = pred[lo - start : hi - start]
                history = np.clip(pred, -self.stats.clip, self.stats.clip)
        return out

    def predict(self, model: LumpedMassModel, gm: GroundMotion) -> ResponseHistory:
        """
        Predict the response history of a model to a record.

        Velocities are the central difference of the predicted displacements.
        """
        channels = self.predict_channels(model, gm)
        u, a = self.stats.split_channels(channels, model.n_stories, self.n_max)
        v = np.gradient(u, gm.dt, axis=1) if gm.n_steps > 1 else np.zeros_like(u)
        return ResponseHistory(dt=gm.dt, u=u, v=v, a=a)


def predict_rollout(
    checkpoint: Union[str, Path, ResponsePredictor],
    model: LumpedMassModel,
    gm: GroundMotion,
    adapter: Optional[Union[str, Path]] = None,
) -> ResponseHistory:
    """
    Predict a full response history with a trained checkpoint.

    Args:
        checkpoint: Checkpoint path or loaded predictor
        model: Simplified model, at most ``n_max`` stories
        gm: Ground motion at the checkpoint dt
        adapter: Adapter file, when ``checkpoint`` is a path

    Returns:
        Predicted response, same length as ``gm``
    """
    if isinstance(checkpoint, ResponsePredictor):
        predictor = checkpoint
    else:
        predictor = ResponsePredictor.from_checkpoint(checkpoint, adapter)
    return predictor.predict(model, gm)


def _predict_sample(job: Tuple[ResponsePredictor, TrainingSample]) -> SamplePrediction:
    predictor, sample = job
    channels = predictor.predict_channels(sample.model, sample.motion, sample.sdr)
    target = predictor.stats.response_channels(sample.oracle.u, sample.oracle.a, predictor.n_max)
    return SamplePrediction(sample.sample_id, sample.model.n_stories, channels, target)


def rollout_samples(
    predictor: ResponsePredictor,
    samples: List[TrainingSample],
    workers: Optional[int] = None,
) -> List[SamplePrediction]:
    """Roll out every sample, in parallel when workers allow."""
    with WorkerPool(workers) as pool:
        return pool.map(_predict_sample, [(predictor, sample) for sample in samples])


def evaluate(
    checkpoint: Union[str, Path, ResponsePredictor],
    dataset: Union[str, Path, Dataset],
    split: Union[str, Split] = Split.TEST,
    worst_k: int = 3,
    limit: Optional[int] = None,
    workers: Optional[int] = None,
) -> EvalReport:
    """
    Evaluate rollout predictions on a dataset split.

    Args:
        checkpoint: Checkpoint path or loaded predictor
        dataset: Dataset directory or reader
        split: Split to evaluate
        worst_k: Length of the worst-case list
        limit: Evaluate only the first samples of the split
        workers: Worker processes

    Returns:
        Evaluation report

    Raises:
        ConfigError: If the split is empty
    """
    predictor = checkpoint if isinstance(checkpoint, ResponsePredictor) else ResponsePredictor.from_checkpoint(checkpoint)
    data = dataset if isinstance(dataset, Dataset) else Dataset(dataset)
    name = Split(split).value
    samples = data.samples(name, limit)
    if not samples:
        raise ConfigError(f"split '{name}' is empty", key="split")
    configure_torch()
    predictions = rollout_samples(predictor, samples, workers)
    report = build_report(predictions, predictor.n_max, name, worst_k)
    logger.info(
        f"Evaluated {len(samples)} {name} samples: "
        + ", ".join(f"{q} mse={m.mse:.4g} r={m.r:.3f}" for q, m in report.quantities.items())
    )
    return report
