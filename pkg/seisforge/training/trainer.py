"""
Windowed autoregressive training of the decoder.
"""

import csv
import logging
import math
from dataclasses import dataclass, field, replace
from pathlib import Path
from typing import Any, Callable, Dict, List, Optional, Sequence, Union

import numpy as np
import torch
from torch import nn

from seisforge.errors import ConfigError, TrainingAbortedError
from seisforge.formats import kvtree
from seisforge.model.config import SrfdConfig
from seisforge.model.srfd import SeismicResponseDecoder, save_checkpoint
from seisforge.training.config import TrainConfig
from seisforge.training.dataset import Dataset, Split
from seisforge.training.metrics import loss as window_loss
from seisforge.training.normalization import NormalizationStats
from seisforge.training.windows import SampleChannels, Window, collate
from seisforge.utils.rng import make_rng
from seisforge.utils.schedule import ConstantSchedule, LearningRateSchedule, WarmupCosineSchedule
from seisforge.utils.workers import configure_torch

# Logger
logger = logging.getLogger("seisforge.training.trainer")

CHECKPOINT_NAME = "checkpoint.sgpt"


@dataclass(frozen=True)
class LogEntry:
    step: int
    loss: float
    lr: float
    grad_norm: float


@dataclass
class TrainingLog:
    """Per-step loss log."""

    entries: List[LogEntry] = field(default_factory=list)

    def append(self, entry: LogEntry) -> None:
        self.entries.append(entry)

    @property
    def losses(self) -> List[float]:
        return [entry.loss for entry in self.entries]

    @property
    def final_loss(self) -> Optional[float]:
        return self.entries[-1].loss if self.entries else None

    def write_csv(self, path: Union[str, Path]) -> Path:
        path = Path(path)
        path.parent.mkdir(parents=True, exist_ok=True)
        with open(path, "w", newline="", encoding="utf-8") as f:
            writer = csv.writer(f, lineterminator="\n")
            writer.writerow(["step", "loss", "lr", "grad_norm"])
            for e in self.entries:
                writer.writerow([e.step, repr(e.loss), repr(e.lr), repr(e.grad_norm)])
        return path

    def to_document(self) -> Dict[str, Any]:
        return {
            "steps": len(self.entries),
            "final_loss": self.final_loss,
            "entries": [e.__dict__ for e in self.entries],
        }


def make_schedule(cfg: TrainConfig) -> LearningRateSchedule:
    if cfg.learning_rate == 0 or cfg.steps < 2:
        return ConstantSchedule(cfg.learning_rate)
    return WarmupCosineSchedule(cfg.learning_rate, cfg.steps, cfg.warmup_fraction, cfg.final_fraction)


class Trainer:
    """
    Adam training over teacher-forced windows.

    Batches are drawn from a seeded permutation of all windows per epoch,
    so the batch order depends only on the seed and the window list.

    Args:
        decoder: Decoder to optimize
        cfg: Loop and optimizer settings
        seed: Seed of the batch order and scheduled sampling
        parameters: Parameters to train (defaults to every trainable one)
        clip: Clip applied to predicted histories
    """

    def __init__(
        self,
        decoder: SeismicResponseDecoder,
        cfg: TrainConfig,
        seed: int = 0,
        parameters: Optional[Sequence[nn.Parameter]] = None,
        clip: float = 50.0,
    ):
        self.decoder = decoder
        self.clip = clip
        self.cfg = cfg
        self.seed = seed
        self.parameters = list(parameters) if parameters is not None else [
            p for p in decoder.parameters() if p.requires_grad
        ]
        if not self.parameters:
            raise ConfigError("no trainable parameters")
        self.optimizer = torch.optim.Adam(
            self.parameters,
            lr=cfg.learning_rate,
            betas=cfg.betas,
            eps=cfg.eps,
        )
        self.schedule = make_schedule(cfg)
        self.log = TrainingLog()

    def _batches(self, n_windows: int) -> List[np.ndarray]:
        order: List[np.ndarray] = []
        epoch = 0
        while sum(len(b) for b in order) < self.cfg.steps * self.cfg.batch_size:
            perm = make_rng(self.seed, "batches", epoch).permutation(n_windows)
            order.extend(perm[i : i + self.cfg.batch_size] for i in range(0, n_windows, self.cfg.batch_size))
            epoch += 1
        return order[: self.cfg.steps]

    def _sampled_history(
        self,
        step: int,
        batch: List[Window],
        sources: Dict[str, SampleChannels],
    ) -> List[Window]:
        """Replace some histories with the decoder's own prediction of the preceding span."""
        p = self.cfg.scheduled_sampling
        if p <= 0:
            return batch
        draws = make_rng(self.seed, "scheduled-sampling", step).uniform(size=len(batch))
        w = self.decoder.cfg.window
        out = []
        with torch.no_grad():
            for window, draw in zip(batch, draws):
                if draw >= p or window.start <= 0:
                    out.append(window)
                    continue
                source = sources[window.sample_id]
                previous = source.window(window.start - w, w)
                pred = self.decoder(previous.inputs).to(torch.float64).numpy()
                history = np.clip(pred, -self.clip, self.clip)
                out.append(source.window(window.start, w, history=history))
        return out

    def fit(
        self,
        sources: Sequence[SampleChannels],
        on_checkpoint: Optional[Callable[[int], None]] = None,
    ) -> TrainingLog:
        """
        Run the configured number of optimizer steps.

        Args:
            sources: Normalized training samples
            on_checkpoint: Called with the step count every
                ``checkpoint_every`` steps

        Returns:
            Training log

        Raises:
            ConfigError: If there are no windows to train on
            TrainingAbortedError: On a non-finite loss
        """
        w = self.decoder.cfg.window
        by_id = {source.sample_id: source for source in sources}
        windows = [window for source in sources for window in source.windows(w, self.cfg.hop)]
        if not windows:
            raise ConfigError("training split is empty")
        logger.info(f"Training on {len(windows)} windows from {len(sources)} samples for {self.cfg.steps} steps")

        self.decoder.train()
        for step, indices in enumerate(self._batches(len(windows))):
            batch = self._sampled_history(step, [windows[i] for i in indices], by_id)
            inputs, target, time_mask = collate(batch)
            lr = self.schedule.learning_rate(step)
            for group in self.optimizer.param_groups:
                group["lr"] = lr

            self.optimizer.zero_grad(set_to_none=True)
            pred = self.decoder(inputs)
            value = window_loss(pred, target, inputs.story_mask, time_mask, self.cfg.loss_weights)
            if not torch.isfinite(value):
                raise TrainingAbortedError(
                    f"non-finite loss at step {step}",
                    step=step,
                    batch_ids=[f"{w_.sample_id}@{w_.start}" for w_ in batch],
                )
            value.backward()
            grad_norm = float(torch.nn.utils.clip_grad_norm_(self.parameters, self.cfg.grad_clip))
            self.optimizer.step()

            entry = LogEntry(step=step, loss=float(value.detach()), lr=lr, grad_norm=grad_norm)
            self.log.append(entry)
            if self.cfg.log_every and step % self.cfg.log_every == 0:
                logger.info(f"step {step}: loss={entry.loss:.6g} lr={lr:.3g} grad_norm={grad_norm:.3g}")
            else:
                logger.debug(f"step {step}: loss={entry.loss:.6g}")
            if on_checkpoint is not None and self.cfg.checkpoint_every and (step + 1) % self.cfg.checkpoint_every == 0:
                on_checkpoint(step + 1)
        return self.log


@dataclass
class TrainResult:
    checkpoint: Path
    sha256: str
    log: TrainingLog


def training_sources(
    dataset: Dataset,
    stats: NormalizationStats,
    n_max: int,
    split: Union[str, Split] = Split.TRAIN,
    sample_ids: Optional[Sequence[str]] = None,
) -> List[SampleChannels]:
    """Normalized channels of a split, or of explicit samples."""
    if sample_ids is not None:
        samples = [dataset.sample(sample_id) for sample_id in sample_ids]
    else:
        samples = dataset.samples(split)
    return [SampleChannels.from_sample(sample, stats, n_max) for sample in samples]


def train(
    model_cfg: SrfdConfig,
    train_cfg: TrainConfig,
    dataset: Union[str, Path, Dataset],
    seed: int,
    out_dir: Union[str, Path],
) -> TrainResult:
    """
    Train a base decoder on the train split of a dataset.

    Writes ``checkpoint.sgpt`` (with the frozen normalization statistics),
    ``checkpoints/step-NNNNNN.sgpt`` every ``checkpoint_every`` steps, and
    the training log as CSV and key-value tree.

    Args:
        model_cfg: Decoder configuration (without adapters)
        train_cfg: Loop and optimizer settings
        dataset: Dataset directory or reader
        seed: Seed of initialization, batch order and sampling
        out_dir: Output directory

    Returns:
        Final checkpoint path, hash and log
    """
    out = Path(out_dir)
    data = dataset if isinstance(dataset, Dataset) else Dataset(dataset)
    if model_cfg.lora_rank:
        model_cfg = replace(model_cfg, lora_rank=0)
    configure_torch()

    stats = data.normalization
    sources = training_sources(data, stats, model_cfg.n_max)
    decoder = SeismicResponseDecoder(model_cfg, seed)
    trainer = Trainer(decoder, train_cfg, seed, clip=stats.clip)

    def provenance(steps: int) -> Dict[str, Any]:
        return {
            "seed": seed,
            "dt": data.manifest.dt,
            "dataset_seed": data.manifest.rng_seed,
            "steps": steps,
            "training": train_cfg.to_document(),
            "final_loss": trainer.log.final_loss,
        }

    def periodic(steps: int) -> None:
        path = out / "checkpoints" / f"step-{steps:06d}.sgpt"
        save_checkpoint(decoder, path, stats.to_document(), provenance(steps))
        logger.info(f"Saved checkpoint {path}")

    log = trainer.fit(sources, on_checkpoint=periodic)
    path = out / CHECKPOINT_NAME
    sha = save_checkpoint(decoder, path, stats.to_document(), provenance(len(log.entries)))
    log.write_csv(out / "training_log.csv")
    kvtree.write_document(out / "training_log.json", log.to_document())
    final = log.final_loss
    logger.info(f"Saved checkpoint {path} (sha256 {sha[:12]}), final loss {final if final is not None else math.nan:.6g}")
    return TrainResult(checkpoint=path, sha256=sha, log=log)
