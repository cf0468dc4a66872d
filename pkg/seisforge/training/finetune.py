"""
Low-rank adapter fine-tuning of a trained base decoder.
"""

import logging
import math
from dataclasses import dataclass
from pathlib import Path
from typing import Optional, Sequence, Union

from seisforge.errors import CompatibilityError, ConfigError
from seisforge.formats import kvtree
from seisforge.model.srfd import load_checkpoint, save_adapters
from seisforge.training.config import TrainConfig
from seisforge.training.dataset import Dataset, Split
from seisforge.training.normalization import NormalizationStats
from seisforge.training.trainer import Trainer, TrainingLog, training_sources
from seisforge.utils.workers import configure_torch

# Logger
logger = logging.getLogger("seisforge.training.finetune")

ADAPTER_NAME = "adapters.sgpt"


@dataclass
class FinetuneResult:
    adapters: Path
    sha256: str
    base_sha256: str
    log: TrainingLog


def finetune_lora(
    base_checkpoint: Union[str, Path],
    dataset: Union[str, Path, Dataset],
    rank: int,
    alpha: float,
    seed: int,
    train_cfg: TrainConfig,
    out_dir: Union[str, Path],
    split: Union[str, Split] = Split.TRAIN,
    sample_ids: Optional[Sequence[str]] = None,
) -> FinetuneResult:
    """
    Train low-rank adapters on top of a frozen base checkpoint.

    The adapters start with a zero up-projection, so before the first step
    the adapted decoder reproduces the base exactly. Inputs are normalized
    with the base checkpoint's statistics, not the fine-tuning dataset's.

    Args:
        base_checkpoint: Base checkpoint file
        dataset: Dataset directory or reader
        rank: Adapter rank, at least 1
        alpha: Adapter scale numerator
        seed: Seed of the adapter initialization and batch order
        train_cfg: Loop and optimizer settings
        out_dir: Output directory
        split: Split to fine-tune on
        sample_ids: Explicit samples to fine-tune on (overrides ``split``)

    Returns:
        Adapter file path, hashes and log

    Raises:
        ConfigError: If the rank is below 1 or the dataset dt differs from
            the checkpoint dt
        CompatibilityError: If the checkpoint carries no dt
    """
    if rank < 1:
        raise ConfigError("adapter rank must be at least 1", key="rank")
    out = Path(out_dir)
    data = dataset if isinstance(dataset, Dataset) else Dataset(dataset)
    configure_torch()

    decoder, metadata, base_sha = load_checkpoint(base_checkpoint)
    base_dt = metadata.get("provenance", {}).get("dt")
    if base_dt is None:
        raise CompatibilityError(f"{base_checkpoint}: checkpoint carries no dt")
    if not math.isclose(data.manifest.dt, float(base_dt), rel_tol=1e-9):
        raise ConfigError(
            f"dataset dt {data.manifest.dt} differs from the checkpoint dt {base_dt}; regenerate at the checkpoint dt",
            key="dt",
        )
    stats = NormalizationStats.from_document(metadata["normalization"])
    decoder.attach_adapters(rank, alpha, seed)
    decoder.freeze_base()
    adapters = [p for _, p in decoder.adapter_parameters()]
    logger.info(f"Fine-tuning {sum(p.numel() for p in adapters)} adapter weights (rank {rank}) on base {base_sha[:12]}")

    sources = training_sources(data, stats, decoder.cfg.n_max, split, sample_ids)
    trainer = Trainer(decoder, train_cfg, seed, parameters=adapters, clip=stats.clip)
    log = trainer.fit(sources)

    path = out / ADAPTER_NAME
    provenance = {
        "seed": seed,
        "steps": len(log.entries),
        "training": train_cfg.to_document(),
        "samples": [source.sample_id for source in sources],
        "final_loss": log.final_loss,
    }
    sha = save_adapters(decoder, path, base_sha, provenance)
    log.write_csv(out / "finetune_log.csv")
    kvtree.write_document(out / "finetune_log.json", log.to_document())
    logger.info(f"Saved adapters {path} (sha256 {sha[:12]})")
    return FinetuneResult(adapters=path, sha256=sha, base_sha256=base_sha, log=log)
