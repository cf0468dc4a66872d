"""
Training pipeline for seisforge.

This package contains dataset generation and access, teacher-forced
windowing, the loss and evaluation metrics, the trainer, free-running
rollout prediction, and low-rank adapter fine-tuning.
"""

from seisforge.training.config import GenerationConfig, OracleOptions, TrainConfig
from seisforge.training.normalization import NormalizationStats, story_vectors
from seisforge.training.dataset import (
    Dataset,
    DatasetManifest,
    SampleRecord,
    Split,
    TrainingSample,
    allocate_counts,
    build_dataset,
    split_counts,
)
from seisforge.training.windows import SampleChannels, Window, collate, make_windows, window_starts
from seisforge.training.metrics import EvalReport, QuantityMetrics, build_report, compute_metrics, loss
from seisforge.training.trainer import Trainer, TrainingLog, TrainResult, train
from seisforge.training.rollout import ResponsePredictor, evaluate, predict_rollout
from seisforge.training.finetune import FinetuneResult, finetune_lora

__all__ = [
    "GenerationConfig",
    "OracleOptions",
    "TrainConfig",
    "NormalizationStats",
    "story_vectors",
    "Dataset",
    "DatasetManifest",
    "SampleRecord",
    "Split",
    "TrainingSample",
    "allocate_counts",
    "build_dataset",
    "split_counts",
    "SampleChannels",
    "Window",
    "collate",
    "make_windows",
    "window_starts",
    "EvalReport",
    "QuantityMetrics",
    "build_report",
    "compute_metrics",
    "loss",
    "Trainer",
    "TrainingLog",
    "TrainResult",
    "train",
    "ResponsePredictor",
    "evaluate",
    "predict_rollout",
    "FinetuneResult",
    "finetune_lora",
]
