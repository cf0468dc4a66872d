"""
Training loss and evaluation metrics.

Metrics are computed in normalized units over real stories and real time
steps only. MRE is ``sum|e| / sum|target|``.
"""

import csv
import logging
import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Dict, List, Optional, Sequence, Union

import numpy as np
import torch

from seisforge.model.config import QUANTITIES

# Logger
logger = logging.getLogger("seisforge.training.metrics")


def loss(
    pred: torch.Tensor,
    target: torch.Tensor,
    story_mask: Optional[torch.Tensor] = None,
    time_mask: Optional[torch.Tensor] = None,
    weights: Optional[Sequence[float]] = None,
    n_quantities: int = len(QUANTITIES),
) -> torch.Tensor:
    """
    Weighted sum of per-quantity masked mean squared errors.

    Args:
        pred: Prediction, ([B,] W, n_quantities * n_max)
        target: Target of the same shape
        story_mask: Real stories, ([B,] n_max)
        time_mask: Real steps, ([B,] W)
        weights: Per-quantity weights (default all 1)
        n_quantities: Number of quantity blocks in the channel axis

    Returns:
        Scalar loss
    """
    if pred.shape != target.shape:
        raise ValueError(f"prediction shape {tuple(pred.shape)} differs from target {tuple(target.shape)}")
    n_max = pred.shape[-1] // n_quantities
    weights = list(weights) if weights is not None else [1.0] * n_quantities
    error = (pred - target.to(pred.dtype)) ** 2

    mask = torch.ones(pred.shape[:-1] + (n_max,), dtype=pred.dtype, device=pred.device)
    if story_mask is not None:
        mask = mask * story_mask.to(pred.dtype).unsqueeze(-2)
    if time_mask is not None:
        mask = mask * time_mask.to(pred.dtype).unsqueeze(-1)
    count = mask.sum().clamp_min(1.0)

    total = pred.new_zeros(())
    for q in range(n_quantities):
        block = error[..., q * n_max : (q + 1) * n_max]
        total = total + weights[q] * (block * mask).sum() / count
    return total


@dataclass(frozen=True)
class QuantityMetrics:
    mse: float
    mae: float
    mre: float
    r: float
    count: int = 0

    def to_document(self) -> Dict[str, Any]:
        return {
            "mse": self.mse,
            "mae": self.mae,
            "mre": self.mre if math.isfinite(self.mre) else None,
            "r": self.r,
            "count": self.count,
        }


def compute_metrics(pred: np.ndarray, target: np.ndarray) -> QuantityMetrics:
    """
    MSE, MAE, MRE and Pearson R over flattened arrays.

    MRE is 0 when both error and target vanish and infinite when only the
    target does. R is 1 for identical constant arrays and 0 for any other
    zero-variance pair.
    """
    p = np.asarray(pred, dtype=np.float64).ravel()
    t = np.asarray(target, dtype=np.float64).ravel()
    if p.shape != t.shape:
        raise ValueError(f"prediction size {p.size} differs from target size {t.size}")
    if p.size == 0:
        return QuantityMetrics(0.0, 0.0, 0.0, 0.0, 0)
    e = p - t
    abs_error = float(np.sum(np.abs(e)))
    abs_target = float(np.sum(np.abs(t)))
    if abs_target > 0:
        mre = abs_error / abs_target
    else:
        mre = 0.0 if abs_error == 0 else math.inf

    dp = p - p.mean()
    dt = t - t.mean()
    denom = math.sqrt(float(np.dot(dp, dp)) * float(np.dot(dt, dt)))
    if denom > 0:
        r = float(np.clip(np.dot(dp, dt) / denom, -1.0, 1.0))
    else:
        r = 1.0 if np.array_equal(p, t) else 0.0
    return QuantityMetrics(
        mse=float(np.mean(e * e)),
        mae=abs_error / p.size,
        mre=mre,
        r=r,
        count=int(p.size),
    )


@dataclass(frozen=True)
class WorstCase:
    sample_id: str
    mse: float


@dataclass
class EvalReport:
    """
    Evaluation of rollout predictions on one split.

    Attributes:
        split: Split name
        n_samples: Number of evaluated samples
        quantities: Overall metrics per quantity
        per_floor: Metrics per quantity per floor (index 0 is floor 1)
        worst_cases: Samples with the highest combined MSE, worst first
    """

    split: str
    n_samples: int
    quantities: Dict[str, QuantityMetrics]
    per_floor: Dict[str, List[QuantityMetrics]] = field(default_factory=dict)
    worst_cases: List[WorstCase] = field(default_factory=list)

    def render_text(self) -> str:
        lines = [f"split: {self.split} ({self.n_samples} samples)", ""]
        lines.append(f"{'quantity':<14}{'MSE':>12}{'MAE':>12}{'MRE':>12}{'R':>10}")
        for name, m in self.quantities.items():
            lines.append(f"{name:<14}{m.mse:>12.4g}{m.mae:>12.4g}{m.mre:>12.4g}{m.r:>10.4f}")
        if self.worst_cases:
            lines.append("")
            lines.append("worst cases:")
            for case in self.worst_cases:
                lines.append(f"  {case.sample_id}  mse={case.mse:.4g}")
        return "\n".join(lines) + "\n"

    def write_csv(self, path: Union[str, Path]) -> Path:
        """Write overall and per-floor metrics, one row per (scope, quantity)."""
        path = Path(path)
        path.parent.mkdir(parents=True, exist_ok=True)
        with open(path, "w", newline="", encoding="utf-8") as f:
            writer = csv.writer(f, lineterminator="\n")
            writer.writerow(["scope", "quantity", "mse", "mae", "mre", "r", "count"])
            rows = [("overall", name, m) for name, m in self.quantities.items()]
            for name, floors in self.per_floor.items():
                rows.extend((f"floor_{i + 1}", name, m) for i, m in enumerate(floors))
            for scope, name, m in rows:
                writer.writerow([scope, name, repr(m.mse), repr(m.mae), repr(m.mre), repr(m.r), m.count])
        return path

    def to_document(self) -> Dict[str, Any]:
        return {
            "split": self.split,
            "n_samples": self.n_samples,
            "quantities": {name: m.to_document() for name, m in self.quantities.items()},
            "per_floor": {name: [m.to_document() for m in floors] for name, floors in self.per_floor.items()},
            "worst_cases": [{"sample_id": c.sample_id, "mse": c.mse} for c in self.worst_cases],
        }


@dataclass
class SamplePrediction:
    """Normalized prediction and target channels of one sample."""

    sample_id: str
    n_stories: int
    pred: np.ndarray
    target: np.ndarray


def _quantity_block(channels: np.ndarray, q: int, n_stories: int, n_max: int) -> np.ndarray:
    return channels[:, q * n_max : q * n_max + n_stories]


def build_report(
    predictions: Sequence[SamplePrediction],
    n_max: int,
    split: str,
    worst_k: int = 3,
) -> EvalReport:
    """
    Aggregate per-sample predictions into a report.

    Args:
        predictions: Per-sample normalized channels, (n_steps, 2 * n_max)
        n_max: Channel capacity per quantity
        split: Split name for the report
        worst_k: Length of the worst-case list

    Returns:
        Evaluation report
    """
    quantities: Dict[str, QuantityMetrics] = {}
    per_floor: Dict[str, List[QuantityMetrics]] = {}
    top_floor = max((p.n_stories for p in predictions), default=0)
    for q, name in enumerate(QUANTITIES):
        pred = [_quantity_block(p.pred, q, p.n_stories, n_max) for p in predictions]
        target = [_quantity_block(p.target, q, p.n_stories, n_max) for p in predictions]
        quantities[name] = compute_metrics(
            np.concatenate([x.ravel() for x in pred]),
            np.concatenate([x.ravel() for x in target]),
        )
        floors = []
        for floor in range(top_floor):
            members = [i for i, p in enumerate(predictions) if p.n_stories > floor]
            floors.append(
                compute_metrics(
                    np.concatenate([pred[i][:, floor] for i in members]),
                    np.concatenate([target[i][:, floor] for i in members]),
                )
            )
        per_floor[name] = floors

    scored = []
    for p in predictions:
        errors = [
            float(np.mean((_quantity_block(p.pred, q, p.n_stories, n_max)
                           - _quantity_block(p.target, q, p.n_stories, n_max)) ** 2))
            for q in range(len(QUANTITIES))
        ]
        scored.append(WorstCase(p.sample_id, sum(errors)))
    scored.sort(key=lambda case: (-case.mse, case.sample_id))
    return EvalReport(
        split=split,
        n_samples=len(predictions),
        quantities=quantities,
        per_floor=per_floor,
        worst_cases=scored[:worst_k],
    )
