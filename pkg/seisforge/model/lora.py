"""
Low-rank adapters for linear maps.
"""

import logging
import math
from typing import Optional

import torch
from torch import nn

from seisforge.errors import ConfigError

# Logger
logger = logging.getLogger("seisforge.model.lora")


def lora_apply(
    weight: torch.Tensor,
    A: torch.Tensor,
    B: torch.Tensor,
    alpha: float,
    r: int,
) -> torch.Tensor:
    """
    Effective weight ``W + (alpha / r) B A``.

    Args:
        weight: Base weight, shape (d_out, d_in)
        A: Down projection, shape (r, d_in)
        B: Up projection, shape (d_out, r)
        alpha: Adapter scale numerator
        r: Adapter rank

    Returns:
        Effective weight of shape (d_out, d_in)

    Raises:
        ConfigError: If the adapter shapes disagree with the rank or weight
    """
    d_out, d_in = weight.shape
    if r < 1 or A.shape != (r, d_in) or B.shape != (d_out, r):
        raise ConfigError(
            f"adapter shapes A{tuple(A.shape)} B{tuple(B.shape)} do not match rank {r} "
            f"and weight {tuple(weight.shape)}",
            key="lora_rank",
        )
    return weight + (alpha / r) * (B @ A)


class LoRALinear(nn.Module):
    """
    Bias-free linear map with an optional low-rank adapter.

    The adapter computes ``(alpha / r) B (A x)`` and starts with ``B = 0``
    so attaching it leaves the map unchanged.

    Args:
        in_features: Input width
        out_features: Output width
    """

    def __init__(self, in_features: int, out_features: int):
        super().__init__()
        self.in_features = in_features
        self.out_features = out_features
        self.weight = nn.Parameter(torch.empty(out_features, in_features))
        self.lora_A: Optional[nn.Parameter]
        self.lora_B: Optional[nn.Parameter]
        self.register_parameter("lora_A", None)
        self.register_parameter("lora_B", None)
        self.rank = 0
        self.alpha = 1.0
        nn.init.kaiming_uniform_(self.weight, a=math.sqrt(5))

    @property
    def has_adapter(self) -> bool:
        return self.lora_A is not None

    @property
    def scaling(self) -> float:
        return self.alpha / self.rank if self.rank else 0.0

    def attach_adapter(self, rank: int, alpha: float, generator: Optional[torch.Generator] = None) -> None:
        """
        Attach a fresh adapter.

        Args:
            rank: Adapter rank
            alpha: Adapter scale numerator
            generator: Generator for the initialization of A
        """
        if rank < 1:
            raise ConfigError(f"adapter rank must be positive, got {rank}", key="lora_rank")
        if self.has_adapter:
            raise ConfigError("an adapter is already attached", key="lora_rank")
        weight = self.weight
        bound = 1.0 / math.sqrt(self.in_features)
        A = torch.empty(rank, self.in_features, dtype=weight.dtype)
        A.uniform_(-bound, bound, generator=generator)
        self.lora_A = nn.Parameter(A)
        self.lora_B = nn.Parameter(torch.zeros(self.out_features, rank, dtype=weight.dtype))
        self.rank = rank
        self.alpha = float(alpha)

    def merge(self) -> None:
        """Fold the adapter into the base weight and drop it."""
        if not self.has_adapter:
            return
        with torch.no_grad():
            merged = lora_apply(self.weight, self.lora_A, self.lora_B, self.alpha, self.rank)  # type: ignore[arg-type]
            self.weight.copy_(merged)
        self.lora_A = None
        self.lora_B = None
        self.rank = 0

    def forward(self, x: torch.Tensor) -> torch.Tensor:
        out = x @ self.weight.T
        if self.lora_A is not None and self.lora_B is not None:
            out = out + self.scaling * ((x @ self.lora_A.T) @ self.lora_B.T)
        return out

    def extra_repr(self) -> str:
        return f"in_features={self.in_features}, out_features={self.out_features}, rank={self.rank}"
