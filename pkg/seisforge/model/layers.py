"""
Building blocks: RMS normalization, rotary embeddings and the SwiGLU
feed-forward network.
"""

from typing import Optional

import torch
import torch.nn.functional as F
from torch import nn

from seisforge.errors import ConfigError

RMS_EPS = 1e-6


def rms_norm(x: torch.Tensor, gain: torch.Tensor, eps: float = RMS_EPS) -> torch.Tensor:
    """
    Scale ``x`` by the reciprocal of its root mean square over the last axis.

    The mean of squares is accumulated in float64.

    Args:
        x: Input of shape (..., d)
        gain: Per-channel gain of shape (d,)
        eps: Regularizer inside the square root

    Returns:
        ``gain * x / sqrt(eps + mean(x^2))``
    """
    mean_square = x.to(torch.float64).pow(2).mean(dim=-1, keepdim=True)
    scale = torch.rsqrt(mean_square + eps).to(x.dtype)
    return gain * (x * scale)


class RMSNorm(nn.Module):
    """RMS normalization with a learned gain initialized to ones."""

    def __init__(self, dim: int, eps: float = RMS_EPS):
        super().__init__()
        self.eps = eps
        self.weight = nn.Parameter(torch.ones(dim))

    def forward(self, x: torch.Tensor) -> torch.Tensor:
        return rms_norm(x, self.weight, self.eps)


def rope_angles(
    positions: torch.Tensor,
    d_head: int,
    base: float = 10000.0,
    dtype: Optional[torch.dtype] = None,
) -> torch.Tensor:
    """
    Rotation angles ``theta_i * pos`` with ``theta_i = base^(-2i/d_head)``.

    Args:
        positions: Positions of shape (W,)
        d_head: Head width (even)
        base: Frequency base
        dtype: Output dtype

    Returns:
        Angles of shape (W, d_head / 2)
    """
    if d_head % 2:
        raise ConfigError(f"rotary embeddings need an even head width, got {d_head}", key="d_head")
    exponents = torch.arange(0, d_head, 2, dtype=torch.float64) / d_head
    theta = base ** (-exponents)
    angles = positions.to(torch.float64)[:, None] * theta[None, :]
    return angles.to(dtype or torch.get_default_dtype())


def rope(
    x: torch.Tensor,
    positions: torch.Tensor,
    base: float = 10000.0,
) -> torch.Tensor:
    """
    Rotate consecutive channel pairs ``(x_2i, x_2i+1)`` by ``theta_i * pos``.

    Args:
        x: Queries or keys of shape (..., W, d_head)
        positions: Positions of shape (W,)
        base: Frequency base

    Returns:
        Rotated tensor of the same shape
    """
    d_head = x.shape[-1]
    angles = rope_angles(positions, d_head, base, dtype=x.dtype)
    cos, sin = angles.cos(), angles.sin()
    pairs = x.reshape(*x.shape[:-1], d_head // 2, 2)
    even, odd = pairs[..., 0], pairs[..., 1]
    rotated = torch.stack((even * cos - odd * sin, even * sin + odd * cos), dim=-1)
    return rotated.reshape(x.shape)


def silu(z: torch.Tensor) -> torch.Tensor:
    """``z * sigmoid(z)``."""
    return z * torch.sigmoid(z)


class SwiGLU(nn.Module):
    """
    Gated feed-forward block ``down(silu(gate(x)) * up(x))``.

    Args:
        d_model: Model width
        hidden: Hidden width
    """

    def __init__(self, d_model: int, hidden: int):
        super().__init__()
        self.gate = nn.Linear(d_model, hidden, bias=False)
        self.up = nn.Linear(d_model, hidden, bias=False)
        self.down = nn.Linear(hidden, d_model, bias=False)

    def forward(self, x: torch.Tensor) -> torch.Tensor:
        return self.down(silu(self.gate(x)) * self.up(x))


def gelu(z: torch.Tensor) -> torch.Tensor:
    """Exact (erf-based) GELU."""
    return F.gelu(z, approximate="none")
