"""
Causal attention blocks: physics attention conditioned on story masses and
stiffnesses, and grouped-query self-attention with rotary embeddings.
"""

import math
from typing import Iterator, Optional, Tuple, Union

import torch
from torch import nn

from seisforge.model.config import SrfdConfig
from seisforge.model.layers import gelu, rope
from seisforge.model.lora import LoRALinear

AttentionOutput = Union[torch.Tensor, Tuple[torch.Tensor, Tuple[torch.Tensor, ...]]]


def causal_mask(window: int, device: Optional[torch.device] = None) -> torch.Tensor:
    """Boolean (W, W) mask, true where position j <= i is visible from i."""
    return torch.ones(window, window, dtype=torch.bool, device=device).tril()


def split_heads(x: torch.Tensor, n_heads: int) -> torch.Tensor:
    """(B, W, H * d) -> (B, H, W, d)."""
    batch, window, width = x.shape
    return x.view(batch, window, n_heads, width // n_heads).transpose(1, 2)


def merge_heads(x: torch.Tensor) -> torch.Tensor:
    """(B, H, W, d) -> (B, W, H * d)."""
    batch, heads, window, width = x.shape
    return x.transpose(1, 2).reshape(batch, window, heads * width)


def masked_softmax(scores: torch.Tensor, mask: torch.Tensor) -> torch.Tensor:
    """Row softmax with invisible positions set to -inf logits."""
    return torch.softmax(scores.masked_fill(~mask, float("-inf")), dim=-1)


class PhysicsAttention(nn.Module):
    """
    Attention whose scores pass through story-property kernels.

    Story vectors enter as ``B = U diag(s) U^T`` (d_head x d_head, symmetric
    and PSD for non-negative ``s``); each head scores ``gelu(q B k^T /
    sqrt(d_head))``. The mass and stiffness branches share one value map and
    their attention matrices are summed.

    Args:
        cfg: Decoder configuration
    """

    def __init__(self, cfg: SrfdConfig):
        super().__init__()
        self.n_heads = cfg.n_heads
        self.d_head = cfg.d_head
        d = cfg.d_model
        self.q_mass = LoRALinear(d, d)
        self.k_mass = LoRALinear(d, d)
        self.q_stiffness = LoRALinear(d, d)
        self.k_stiffness = LoRALinear(d, d)
        self.value = LoRALinear(d, d)
        self.out = LoRALinear(d, d)
        self.u_mass = nn.Parameter(torch.empty(cfg.d_head, cfg.n_max))
        self.u_stiffness = nn.Parameter(torch.empty(cfg.d_head, cfg.n_max))
        nn.init.normal_(self.u_mass, std=1.0 / math.sqrt(cfg.n_max))
        nn.init.normal_(self.u_stiffness, std=1.0 / math.sqrt(cfg.n_max))

    def adapted_maps(self) -> Iterator[LoRALinear]:
        yield from (self.q_mass, self.k_mass, self.q_stiffness, self.k_stiffness, self.value, self.out)

    @staticmethod
    def kernel(u: torch.Tensor, story: torch.Tensor) -> torch.Tensor:
        """
        Story kernel ``U diag(s) U^T``.

        Args:
            u: Story projection of shape (d_head, n_max)
            story: Masked story vector of shape (B, n_max)

        Returns:
            Kernels of shape (B, d_head, d_head)
        """
        return torch.einsum("ds,bs,es->bde", u, story, u)

    def _branch(
        self,
        x: torch.Tensor,
        q_map: LoRALinear,
        k_map: LoRALinear,
        kernel: torch.Tensor,
        mask: torch.Tensor,
    ) -> torch.Tensor:
        q = split_heads(q_map(x), self.n_heads)
        k = split_heads(k_map(x), self.n_heads)
        scores = q @ kernel[:, None] @ k.transpose(-2, -1) / math.sqrt(self.d_head)
        return masked_softmax(gelu(scores), mask)

    def forward(
        self,
        x: torch.Tensor,
        m_vec: torch.Tensor,
        k_vec: torch.Tensor,
        story_mask: torch.Tensor,
        return_weights: bool = False,
    ) -> AttentionOutput:
        """
        Args:
            x: Hidden states of shape (B, W, d_model)
            m_vec: Normalized story masses, (B, n_max)
            k_vec: Normalized story stiffnesses, (B, n_max)
            story_mask: Valid stories, (B, n_max) bool
            return_weights: Also return (attn_mass, attn_stiffness)

        Returns:
            Output of shape (B, W, d_model), optionally with the attention
            matrices of shape (B, H, W, W)
        """
        valid = story_mask.to(x.dtype)
        mask = causal_mask(x.shape[1], x.device)
        attn_mass = self._branch(x, self.q_mass, self.k_mass, self.kernel(self.u_mass, m_vec * valid), mask)
        attn_stiffness = self._branch(
            x, self.q_stiffness, self.k_stiffness, self.kernel(self.u_stiffness, k_vec * valid), mask
        )
        v = split_heads(self.value(x), self.n_heads)
        out = self.out(merge_heads((attn_mass + attn_stiffness) @ v))
        if return_weights:
            return out, (attn_mass, attn_stiffness)
        return out


class GQAttention(nn.Module):
    """
    Causal grouped-query self-attention with rotary embeddings.

    ``n_heads`` query heads share ``n_kv_groups`` key/value heads, each group
    serving ``n_heads / n_kv_groups`` consecutive query heads.

    Args:
        cfg: Decoder configuration
    """

    def __init__(self, cfg: SrfdConfig):
        super().__init__()
        self.n_heads = cfg.n_heads
        self.n_kv_groups = cfg.n_kv_groups
        self.d_head = cfg.d_head
        self.rope_base = cfg.rope_base
        kv_width = cfg.n_kv_groups * cfg.d_head
        self.query = LoRALinear(cfg.d_model, cfg.d_model)
        self.key = LoRALinear(cfg.d_model, kv_width)
        self.value = LoRALinear(cfg.d_model, kv_width)
        self.out = LoRALinear(cfg.d_model, cfg.d_model)

    def adapted_maps(self) -> Iterator[LoRALinear]:
        yield from (self.query, self.key, self.value, self.out)

    def forward(
        self,
        x: torch.Tensor,
        positions: Optional[torch.Tensor] = None,
        return_weights: bool = False,
    ) -> AttentionOutput:
        """
        Args:
            x: Hidden states of shape (B, W, d_model)
            positions: Token positions (defaults to 0..W-1)
            return_weights: Also return the attention matrix

        Returns:
            Output of shape (B, W, d_model), optionally with the attention
            matrix of shape (B, H, W, W)
        """
        window = x.shape[1]
        if positions is None:
            positions = torch.arange(window, device=x.device)
        q = rope(split_heads(self.query(x), self.n_heads), positions, self.rope_base)
        k = rope(split_heads(self.key(x), self.n_kv_groups), positions, self.rope_base)
        v = split_heads(self.value(x), self.n_kv_groups)
        repeats = self.n_heads // self.n_kv_groups
        if repeats > 1:
            k = k.repeat_interleave(repeats, dim=1)
            v = v.repeat_interleave(repeats, dim=1)

        scores = q @ k.transpose(-2, -1) / math.sqrt(self.d_head)
        attn = masked_softmax(scores, causal_mask(window, x.device))
        out = self.out(merge_heads(attn @ v))
        if return_weights:
            return out, (attn,)
        return out
