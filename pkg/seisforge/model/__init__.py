"""
Seismic response decoder for seisforge.

This package contains the decoder configuration, its layers and attention
blocks, low-rank adapters, forward/backward entry points and checkpoint I/O.
"""

from seisforge.model.config import QUANTITIES, SrfdConfig
from seisforge.model.layers import RMSNorm, SwiGLU, gelu, rms_norm, rope, rope_angles, silu
from seisforge.model.lora import LoRALinear, lora_apply
from seisforge.model.attention import GQAttention, PhysicsAttention, causal_mask
from seisforge.model.srfd import (
    ForwardTrace,
    SeismicResponseDecoder,
    SrfdGradients,
    StepInputs,
    channel_mask,
    load_adapters,
    load_checkpoint,
    save_adapters,
    save_checkpoint,
    srfd_backward,
    srfd_forward,
)

__all__ = [
    "QUANTITIES",
    "SrfdConfig",
    "RMSNorm",
    "SwiGLU",
    "gelu",
    "rms_norm",
    "rope",
    "rope_angles",
    "silu",
    "LoRALinear",
    "lora_apply",
    "GQAttention",
    "PhysicsAttention",
    "causal_mask",
    "ForwardTrace",
    "SeismicResponseDecoder",
    "SrfdGradients",
    "StepInputs",
    "channel_mask",
    "load_adapters",
    "load_checkpoint",
    "save_adapters",
    "save_checkpoint",
    "srfd_backward",
    "srfd_forward",
]
