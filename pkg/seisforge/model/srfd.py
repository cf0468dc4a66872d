"""
Seismic response decoder: a causal decoder-only transformer conditioned on
story masses and stiffnesses.

Per timestep the decoder reads the ground acceleration, the response
history and the simplified dynamic response, and predicts story
displacements and accelerations.
"""

import logging
import math
from dataclasses import dataclass, field, replace
from pathlib import Path
from typing import Any, Dict, Iterator, List, Mapping, Optional, Tuple, Union

import numpy as np
import torch
from torch import nn

from seisforge.errors import CompatibilityError, ConfigError, UsageError
from seisforge.formats.checkpoint import load_container, save_container
from seisforge.model.attention import GQAttention, PhysicsAttention
from seisforge.model.config import SrfdConfig
from seisforge.model.layers import RMSNorm, SwiGLU
from seisforge.model.lora import LoRALinear
from seisforge.utils.rng import make_torch_generator

# Logger
logger = logging.getLogger("seisforge.model.srfd")

BASE_KIND = "base"
ADAPTER_KIND = "adapters"

INPUT_FIELDS = ("wave", "history", "sdr", "m_vec", "k_vec")


@dataclass
class StepInputs:
    """
    Decoder inputs for one window, batched or not.

    Shapes (with optional leading batch axis): ``wave`` (W,), ``history``
    and ``sdr`` (W, out_channels), ``m_vec``, ``k_vec`` and ``story_mask``
    (n_max,).
    """

    wave: torch.Tensor
    history: torch.Tensor
    sdr: torch.Tensor
    m_vec: torch.Tensor
    k_vec: torch.Tensor
    story_mask: torch.Tensor

    @property
    def is_batched(self) -> bool:
        return self.wave.dim() == 2

    def batched(self) -> "StepInputs":
        """Get the inputs with a leading batch axis."""
        if self.is_batched:
            return self
        return StepInputs(**{name: value.unsqueeze(0) for name, value in self._items()})

    def to(self, dtype: torch.dtype) -> "StepInputs":
        values = {name: getattr(self, name).to(dtype) for name in INPUT_FIELDS}
        return StepInputs(story_mask=self.story_mask.to(torch.bool), **values)

    def _items(self) -> Iterator[Tuple[str, torch.Tensor]]:
        for name in INPUT_FIELDS + ("story_mask",):
            yield name, getattr(self, name)

    def validate(self, cfg: SrfdConfig) -> None:
        """
        Check shapes against a configuration.

        Raises:
            ConfigError: On any shape mismatch
        """
        inputs = self.batched()
        batch, window = inputs.wave.shape
        expected = {
            "history": (batch, window, cfg.out_channels),
            "sdr": (batch, window, cfg.out_channels),
            "m_vec": (batch, cfg.n_max),
            "k_vec": (batch, cfg.n_max),
            "story_mask": (batch, cfg.n_max),
        }
        for name, shape in expected.items():
            actual = tuple(getattr(inputs, name).shape)
            if actual != shape:
                raise ConfigError(f"input '{name}' has shape {actual}, expected {shape}", key=name)

    @classmethod
    def from_arrays(cls, **arrays: Any) -> "StepInputs":
        """Build inputs from numpy arrays."""
        values = {name: torch.as_tensor(np.asarray(arrays[name])) for name in INPUT_FIELDS}
        mask = torch.as_tensor(np.asarray(arrays["story_mask"], dtype=bool))
        return cls(story_mask=mask, **values)


def channel_mask(story_mask: torch.Tensor, n_quantities: int = 2) -> torch.Tensor:
    """Expand a (..., n_max) story mask to quantity-major output channels."""
    return story_mask.repeat(*([1] * (story_mask.dim() - 1)), n_quantities)


class DecoderBlock(nn.Module):
    """Pre-norm block: attention and feed-forward, each with a residual."""

    def __init__(self, cfg: SrfdConfig, with_physics: bool = False):
        super().__init__()
        self.attn_norm = RMSNorm(cfg.d_model)
        self.attn = GQAttention(cfg)
        self.physics_norm: Optional[RMSNorm] = None
        self.physics: Optional[PhysicsAttention] = None
        if with_physics:
            self.physics_norm = RMSNorm(cfg.d_model)
            self.physics = PhysicsAttention(cfg)
        self.ffn_norm = RMSNorm(cfg.d_model)
        self.ffn = SwiGLU(cfg.d_model, cfg.hidden_width)

    def forward(
        self,
        h: torch.Tensor,
        m_vec: torch.Tensor,
        k_vec: torch.Tensor,
        story_mask: torch.Tensor,
    ) -> torch.Tensor:
        h = h + self.attn(self.attn_norm(h))
        if self.physics is not None and self.physics_norm is not None:
            h = h + self.physics(self.physics_norm(h), m_vec, k_vec, story_mask)
        return h + self.ffn(self.ffn_norm(h))


class SeismicResponseDecoder(nn.Module):
    """
    Physics-conditioned decoder.

    Embedding, one physics-attention conditioning block, ``n_layers``
    decoder blocks, a final RMS norm and a linear output head. Outputs of
    padded stories are zero.

    Args:
        cfg: Decoder configuration
        seed: Seed of the weight initialization
    """

    def __init__(self, cfg: SrfdConfig, seed: int = 0):
        super().__init__()
        self.cfg = cfg
        self.embed = nn.Linear(cfg.input_channels, cfg.d_model)
        self.physics_norm = RMSNorm(cfg.d_model)
        self.physics = PhysicsAttention(cfg)
        self.blocks = nn.ModuleList(
            DecoderBlock(cfg, with_physics=cfg.physics_every_layer) for _ in range(cfg.n_layers)
        )
        self.final_norm = RMSNorm(cfg.d_model)
        self.head = nn.Linear(cfg.d_model, cfg.out_channels)
        self.to(cfg.torch_dtype)
        self.reset_parameters(seed)
        if cfg.lora_rank:
            self.attach_adapters(cfg.lora_rank, cfg.lora_alpha, seed)

    def reset_parameters(self, seed: int) -> None:
        """Re-initialize every base weight from a seeded generator."""
        generator = make_torch_generator(seed, "decoder-init")
        with torch.no_grad():
            for name, param in self.named_parameters():
                leaf = name.rsplit(".", 1)[-1]
                if leaf.startswith("lora_"):
                    continue
                if leaf == "bias":
                    param.zero_()
                elif param.dim() == 1:
                    param.fill_(1.0)
                elif leaf.startswith("u_"):
                    param.normal_(0.0, 1.0 / math.sqrt(self.cfg.n_max), generator=generator)
                else:
                    bound = 1.0 / math.sqrt(param.shape[1])
                    param.uniform_(-bound, bound, generator=generator)

    def forward(self, inputs: StepInputs) -> torch.Tensor:
        """
        Predict normalized responses for one window.

        Args:
            inputs: Window inputs, optionally batched

        Returns:
            Tensor of shape ([B,] W, out_channels)
        """
        inputs.validate(self.cfg)
        unbatched = not inputs.is_batched
        x = inputs.batched().to(self.cfg.torch_dtype)

        features = torch.cat((x.wave.unsqueeze(-1), x.history, x.sdr), dim=-1)
        h = self.embed(features)
        h = h + self.physics(self.physics_norm(h), x.m_vec, x.k_vec, x.story_mask)
        for block in self.blocks:
            h = block(h, x.m_vec, x.k_vec, x.story_mask)
        out = self.head(self.final_norm(h))
        out = out * channel_mask(x.story_mask).to(out.dtype).unsqueeze(1)
        return out.squeeze(0) if unbatched else out

    def adapted_maps(self) -> Iterator[Tuple[str, LoRALinear]]:
        """Every attention map that can carry an adapter."""
        for name, module in self.named_modules():
            if isinstance(module, LoRALinear):
                yield name, module

    @property
    def has_adapters(self) -> bool:
        return any(module.has_adapter for _, module in self.adapted_maps())

    def attach_adapters(self, rank: int, alpha: float, seed: int = 0) -> None:
        """
        Attach a low-rank adapter to every attention map.

        Args:
            rank: Adapter rank
            alpha: Adapter scale numerator
            seed: Seed of the A initialization
        """
        generator = make_torch_generator(seed, "lora-init")
        for _, module in self.adapted_maps():
            module.attach_adapter(rank, alpha, generator)
        self.cfg = replace(self.cfg, lora_rank=rank, lora_alpha=float(alpha))
        logger.debug(f"Attached rank-{rank} adapters to {len(list(self.adapted_maps()))} maps")

    def adapter_parameters(self) -> List[Tuple[str, nn.Parameter]]:
        """Named adapter parameters in declaration order."""
        return [(name, p) for name, p in self.named_parameters() if name.rsplit(".", 1)[-1].startswith("lora_")]

    def base_parameters(self) -> List[Tuple[str, nn.Parameter]]:
        """Named base parameters in declaration order."""
        return [(name, p) for name, p in self.named_parameters() if not name.rsplit(".", 1)[-1].startswith("lora_")]

    def freeze_base(self) -> None:
        """Stop gradients for every base parameter."""
        for _, param in self.base_parameters():
            param.requires_grad_(False)

    def merge_adapters(self) -> None:
        """Fold every adapter into its base weight."""
        for _, module in self.adapted_maps():
            module.merge()
        self.cfg = replace(self.cfg, lora_rank=0)


@dataclass
class ForwardTrace:
    """Graph of one forward pass, consumed by a single backward pass."""

    inputs: Dict[str, torch.Tensor]
    output: torch.Tensor
    consumed: bool = False


@dataclass
class SrfdGradients:
    """Gradients of every trainable weight and every floating-point input."""

    weights: Dict[str, torch.Tensor] = field(default_factory=dict)
    inputs: Dict[str, torch.Tensor] = field(default_factory=dict)


def srfd_forward(model: SeismicResponseDecoder, inputs: StepInputs) -> Tuple[torch.Tensor, ForwardTrace]:
    """
    Run the decoder and keep the graph for a later backward pass.

    Args:
        model: Decoder
        inputs: Window inputs

    Returns:
        Tuple of (detached output, trace)
    """
    dtype = model.cfg.torch_dtype
    leaves = {
        name: getattr(inputs, name).detach().to(dtype).clone().requires_grad_(True) for name in INPUT_FIELDS
    }
    tracked = StepInputs(story_mask=inputs.story_mask, **leaves)
    with torch.enable_grad():
        output = model(tracked)
    return output.detach(), ForwardTrace(inputs=leaves, output=output)


def srfd_backward(
    model: SeismicResponseDecoder,
    trace: Optional[ForwardTrace],
    output_gradient: torch.Tensor,
) -> SrfdGradients:
    """
    Reverse-mode gradients of ``<output, output_gradient>``.

    Args:
        model: Decoder used for the forward pass
        trace: Trace returned by ``srfd_forward``
        output_gradient: Gradient with respect to the output

    Returns:
        Gradients of trainable weights and inputs

    Raises:
        UsageError: If there is no trace or it was already consumed
    """
    if trace is None:
        raise UsageError("backward requires a prior forward pass")
    if trace.consumed:
        raise UsageError("forward trace was already consumed by a backward pass")
    named = [(name, p) for name, p in model.named_parameters() if p.requires_grad]
    targets = [p for _, p in named] + list(trace.inputs.values())
    grads = torch.autograd.grad(
        trace.output,
        targets,
        grad_outputs=output_gradient.to(trace.output.dtype),
        allow_unused=True,
    )
    trace.consumed = True
    resolved = [torch.zeros_like(t) if g is None else g for t, g in zip(targets, grads)]
    n_weights = len(named)
    return SrfdGradients(
        weights={name: g for (name, _), g in zip(named, resolved[:n_weights])},
        inputs=dict(zip(trace.inputs.keys(), resolved[n_weights:])),
    )


def _to_arrays(params: List[Tuple[str, nn.Parameter]]) -> Dict[str, np.ndarray]:
    return {name: p.detach().cpu().numpy() for name, p in params}


def _load_arrays(
    params: List[Tuple[str, nn.Parameter]],
    arrays: Mapping[str, np.ndarray],
    source: Union[str, Path],
) -> None:
    expected = [name for name, _ in params]
    if list(arrays.keys()) != expected:
        missing = sorted(set(expected) - set(arrays))
        unexpected = sorted(set(arrays) - set(expected))
        raise CompatibilityError(
            f"{source}: weight names do not match the model (missing {missing[:3]}, unexpected {unexpected[:3]})"
        )
    with torch.no_grad():
        for name, param in params:
            array = arrays[name]
            if tuple(array.shape) != tuple(param.shape):
                raise CompatibilityError(
                    f"{source}: weight '{name}' has shape {tuple(array.shape)}, expected {tuple(param.shape)}"
                )
            param.copy_(torch.from_numpy(np.asarray(array)).to(param.dtype))


def save_checkpoint(
    model: SeismicResponseDecoder,
    path: Union[str, Path],
    normalization: Mapping[str, Any],
    provenance: Optional[Mapping[str, Any]] = None,
) -> str:
    """
    Write the base weights to an ``SGPT`` checkpoint.

    Args:
        model: Decoder (adapters, if any, are not written)
        path: Destination
        normalization: Frozen normalization statistics
        provenance: Training provenance

    Returns:
        SHA-256 of the checkpoint
    """
    metadata = {
        "kind": BASE_KIND,
        "config": replace(model.cfg, lora_rank=0).to_document(),
        "normalization": dict(normalization),
        "provenance": dict(provenance or {}),
    }
    return save_container(path, metadata, _to_arrays(model.base_parameters()))


def load_checkpoint(path: Union[str, Path]) -> Tuple[SeismicResponseDecoder, Dict[str, Any], str]:
    """
    Load a base checkpoint.

    Args:
        path: Checkpoint file

    Returns:
        Tuple of (decoder, metadata, sha256)

    Raises:
        CompatibilityError: If the file is not a base checkpoint or its
            weights disagree with its configuration
    """
    metadata, arrays, digest = load_container(path)
    if metadata.get("kind") != BASE_KIND:
        raise CompatibilityError(f"{path}: not a base checkpoint (kind={metadata.get('kind')!r})")
    cfg = SrfdConfig.from_document(metadata.get("config", {}), "config")
    model = SeismicResponseDecoder(cfg)
    _load_arrays(model.base_parameters(), arrays, path)
    logger.info(f"Loaded checkpoint {path} (sha256 {digest[:12]})")
    return model, metadata, digest


def save_adapters(
    model: SeismicResponseDecoder,
    path: Union[str, Path],
    base_sha256: str,
    provenance: Optional[Mapping[str, Any]] = None,
) -> str:
    """
    Write the adapter weights, bound to the base checkpoint they were trained on.

    Returns:
        SHA-256 of the adapter file
    """
    if not model.has_adapters:
        raise UsageError("model has no adapters to save")
    metadata = {
        "kind": ADAPTER_KIND,
        "base_sha256": base_sha256,
        "lora_rank": model.cfg.lora_rank,
        "lora_alpha": model.cfg.lora_alpha,
        "provenance": dict(provenance or {}),
    }
    return save_container(path, metadata, _to_arrays(model.adapter_parameters()))


def load_adapters(
    model: SeismicResponseDecoder,
    path: Union[str, Path],
    base_sha256: str,
) -> Dict[str, Any]:
    """
    Attach adapters from a file to a decoder loaded from its base checkpoint.

    Args:
        model: Decoder without adapters
        path: Adapter file
        base_sha256: SHA-256 of the base checkpoint the model came from

    Returns:
        Adapter metadata

    Raises:
        CompatibilityError: If the adapters were trained on another base
    """
    metadata, arrays, _ = load_container(path)
    if metadata.get("kind") != ADAPTER_KIND:
        raise CompatibilityError(f"{path}: not an adapter file (kind={metadata.get('kind')!r})")
    if metadata.get("base_sha256") != base_sha256:
        raise CompatibilityError(
            f"{path}: adapters belong to base {str(metadata.get('base_sha256'))[:12]}, "
            f"not {base_sha256[:12]}"
        )
    model.attach_adapters(int(metadata["lora_rank"]), float(metadata["lora_alpha"]))
    _load_arrays(model.adapter_parameters(), arrays, path)
    return metadata
