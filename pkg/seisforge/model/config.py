"""
Decoder configuration.
"""

from dataclasses import asdict, dataclass, fields
from typing import Any, Dict, Optional

import torch

from seisforge.errors import ConfigError
from seisforge.formats import kvtree

DTYPES = {"float32": torch.float32, "float64": torch.float64}

# Response quantities per story, in channel order
QUANTITIES = ("displacement", "acceleration")


@dataclass(frozen=True)
class SrfdConfig:
    """
    Shape and hyper-parameters of the seismic response decoder.

    Output channels are quantity-major: ``n_max`` displacement channels then
    ``n_max`` acceleration channels.
    """

    d_model: int = 64
    window: int = 64
    n_layers: int = 2
    n_heads: int = 4
    n_kv_groups: int = 2
    ffn_mult: float = 4.0
    ffn_hidden: Optional[int] = None
    n_max: int = 33
    rope_base: float = 10000.0
    lora_rank: int = 0
    lora_alpha: float = 1.0
    physics_every_layer: bool = False
    dtype: str = "float32"

    def __post_init__(self) -> None:
        if self.d_model < 1 or self.n_heads < 1 or self.d_model % self.n_heads:
            raise ConfigError("d_model must be a positive multiple of n_heads", key="n_heads")
        if self.n_kv_groups < 1 or self.n_heads % self.n_kv_groups:
            raise ConfigError("n_kv_groups must divide n_heads", key="n_kv_groups")
        if self.d_head % 2:
            raise ConfigError("rotary embeddings need an even d_head", key="d_model")
        if self.window < 2:
            raise ConfigError("window must be at least 2", key="window")
        if self.n_max < 1:
            raise ConfigError("n_max must be at least 1", key="n_max")
        if self.n_layers < 0:
            raise ConfigError("n_layers must be non-negative", key="n_layers")
        if self.ffn_hidden is not None and self.ffn_hidden < 1:
            raise ConfigError("ffn_hidden must be positive", key="ffn_hidden")
        if self.ffn_hidden is None and self.ffn_mult <= 0:
            raise ConfigError("ffn_mult must be positive", key="ffn_mult")
        if self.lora_rank < 0:
            raise ConfigError("lora_rank must be non-negative", key="lora_rank")
        if self.rope_base <= 0:
            raise ConfigError("rope_base must be positive", key="rope_base")
        if self.dtype not in DTYPES:
            raise ConfigError(f"dtype must be one of {sorted(DTYPES)}", key="dtype")

    @property
    def d_head(self) -> int:
        return self.d_model // self.n_heads

    @property
    def out_channels(self) -> int:
        return len(QUANTITIES) * self.n_max

    @property
    def input_channels(self) -> int:
        """Per-timestep features: wave, history channels, SDR channels."""
        return 1 + 2 * self.out_channels

    @property
    def hidden_width(self) -> int:
        if self.ffn_hidden is not None:
            return self.ffn_hidden
        return max(1, int(round(self.ffn_mult * self.d_model)))

    @property
    def torch_dtype(self) -> torch.dtype:
        return DTYPES[self.dtype]

    def to_document(self) -> Dict[str, Any]:
        return asdict(self)

    @classmethod
    def from_document(cls, document: Dict[str, Any], path: str = "model") -> "SrfdConfig":
        kvtree.check_keys(document, [f.name for f in fields(cls)], path)
        return cls(**document)
