"""
Deterministic random number generation.

All numpy randomness in seisforge comes from the counter-based Philox
generator; streams for individual items derive from the run seed plus a
stream key, so results do not depend on processing order.
"""

import hashlib
from typing import Union

import numpy as np
import torch

StreamKey = Union[int, str]


def _stream_word(key: StreamKey) -> int:
    if isinstance(key, int):
        if key < 0:
            raise ValueError("stream keys must be non-negative")
        return key
    # Stable across runs and platforms (unlike hash())
    digest = hashlib.sha256(key.encode("utf-8")).digest()
    return int.from_bytes(digest[:8], "little")


def make_rng(seed: int, *stream: StreamKey) -> np.random.Generator:
    """
    Create a Philox generator for a seed and an optional stream key.

    Args:
        seed: Run seed (unsigned)
        *stream: Keys identifying an independent sub-stream

    Returns:
        Numpy generator
    """
    if seed < 0:
        raise ValueError("seed must be non-negative")
    entropy = [seed] + [_stream_word(key) for key in stream]
    return np.random.Generator(np.random.Philox(np.random.SeedSequence(entropy)))


def make_torch_generator(seed: int, *stream: StreamKey) -> torch.Generator:
    """
    Create a seeded CPU torch generator derived from the same seed scheme.

    Args:
        seed: Run seed (unsigned)
        *stream: Keys identifying an independent sub-stream

    Returns:
        Torch generator
    """
    derived = int(make_rng(seed, *stream).integers(0, 2**63 - 1))
    generator = torch.Generator(device="cpu")
    generator.manual_seed(derived)
    return generator
