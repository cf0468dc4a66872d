"""
Low-level helpers shared by the binary and text codecs.
"""

import hashlib
from typing import Tuple

import numpy as np

from seisforge.errors import DataError

# Little-endian 32-bit float, the on-disk dtype of every array block
F32_LE = np.dtype("<f4")


def pack_f32(values: np.ndarray) -> bytes:
    """
    Serialize an array as little-endian 32-bit floats in C order.

    Args:
        values: Array of any float dtype

    Returns:
        Raw bytes
    """
    array = np.ascontiguousarray(values, dtype=F32_LE)
    if not np.all(np.isfinite(array)):
        raise DataError("refusing to serialize non-finite values")
    return array.tobytes(order="C")


def unpack_f32(data: bytes, offset: int, shape: Tuple[int, ...]) -> np.ndarray:
    """
    Read a little-endian 32-bit float array.

    Args:
        data: Buffer
        offset: Byte offset of the first element
        shape: Array shape

    Returns:
        Native-endian float32 array (a copy, writable)
    """
    count = int(np.prod(shape, dtype=np.int64)) if shape else 1
    end = offset + count * F32_LE.itemsize
    if end > len(data):
        raise DataError(
            f"array block truncated: need {end} bytes, buffer has {len(data)}"
        )
    array = np.frombuffer(data, dtype=F32_LE, count=count, offset=offset)
    return array.astype(np.float32).reshape(shape)


def format_decimal(value: float) -> str:
    """
    Format a float in positional decimal notation that round-trips exactly.

    Args:
        value: Finite float

    Returns:
        Shortest positional representation, e.g. ``0.00001`` rather than ``1e-05``
    """
    return np.format_float_positional(float(value), unique=True, trim="0")


def sha256_hex(data: bytes) -> str:
    """Content hash used to tie adapters to their base checkpoint."""
    return hashlib.sha256(data).hexdigest()
