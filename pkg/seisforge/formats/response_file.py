"""
``SFRH`` response blocks and CSV export.

Block layout: magic ``SFRH``, version (u16), n_stories (u32), n_steps (u32),
dt (f64), then u, v and a as little-endian 32-bit floats in story-major
order.
"""

import csv
import struct
from pathlib import Path
from typing import List, Sequence, Tuple, Union

import numpy as np

from seisforge.errors import DataError
from seisforge.formats.base import BlockCodec
from seisforge.formats.utils import F32_LE, pack_f32, unpack_f32

ResponseArrays = Tuple[float, np.ndarray, np.ndarray, np.ndarray]


class ResponseBlockCodec(BlockCodec):
    """Codec for one response history block."""

    MAGIC = b"SFRH"
    VERSION = 1
    _DIMENSIONS = struct.Struct("<IId")

    @classmethod
    def encode(cls, dt: float, u: np.ndarray, v: np.ndarray, a: np.ndarray) -> bytes:  # type: ignore[override]
        """
        Serialize a response history.

        Args:
            dt: Time step in seconds
            u: Displacements, shape (n_stories, n_steps)
            v: Velocities, same shape
            a: Total accelerations, same shape

        Returns:
            Block bytes
        """
        u = np.asarray(u)
        if u.ndim != 2 or np.shape(v) != u.shape or np.shape(a) != u.shape:
            raise DataError("u, v and a must share one (n_stories, n_steps) shape")
        n_stories, n_steps = u.shape
        parts = [
            cls.pack_preamble(),
            cls._DIMENSIONS.pack(n_stories, n_steps, float(dt)),
            pack_f32(u),
            pack_f32(v),
            pack_f32(a),
        ]
        return b"".join(parts)

    @classmethod
    def decode(cls, data: bytes, offset: int = 0) -> Tuple[ResponseArrays, int]:
        """
        Deserialize a response history.

        Args:
            data: Buffer
            offset: Offset of the block

        Returns:
            Tuple of ((dt, u, v, a), offset past the block)
        """
        offset = cls.check_preamble(data, offset)
        if len(data) - offset < cls._DIMENSIONS.size:
            raise DataError("SFRH block truncated inside its dimensions")
        n_stories, n_steps, dt = cls._DIMENSIONS.unpack_from(data, offset)
        offset += cls._DIMENSIONS.size
        shape = (n_stories, n_steps)
        stride = n_stories * n_steps * F32_LE.itemsize
        arrays = []
        for _ in range(3):
            arrays.append(unpack_f32(data, offset, shape))
            offset += stride
        return (dt, arrays[0], arrays[1], arrays[2]), offset

    @classmethod
    def block_size(cls, n_stories: int, n_steps: int) -> int:
        """Get the encoded size of a block."""
        return (
            cls._PREAMBLE.size
            + cls._DIMENSIONS.size
            + 3 * n_stories * n_steps * F32_LE.itemsize
        )


def write_response_csv(
    path: Union[str, Path],
    dt: float,
    values: np.ndarray,
    label: str = "story",
) -> Path:
    """
    Export one quantity as CSV: a time column then one column per story.

    Args:
        path: Destination file
        dt: Time step in seconds
        values: Array of shape (n_stories, n_steps)
        label: Column prefix

    Returns:
        Path written
    """
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    # + 0.0 folds negative zeros so a quiet history prints as plain zeros
    values = np.asarray(values, dtype=np.float64) + 0.0
    n_stories, n_steps = values.shape
    header: List[str] = ["time_s"] + [f"{label}_{i + 1}" for i in range(n_stories)]
    with open(path, "w", encoding="utf-8", newline="") as handle:
        writer = csv.writer(handle, lineterminator="\n")
        writer.writerow(header)
        for step in range(n_steps):
            row: Sequence[str] = [f"{step * dt:.6f}"] + [
                f"{values[story, step]:.9g}" for story in range(n_stories)
            ]
            writer.writerow(row)
    return path
