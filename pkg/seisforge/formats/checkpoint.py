"""
``SGPT`` checkpoint container.

Layout: magic ``SGPT``, version (u16), metadata length (u64), metadata
document (key-value tree text, UTF-8), entry count (u32), index table, then
the named arrays as little-endian 32-bit floats in declaration order. Each
index entry holds the name, the shape, the byte offset into the data section
and the byte length; the table is checked against the data section on load.
"""

import logging
import struct
from collections import OrderedDict
from pathlib import Path
from typing import Any, Dict, List, Mapping, Tuple, Union

import numpy as np

from seisforge.errors import ConfigError, DataError
from seisforge.formats import kvtree
from seisforge.formats.base import BlockCodec
from seisforge.formats.utils import F32_LE, pack_f32, sha256_hex, unpack_f32

# Logger
logger = logging.getLogger("seisforge.formats.checkpoint")


class CheckpointCodec(BlockCodec):
    """Codec for checkpoint and adapter files."""

    MAGIC = b"SGPT"
    VERSION = 1
    _U64 = struct.Struct("<Q")
    _U32 = struct.Struct("<I")
    _U16 = struct.Struct("<H")
    _U8 = struct.Struct("<B")

    @classmethod
    def encode(  # type: ignore[override]
        cls,
        metadata: Mapping[str, Any],
        arrays: Mapping[str, np.ndarray],
    ) -> bytes:
        """
        Serialize metadata and named arrays.

        Args:
            metadata: Key-value tree document
            arrays: Ordered mapping of array name to array

        Returns:
            Container bytes
        """
        meta_bytes = kvtree.dumps(metadata).encode("utf-8")
        index: List[bytes] = []
        blobs: List[bytes] = []
        offset = 0
        for name, array in arrays.items():
            blob = pack_f32(np.asarray(array))
            encoded_name = name.encode("utf-8")
            shape = np.shape(array)
            entry = [cls._U16.pack(len(encoded_name)), encoded_name, cls._U8.pack(len(shape))]
            entry.extend(cls._U32.pack(dim) for dim in shape)
            entry.append(cls._U64.pack(offset))
            entry.append(cls._U64.pack(len(blob)))
            index.append(b"".join(entry))
            blobs.append(blob)
            offset += len(blob)

        return b"".join(
            [
                cls.pack_preamble(),
                cls._U64.pack(len(meta_bytes)),
                meta_bytes,
                cls._U32.pack(len(index)),
            ]
            + index
            + blobs
        )

    @classmethod
    def decode(cls, data: bytes, offset: int = 0) -> Tuple[Tuple[Dict[str, Any], "OrderedDict[str, np.ndarray]"], int]:  # type: ignore[override]
        """
        Deserialize a container.

        Args:
            data: Buffer
            offset: Offset of the container

        Returns:
            Tuple of ((metadata, arrays), offset past the container)
        """
        offset = cls.check_preamble(data, offset)
        (meta_len,) = cls._read(cls._U64, data, offset)
        offset += cls._U64.size
        if offset + meta_len > len(data):
            raise DataError("SGPT metadata truncated")
        metadata = kvtree.loads(data[offset:offset + meta_len].decode("utf-8"), "SGPT metadata")
        offset += meta_len

        (count,) = cls._read(cls._U32, data, offset)
        offset += cls._U32.size
        entries = []
        for _ in range(count):
            (name_len,) = cls._read(cls._U16, data, offset)
            offset += cls._U16.size
            name = data[offset:offset + name_len].decode("utf-8")
            offset += name_len
            (ndim,) = cls._read(cls._U8, data, offset)
            offset += cls._U8.size
            shape = []
            for _ in range(ndim):
                (dim,) = cls._read(cls._U32, data, offset)
                shape.append(dim)
                offset += cls._U32.size
            (array_offset,) = cls._read(cls._U64, data, offset)
            offset += cls._U64.size
            (nbytes,) = cls._read(cls._U64, data, offset)
            offset += cls._U64.size
            entries.append((name, tuple(shape), array_offset, nbytes))

        data_start = offset
        expected = 0
        arrays: "OrderedDict[str, np.ndarray]" = OrderedDict()
        for name, shape, array_offset, nbytes in entries:
            count_elems = int(np.prod(shape, dtype=np.int64)) if shape else 1
            if array_offset != expected or nbytes != count_elems * F32_LE.itemsize:
                raise DataError(f"SGPT index entry for {name!r} is inconsistent")
            arrays[name] = unpack_f32(data, data_start + array_offset, shape)
            expected += nbytes
        end = data_start + expected
        if end > len(data):
            raise DataError("SGPT data section truncated")
        return (metadata, arrays), end

    @staticmethod
    def _read(layout: struct.Struct, data: bytes, offset: int) -> Tuple[Any, ...]:
        if offset + layout.size > len(data):
            raise DataError("SGPT index truncated")
        return layout.unpack_from(data, offset)


def save_container(
    path: Union[str, Path],
    metadata: Mapping[str, Any],
    arrays: Mapping[str, np.ndarray],
) -> str:
    """
    Write a container file.

    Args:
        path: Destination
        metadata: Metadata document
        arrays: Named arrays

    Returns:
        SHA-256 hex digest of the written bytes
    """
    payload = CheckpointCodec.encode(metadata, arrays)
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_bytes(payload)
    digest = sha256_hex(payload)
    logger.info(f"Wrote {path} ({len(payload)} bytes, sha256 {digest[:12]})")
    return digest


def load_container(path: Union[str, Path]) -> Tuple[Dict[str, Any], "OrderedDict[str, np.ndarray]", str]:
    """
    Read a container file.

    Args:
        path: Source

    Returns:
        Tuple of (metadata, arrays, sha256 hex digest of the file)
    """
    path = Path(path)
    if not path.is_file():
        raise ConfigError(f"checkpoint not found: {path}")
    payload = path.read_bytes()
    (metadata, arrays), end = CheckpointCodec.decode(payload)
    if end != len(payload):
        raise DataError(f"{path}: {len(payload) - end} trailing bytes after SGPT container")
    return metadata, arrays, sha256_hex(payload)
