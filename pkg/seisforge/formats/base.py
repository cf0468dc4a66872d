"""
Base class for versioned binary block codecs.
"""

import abc
import struct
from typing import Any, Tuple

from seisforge.errors import CompatibilityError, DataError


class BlockCodec(abc.ABC):
    """
    Base class for binary formats that start with a magic tag and a version.

    Subclasses declare ``MAGIC`` (4 bytes) and ``VERSION`` and implement
    ``encode``/``decode``; the header check is shared.
    """

    MAGIC: bytes = b""
    VERSION: int = 1
    _PREAMBLE = struct.Struct("<4sH")

    @classmethod
    def pack_preamble(cls) -> bytes:
        """Get the magic tag and version as bytes."""
        return cls._PREAMBLE.pack(cls.MAGIC, cls.VERSION)

    @classmethod
    def check_preamble(cls, data: bytes, offset: int = 0) -> int:
        """
        Validate the magic tag and version.

        Args:
            data: Buffer
            offset: Offset of the block

        Returns:
            Offset just past the preamble

        Raises:
            CompatibilityError: On wrong magic or unsupported version
        """
        if len(data) - offset < cls._PREAMBLE.size:
            raise DataError(f"{cls.MAGIC!r} block truncated before its header")
        magic, version = cls._PREAMBLE.unpack_from(data, offset)
        if magic != cls.MAGIC:
            raise CompatibilityError(f"expected {cls.MAGIC!r} block, found {magic!r}")
        if version != cls.VERSION:
            raise CompatibilityError(
                f"{cls.MAGIC.decode()} format version {version} is not supported "
                f"(expected {cls.VERSION})"
            )
        return offset + cls._PREAMBLE.size

    @classmethod
    @abc.abstractmethod
    def encode(cls, *args: Any, **kwargs: Any) -> bytes:
        """Serialize a value to bytes."""
        pass

    @classmethod
    @abc.abstractmethod
    def decode(cls, data: bytes, offset: int = 0) -> Tuple[Any, int]:
        """
        Deserialize a value.

        Args:
            data: Buffer
            offset: Offset of the block

        Returns:
            Tuple of (value, offset just past the block)
        """
        pass
