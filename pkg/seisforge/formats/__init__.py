"""
File formats for seisforge.

This package contains the key-value tree documents, the ground-motion record
text format, ``SFRH`` response blocks with CSV export, and the ``SGPT``
checkpoint container.
"""

from seisforge.formats import kvtree
from seisforge.formats.base import BlockCodec
from seisforge.formats.checkpoint import CheckpointCodec, load_container, save_container
from seisforge.formats.records import (
    RecordDocument,
    format_record_text,
    parse_record_text,
    read_record,
    write_record_file,
)
from seisforge.formats.response_file import ResponseBlockCodec, write_response_csv
from seisforge.formats.utils import format_decimal, sha256_hex

__all__ = [
    "kvtree",
    "BlockCodec",
    "CheckpointCodec",
    "load_container",
    "save_container",
    "RecordDocument",
    "format_record_text",
    "parse_record_text",
    "read_record",
    "write_record_file",
    "ResponseBlockCodec",
    "write_response_csv",
    "format_decimal",
    "sha256_hex",
]
