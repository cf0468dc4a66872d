"""
Ground-motion record text format.

Line 1 is a header ``# dt=<seconds> unit=<m/s2|g> id=<string>``; every
following line holds one acceleration value in decimal notation. Files are
UTF-8 with LF line endings. Values in ``g`` are converted to m/s^2.
"""

import logging
import math
import re
from dataclasses import dataclass
from pathlib import Path
from typing import Dict, List, Optional, Union

import numpy as np

from seisforge.errors import ConfigError, DataError, ParseError
from seisforge.formats.utils import format_decimal

# Logger
logger = logging.getLogger("seisforge.formats.records")

STANDARD_GRAVITY = 9.80665
UNITS = {"m/s2": 1.0, "g": STANDARD_GRAVITY}

HEADER_TOKEN_PATTERN = re.compile(r"^([A-Za-z_]+)=(\S+)$")


@dataclass(frozen=True)
class RecordDocument:
    """Parsed content of a record file, values already in m/s^2."""

    dt: float
    unit: str
    record_id: Optional[str]
    values: np.ndarray


def parse_header(line: str) -> Dict[str, str]:
    """
    Parse the header line.

    Args:
        line: First line of the file

    Returns:
        Mapping of header keys to raw values
    """
    if not line.startswith("#"):
        raise ParseError("header must start with '#'", line=1)
    fields: Dict[str, str] = {}
    for token in line[1:].split():
        match = HEADER_TOKEN_PATTERN.match(token)
        if not match:
            raise ParseError(f"malformed header token {token!r}", line=1)
        fields[match.group(1)] = match.group(2)
    return fields


def parse_record_text(text: str, dt_override: Optional[float] = None) -> RecordDocument:
    """
    Parse record text.

    Args:
        text: File content
        dt_override: Time step replacing the header value

    Returns:
        Parsed record

    Raises:
        ParseError: Malformed header or row (with line number)
        DataError: Non-finite value (with row number)
    """
    lines = text.split("\n")
    if lines and lines[-1] == "":
        lines.pop()
    if not lines:
        raise ParseError("empty record file", line=1)

    header = parse_header(lines[0].rstrip("\r"))
    unit = header.get("unit", "m/s2")
    if unit not in UNITS:
        raise ParseError(f"unknown unit {unit!r} (expected one of {sorted(UNITS)})", line=1)

    if dt_override is not None:
        dt = float(dt_override)
    else:
        if "dt" not in header:
            raise ParseError("header is missing dt=<seconds>", line=1)
        try:
            dt = float(header["dt"])
        except ValueError:
            raise ParseError(f"dt value {header['dt']!r} is not a number", line=1)
    if not math.isfinite(dt) or dt <= 0:
        raise DataError(f"dt must be positive and finite, got {dt!r}")

    factor = UNITS[unit]
    values: List[float] = []
    for index, raw in enumerate(lines[1:], start=1):
        line_number = index + 1
        cell = raw.strip()
        if not cell:
            raise ParseError("blank row", line=line_number)
        try:
            value = float(cell)
        except ValueError:
            raise ParseError(f"cannot parse {cell!r} as a number", line=line_number)
        if not math.isfinite(value):
            raise DataError(f"non-finite value {cell!r} on line {line_number}", row=index)
        values.append(value * factor)

    if not values:
        raise ParseError("record has a header but no samples", line=2)

    return RecordDocument(
        dt=dt,
        unit=unit,
        record_id=header.get("id"),
        values=np.asarray(values, dtype=np.float64),
    )


def read_record(path: Union[str, Path], dt_override: Optional[float] = None) -> RecordDocument:
    """Read and parse a record file."""
    path = Path(path)
    if not path.is_file():
        raise ConfigError(f"record file not found: {path}")
    raw = path.read_bytes()
    try:
        text = raw.decode("utf-8")
    except UnicodeDecodeError as e:
        raise ParseError(f"{path}: not valid UTF-8 ({e.reason})", line=None) from e
    document = parse_record_text(text, dt_override=dt_override)
    logger.debug(f"Read {len(document.values)} samples from {path}")
    return document


def format_record_text(dt: float, record_id: str, values: np.ndarray, unit: str = "m/s2") -> str:
    """
    Format a record.

    Args:
        dt: Time step in seconds
        record_id: Record identifier (no whitespace)
        values: Accelerations in m/s^2
        unit: Unit to write the values in

    Returns:
        File content with LF endings and a trailing newline
    """
    if unit not in UNITS:
        raise ConfigError(f"unknown unit {unit!r}")
    if not record_id or any(ch.isspace() for ch in record_id):
        raise ConfigError(f"record id {record_id!r} must be non-empty without whitespace")
    factor = UNITS[unit]
    rows = [format_decimal(value / factor) for value in np.asarray(values, dtype=np.float64)]
    header = f"# dt={format_decimal(dt)} unit={unit} id={record_id}"
    return "\n".join([header] + rows) + "\n"


def write_record_file(
    path: Union[str, Path],
    dt: float,
    record_id: str,
    values: np.ndarray,
    unit: str = "m/s2",
) -> Path:
    """Write a record file, creating parent directories."""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w", encoding="utf-8", newline="\n") as handle:
        handle.write(format_record_text(dt, record_id, values, unit=unit))
    return path
