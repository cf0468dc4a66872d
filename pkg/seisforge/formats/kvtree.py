"""
Key-value tree text documents.

Every persisted document in seisforge (configs, manifests, model documents,
checkpoint metadata, reports) is a JSON object written canonically: keys
sorted, two-space indent, LF line endings and a trailing newline. Equal
values always produce equal bytes.
"""

import enum
import json
import math
from pathlib import Path
from typing import Any, Dict, Iterable, Mapping, Optional, Union

import numpy as np

from seisforge.errors import ConfigError, DataError, ParseError

Document = Dict[str, Any]
PathLike = Union[str, Path]


def to_plain(value: Any) -> Any:
    """
    Convert numpy scalars/arrays, enums, tuples and paths to JSON builtins.

    Args:
        value: Arbitrary nested value

    Returns:
        Value made of dict/list/str/int/float/bool/None
    """
    if isinstance(value, enum.Enum):
        return to_plain(value.value)
    if isinstance(value, Mapping):
        return {str(key): to_plain(item) for key, item in value.items()}
    if isinstance(value, (list, tuple)):
        return [to_plain(item) for item in value]
    if isinstance(value, np.ndarray):
        return [to_plain(item) for item in value.tolist()]
    if isinstance(value, (bool, np.bool_)):
        return bool(value)
    if isinstance(value, (int, np.integer)):
        return int(value)
    if isinstance(value, (float, np.floating)):
        number = float(value)
        if not math.isfinite(number):
            raise DataError(f"non-finite value {number!r} cannot be stored")
        return number
    if isinstance(value, Path):
        return value.as_posix()
    return value


def dumps(document: Mapping[str, Any]) -> str:
    """
    Serialize a document canonically.

    Args:
        document: Mapping to serialize

    Returns:
        Text with a trailing newline
    """
    return json.dumps(
        to_plain(document),
        sort_keys=True,
        indent=2,
        ensure_ascii=False,
        allow_nan=False,
    ) + "\n"


def loads(text: str, source: str = "<document>") -> Document:
    """
    Parse a document.

    Args:
        text: Document text
        source: Name used in error messages

    Returns:
        Parsed mapping

    Raises:
        ParseError: If the text is not a JSON object
    """
    try:
        document = json.loads(text)
    except json.JSONDecodeError as e:
        raise ParseError(f"{source}: {e.msg}", line=e.lineno) from e
    if not isinstance(document, dict):
        raise ParseError(f"{source}: top level must be a key-value object", line=1)
    return document


def read_document(path: PathLike) -> Document:
    """Read a document from disk."""
    path = Path(path)
    if not path.is_file():
        raise ConfigError(f"document not found: {path}")
    return loads(path.read_text(encoding="utf-8"), source=str(path))


def write_document(path: PathLike, document: Mapping[str, Any]) -> Path:
    """Write a document to disk, creating parent directories."""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w", encoding="utf-8", newline="\n") as handle:
        handle.write(dumps(document))
    return path


def check_keys(
    document: Mapping[str, Any],
    allowed: Iterable[str],
    path: str = "",
) -> None:
    """
    Reject unknown keys.

    Args:
        document: Mapping to check
        allowed: Permitted keys
        path: Dotted prefix for error messages

    Raises:
        ConfigError: Naming the first unknown key
    """
    allowed_set = set(allowed)
    for key in sorted(document):
        if key not in allowed_set:
            dotted = f"{path}.{key}" if path else key
            raise ConfigError(f"unknown key '{dotted}'", key=dotted)


def require(document: Mapping[str, Any], key: str, path: str = "") -> Any:
    """Get a required key or raise a ConfigError naming it."""
    if key not in document:
        dotted = f"{path}.{key}" if path else key
        raise ConfigError(f"missing key '{dotted}'", key=dotted)
    return document[key]


def deep_merge(base: Mapping[str, Any], override: Optional[Mapping[str, Any]]) -> Document:
    """
    Merge two trees; mappings merge recursively, everything else is replaced.

    Args:
        base: Default tree
        override: Values taking precedence

    Returns:
        New merged tree
    """
    merged: Document = {key: value for key, value in base.items()}
    for key, value in (override or {}).items():
        if isinstance(value, Mapping) and isinstance(merged.get(key), Mapping):
            merged[key] = deep_merge(merged[key], value)
        else:
            merged[key] = value
    return merged
