"""
Run configuration of the command-line interface.

Each command starts from a default tree, deep-merges the ``--config``
document over it, then applies explicit flags and ``--set key.path=value``
overrides. The resolved tree is written next to the command's outputs.
"""

import json
import logging
from dataclasses import dataclass
from pathlib import Path
from typing import Any, Dict, Iterable, Mapping, Optional

from seisforge.errors import ConfigError
from seisforge.formats import kvtree

# Logger
logger = logging.getLogger("seisforge.cli.config")

RESOLVED_NAME = "resolved_config.json"


def _defaults() -> Dict[str, Dict[str, Any]]:
    return {
        "gen": {
            "seed": 0,
            "out": "dataset",
            "workers": None,
            "generation": {},
        },
        "simulate": {
            "seed": 0,
            "out": "simulation",
            "building": None,
            "motion": None,
            "direction": "x",
            "damping_ratio": 0.05,
            "integrator": "average_acceleration",
            "dt": None,
            "resample": False,
            "sdr": False,
            "floors": "top",
            "plot": False,
        },
        "identify": {
            "seed": 0,
            "out": "identification",
            "model": None,
            "motion": None,
            "reference": None,
            "method": "gauss_newton",
            "budget": 30,
            "bounds_factor": 10.0,
            "target_period": None,
            "period_tolerance": 0.01,
            "workers": None,
        },
        "train": {
            "seed": 0,
            "out": "run",
            "dataset": None,
            "model": {},
            "training": {},
        },
        "finetune": {
            "seed": 0,
            "out": "finetune",
            "checkpoint": None,
            "dataset": None,
            "rank": 4,
            "alpha": 8.0,
            "split": "train",
            "samples": None,
            "training": {"steps": 200, "learning_rate": 1e-3},
        },
        "predict": {
            "seed": 0,
            "out": "prediction",
            "checkpoint": None,
            "adapter": None,
            "model": None,
            "motion": None,
            "direction": "x",
            "resample": False,
            "reference": None,
            "floors": "top",
            "plot": False,
        },
        "evaluate": {
            "seed": 0,
            "out": "evaluation",
            "checkpoint": None,
            "adapter": None,
            "dataset": None,
            "split": "test",
            "worst_k": 3,
            "limit": None,
            "plot": True,
            "workers": None,
        },
    }


COMMANDS = tuple(_defaults())


def parse_override(text: str) -> Dict[str, Any]:
    """
    Parse a ``key.path=value`` override into a nested tree.

    The value is read as a JSON literal, falling back to a plain string.
    """
    if "=" not in text:
        raise ConfigError(f"override '{text}' must look like key.path=value")
    key, raw = text.split("=", 1)
    parts = [part for part in key.strip().split(".") if part]
    if not parts:
        raise ConfigError(f"override '{text}' has an empty key")
    try:
        value: Any = json.loads(raw)
    except json.JSONDecodeError:
        value = raw
    tree: Dict[str, Any] = {parts[-1]: value}
    for part in reversed(parts[:-1]):
        tree = {part: tree}
    return tree


@dataclass
class RunConfig:
    """
    Resolved parameter tree of one command.

    Attributes:
        command: Command name
        tree: Resolved parameters
    """

    command: str
    tree: Dict[str, Any]

    @classmethod
    def resolve(
        cls,
        command: str,
        config_path: Optional[str] = None,
        flags: Optional[Mapping[str, Any]] = None,
        overrides: Iterable[str] = (),
    ) -> "RunConfig":
        """
        Resolve a command's parameters.

        Args:
            command: Command name
            config_path: Configuration document
            flags: Explicit command-line values (``None`` means unset)
            overrides: ``key.path=value`` strings, applied last

        Returns:
            Resolved configuration

        Raises:
            ConfigError: On unknown top-level keys or unreadable documents
        """
        if command not in COMMANDS:
            raise ConfigError(f"unknown command '{command}'")
        defaults = _defaults()[command]
        tree = dict(defaults)
        layers = []
        if config_path is not None:
            document = kvtree.read_document(config_path)
            section = document.get(command)
            if not isinstance(section, dict):
                section = {k: v for k, v in document.items() if k != "command"}
            layers.append(section)
        layers.append({k: v for k, v in (flags or {}).items() if v is not None})
        layers.extend(parse_override(text) for text in overrides)
        for layer in layers:
            kvtree.check_keys(layer, defaults.keys())
            tree = kvtree.deep_merge(tree, layer)
        return cls(command=command, tree=tree)

    def __getitem__(self, key: str) -> Any:
        return self.tree[key]

    def get(self, key: str, default: Any = None) -> Any:
        return self.tree.get(key, default)

    def require(self, key: str) -> Any:
        value = self.tree.get(key)
        if value is None:
            raise ConfigError(f"'{key}' is required for '{self.command}'", key=key)
        return value

    @property
    def seed(self) -> int:
        seed = self.tree.get("seed")
        if not isinstance(seed, int) or seed < 0:
            raise ConfigError("'seed' must be a non-negative integer", key="seed")
        return seed

    @property
    def out_dir(self) -> Path:
        return Path(self.require("out"))

    def write(self) -> Path:
        """Write the resolved tree as ``resolved_config.json`` in the output directory."""
        path = kvtree.write_document(self.out_dir / RESOLVED_NAME, {"command": self.command, **self.tree})
        logger.debug(f"Wrote {path}")
        return path
