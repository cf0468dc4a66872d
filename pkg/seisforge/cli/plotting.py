"""
Static SVG time-history figures.
"""

import logging
from dataclasses import dataclass
from pathlib import Path
from typing import List, Optional, Sequence, Union

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt  # noqa: E402
import numpy as np  # noqa: E402

from seisforge.errors import ConfigError  # noqa: E402

# Logger
logger = logging.getLogger("seisforge.cli.plotting")

# Fixed salt so identical figures produce identical SVG bytes
matplotlib.rcParams["svg.hashsalt"] = "seisforge"


@dataclass
class Panel:
    """
    One axes of a figure.

    ``reference`` is drawn as a solid line and ``predicted`` dashed on top.
    """

    title: str
    ylabel: str
    time: np.ndarray
    reference: Optional[np.ndarray] = None
    predicted: Optional[np.ndarray] = None
    reference_label: str = "oracle"
    predicted_label: str = "predicted"


def parse_floors(spec: str, n_stories: int) -> List[int]:
    """
    Resolve a floor list such as ``mid,top`` or ``1,3`` to 1-based floors.

    ``mid`` is ``max(1, n // 2)`` and ``top`` is ``n``.
    """
    floors: List[int] = []
    for item in str(spec).split(","):
        item = item.strip().lower()
        if not item:
            continue
        if item == "top":
            floor = n_stories
        elif item == "mid":
            floor = max(1, n_stories // 2)
        elif item.isdigit():
            floor = int(item)
        else:
            raise ConfigError(f"unknown floor '{item}'", key="floors")
        if not 1 <= floor <= n_stories:
            raise ConfigError(f"floor {floor} outside 1..{n_stories}", key="floors")
        if floor not in floors:
            floors.append(floor)
    if not floors:
        raise ConfigError("no floors requested", key="floors")
    return floors


def save_figure(path: Union[str, Path], panels: Sequence[Panel], columns: int = 1) -> Path:
    """
    Draw panels on a grid and write an SVG.

    Args:
        path: Destination ``.svg`` file
        panels: Panels in row-major order
        columns: Grid columns

    Returns:
        Path written
    """
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    rows = -(-len(panels) // columns)
    fig, axes = plt.subplots(rows, columns, figsize=(6.0 * columns, 2.4 * rows), sharex=True, squeeze=False)
    for ax, panel in zip(axes.flat, panels):
        if panel.reference is not None:
            ax.plot(panel.time, panel.reference, color="k", linewidth=0.8, label=panel.reference_label)
        if panel.predicted is not None:
            ax.plot(panel.time, panel.predicted, color="tab:red", linewidth=0.8, linestyle="--", label=panel.predicted_label)
        ax.set_title(panel.title, fontsize="small")
        ax.set_ylabel(panel.ylabel)
        ax.grid(True, linewidth=0.3)
        if panel.reference is not None and panel.predicted is not None:
            ax.legend(fontsize="x-small", loc="upper right")
    for ax in list(axes.flat)[len(panels):]:
        ax.set_visible(False)
    for ax in axes[-1]:
        ax.set_xlabel("time (s)")
    fig.tight_layout()
    fig.savefig(path, format="svg", metadata={"Date": None})
    plt.close(fig)
    logger.debug(f"Wrote figure {path}")
    return path
