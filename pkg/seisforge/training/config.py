"""
Configuration of dataset generation, training and fine-tuning.
"""

from dataclasses import asdict, dataclass, field, fields
from typing import Any, Dict, Optional, Tuple

from seisforge.errors import ConfigError
from seisforge.formats import kvtree
from seisforge.physics.ground_motion import IntensityBanding, IntensityClass
from seisforge.physics.structure import Direction, StructureType

# Share of records per intensity class in the reference dataset
DEFAULT_INTENSITY_MIX = {"I6": 0.481, "I7": 0.4177, "I8": 0.0886, "I9": 0.0127}


def _pair(value: Any, name: str) -> Tuple[float, float]:
    try:
        lo, hi = (float(v) for v in value)
    except (TypeError, ValueError) as e:
        raise ConfigError(f"'{name}' must be a [lo, hi] pair", key=name) from e
    if lo > hi:
        raise ConfigError(f"'{name}' must satisfy lo <= hi", key=name)
    return lo, hi


@dataclass(frozen=True)
class OracleOptions:
    """
    How the detailed (oracle) model departs from the nominal reduction.

    Each story stiffness is multiplied by ``1 + U(-jitter, jitter)``; with
    probability ``bilinear_probability`` the springs become bilinear with
    ``u_yield = yield_drift_ratio * floor_height``.
    """

    stiffness_jitter: float = 0.1
    bilinear_probability: float = 0.5
    yield_drift_ratio: float = 0.005
    post_yield_ratio: float = 0.1

    def __post_init__(self) -> None:
        if not 0.0 <= self.stiffness_jitter < 1.0:
            raise ConfigError("stiffness_jitter must lie in [0, 1)", key="oracle.stiffness_jitter")
        if not 0.0 <= self.bilinear_probability <= 1.0:
            raise ConfigError("bilinear_probability must lie in [0, 1]", key="oracle.bilinear_probability")
        if not self.yield_drift_ratio > 0:
            raise ConfigError("yield_drift_ratio must be positive", key="oracle.yield_drift_ratio")
        if not 0.0 <= self.post_yield_ratio < 1.0:
            raise ConfigError("post_yield_ratio must lie in [0, 1)", key="oracle.post_yield_ratio")


@dataclass(frozen=True)
class GenerationConfig:
    """
    Dataset generation parameters.

    The sample count is ``sum(buildings) * motions_per_building *
    len(directions)``; every motion is applied in each direction.
    """

    buildings: Dict[str, int] = field(default_factory=lambda: {"frame": 8})
    story_ranges: Dict[str, Tuple[int, int]] = field(default_factory=dict)
    motions_per_building: int = 3
    directions: Tuple[str, ...] = ("x", "y")
    duration_s: float = 20.0
    dt: float = 0.02
    intensity_mix: Dict[str, float] = field(default_factory=lambda: dict(DEFAULT_INTENSITY_MIX))
    banding: IntensityBanding = field(default_factory=IntensityBanding)
    f_lo_range: Tuple[float, float] = (0.1, 0.5)
    f_hi_range: Tuple[float, float] = (8.0, 15.0)
    rise_fraction: Tuple[float, float] = (0.05, 0.15)
    plateau_fraction: Tuple[float, float] = (0.2, 0.4)
    damping_ratio: float = 0.05
    oracle: OracleOptions = field(default_factory=OracleOptions)
    train_fraction: float = 0.9
    validation_fraction: float = 0.0
    clip: float = 50.0
    workers: Optional[int] = None

    def __post_init__(self) -> None:
        buildings = {}
        for name, count in self.buildings.items():
            try:
                kind = StructureType(name)
            except ValueError as e:
                raise ConfigError(f"unknown structure type '{name}'", key=f"buildings.{name}") from e
            if not isinstance(count, int) or count < 0:
                raise ConfigError(f"'buildings.{name}' must be a non-negative integer", key=f"buildings.{name}")
            buildings[kind.value] = count
        if not any(buildings.values()):
            raise ConfigError("at least one building is required", key="buildings")
        object.__setattr__(self, "buildings", buildings)

        ranges = {}
        for name, pair in self.story_ranges.items():
            lo, hi = _pair(pair, f"story_ranges.{name}")
            ranges[StructureType(name).value] = (int(lo), int(hi))
        object.__setattr__(self, "story_ranges", ranges)

        if self.motions_per_building < 1:
            raise ConfigError("'motions_per_building' must be at least 1", key="motions_per_building")
        directions = tuple(Direction(d).value for d in self.directions)
        if not directions or len(set(directions)) != len(directions):
            raise ConfigError("'directions' must list distinct directions", key="directions")
        object.__setattr__(self, "directions", directions)
        if not (self.dt > 0 and self.duration_s > self.dt):
            raise ConfigError("need 0 < dt < duration_s", key="dt")

        mix = {IntensityClass(k).value: float(v) for k, v in self.intensity_mix.items()}
        if any(v < 0 for v in mix.values()) or sum(mix.values()) <= 0:
            raise ConfigError("'intensity_mix' weights must be non-negative with a positive sum", key="intensity_mix")
        object.__setattr__(self, "intensity_mix", mix)

        for name in ("f_lo_range", "f_hi_range", "rise_fraction", "plateau_fraction"):
            object.__setattr__(self, name, _pair(getattr(self, name), name))
        if self.f_lo_range[0] <= 0 or self.f_lo_range[1] >= self.f_hi_range[0]:
            raise ConfigError("corner frequency ranges must satisfy 0 < f_lo < f_hi", key="f_lo_range")
        if self.f_hi_range[1] >= 0.5 / self.dt:
            raise ConfigError("'f_hi_range' must stay below the Nyquist frequency", key="f_hi_range")
        if self.rise_fraction[1] + self.plateau_fraction[1] >= 1.0 or self.rise_fraction[0] < 0:
            raise ConfigError("rise and plateau fractions must leave room for the decay", key="plateau_fraction")
        if not 0.0 < self.damping_ratio < 0.2:
            raise ConfigError("'damping_ratio' must lie in (0, 0.2)", key="damping_ratio")
        if not 0.0 < self.train_fraction <= 1.0:
            raise ConfigError("'train_fraction' must lie in (0, 1]", key="train_fraction")
        if not 0.0 <= self.validation_fraction < self.train_fraction:
            raise ConfigError("'validation_fraction' must lie in [0, train_fraction)", key="validation_fraction")
        if not self.clip > 0:
            raise ConfigError("'clip' must be positive", key="clip")

    @property
    def n_buildings(self) -> int:
        return sum(self.buildings.values())

    @property
    def n_samples(self) -> int:
        return self.n_buildings * self.motions_per_building * len(self.directions)

    def to_document(self) -> Dict[str, Any]:
        document = asdict(self)
        document["banding"] = self.banding.to_document()
        document["directions"] = list(self.directions)
        document["story_ranges"] = {k: list(v) for k, v in self.story_ranges.items()}
        return document

    @classmethod
    def from_document(cls, document: Dict[str, Any], path: str = "generation") -> "GenerationConfig":
        kvtree.check_keys(document, [f.name for f in fields(cls)], path)
        values = dict(document)
        if "banding" in values:
            kvtree.check_keys(values["banding"], ("edges_g", "i9_cap_g"), f"{path}.banding")
            values["banding"] = IntensityBanding.from_document(values["banding"])
        if "oracle" in values:
            kvtree.check_keys(values["oracle"], [f.name for f in fields(OracleOptions)], f"{path}.oracle")
            values["oracle"] = OracleOptions(**values["oracle"])
        if "directions" in values:
            values["directions"] = tuple(values["directions"])
        return cls(**values)


@dataclass(frozen=True)
class TrainConfig:
    """
    Optimizer and loop settings.

    The learning rate warms up linearly over ``warmup_fraction`` of the steps
    to ``learning_rate`` and decays on a cosine to ``final_fraction`` of it.
    """

    steps: int = 1000
    batch_size: int = 8
    hop: Optional[int] = None
    learning_rate: float = 3e-4
    warmup_fraction: float = 0.05
    final_fraction: float = 0.1
    betas: Tuple[float, float] = (0.9, 0.999)
    eps: float = 1e-8
    grad_clip: float = 1.0
    loss_weights: Tuple[float, float] = (1.0, 1.0)
    scheduled_sampling: float = 0.0
    checkpoint_every: int = 0
    log_every: int = 50

    def __post_init__(self) -> None:
        if self.steps < 0:
            raise ConfigError("'steps' must be non-negative", key="steps")
        if self.batch_size < 1:
            raise ConfigError("'batch_size' must be positive", key="batch_size")
        if self.hop is not None and self.hop < 1:
            raise ConfigError("'hop' must be positive", key="hop")
        if self.learning_rate < 0:
            raise ConfigError("'learning_rate' must be non-negative", key="learning_rate")
        if not 0.0 <= self.warmup_fraction < 1.0:
            raise ConfigError("'warmup_fraction' must lie in [0, 1)", key="warmup_fraction")
        if not 0.0 <= self.final_fraction <= 1.0:
            raise ConfigError("'final_fraction' must lie in [0, 1]", key="final_fraction")
        if not self.grad_clip > 0:
            raise ConfigError("'grad_clip' must be positive", key="grad_clip")
        if not 0.0 <= self.scheduled_sampling <= 1.0:
            raise ConfigError("'scheduled_sampling' must lie in [0, 1]", key="scheduled_sampling")
        if len(self.loss_weights) != 2 or min(self.loss_weights) < 0:
            raise ConfigError("'loss_weights' needs two non-negative weights", key="loss_weights")
        object.__setattr__(self, "betas", tuple(float(b) for b in self.betas))
        object.__setattr__(self, "loss_weights", tuple(float(w) for w in self.loss_weights))

    def to_document(self) -> Dict[str, Any]:
        document = asdict(self)
        document["betas"] = list(self.betas)
        document["loss_weights"] = list(self.loss_weights)
        return document

    @classmethod
    def from_document(cls, document: Dict[str, Any], path: str = "training") -> "TrainConfig":
        kvtree.check_keys(document, [f.name for f in fields(cls)], path)
        return cls(**document)
