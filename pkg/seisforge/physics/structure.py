"""
Parametric RC buildings and their lumped-mass shear-building reduction.

A ``BuildingConfig`` is drawn from the design-parameter ranges, reduced to a
planar ``LumpedMassModel`` per direction, and analysed through the
generalized eigenproblem ``K phi = omega^2 M phi``.
"""

import enum
import logging
import math
from dataclasses import dataclass, field, replace
from typing import Any, Dict, Optional, Sequence, Tuple

import numpy as np
from scipy import linalg

from seisforge.errors import (
    ConfigError,
    DomainError,
    NumericalError,
    RegenerationHandler,
    RegenerationPolicy,
)
from seisforge.formats import kvtree
from seisforge.formats.records import STANDARD_GRAVITY
from seisforge.utils.rng import make_rng

# Logger
logger = logging.getLogger("seisforge.physics.structure")

CONCRETE_DENSITY = 2500.0  # kg/m^3
LIVE_LOAD = 500.0  # Pa
WALL_SHEAR_FACTOR = 5.0 / 6.0
AXIAL_LIMIT = 0.9

FLOOR_HEIGHTS = (3.0, 3.1, 3.2, 3.3)
SLAB_THICKNESSES = (90, 100, 110, 120)
SPAN_COUNTS = (4, 5, 6, 7, 8, 9)
WALL_THICKNESSES = (250, 300, 350)


class StructureType(str, enum.Enum):
    FRAME = "frame"
    SHEAR_FRAME = "shear_frame"
    COMPLEX_SHEAR = "complex_shear"

    @property
    def story_band(self) -> Tuple[int, int]:
        """Admissible story counts, inclusive."""
        return _STORY_BANDS[self]

    @property
    def walls_per_direction(self) -> int:
        return _WALLS_PER_DIRECTION[self]


_STORY_BANDS = {
    StructureType.FRAME: (1, 10),
    StructureType.SHEAR_FRAME: (11, 20),
    StructureType.COMPLEX_SHEAR: (20, 33),
}

# Complex structures carry a wall core in addition to the perimeter walls
_WALLS_PER_DIRECTION = {
    StructureType.FRAME: 0,
    StructureType.SHEAR_FRAME: 2,
    StructureType.COMPLEX_SHEAR: 4,
}


class ConcreteGrade(str, enum.Enum):
    C25 = "C25"
    C30 = "C30"
    C35 = "C35"
    C40 = "C40"
    C45 = "C45"
    C50 = "C50"

    @property
    def fck(self) -> float:
        """Characteristic strength in MPa."""
        return float(self.value[1:])

    @property
    def elastic_modulus(self) -> float:
        """E_c = 4700 sqrt(fck) MPa, returned in Pa."""
        return 4700.0 * math.sqrt(self.fck) * 1e6


SAMPLED_GRADES = (ConcreteGrade.C30, ConcreteGrade.C35, ConcreteGrade.C40, ConcreteGrade.C45)


class Direction(str, enum.Enum):
    X = "x"
    Y = "y"


def _in_range(name: str, value: float, lo: float, hi: float) -> None:
    if not (lo - 1e-12 <= value <= hi + 1e-12):
        raise DomainError(f"{name}={value!r} outside [{lo}, {hi}]", key=name)


@dataclass(frozen=True)
class BuildingConfig:
    """
    Design parameters of one RC building.

    Lengths carry their unit in the field name; member sizes are
    (width, depth) in mm.
    """

    n_stories: int
    floor_height_m: float
    slab_thickness_mm: float
    n_spans_x: int
    n_spans_y: int
    span_length_m: float
    aspect_ratio: float
    column_size_mm: Tuple[float, float]
    beam_size_mm: Tuple[float, float]
    wall_thickness_mm: Optional[float]
    concrete_grade: ConcreteGrade
    rebar_strength_mpa: float
    structure_type: StructureType

    def __post_init__(self) -> None:
        object.__setattr__(self, "concrete_grade", ConcreteGrade(self.concrete_grade))
        object.__setattr__(self, "structure_type", StructureType(self.structure_type))
        object.__setattr__(self, "column_size_mm", tuple(float(v) for v in self.column_size_mm))
        object.__setattr__(self, "beam_size_mm", tuple(float(v) for v in self.beam_size_mm))

        _in_range("n_stories", self.n_stories, 1, 33)
        lo, hi = self.structure_type.story_band
        if not lo <= self.n_stories <= hi:
            raise DomainError(
                f"{self.structure_type.value} buildings have {lo}-{hi} stories, got {self.n_stories}",
                key="n_stories",
            )
        _in_range("floor_height_m", self.floor_height_m, 3.0, 3.6)
        _in_range("slab_thickness_mm", self.slab_thickness_mm, 80, 150)
        _in_range("n_spans_x", self.n_spans_x, 3, 10)
        _in_range("n_spans_y", self.n_spans_y, 3, 10)
        _in_range("span_length_m", self.span_length_m, 5.0, 10.0)
        _in_range("aspect_ratio", self.aspect_ratio, 2.0 / 3.0, 1.0)
        _in_range("rebar_strength_mpa", self.rebar_strength_mpa, 355, 400)
        if len(self.column_size_mm) != 2 or min(self.column_size_mm) <= 0:
            raise DomainError("column_size_mm must be two positive sizes", key="column_size_mm")
        if len(self.beam_size_mm) != 2 or min(self.beam_size_mm) <= 0:
            raise DomainError("beam_size_mm must be two positive sizes", key="beam_size_mm")
        if self.wall_thickness_mm is not None:
            _in_range("wall_thickness_mm", self.wall_thickness_mm, 200, 400)

    @property
    def plan_dimensions(self) -> Tuple[float, float]:
        """Plan size (x, y) in m."""
        return (
            self.n_spans_x * self.span_length_m,
            self.n_spans_y * self.span_length_m * self.aspect_ratio,
        )

    @property
    def plan_area(self) -> float:
        lx, ly = self.plan_dimensions
        return lx * ly

    @property
    def n_columns(self) -> int:
        return (self.n_spans_x + 1) * (self.n_spans_y + 1)

    @property
    def beam_length(self) -> float:
        """Total beam length on one floor, in m."""
        span_y = self.span_length_m * self.aspect_ratio
        return (
            self.n_spans_x * self.span_length_m * (self.n_spans_y + 1)
            + self.n_spans_y * span_y * (self.n_spans_x + 1)
        )

    @property
    def walls_per_direction(self) -> int:
        """Walls parallel to each direction (zero without wall thickness)."""
        if self.wall_thickness_mm is None:
            return 0
        return max(1, self.structure_type.walls_per_direction)

    def wall_length(self, direction: Direction) -> float:
        """Length of one wall parallel to a direction, one span long."""
        if direction is Direction.X:
            return self.span_length_m
        return self.span_length_m * self.aspect_ratio

    def to_document(self) -> Dict[str, Any]:
        return {
            "n_stories": self.n_stories,
            "floor_height_m": self.floor_height_m,
            "slab_thickness_mm": self.slab_thickness_mm,
            "n_spans_x": self.n_spans_x,
            "n_spans_y": self.n_spans_y,
            "span_length_m": self.span_length_m,
            "aspect_ratio": self.aspect_ratio,
            "column_size_mm": list(self.column_size_mm),
            "beam_size_mm": list(self.beam_size_mm),
            "wall_thickness_mm": self.wall_thickness_mm,
            "concrete_grade": self.concrete_grade.value,
            "rebar_strength_mpa": self.rebar_strength_mpa,
            "structure_type": self.structure_type.value,
        }

    @classmethod
    def from_document(cls, document: Dict[str, Any], path: str = "building") -> "BuildingConfig":
        names = [f.name for f in cls.__dataclass_fields__.values()]  # type: ignore[attr-defined]
        kvtree.check_keys(document, names, path)
        values = {name: kvtree.require(document, name, path) for name in names}
        try:
            return cls(**values)
        except ValueError as e:
            raise ConfigError(f"{path}: {e}") from e


class SpringKind(str, enum.Enum):
    LINEAR = "linear"
    BILINEAR = "bilinear"


@dataclass(frozen=True)
class StorySpringLaw:
    """
    Restoring-force law of one inter-story spring.

    A bilinear law has initial stiffness ``k``, post-yield stiffness
    ``post_yield_ratio * k`` and yields at ``u_yield`` (kinematic hardening).
    """

    kind: SpringKind = SpringKind.LINEAR
    k: float = 1.0
    post_yield_ratio: float = 0.0
    u_yield: float = math.inf

    def __post_init__(self) -> None:
        object.__setattr__(self, "kind", SpringKind(self.kind))
        if not (self.k > 0 and math.isfinite(self.k)):
            raise DomainError(f"spring stiffness must be positive, got {self.k!r}", key="k")
        if not 0.0 <= self.post_yield_ratio < 1.0:
            raise DomainError("post_yield_ratio must lie in [0, 1)", key="post_yield_ratio")
        if not self.u_yield > 0:
            raise DomainError("u_yield must be positive", key="u_yield")

    @property
    def is_linear(self) -> bool:
        """True when the law never leaves its elastic branch."""
        return self.kind is SpringKind.LINEAR or math.isinf(self.u_yield)

    def scaled(self, factor: float) -> "StorySpringLaw":
        """Scale the stiffness, keeping the yield displacement."""
        return replace(self, k=self.k * factor)

    def to_document(self) -> Dict[str, Any]:
        return {
            "kind": self.kind.value,
            "k_n_per_m": self.k,
            "post_yield_ratio": self.post_yield_ratio,
            "u_yield_m": None if math.isinf(self.u_yield) else self.u_yield,
        }

    @classmethod
    def from_document(cls, document: Dict[str, Any], path: str = "spring") -> "StorySpringLaw":
        kvtree.check_keys(document, ("kind", "k_n_per_m", "post_yield_ratio", "u_yield_m"), path)
        u_yield = document.get("u_yield_m")
        return cls(
            kind=SpringKind(kvtree.require(document, "kind", path)),
            k=float(kvtree.require(document, "k_n_per_m", path)),
            post_yield_ratio=float(document.get("post_yield_ratio", 0.0)),
            u_yield=math.inf if u_yield is None else float(u_yield),
        )


def _readonly(values: Sequence[float]) -> np.ndarray:
    array = np.array(values, dtype=np.float64)
    array.setflags(write=False)
    return array


@dataclass(frozen=True)
class LumpedMassModel:
    """
    Planar shear-building model: one mass per floor, one spring per story.

    ``spring_law[i].k`` always equals ``story_stiffness[i]``.
    """

    masses: np.ndarray
    story_stiffness: np.ndarray
    damping_ratio: float = 0.05
    spring_law: Tuple[StorySpringLaw, ...] = ()
    floor_height_m: float = 3.0

    def __post_init__(self) -> None:
        masses = _readonly(self.masses)
        stiffness = _readonly(self.story_stiffness)
        if masses.ndim != 1 or masses.size == 0 or masses.shape != stiffness.shape:
            raise DomainError("masses and story_stiffness must be equal-length vectors")
        if not np.all(np.isfinite(masses)) or np.any(masses <= 0):
            raise DomainError("all masses must be positive", key="masses")
        if not np.all(np.isfinite(stiffness)) or np.any(stiffness <= 0):
            raise DomainError("all story stiffnesses must be positive", key="story_stiffness")
        if not 0.0 < self.damping_ratio < 0.2:
            raise DomainError("damping_ratio must lie in (0, 0.2)", key="damping_ratio")
        if self.floor_height_m <= 0:
            raise DomainError("floor_height_m must be positive", key="floor_height_m")

        laws = tuple(self.spring_law)
        if not laws:
            laws = tuple(StorySpringLaw(k=float(k)) for k in stiffness)
        if len(laws) != stiffness.size:
            raise DomainError("one spring law per story is required", key="spring_law")
        if any(law.k != k for law, k in zip(laws, stiffness)):
            raise DomainError("spring law stiffness disagrees with story_stiffness", key="spring_law")

        object.__setattr__(self, "masses", masses)
        object.__setattr__(self, "story_stiffness", stiffness)
        object.__setattr__(self, "spring_law", laws)

    @property
    def n_stories(self) -> int:
        return int(self.masses.size)

    @property
    def total_mass(self) -> float:
        return float(np.sum(self.masses))

    @property
    def is_linear(self) -> bool:
        return all(law.is_linear for law in self.spring_law)

    def as_linear(self) -> "LumpedMassModel":
        """Get the model with every spring on its elastic law."""
        if all(law.kind is SpringKind.LINEAR for law in self.spring_law):
            return self
        return replace(self, spring_law=())

    def with_bilinear(self, post_yield_ratio: float, u_yield: Any) -> "LumpedMassModel":
        """
        Get the model with bilinear springs.

        Args:
            post_yield_ratio: Post-yield to initial stiffness ratio
            u_yield: Yield displacement in m, scalar or one per story

        Returns:
            Model with bilinear spring laws
        """
        yields = np.broadcast_to(np.asarray(u_yield, dtype=np.float64), self.story_stiffness.shape)
        laws = tuple(
            StorySpringLaw(SpringKind.BILINEAR, float(k), post_yield_ratio, float(uy))
            for k, uy in zip(self.story_stiffness, yields)
        )
        return replace(self, spring_law=laws)

    def to_document(self) -> Dict[str, Any]:
        return {
            "masses_kg": self.masses.tolist(),
            "story_stiffness_n_per_m": self.story_stiffness.tolist(),
            "damping_ratio": self.damping_ratio,
            "floor_height_m": self.floor_height_m,
            "spring_law": [law.to_document() for law in self.spring_law],
        }

    @classmethod
    def from_document(cls, document: Dict[str, Any], path: str = "model") -> "LumpedMassModel":
        allowed = ("masses_kg", "story_stiffness_n_per_m", "damping_ratio", "floor_height_m", "spring_law")
        kvtree.check_keys(document, allowed, path)
        laws = tuple(
            StorySpringLaw.from_document(item, f"{path}.spring_law[{i}]")
            for i, item in enumerate(document.get("spring_law", []))
        )
        return cls(
            masses=np.asarray(kvtree.require(document, "masses_kg", path), dtype=np.float64),
            story_stiffness=np.asarray(
                kvtree.require(document, "story_stiffness_n_per_m", path), dtype=np.float64
            ),
            damping_ratio=float(document.get("damping_ratio", 0.05)),
            spring_law=laws,
            floor_height_m=float(document.get("floor_height_m", 3.0)),
        )


@dataclass(frozen=True)
class ModalSummary:
    """Natural frequencies (ascending, rad/s) and mass-normalized mode shapes."""

    omega: np.ndarray
    mode_shapes: np.ndarray = field(repr=False)
    participation_factors: np.ndarray = field(repr=False)

    @property
    def periods(self) -> np.ndarray:
        return 2.0 * math.pi / self.omega

    @property
    def T1(self) -> float:
        """Fundamental period in s."""
        return float(2.0 * math.pi / self.omega[0])


def _draw_building(
    structure_type: StructureType,
    rng: np.random.Generator,
    story_range: Tuple[int, int],
) -> BuildingConfig:
    span_length = float(rng.uniform(5.0, 10.0))
    beam_depth = float(np.clip(round(span_length * 1000.0 / 12.0 / 50.0) * 50.0, 400.0, 900.0))
    column_side = 300.0 + 50.0 * float(rng.integers(0, 19))
    wall = None
    if structure_type.walls_per_direction:
        wall = float(rng.choice(WALL_THICKNESSES))
    return BuildingConfig(
        n_stories=int(rng.integers(story_range[0], story_range[1] + 1)),
        floor_height_m=float(rng.choice(FLOOR_HEIGHTS)),
        slab_thickness_mm=float(rng.choice(SLAB_THICKNESSES)),
        n_spans_x=int(rng.choice(SPAN_COUNTS)),
        n_spans_y=int(rng.choice(SPAN_COUNTS)),
        span_length_m=span_length,
        aspect_ratio=float(rng.uniform(2.0 / 3.0, 1.0)),
        column_size_mm=(column_side, column_side),
        beam_size_mm=(250.0 + 50.0 * float(rng.integers(0, 4)), beam_depth),
        wall_thickness_mm=wall,
        concrete_grade=SAMPLED_GRADES[int(rng.integers(0, len(SAMPLED_GRADES)))],
        rebar_strength_mpa=float(rng.uniform(355.0, 400.0)),
        structure_type=structure_type,
    )


def axial_load_ratio(cfg: BuildingConfig) -> float:
    """
    Axial-compression proxy: total building weight over column area over fck.

    Args:
        cfg: Building

    Returns:
        Dimensionless ratio
    """
    story_mass = _story_mass(cfg)
    weight = story_mass * cfg.n_stories * STANDARD_GRAVITY
    b, h = cfg.column_size_mm
    column_area = cfg.n_columns * (b / 1000.0) * (h / 1000.0)
    return weight / column_area / (cfg.concrete_grade.fck * 1e6)


def sample_building(
    structure_type: StructureType,
    rng_seed: int,
    story_range: Optional[Tuple[int, int]] = None,
    policy: Optional[RegenerationPolicy] = None,
) -> BuildingConfig:
    """
    Draw a building whose axial-load proxy stays within the limit.

    Args:
        structure_type: Structural system
        rng_seed: Seed of the draw
        story_range: Narrower story band inside the type's band
        policy: Regeneration policy (default 1000 attempts)

    Returns:
        Building configuration, identical for identical arguments

    Raises:
        RegenerationError: If no admissible building is found
    """
    structure_type = StructureType(structure_type)
    band = structure_type.story_band
    stories = tuple(story_range) if story_range is not None else band
    if not band[0] <= stories[0] <= stories[1] <= band[1]:
        raise ConfigError(
            f"story range {stories} outside the {structure_type.value} band {band}",
            key="story_range",
        )

    rng = make_rng(rng_seed, "building", structure_type.value)

    def check(cfg: BuildingConfig) -> Optional[str]:
        if axial_load_ratio(cfg) > AXIAL_LIMIT:
            return "axial_load"
        return None

    handler = RegenerationHandler(policy)
    cfg, _ = handler.execute(
        f"building[{structure_type.value}, seed={rng_seed}]",
        lambda _attempt: _draw_building(structure_type, rng, stories),  # type: ignore[arg-type]
        check,
    )
    return cfg


def _story_mass(cfg: BuildingConfig) -> float:
    h = cfg.floor_height_m
    col_b, col_h = cfg.column_size_mm
    beam_b, beam_d = cfg.beam_size_mm
    volume = cfg.plan_area * cfg.slab_thickness_mm / 1000.0
    volume += cfg.n_columns * (col_b / 1000.0) * (col_h / 1000.0) * h
    volume += cfg.beam_length * (beam_b / 1000.0) * (beam_d / 1000.0)
    if cfg.wall_thickness_mm is not None:
        n_walls = cfg.walls_per_direction
        wall_length = cfg.wall_length(Direction.X) + cfg.wall_length(Direction.Y)
        volume += n_walls * wall_length * cfg.wall_thickness_mm / 1000.0 * h
    return CONCRETE_DENSITY * volume + LIVE_LOAD / STANDARD_GRAVITY * cfg.plan_area


def _story_stiffness(cfg: BuildingConfig, direction: Direction) -> float:
    e_c = cfg.concrete_grade.elastic_modulus
    h = cfg.floor_height_m
    width, depth = (v / 1000.0 for v in cfg.column_size_mm)
    if direction is Direction.Y:
        width, depth = depth, width
    inertia = width * depth ** 3 / 12.0
    stiffness = cfg.n_columns * 12.0 * e_c * inertia / h ** 3
    if cfg.wall_thickness_mm is not None:
        shear_modulus = e_c / 2.4
        area = cfg.wall_length(direction) * cfg.wall_thickness_mm / 1000.0
        stiffness += cfg.walls_per_direction * shear_modulus * area * WALL_SHEAR_FACTOR / h
    return stiffness


def reduce_to_mdof(
    cfg: BuildingConfig,
    direction: Direction = Direction.X,
    damping_ratio: float = 0.05,
) -> LumpedMassModel:
    """
    Reduce a building to its planar lumped-mass model.

    Story mass is slab plus column, beam and wall concrete plus a 0.5 kPa
    live-load mass; story stiffness is the sum of column flexural stiffness
    12 E I / h^3 and wall shear stiffness G A kappa / h.

    Args:
        cfg: Building
        direction: Direction of the planar model
        damping_ratio: Modal damping ratio

    Returns:
        Lumped-mass model with ``cfg.n_stories`` degrees of freedom
    """
    direction = Direction(direction)
    n = cfg.n_stories
    return LumpedMassModel(
        masses=np.full(n, _story_mass(cfg)),
        story_stiffness=np.full(n, _story_stiffness(cfg, direction)),
        damping_ratio=damping_ratio,
        floor_height_m=cfg.floor_height_m,
    )


def assemble_matrices(model: LumpedMassModel) -> Tuple[np.ndarray, np.ndarray]:
    """
    Assemble the mass and shear-building stiffness matrices.

    Args:
        model: Lumped-mass model

    Returns:
        Tuple of (M diagonal, K tridiagonal)
    """
    return np.diag(model.masses), shear_stiffness(model.story_stiffness)


def shear_stiffness(k: np.ndarray) -> np.ndarray:
    """
    Tridiagonal shear-building stiffness from story spring stiffnesses.

    Args:
        k: Story stiffnesses, bottom story first

    Returns:
        Matrix with K[i, i] = k[i] + k[i + 1] and K[i, i + 1] = -k[i + 1]
    """
    k = np.asarray(k, dtype=np.float64)
    above = np.append(k[1:], 0.0)
    off = -k[1:]
    return np.diag(k + above) + np.diag(off, 1) + np.diag(off, -1)


def fundamental_periods(M: np.ndarray, K: np.ndarray) -> ModalSummary:
    """
    Solve ``K phi = omega^2 M phi`` for a diagonal mass matrix.

    The problem is symmetrized with ``L = sqrt(M)`` and solved as a
    symmetric tridiagonal eigenproblem; a dense symmetric solver is used
    when K has entries beyond the first off-diagonals.

    Args:
        M: Diagonal positive mass matrix
        K: Symmetric positive-definite stiffness matrix

    Returns:
        Modal summary with ascending frequencies

    Raises:
        DomainError: If M is not diagonal positive or K is not positive definite
        NumericalError: If the eigen solver fails to converge
    """
    M = np.atleast_2d(np.asarray(M, dtype=np.float64))
    K = np.atleast_2d(np.asarray(K, dtype=np.float64))
    masses = np.diag(M).copy()
    if M.shape != K.shape or M.shape[0] != M.shape[1]:
        raise DomainError("M and K must be square matrices of one size")
    if np.any(masses <= 0) or np.count_nonzero(M - np.diag(masses)):
        raise DomainError("M must be diagonal with positive entries")
    if not np.allclose(K, K.T, rtol=1e-12, atol=0.0):
        raise DomainError("K must be symmetric")

    root = np.sqrt(masses)
    scaled = K / np.outer(root, root)
    n = masses.size
    try:
        if n == 1:
            eigenvalues = np.array([K[0, 0] / masses[0]])
            vectors = np.ones((1, 1))
        elif np.count_nonzero(np.triu(K, 2)) == 0:
            eigenvalues, vectors = linalg.eigh_tridiagonal(np.diag(scaled), np.diag(scaled, 1))
        else:
            eigenvalues, vectors = linalg.eigh(scaled)
    except linalg.LinAlgError as e:
        raise NumericalError(f"eigen solver did not converge: {e}") from e

    if eigenvalues[0] <= 0:
        raise DomainError("K must be positive definite")
    shapes = vectors / root[:, None]
    # Sign convention: roof component positive
    signs = np.where(shapes[-1] < 0, -1.0, 1.0)
    shapes = shapes * signs
    participation = shapes.T @ masses
    return ModalSummary(
        omega=np.sqrt(eigenvalues),
        mode_shapes=shapes,
        participation_factors=participation,
    )


def modal_summary(model: LumpedMassModel) -> ModalSummary:
    """Get the modal summary of a model."""
    return fundamental_periods(*assemble_matrices(model))


def stiffness_scale_factor(T_target: float, T_hat: float) -> float:
    """
    Period-matching coefficient S = (T_target / T_hat)^2.

    Raises:
        DomainError: If either period is not positive
    """
    if not (T_target > 0 and T_hat > 0):
        raise DomainError(f"periods must be positive, got T={T_target!r}, T_hat={T_hat!r}")
    return (T_target / T_hat) ** 2


def apply_scale(model: LumpedMassModel, S: float) -> LumpedMassModel:
    """
    Rescale all story stiffnesses by 1/S.

    With ``S = stiffness_scale_factor(T_target, T1)`` the returned model has
    fundamental period ``T_target``.

    Args:
        model: Model to rescale
        S: Period-matching coefficient

    Returns:
        Rescaled model (the same object when S == 1)
    """
    if not S > 0:
        raise DomainError(f"scale factor must be positive, got {S!r}")
    if S == 1.0:
        return model
    factor = 1.0 / S
    return replace(
        model,
        story_stiffness=model.story_stiffness * factor,
        spring_law=tuple(law.scaled(factor) for law in model.spring_law),
    )


def match_period(model: LumpedMassModel, T_target: float) -> LumpedMassModel:
    """Rescale a model so its fundamental period equals ``T_target``."""
    T_hat = modal_summary(model).T1
    return apply_scale(model, stiffness_scale_factor(T_target, T_hat))
