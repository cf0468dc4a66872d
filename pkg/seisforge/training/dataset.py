"""
Dataset generation and access.

A dataset directory holds ``manifest.json``, the packed ``responses.sfrh``
file (oracle then SDR block per sample), ``motions/<id>.rec`` records and
``models/<building>-<direction>.json`` model documents.
"""

import enum
import logging
import math
from dataclasses import dataclass
from pathlib import Path
from typing import Any, Dict, List, NamedTuple, Optional, Sequence, Tuple, Union

import numpy as np

from seisforge.errors import (
    CompatibilityError,
    ConfigError,
    ErrorClassifier,
    GenerationTelemetry,
)
from seisforge.formats import kvtree
from seisforge.physics.dynamics import IntegratorParams, ResponseHistory, sdr_response, simulate
from seisforge.physics.ground_motion import (
    GroundMotion,
    IntensityBanding,
    IntensityClass,
    SynthSpec,
    arias_intensity,
    load_record,
    save_record,
    significant_duration,
    synth_record,
)
from seisforge.physics.structure import (
    BuildingConfig,
    Direction,
    LumpedMassModel,
    StructureType,
    match_period,
    modal_summary,
    reduce_to_mdof,
    sample_building,
)
from seisforge.training.config import GenerationConfig
from seisforge.training.normalization import NormalizationStats
from seisforge.utils.rng import make_rng
from seisforge.utils.workers import WorkerPool

# Logger
logger = logging.getLogger("seisforge.training.dataset")

DATASET_FORMAT = "seisforge-dataset"
DATASET_VERSION = 1
MANIFEST_NAME = "manifest.json"
RESPONSES_NAME = "responses.sfrh"


class Split(str, enum.Enum):
    TRAIN = "train"
    VALIDATION = "validation"
    TEST = "test"


@dataclass(frozen=True)
class SampleRecord:
    """Manifest index entry of one sample."""

    sample_id: str
    building_id: str
    motion_id: str
    direction: str
    model_ref: str
    structure_type: str
    intensity: str
    n_stories: int
    n_steps: int
    split: str
    oracle_offset: int
    sdr_offset: int

    def to_document(self) -> Dict[str, Any]:
        return dict(self.__dict__)

    @classmethod
    def from_document(cls, document: Dict[str, Any], path: str = "samples") -> "SampleRecord":
        names = list(cls.__dataclass_fields__)  # type: ignore[attr-defined]
        kvtree.check_keys(document, names, path)
        return cls(**{name: kvtree.require(document, name, path) for name in names})


@dataclass
class TrainingSample:
    """
    One (building, motion, direction) sample with its responses.

    ``model`` is the simplified (period-matched, linear) model whose story
    vectors condition the decoder.
    """

    sample_id: str
    motion: GroundMotion
    direction: str
    model_ref: str
    model: LumpedMassModel
    oracle: ResponseHistory
    sdr: ResponseHistory
    split: str

    def __post_init__(self) -> None:
        if self.oracle.u.shape != self.sdr.u.shape or self.oracle.dt != self.sdr.dt:
            raise ConfigError(f"sample {self.sample_id}: oracle and SDR responses disagree in shape or dt")

    @property
    def n_steps(self) -> int:
        return self.oracle.n_steps


@dataclass
class DatasetManifest:
    """Dataset index, counts and frozen normalization statistics."""

    rng_seed: int
    dt: float
    generation: Dict[str, Any]
    counts: Dict[str, Dict[str, int]]
    normalization: NormalizationStats
    samples: List[SampleRecord]
    motions: Dict[str, Dict[str, Any]]
    skipped: Dict[str, Any]
    version: int = DATASET_VERSION

    def in_split(self, split: Union[str, Split]) -> List[SampleRecord]:
        """Get the samples of a split in manifest order."""
        name = Split(split).value
        return [record for record in self.samples if record.split == name]

    def to_document(self) -> Dict[str, Any]:
        return {
            "format": DATASET_FORMAT,
            "version": self.version,
            "rng_seed": self.rng_seed,
            "dt": self.dt,
            "generation": self.generation,
            "counts": self.counts,
            "normalization": self.normalization.to_document(),
            "samples": [record.to_document() for record in self.samples],
            "motions": self.motions,
            "skipped": self.skipped,
            "responses_file": RESPONSES_NAME,
        }

    @classmethod
    def from_document(cls, document: Dict[str, Any], source: str = MANIFEST_NAME) -> "DatasetManifest":
        if document.get("format") != DATASET_FORMAT:
            raise CompatibilityError(f"{source}: not a seisforge dataset manifest")
        if document.get("version") != DATASET_VERSION:
            raise CompatibilityError(
                f"{source}: manifest version {document.get('version')!r}, expected {DATASET_VERSION}"
            )
        allowed = (
            "format", "version", "rng_seed", "dt", "generation", "counts",
            "normalization", "samples", "motions", "skipped", "responses_file",
        )
        kvtree.check_keys(document, allowed)
        return cls(
            rng_seed=int(kvtree.require(document, "rng_seed")),
            dt=float(kvtree.require(document, "dt")),
            generation=dict(document.get("generation", {})),
            counts=dict(document.get("counts", {})),
            normalization=NormalizationStats.from_document(kvtree.require(document, "normalization")),
            samples=[
                SampleRecord.from_document(item, f"samples[{i}]")
                for i, item in enumerate(kvtree.require(document, "samples"))
            ],
            motions=dict(document.get("motions", {})),
            skipped=dict(document.get("skipped", {})),
        )


def allocate_counts(weights: Dict[str, float], total: int) -> Dict[str, int]:
    """
    Split a total across categories by largest remainder.

    Args:
        weights: Non-negative category weights
        total: Number of items

    Returns:
        Counts summing to ``total``; ties go to the earlier category
    """
    names = list(weights)
    norm = sum(weights.values())
    quotas = [weights[name] / norm * total for name in names]
    counts = [int(math.floor(q)) for q in quotas]
    remainders = sorted(range(len(names)), key=lambda i: (-(quotas[i] - counts[i]), i))
    for i in remainders[: total - sum(counts)]:
        counts[i] += 1
    return dict(zip(names, counts))


def split_counts(n: int, train_fraction: float, validation_fraction: float = 0.0) -> Tuple[int, int, int]:
    """
    Sizes of the (train, validation, test) splits.

    ``n_train = floor(train_fraction * n + 0.5)``; the validation share is
    carved out of the train share.
    """
    n_train = int(math.floor(train_fraction * n + 0.5))
    n_validation = int(math.floor(validation_fraction * n + 0.5))
    n_validation = min(n_validation, max(0, n_train - 1))
    return n_train - n_validation, n_validation, n - n_train


def _stream_seed(seed: int, *stream: Any) -> int:
    return int(make_rng(seed, *stream).integers(0, 2**32))


def _draw_motion(cfg: GenerationConfig, seed: int, index: int, intensity: IntensityClass) -> Tuple[GroundMotion, int]:
    rng = make_rng(seed, "motion", index)
    duration = cfg.duration_s
    rise = float(rng.uniform(*cfg.rise_fraction)) * duration
    plateau = float(rng.uniform(*cfg.plateau_fraction)) * duration
    decay = max(0.0, 0.98 * duration - rise - plateau)
    synth_seed = int(rng.integers(0, 2**32))
    spec = SynthSpec(
        duration=duration,
        corner_frequencies=(float(rng.uniform(*cfg.f_lo_range)), float(rng.uniform(*cfg.f_hi_range))),
        envelope=(rise, plateau, decay),
        target_pga=cfg.banding.sample_pga(intensity, rng),
        seed=synth_seed,
    )
    return synth_record(spec, dt=cfg.dt, record_id=f"m{index:05d}", banding=cfg.banding), synth_seed


def oracle_model(
    cfg: GenerationConfig,
    building: BuildingConfig,
    nominal: LumpedMassModel,
    seed: int,
    building_index: int,
    direction: Direction,
) -> LumpedMassModel:
    """
    Detailed model standing in for the finite-element oracle.

    Args:
        cfg: Generation config with the oracle options
        building: Building the nominal model came from
        nominal: Nominal reduced model
        seed: Dataset seed
        building_index: Index of the building
        direction: Direction of the planar model

    Returns:
        Jittered and optionally bilinear model
    """
    options = cfg.oracle
    rng = make_rng(seed, "oracle", building_index, direction.value)
    factors = 1.0 + rng.uniform(-options.stiffness_jitter, options.stiffness_jitter, size=nominal.n_stories)
    model = LumpedMassModel(
        masses=nominal.masses,
        story_stiffness=nominal.story_stiffness * factors,
        damping_ratio=nominal.damping_ratio,
        floor_height_m=nominal.floor_height_m,
    )
    if rng.uniform() < options.bilinear_probability:
        model = model.with_bilinear(options.post_yield_ratio, options.yield_drift_ratio * building.floor_height_m)
    return model


class SimulationJob(NamedTuple):
    sample_id: str
    oracle_model: LumpedMassModel
    sdr_model: LumpedMassModel
    motion: GroundMotion
    params: IntegratorParams


class SimulationOutcome(NamedTuple):
    sample_id: str
    oracle: Optional[bytes]
    sdr: Optional[bytes]
    stage: str
    category: str
    message: str


def _simulate_job(job: SimulationJob) -> SimulationOutcome:
    stage = "oracle"
    try:
        oracle = simulate(job.oracle_model, job.motion, job.params)
        stage = "sdr"
        sdr = sdr_response(job.sdr_model, job.motion, job.params)
    except Exception as e:
        category = ErrorClassifier.categorize(e)
        if not ErrorClassifier.is_sample_recoverable(category):
            raise
        return SimulationOutcome(job.sample_id, None, None, stage, category, str(e))
    return SimulationOutcome(job.sample_id, oracle.to_bytes(), sdr.to_bytes(), "", "", "")


def build_dataset(
    cfg: GenerationConfig,
    seed: int,
    out_dir: Union[str, Path],
    workers: Optional[int] = None,
) -> DatasetManifest:
    """
    Generate a dataset.

    Buildings are drawn per structure type, motions are synthesized with
    intensity classes allocated by the configured mix, every (building,
    motion, direction) triple is simulated with the oracle and the SDR
    model, and normalization statistics are computed on the train split.

    Args:
        cfg: Generation config
        seed: Dataset seed
        out_dir: Output directory
        workers: Worker processes (defaults to ``cfg.workers``)

    Returns:
        Written manifest

    Raises:
        RegenerationError: If a building cannot be generated
        ConfigError: On invalid configuration
    """
    out = Path(out_dir)
    telemetry = GenerationTelemetry()
    params = IntegratorParams.average_acceleration(cfg.dt)

    buildings: List[Tuple[str, BuildingConfig]] = []
    for kind in StructureType:
        for _ in range(cfg.buildings.get(kind.value, 0)):
            index = len(buildings)
            building = sample_building(
                kind,
                _stream_seed(seed, "building", index),
                story_range=cfg.story_ranges.get(kind.value),
            )
            buildings.append((f"b{index:05d}", building))
    logger.info(f"Sampled {len(buildings)} buildings")

    n_motions = len(buildings) * cfg.motions_per_building
    allocation = allocate_counts(cfg.intensity_mix, n_motions)
    classes = [IntensityClass(name) for name, count in allocation.items() for _ in range(count)]
    classes = [classes[i] for i in make_rng(seed, "intensity").permutation(n_motions)]
    motions: List[GroundMotion] = []
    motion_index: Dict[str, Dict[str, Any]] = {}
    for index, intensity in enumerate(classes):
        gm, synth_seed = _draw_motion(cfg, seed, index, intensity)
        motions.append(gm)
        motion_index[gm.id] = {
            "intensity": intensity.value,
            "pga_m_per_s2": gm.pga,
            "arias_intensity_m_per_s": float(arias_intensity(gm)[-1]),
            "significant_duration_s": significant_duration(gm),
            "synth_seed": synth_seed,
        }

    jobs: List[SimulationJob] = []
    pending: List[Dict[str, Any]] = []
    model_documents: Dict[str, Dict[str, Any]] = {}
    for b_index, (building_id, building) in enumerate(buildings):
        for name in cfg.directions:
            direction = Direction(name)
            nominal = reduce_to_mdof(building, direction, cfg.damping_ratio)
            oracle = oracle_model(cfg, building, nominal, seed, b_index, direction)
            sdr_model = match_period(nominal, modal_summary(oracle.as_linear()).T1)
            model_ref = f"{building_id}-{direction.value}"
            model_documents[model_ref] = {
                "building_id": building_id,
                "direction": direction.value,
                "building": building.to_document(),
                "oracle_model": oracle.to_document(),
                "sdr_model": sdr_model.to_document(),
            }
            for m in range(cfg.motions_per_building):
                gm = motions[b_index * cfg.motions_per_building + m]
                sample_id = f"{building_id}-{gm.id}-{direction.value}"
                jobs.append(SimulationJob(sample_id, oracle, sdr_model, gm, params))
                pending.append(
                    {
                        "sample_id": sample_id,
                        "building_id": building_id,
                        "motion_id": gm.id,
                        "direction": direction.value,
                        "model_ref": model_ref,
                        "structure_type": building.structure_type.value,
                        "intensity": motion_index[gm.id]["intensity"],
                        "n_stories": building.n_stories,
                        "n_steps": gm.n_steps,
                    }
                )

    with WorkerPool(workers if workers is not None else cfg.workers) as pool:
        outcomes = pool.map(_simulate_job, jobs)

    payload = bytearray()
    kept: List[Tuple[Dict[str, Any], int, int]] = []
    for entry, outcome in zip(pending, outcomes):
        if outcome.oracle is None or outcome.sdr is None:
            telemetry.record_skip(outcome.sample_id, outcome.stage, outcome.category, outcome.message)
            continue
        oracle_offset = len(payload)
        payload += outcome.oracle
        sdr_offset = len(payload)
        payload += outcome.sdr
        kept.append((entry, oracle_offset, sdr_offset))
    if not kept:
        raise ConfigError("every sample failed; nothing to write")

    n_train, n_validation, n_test = split_counts(len(kept), cfg.train_fraction, cfg.validation_fraction)
    order = make_rng(seed, "split").permutation(len(kept))
    split_of = {}
    for rank, index in enumerate(order):
        if rank < n_test:
            split_of[int(index)] = Split.TEST.value
        elif rank < n_test + n_validation:
            split_of[int(index)] = Split.VALIDATION.value
        else:
            split_of[int(index)] = Split.TRAIN.value

    records = [
        SampleRecord(split=split_of[i], oracle_offset=o_off, sdr_offset=s_off, **entry)
        for i, (entry, o_off, s_off) in enumerate(kept)
    ]

    motions_by_id = {gm.id: gm for gm in motions}
    train_waves, train_u, train_a = [], [], []
    for record in records:
        if record.split != Split.TRAIN.value:
            continue
        oracle_history = ResponseHistory.from_bytes(bytes(payload), record.oracle_offset)
        train_waves.append(motions_by_id[record.motion_id].samples)
        train_u.append(oracle_history.u)
        train_a.append(oracle_history.a)
    stats = NormalizationStats.from_signals(train_waves, train_u, train_a, clip=cfg.clip)

    counts: Dict[str, Dict[str, int]] = {
        "structure_type": {kind.value: 0 for kind in StructureType},
        "intensity": {cls.value: 0 for cls in IntensityClass},
        "split": {split.value: 0 for split in Split},
    }
    for record in records:
        counts["structure_type"][record.structure_type] += 1
        counts["intensity"][record.intensity] += 1
        counts["split"][record.split] += 1

    manifest = DatasetManifest(
        rng_seed=seed,
        dt=cfg.dt,
        generation=cfg.to_document(),
        counts=counts,
        normalization=stats,
        samples=records,
        motions=motion_index,
        skipped=telemetry.get_report(),
    )

    out.mkdir(parents=True, exist_ok=True)
    for gm in motions:
        save_record(gm, out / "motions" / f"{gm.id}.rec")
    for model_ref, document in model_documents.items():
        kvtree.write_document(out / "models" / f"{model_ref}.json", document)
    (out / RESPONSES_NAME).write_bytes(bytes(payload))
    kvtree.write_document(out / MANIFEST_NAME, manifest.to_document())
    logger.info(
        f"Wrote dataset to {out}: {len(records)} samples "
        f"({counts['split']}), {telemetry.total_skipped} skipped"
    )
    return manifest


class Dataset:
    """
    Read access to a generated dataset.

    Args:
        root: Dataset directory
    """

    def __init__(self, root: Union[str, Path]):
        self.root = Path(root)
        manifest_path = self.root / MANIFEST_NAME
        if not manifest_path.is_file():
            raise ConfigError(f"dataset manifest not found: {manifest_path}")
        self.manifest = DatasetManifest.from_document(kvtree.read_document(manifest_path), str(manifest_path))
        self._payload: Optional[bytes] = None
        self._motions: Dict[str, GroundMotion] = {}
        self._models: Dict[str, Dict[str, Any]] = {}
        self._records = {record.sample_id: record for record in self.manifest.samples}

    @property
    def normalization(self) -> NormalizationStats:
        return self.manifest.normalization

    def _responses(self) -> bytes:
        if self._payload is None:
            path = self.root / RESPONSES_NAME
            if not path.is_file():
                raise ConfigError(f"response file not found: {path}")
            self._payload = path.read_bytes()
        return self._payload

    def motion(self, motion_id: str) -> GroundMotion:
        if motion_id not in self._motions:
            banding = IntensityBanding.from_document(self.manifest.generation.get("banding", {}))
            self._motions[motion_id] = load_record(self.root / "motions" / f"{motion_id}.rec", banding=banding)
        return self._motions[motion_id]

    def model_document(self, model_ref: str) -> Dict[str, Any]:
        if model_ref not in self._models:
            self._models[model_ref] = kvtree.read_document(self.root / "models" / f"{model_ref}.json")
        return self._models[model_ref]

    def sdr_model(self, model_ref: str) -> LumpedMassModel:
        return LumpedMassModel.from_document(self.model_document(model_ref)["sdr_model"], "sdr_model")

    def oracle_model(self, model_ref: str) -> LumpedMassModel:
        return LumpedMassModel.from_document(self.model_document(model_ref)["oracle_model"], "oracle_model")

    def sample(self, sample_id: str) -> TrainingSample:
        """Load one sample."""
        if sample_id not in self._records:
            raise ConfigError(f"unknown sample '{sample_id}'", key="sample_id")
        record = self._records[sample_id]
        payload = self._responses()
        return TrainingSample(
            sample_id=record.sample_id,
            motion=self.motion(record.motion_id),
            direction=record.direction,
            model_ref=record.model_ref,
            model=self.sdr_model(record.model_ref),
            oracle=ResponseHistory.from_bytes(payload, record.oracle_offset),
            sdr=ResponseHistory.from_bytes(payload, record.sdr_offset),
            split=record.split,
        )

    def samples(self, split: Union[str, Split], limit: Optional[int] = None) -> List[TrainingSample]:
        """Load every sample of a split in manifest order."""
        records: Sequence[SampleRecord] = self.manifest.in_split(split)
        if limit is not None:
            records = records[:limit]
        return [self.sample(record.sample_id) for record in records]
