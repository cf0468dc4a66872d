"""
Ground-acceleration records: import, synthesis, PGA scaling and resampling.
"""

import enum
import logging
import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Dict, Optional, Sequence, Tuple, Union

import numpy as np
from scipy import signal

from seisforge.errors import ConfigError, DataError, ScalingError
from seisforge.formats.records import STANDARD_GRAVITY, read_record, write_record_file
from seisforge.utils.rng import make_rng

# Logger
logger = logging.getLogger("seisforge.physics.ground_motion")

DEFAULT_DT = 0.02


class IntensityClass(str, enum.Enum):
    """Seismic intensity class of a record."""

    I6 = "I6"
    I7 = "I7"
    I8 = "I8"
    I9 = "I9"


class MotionSource(str, enum.Enum):
    """Where a record came from."""

    IMPORTED = "imported"
    SYNTHETIC = "synthetic"


@dataclass(frozen=True)
class IntensityBanding:
    """
    PGA bands (in g) defining the intensity classes.

    ``edges`` are the lower edges of I6..I9; I9 is open above. ``i9_cap`` is
    only used when sampling a PGA for I9.
    """

    edges: Tuple[float, float, float, float] = (0.05, 0.10, 0.20, 0.40)
    i9_cap: float = 0.62

    def __post_init__(self) -> None:
        if len(self.edges) != 4 or any(edge <= 0 for edge in self.edges):
            raise ConfigError("intensity banding needs four positive edges")
        if any(b <= a for a, b in zip(self.edges, self.edges[1:])):
            raise ConfigError("intensity banding edges must be strictly increasing")
        if self.i9_cap <= self.edges[-1]:
            raise ConfigError("i9_cap must exceed the I9 lower edge")

    def classify(self, pga: float) -> IntensityClass:
        """
        Get the intensity class of a peak ground acceleration.

        Args:
            pga: Peak ground acceleration in m/s^2

        Returns:
            Intensity class (PGA below the I6 edge is reported as I6)
        """
        pga_g = pga / STANDARD_GRAVITY
        classes = list(IntensityClass)
        for index in range(len(self.edges) - 1, 0, -1):
            if pga_g >= self.edges[index]:
                return classes[index]
        return IntensityClass.I6

    def band(self, cls: IntensityClass) -> Tuple[float, float]:
        """Get the [lo, hi) PGA band of a class in m/s^2."""
        index = list(IntensityClass).index(cls)
        upper = self.edges[index + 1] if index + 1 < len(self.edges) else self.i9_cap
        return self.edges[index] * STANDARD_GRAVITY, upper * STANDARD_GRAVITY

    def sample_pga(self, cls: IntensityClass, rng: np.random.Generator) -> float:
        """Draw a PGA uniformly inside a class band, in m/s^2."""
        lo, hi = self.band(cls)
        return float(rng.uniform(lo, hi))

    def to_document(self) -> Dict[str, Any]:
        return {"edges_g": list(self.edges), "i9_cap_g": self.i9_cap}

    @classmethod
    def from_document(cls, document: Dict[str, Any]) -> "IntensityBanding":
        edges = tuple(float(edge) for edge in document.get("edges_g", cls.edges))
        return cls(edges=edges, i9_cap=float(document.get("i9_cap_g", 0.62)))  # type: ignore[arg-type]


DEFAULT_BANDING = IntensityBanding()


def _frozen(values: np.ndarray) -> np.ndarray:
    array = np.array(values, dtype=np.float64)
    array.setflags(write=False)
    return array


@dataclass(frozen=True)
class GroundMotion:
    """
    Uniformly sampled ground-acceleration record.

    Samples are in m/s^2 and read-only. ``unit_shape`` is the waveform
    divided by its own peak; scaling always starts from it, so rescaling a
    scaled record gives the same bits as scaling the original.
    """

    id: str
    dt: float
    samples: np.ndarray
    intensity_class: IntensityClass = IntensityClass.I6
    source: MotionSource = MotionSource.SYNTHETIC
    unit_shape: Optional[np.ndarray] = field(default=None, repr=False, compare=False)

    def __post_init__(self) -> None:
        samples = _frozen(self.samples)
        if samples.ndim != 1 or samples.size < 2:
            raise DataError(f"record {self.id!r} needs at least 2 samples")
        if not math.isfinite(self.dt) or self.dt <= 0:
            raise DataError(f"record {self.id!r} has invalid dt {self.dt!r}")
        if not np.all(np.isfinite(samples)):
            bad = int(np.flatnonzero(~np.isfinite(samples))[0])
            raise DataError(f"record {self.id!r} has a non-finite sample", row=bad + 1)
        object.__setattr__(self, "samples", samples)
        object.__setattr__(self, "intensity_class", IntensityClass(self.intensity_class))
        object.__setattr__(self, "source", MotionSource(self.source))
        if self.unit_shape is not None:
            object.__setattr__(self, "unit_shape", _frozen(self.unit_shape))

    @property
    def pga(self) -> float:
        """Peak ground acceleration, max |samples|."""
        return float(np.max(np.abs(self.samples)))

    @property
    def n_steps(self) -> int:
        return int(self.samples.size)

    @property
    def duration(self) -> float:
        """Time of the last sample, in seconds."""
        return (self.n_steps - 1) * self.dt

    @property
    def time(self) -> np.ndarray:
        return np.arange(self.n_steps) * self.dt

    def shape(self) -> np.ndarray:
        """Get the waveform normalized to unit peak."""
        if self.unit_shape is not None:
            return self.unit_shape
        peak = self.pga
        if peak == 0.0:
            raise ScalingError(f"record {self.id!r} is all zeros and cannot be scaled")
        return self.samples / peak


@dataclass(frozen=True)
class SynthSpec:
    """Parameters of a synthetic band-limited record."""

    duration: float
    corner_frequencies: Tuple[float, float]
    envelope: Tuple[float, float, float]
    target_pga: float
    seed: int

    def validate(self, dt: float) -> None:
        """
        Check the synthesis parameters against a time step.

        Args:
            dt: Sampling interval in seconds

        Raises:
            ConfigError: Naming the violated condition
        """
        if dt <= 0:
            raise ConfigError("dt must be positive", key="dt")
        f_lo, f_hi = self.corner_frequencies
        nyquist = 1.0 / (2.0 * dt)
        if not 0 < f_lo < f_hi:
            raise ConfigError("corner frequencies must satisfy 0 < f_lo < f_hi", key="corner_frequencies")
        if f_hi >= nyquist:
            raise ConfigError(
                f"f_hi={f_hi} Hz must lie below the Nyquist frequency {nyquist} Hz",
                key="corner_frequencies",
            )
        if any(part < 0 for part in self.envelope):
            raise ConfigError("envelope segments must be non-negative", key="envelope")
        if sum(self.envelope) > self.duration:
            raise ConfigError("rise + plateau + decay exceeds the duration", key="envelope")
        if self.target_pga <= 0:
            raise ConfigError("target_pga must be positive", key="target_pga")
        if self.seed < 0:
            raise ConfigError("seed must be unsigned", key="seed")


def load_record(
    path: Union[str, Path],
    dt_override: Optional[float] = None,
    banding: IntensityBanding = DEFAULT_BANDING,
) -> GroundMotion:
    """
    Import a record file.

    Args:
        path: Record file
        dt_override: Time step replacing the header value
        banding: PGA banding used to assign the intensity class

    Returns:
        Imported ground motion
    """
    document = read_record(path, dt_override=dt_override)
    record_id = document.record_id or Path(path).stem
    peak = float(np.max(np.abs(document.values)))
    return GroundMotion(
        id=record_id,
        dt=document.dt,
        samples=document.values,
        intensity_class=banding.classify(peak),
        source=MotionSource.IMPORTED,
    )


def save_record(gm: GroundMotion, path: Union[str, Path], unit: str = "m/s2") -> Path:
    """Write a ground motion in the record text format."""
    return write_record_file(path, gm.dt, gm.id, gm.samples, unit=unit)


def _band_pass_sos(f_lo: float, f_hi: float, dt: float, order: int) -> np.ndarray:
    # Corners sit inside the requested band so the transition skirts stay in it
    inset = min(1.25, (f_hi / f_lo) ** 0.25)
    return signal.butter(
        order,
        [f_lo * inset, f_hi / inset],
        btype="bandpass",
        fs=1.0 / dt,
        output="sos",
    )


def _trapezoid(n_steps: int, dt: float, envelope: Tuple[float, float, float]) -> np.ndarray:
    rise, plateau, decay = envelope
    t = np.arange(n_steps) * dt
    shape = np.zeros(n_steps)
    if rise > 0:
        rising = t < rise
        shape[rising] = t[rising] / rise
    flat = (t >= rise) & (t <= rise + plateau)
    shape[flat] = 1.0
    if decay > 0:
        falling = (t > rise + plateau) & (t < rise + plateau + decay)
        shape[falling] = 1.0 - (t[falling] - rise - plateau) / decay
    return shape


def synth_record(
    spec: SynthSpec,
    dt: float = DEFAULT_DT,
    record_id: Optional[str] = None,
    banding: IntensityBanding = DEFAULT_BANDING,
    filter_order: int = 6,
) -> GroundMotion:
    """
    Synthesize a band-limited record.

    Gaussian white noise is band-passed with zero-phase second-order
    sections, shaped by a trapezoidal envelope and scaled to the target PGA.

    Args:
        spec: Synthesis parameters
        dt: Sampling interval in seconds
        record_id: Identifier (defaults to ``synth-<seed>``)
        banding: PGA banding for the intensity class
        filter_order: Butterworth order of each band edge

    Returns:
        Synthetic ground motion
    """
    spec.validate(dt)
    n_steps = int(math.floor(spec.duration / dt + 1e-9)) + 1
    sos = _band_pass_sos(spec.corner_frequencies[0], spec.corner_frequencies[1], dt, filter_order)
    pad = 3 * (2 * len(sos) + 1)
    if n_steps <= pad:
        raise ConfigError(
            f"duration {spec.duration}s gives {n_steps} samples, the band-pass needs more than {pad}",
            key="duration",
        )

    rng = make_rng(spec.seed, "synth")
    noise = rng.standard_normal(n_steps)
    filtered = signal.sosfiltfilt(sos, noise)
    shaped = filtered * _trapezoid(n_steps, dt, spec.envelope)
    peak = float(np.max(np.abs(shaped)))
    if peak == 0.0:
        raise ConfigError("envelope suppresses every sample", key="envelope")
    unit_shape = shaped / peak
    samples = unit_shape * spec.target_pga
    return GroundMotion(
        id=record_id or f"synth-{spec.seed}",
        dt=dt,
        samples=samples,
        intensity_class=banding.classify(spec.target_pga),
        source=MotionSource.SYNTHETIC,
        unit_shape=unit_shape,
    )


def scale_to_pga(
    gm: GroundMotion,
    target: float,
    banding: IntensityBanding = DEFAULT_BANDING,
) -> GroundMotion:
    """
    Scale a record to a target peak ground acceleration.

    Args:
        gm: Record with a nonzero peak
        target: Target PGA in m/s^2
        banding: PGA banding used to reassign the intensity class

    Returns:
        Scaled record

    Raises:
        ScalingError: If the record is all zeros or the target is not positive
    """
    if not target > 0:
        raise ScalingError(f"target PGA must be positive, got {target!r}")
    peak = gm.pga
    if peak == 0.0:
        raise ScalingError(f"record {gm.id!r} is all zeros and cannot be scaled")
    unit_shape = gm.shape()
    if target == peak:
        samples = gm.samples
    else:
        samples = unit_shape * target
    return GroundMotion(
        id=gm.id,
        dt=gm.dt,
        samples=samples,
        intensity_class=banding.classify(target),
        source=gm.source,
        unit_shape=unit_shape,
    )


def resample(gm: GroundMotion, dt_new: float) -> GroundMotion:
    """
    Resample a record onto a new uniform grid by linear interpolation.

    Args:
        gm: Record
        dt_new: New time step in seconds

    Returns:
        Resampled record covering the original duration within one dt_new
    """
    if not dt_new > 0:
        raise ConfigError(f"dt_new must be positive, got {dt_new!r}", key="dt_new")
    if dt_new == gm.dt:
        return gm
    n_new = int(math.floor(gm.duration / dt_new + 1e-9)) + 1
    t_new = np.arange(n_new) * dt_new
    samples = np.interp(t_new, gm.time, gm.samples)
    logger.debug(f"Resampled {gm.id} from dt={gm.dt} to dt={dt_new} ({gm.n_steps} -> {n_new})")
    return GroundMotion(
        id=gm.id,
        dt=dt_new,
        samples=samples,
        intensity_class=gm.intensity_class,
        source=gm.source,
    )


def arias_intensity(gm: GroundMotion) -> np.ndarray:
    """
    Cumulative Arias intensity, (pi / 2g) * integral of a^2 dt, in m/s.

    Args:
        gm: Record

    Returns:
        Cumulative intensity at every sample
    """
    squared = gm.samples ** 2
    increments = 0.5 * (squared[1:] + squared[:-1]) * gm.dt
    cumulative = np.concatenate([[0.0], np.cumsum(increments)])
    return math.pi / (2.0 * STANDARD_GRAVITY) * cumulative


def significant_duration(gm: GroundMotion, bounds: Sequence[float] = (0.05, 0.95)) -> float:
    """
    Time between two fractions of the total Arias intensity.

    Args:
        gm: Record
        bounds: Lower and upper fractions

    Returns:
        Duration in seconds (0 for an all-zero record)
    """
    cumulative = arias_intensity(gm)
    total = cumulative[-1]
    if total == 0.0:
        return 0.0
    normalized = cumulative / total
    start = int(np.searchsorted(normalized, bounds[0]))
    end = int(np.searchsorted(normalized, bounds[1]))
    return (end - start) * gm.dt
