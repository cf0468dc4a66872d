# Tests for ground-motion records

import math

import numpy as np
import pytest

from seisforge.errors import ConfigError, DataError, ParseError, ScalingError
from seisforge.formats.records import STANDARD_GRAVITY
from seisforge.physics import (
    DEFAULT_BANDING,
    GroundMotion,
    IntensityBanding,
    IntensityClass,
    MotionSource,
    SynthSpec,
    arias_intensity,
    load_record,
    resample,
    save_record,
    scale_to_pga,
    significant_duration,
    synth_record,
)
from seisforge.utils import make_rng


@pytest.fixture
def spec():
    return SynthSpec(
        duration=20.0,
        corner_frequencies=(0.5, 10.0),
        envelope=(2.0, 6.0, 10.0),
        target_pga=1.5,
        seed=11,
    )


class TestLoadRecord:
    def test_reads_written_file(self, tmp_path):
        path = tmp_path / "gm.rec"
        path.write_text("# dt=0.02 unit=m/s2 id=gm1\n0.0\n0.1\n-0.1\n")
        gm = load_record(path)
        assert gm.dt == 0.02
        assert gm.id == "gm1"
        assert gm.source is MotionSource.IMPORTED
        np.testing.assert_array_equal(gm.samples, [0.0, 0.1, -0.1])

    def test_id_defaults_to_stem(self, tmp_path):
        path = tmp_path / "kobe.rec"
        path.write_text("# dt=0.01\n0.5\n-0.25\n")
        assert load_record(path).id == "kobe"

    def test_empty_file(self, tmp_path):
        path = tmp_path / "empty.rec"
        path.write_text("")
        with pytest.raises(ParseError):
            load_record(path)

    def test_nan_names_row(self, tmp_path):
        path = tmp_path / "nan.rec"
        path.write_text("# dt=0.02\n0.1\nNaN\n")
        with pytest.raises(DataError) as excinfo:
            load_record(path)
        assert excinfo.value.row == 2

    def test_intensity_from_pga(self, tmp_path):
        path = tmp_path / "g.rec"
        path.write_text("# dt=0.02 unit=g\n0.0\n0.3\n-0.1\n")
        assert load_record(path).intensity_class is IntensityClass.I8

    def test_save_then_load(self, tmp_path, spec):
        gm = synth_record(spec)
        loaded = load_record(save_record(gm, tmp_path / "s.rec"))
        np.testing.assert_array_equal(loaded.samples, gm.samples)
        assert loaded.dt == gm.dt


class TestGroundMotion:
    def test_rejects_short_record(self):
        with pytest.raises(DataError):
            GroundMotion(id="a", dt=0.02, samples=[1.0])

    def test_rejects_non_finite(self):
        with pytest.raises(DataError):
            GroundMotion(id="a", dt=0.02, samples=[0.0, math.inf])

    def test_samples_read_only(self):
        gm = GroundMotion(id="a", dt=0.02, samples=[0.0, 1.0])
        with pytest.raises(ValueError):
            gm.samples[0] = 2.0

    def test_duration(self):
        gm = GroundMotion(id="a", dt=0.5, samples=np.zeros(5))
        assert gm.duration == 2.0
        np.testing.assert_allclose(gm.time, [0.0, 0.5, 1.0, 1.5, 2.0])


class TestIntensityBanding:
    @pytest.mark.parametrize(
        "pga_g, expected",
        [(0.02, "I6"), (0.07, "I6"), (0.15, "I7"), (0.25, "I8"), (0.45, "I9"), (1.2, "I9")],
    )
    def test_classify(self, pga_g, expected):
        assert DEFAULT_BANDING.classify(pga_g * STANDARD_GRAVITY).value == expected

    def test_sampled_pga_lies_in_band(self):
        rng = make_rng(0, "banding")
        for cls in IntensityClass:
            lo, hi = DEFAULT_BANDING.band(cls)
            for _ in range(50):
                pga = DEFAULT_BANDING.sample_pga(cls, rng)
                assert lo <= pga < hi
                assert DEFAULT_BANDING.classify(pga) is cls

    def test_invalid_edges(self):
        with pytest.raises(ConfigError):
            IntensityBanding(edges=(0.1, 0.05, 0.2, 0.4))

    def test_document_round_trip(self):
        banding = IntensityBanding(edges=(0.04, 0.1, 0.2, 0.5), i9_cap=0.8)
        assert IntensityBanding.from_document(banding.to_document()) == banding


class TestSynthRecord:
    def test_deterministic(self, spec):
        assert synth_record(spec).samples.tobytes() == synth_record(spec).samples.tobytes()

    def test_peak_matches_target(self, spec):
        gm = synth_record(spec)
        assert gm.pga == pytest.approx(spec.target_pga, rel=1e-9)
        assert gm.n_steps == 1001
        assert gm.id == "synth-11"

    def test_linear_in_target(self, spec):
        half = synth_record(SynthSpec(spec.duration, spec.corner_frequencies, spec.envelope, 1.0, spec.seed))
        full = synth_record(SynthSpec(spec.duration, spec.corner_frequencies, spec.envelope, 2.0, spec.seed))
        np.testing.assert_array_equal(full.samples, 2.0 * half.samples)

    def test_seed_changes_record(self, spec):
        other = SynthSpec(spec.duration, spec.corner_frequencies, spec.envelope, spec.target_pga, 12)
        assert not np.array_equal(synth_record(spec).samples, synth_record(other).samples)

    def test_energy_stays_in_band(self, spec):
        gm = synth_record(spec)
        power = np.abs(np.fft.rfft(gm.samples)) ** 2
        freq = np.fft.rfftfreq(gm.n_steps, gm.dt)
        f_lo, f_hi = spec.corner_frequencies
        in_band = (freq >= f_lo) & (freq <= f_hi)
        assert power[~in_band].sum() < 0.01 * power[in_band].sum()

    def test_nyquist_rejected(self, spec):
        bad = SynthSpec(spec.duration, (0.5, 25.0), spec.envelope, spec.target_pga, spec.seed)
        with pytest.raises(ConfigError) as excinfo:
            synth_record(bad, dt=0.02)
        assert excinfo.value.key == "corner_frequencies"

    @pytest.mark.parametrize(
        "kwargs",
        [
            {"corner_frequencies": (2.0, 1.0)},
            {"envelope": (10.0, 10.0, 10.0)},
            {"envelope": (-1.0, 1.0, 1.0)},
            {"target_pga": 0.0},
        ],
    )
    def test_invalid_spec(self, spec, kwargs):
        fields = dict(
            duration=spec.duration,
            corner_frequencies=spec.corner_frequencies,
            envelope=spec.envelope,
            target_pga=spec.target_pga,
            seed=spec.seed,
        )
        fields.update(kwargs)
        with pytest.raises(ConfigError):
            synth_record(SynthSpec(**fields))


class TestScaleToPga:
    def test_direct_scaling(self):
        gm = GroundMotion(id="a", dt=0.02, samples=[0.0, 1.0, -0.5])
        np.testing.assert_array_equal(scale_to_pga(gm, 2.0).samples, [0.0, 2.0, -1.0])

    def test_same_target_is_identity(self, spec):
        gm = synth_record(spec)
        assert scale_to_pga(gm, gm.pga).samples.tobytes() == gm.samples.tobytes()

    def test_rescaling_is_exact(self, spec):
        gm = GroundMotion(id="a", dt=0.02, samples=synth_record(spec).samples * 0.37)
        twice = scale_to_pga(scale_to_pga(gm, 3.1), 0.7)
        once = scale_to_pga(gm, 0.7)
        assert twice.samples.tobytes() == once.samples.tobytes()

    def test_reassigns_intensity(self):
        gm = GroundMotion(id="a", dt=0.02, samples=[0.0, 1.0])
        assert scale_to_pga(gm, 0.5 * STANDARD_GRAVITY).intensity_class is IntensityClass.I9

    def test_all_zero(self):
        gm = GroundMotion(id="a", dt=0.02, samples=np.zeros(4))
        with pytest.raises(ScalingError):
            scale_to_pga(gm, 1.0)

    def test_non_positive_target(self):
        gm = GroundMotion(id="a", dt=0.02, samples=[0.0, 1.0])
        with pytest.raises(ScalingError):
            scale_to_pga(gm, -1.0)


class TestResample:
    def test_same_dt_is_identity(self, spec):
        gm = synth_record(spec)
        assert resample(gm, gm.dt) is gm

    def test_linear_interpolation(self):
        gm = GroundMotion(id="a", dt=0.02, samples=[0.0, 1.0])
        np.testing.assert_allclose(resample(gm, 0.01).samples, [0.0, 0.5, 1.0])

    def test_sinusoid(self):
        t = np.arange(501) * 0.02
        gm = GroundMotion(id="sine", dt=0.02, samples=np.sin(2 * np.pi * t))
        fine = resample(gm, 0.01)
        exact = np.sin(2 * np.pi * fine.time)
        # Chord error of linear interpolation at 50 samples per cycle
        bound = 1.0 - math.cos(math.pi / 50.0)
        assert np.max(np.abs(fine.samples - exact)) <= bound + 1e-12
        assert abs(fine.duration - gm.duration) < 0.01

    def test_non_positive_dt(self):
        gm = GroundMotion(id="a", dt=0.02, samples=[0.0, 1.0])
        with pytest.raises(ConfigError):
            resample(gm, 0.0)


class TestArias:
    def test_cumulative_is_monotone(self, spec):
        arias = arias_intensity(synth_record(spec))
        assert arias[0] == 0.0
        assert np.all(np.diff(arias) >= 0.0)

    def test_constant_record(self):
        gm = GroundMotion(id="c", dt=0.1, samples=np.ones(11))
        assert arias_intensity(gm)[-1] == pytest.approx(math.pi / (2 * STANDARD_GRAVITY) * 1.0)

    def test_significant_duration_within_record(self, spec):
        gm = synth_record(spec)
        duration = significant_duration(gm)
        assert 0.0 < duration < gm.duration

    def test_zero_record(self):
        assert significant_duration(GroundMotion(id="z", dt=0.02, samples=np.zeros(5))) == 0.0
