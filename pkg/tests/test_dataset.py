# Tests for dataset generation and access

import numpy as np
import pytest

from seisforge.errors import CompatibilityError, ConfigError
from seisforge.formats import kvtree
from seisforge.physics import modal_summary
from seisforge.training import (
    Dataset,
    GenerationConfig,
    NormalizationStats,
    Split,
    allocate_counts,
    build_dataset,
    split_counts,
    story_vectors,
)
from seisforge.training.config import DEFAULT_INTENSITY_MIX, OracleOptions
from seisforge.training.dataset import MANIFEST_NAME, RESPONSES_NAME


@pytest.fixture
def dataset(tiny_dataset):
    return Dataset(tiny_dataset)


class TestCounts:
    @pytest.mark.parametrize(
        "n, train_fraction, validation_fraction, expected",
        [
            (4, 0.75, 0.0, (3, 0, 1)),
            (10, 0.9, 0.0, (9, 0, 1)),
            (10, 0.8, 0.1, (7, 1, 2)),
            (1, 0.9, 0.0, (1, 0, 0)),
            (5, 1.0, 0.0, (5, 0, 0)),
        ],
    )
    def test_split_counts(self, n, train_fraction, validation_fraction, expected):
        assert split_counts(n, train_fraction, validation_fraction) == expected

    def test_validation_leaves_one_train_sample(self):
        assert split_counts(2, 0.5, 0.4) == (1, 0, 1)

    def test_allocate_largest_remainder(self):
        assert allocate_counts({"a": 1.0, "b": 1.0, "c": 1.0}, 4) == {"a": 2, "b": 1, "c": 1}
        assert allocate_counts({"I6": 0.481, "I7": 0.4177, "I8": 0.0886, "I9": 0.0127}, 100) == {
            "I6": 48,
            "I7": 42,
            "I8": 9,
            "I9": 1,
        }

    def test_allocation_sums_to_total(self):
        weights = {"a": 0.2, "b": 0.3, "c": 0.5}
        for total in range(0, 30):
            assert sum(allocate_counts(weights, total).values()) == total


class TestGenerationConfig:
    def test_sample_count(self, tiny_generation):
        assert tiny_generation.n_samples == 4

    def test_document_round_trip(self, tiny_generation):
        document = kvtree.loads(kvtree.dumps(tiny_generation.to_document()))
        assert GenerationConfig.from_document(document) == tiny_generation

    @pytest.mark.parametrize(
        "kwargs, key",
        [
            ({"buildings": {"tower": 1}}, "buildings.tower"),
            ({"buildings": {"frame": 0}}, "buildings"),
            ({"f_hi_range": (8.0, 30.0)}, "f_hi_range"),
            ({"train_fraction": 0.0}, "train_fraction"),
            ({"validation_fraction": 0.95}, "validation_fraction"),
            ({"motions_per_building": 0}, "motions_per_building"),
        ],
    )
    def test_invalid(self, kwargs, key):
        with pytest.raises(ConfigError) as excinfo:
            GenerationConfig(**kwargs)
        assert excinfo.value.key == key

    def test_unknown_key(self):
        with pytest.raises(ConfigError):
            GenerationConfig.from_document({"bulidings": {"frame": 1}})


class TestBuildDataset:
    def test_manifest_counts(self, dataset):
        manifest = dataset.manifest
        assert len(manifest.samples) == 4
        assert manifest.counts["split"] == {"train": 3, "validation": 0, "test": 1}
        assert manifest.counts["structure_type"]["frame"] == 4
        assert sum(manifest.counts["intensity"].values()) == 4
        assert manifest.skipped["total_skipped"] == 0

    def test_layout(self, tiny_dataset, dataset):
        assert (tiny_dataset / MANIFEST_NAME).is_file()
        assert (tiny_dataset / RESPONSES_NAME).is_file()
        for record in dataset.manifest.samples:
            assert (tiny_dataset / "motions" / f"{record.motion_id}.rec").is_file()
            assert (tiny_dataset / "models" / f"{record.model_ref}.json").is_file()

    def test_samples_load(self, dataset):
        for sample in dataset.samples(Split.TRAIN):
            assert sample.split == "train"
            assert 2 <= sample.model.n_stories <= 4
            assert sample.oracle.u.shape == (sample.model.n_stories, 101)
            assert sample.sdr.u.shape == sample.oracle.u.shape
            assert sample.motion.n_steps == 101

    def test_sdr_model_matches_oracle_period(self, dataset):
        for record in dataset.manifest.samples:
            sdr = dataset.sdr_model(record.model_ref)
            oracle = dataset.oracle_model(record.model_ref)
            assert modal_summary(sdr).T1 == pytest.approx(modal_summary(oracle.as_linear()).T1, rel=1e-9)

    def test_normalization_from_train_split(self, dataset):
        train = dataset.samples(Split.TRAIN)
        expected = NormalizationStats.from_signals(
            [s.motion.samples for s in train],
            [s.oracle.u for s in train],
            [s.oracle.a for s in train],
            clip=dataset.normalization.clip,
        )
        assert dataset.normalization.wave_std == pytest.approx(expected.wave_std, rel=1e-6)
        assert dataset.normalization.displacement_std == pytest.approx(expected.displacement_std, rel=1e-6)
        assert dataset.normalization.acceleration_std == pytest.approx(expected.acceleration_std, rel=1e-6)

    def test_regeneration_is_byte_identical(self, tmp_path, tiny_generation, tiny_dataset):
        build_dataset(tiny_generation, seed=7, out_dir=tmp_path, workers=1)
        assert (tmp_path / RESPONSES_NAME).read_bytes() == (tiny_dataset / RESPONSES_NAME).read_bytes()
        assert (tmp_path / MANIFEST_NAME).read_bytes() == (tiny_dataset / MANIFEST_NAME).read_bytes()

    def test_seed_changes_dataset(self, tmp_path, tiny_generation, tiny_dataset):
        build_dataset(tiny_generation, seed=8, out_dir=tmp_path, workers=1)
        assert (tmp_path / RESPONSES_NAME).read_bytes() != (tiny_dataset / RESPONSES_NAME).read_bytes()


class TestDatasetAccess:
    def test_missing_manifest(self, tmp_path):
        with pytest.raises(ConfigError):
            Dataset(tmp_path)

    def test_unknown_sample(self, dataset):
        with pytest.raises(ConfigError):
            dataset.sample("nope")

    def test_version_mismatch(self, tmp_path, tiny_dataset):
        document = kvtree.read_document(tiny_dataset / MANIFEST_NAME)
        document["version"] = 99
        kvtree.write_document(tmp_path / MANIFEST_NAME, document)
        with pytest.raises(CompatibilityError):
            Dataset(tmp_path)

    def test_limit(self, dataset):
        assert len(dataset.samples("train", limit=2)) == 2
        assert dataset.samples("validation") == []


class TestNormalization:
    def test_from_signals(self):
        stats = NormalizationStats.from_signals([np.array([1.0, -1.0])], [np.zeros(3)], [np.array([2.0, 2.0])])
        assert stats.wave_std == 1.0
        assert stats.displacement_std == 1.0
        assert stats.acceleration_mean == 2.0
        assert stats.acceleration_std == 1.0

    def test_channels_round_trip(self):
        stats = NormalizationStats(displacement_std=0.5, acceleration_std=4.0)
        u = np.array([[0.1, 0.2, 0.3], [0.4, 0.5, 0.6]])
        a = np.array([[1.0, 2.0, 3.0], [4.0, 5.0, 6.0]])
        channels = stats.response_channels(u, a, n_max=3)
        assert channels.shape == (3, 6)
        assert np.all(channels[:, 2] == 0.0) and np.all(channels[:, 5] == 0.0)
        back_u, back_a = stats.split_channels(channels, 2, 3)
        np.testing.assert_allclose(back_u, u)
        np.testing.assert_allclose(back_a, a)

    def test_clipping(self):
        stats = NormalizationStats(wave_std=0.1, clip=5.0)
        np.testing.assert_array_equal(stats.normalize_wave(np.array([0.0, 1.0, -1.0, 0.2])), [0.0, 5.0, -5.0, 2.0])

    def test_story_vectors(self, dataset):
        model = dataset.sdr_model(dataset.manifest.samples[0].model_ref)
        m_vec, k_vec, mask = story_vectors(model, 6)
        assert mask.sum() == model.n_stories
        assert m_vec.sum() == pytest.approx(1.0)
        assert k_vec.max() == 1.0
        assert np.all(m_vec[~mask] == 0.0)
        with pytest.raises(ConfigError):
            story_vectors(model, model.n_stories - 1)

    def test_invalid_std(self):
        with pytest.raises(ConfigError):
            NormalizationStats(wave_std=0.0)


@pytest.mark.slow
class TestThousandSamples:
    @pytest.fixture(scope="class")
    def manifest(self, tmp_path_factory):
        cfg = GenerationConfig(
            buildings={"frame": 500},
            story_ranges={"frame": [1, 4]},
            motions_per_building=1,
            directions=("x", "y"),
            duration_s=2.0,
            dt=0.02,
            oracle=OracleOptions(bilinear_probability=0.0),
            train_fraction=0.9,
        )
        return build_dataset(cfg, seed=11, out_dir=tmp_path_factory.mktemp("thousand"))

    def test_split_is_exact(self, manifest):
        assert len(manifest.samples) == 1000
        assert manifest.counts["split"] == {"train": 900, "validation": 0, "test": 100}

    def test_intensity_mix_within_three_sigma(self, manifest):
        n = len(manifest.samples)
        for name, p in DEFAULT_INTENSITY_MIX.items():
            sigma = np.sqrt(n * p * (1.0 - p))
            assert abs(manifest.counts["intensity"][name] - n * p) <= 3.0 * sigma, name
