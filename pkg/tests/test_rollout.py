# Tests for free-running rollout prediction and evaluation

import numpy as np
import pytest

from seisforge.errors import CompatibilityError, ConfigError
from seisforge.model import SeismicResponseDecoder, save_checkpoint
from seisforge.physics import GroundMotion, LumpedMassModel
from seisforge.training import NormalizationStats, ResponsePredictor, evaluate, predict_rollout

W = 16


@pytest.fixture(scope="module")
def predictor(tiny_checkpoint):
    return ResponsePredictor.from_checkpoint(tiny_checkpoint.checkpoint)


@pytest.fixture
def model():
    return LumpedMassModel(masses=[2.0e5, 2.0e5, 1.5e5], story_stiffness=[2.0e8, 1.8e8, 1.5e8])


def motion(n_steps, dt=0.02):
    t = np.arange(n_steps) * dt
    return GroundMotion(id=f"sine-{n_steps}", dt=dt, samples=0.5 * np.sin(2 * np.pi * 1.5 * t))


class TestPredictor:
    def test_loaded_from_checkpoint(self, predictor, tiny_checkpoint):
        assert predictor.dt == 0.02
        assert predictor.window == W
        assert predictor.n_max == 4
        assert predictor.sha256 == tiny_checkpoint.sha256

    @pytest.mark.parametrize("n_steps", [2, W - 1, W, W + 1, 10 * W + 3])
    def test_output_length(self, predictor, model, n_steps):
        channels = predictor.predict_channels(model, motion(n_steps))
        assert channels.shape == (n_steps, 8)
        assert np.all(np.isfinite(channels))
        response = predictor.predict(model, motion(n_steps))
        assert response.u.shape == (3, n_steps)
        assert response.dt == 0.02

    def test_padded_stories_are_zero(self, predictor, model):
        channels = predictor.predict_channels(model, motion(50))
        assert np.all(channels[:, 3] == 0.0)
        assert np.all(channels[:, 7] == 0.0)

    def test_deterministic(self, predictor, model):
        gm = motion(70)
        np.testing.assert_array_equal(predictor.predict_channels(model, gm), predictor.predict_channels(model, gm))

    def test_causal(self, predictor, model):
        gm = motion(80)
        later = 40
        samples = gm.samples.copy()
        samples[later:] *= -3.0
        changed = GroundMotion(id="changed", dt=gm.dt, samples=samples)
        base = predictor.predict_channels(model, gm)
        perturbed = predictor.predict_channels(model, changed)
        np.testing.assert_allclose(base[:later], perturbed[:later], rtol=0.0, atol=1e-6)
        assert not np.allclose(base[later:], perturbed[later:])

    def test_dt_mismatch(self, predictor, model):
        with pytest.raises(ConfigError) as excinfo:
            predictor.predict_channels(model, motion(20, dt=0.01))
        assert excinfo.value.key == "dt"

    def test_too_many_stories(self, predictor):
        tall = LumpedMassModel(masses=[1.0e5] * 5, story_stiffness=[1.0e8] * 5)
        with pytest.raises(ConfigError):
            predictor.predict_channels(tall, motion(20))

    def test_predict_rollout_from_path(self, predictor, tiny_checkpoint, model):
        gm = motion(40)
        by_path = predict_rollout(tiny_checkpoint.checkpoint, model, gm)
        np.testing.assert_array_equal(by_path.u, predictor.predict(model, gm).u)

    def test_checkpoint_without_dt(self, tiny_model_cfg, tmp_path):
        path = tmp_path / "bare.sgpt"
        save_checkpoint(SeismicResponseDecoder(tiny_model_cfg), path, NormalizationStats().to_document())
        with pytest.raises(CompatibilityError):
            ResponsePredictor.from_checkpoint(path)


class TestEvaluate:
    def test_test_split(self, predictor, tiny_dataset):
        report = evaluate(predictor, tiny_dataset, "test", workers=1)
        assert report.split == "test"
        assert report.n_samples == 1
        assert set(report.quantities) == {"displacement", "acceleration"}
        assert len(report.worst_cases) == 1
        assert all(np.isfinite(m.mse) for m in report.quantities.values())

    def test_limit(self, predictor, tiny_dataset):
        assert evaluate(predictor, tiny_dataset, "train", limit=2, workers=1).n_samples == 2

    def test_empty_split(self, predictor, tiny_dataset):
        with pytest.raises(ConfigError):
            evaluate(predictor, tiny_dataset, "validation")

    def test_from_checkpoint_path(self, tiny_checkpoint, tiny_dataset, predictor):
        by_path = evaluate(tiny_checkpoint.checkpoint, tiny_dataset, "test", workers=1)
        assert by_path.to_document() == evaluate(predictor, tiny_dataset, "test", workers=1).to_document()
