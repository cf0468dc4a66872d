# Shared fixtures

import pytest
import torch

from seisforge.model import SrfdConfig, StepInputs
from seisforge.training import GenerationConfig, TrainConfig, build_dataset, train


@pytest.fixture
def step_inputs():
    """Factory of random decoder inputs for a configuration."""

    def build(cfg, seed=0, n_stories=None, batch=None):
        generator = torch.Generator().manual_seed(seed)
        lead = () if batch is None else (batch,)
        dtype = cfg.torch_dtype
        n = cfg.n_max if n_stories is None else n_stories
        mask = torch.zeros(*lead, cfg.n_max, dtype=torch.bool)
        mask[..., :n] = True

        def randn(*shape):
            return torch.randn(*lead, *shape, generator=generator, dtype=dtype)

        def rand(*shape):
            return torch.rand(*lead, *shape, generator=generator, dtype=dtype)

        return StepInputs(
            wave=randn(cfg.window),
            history=randn(cfg.window, cfg.out_channels),
            sdr=randn(cfg.window, cfg.out_channels),
            m_vec=rand(cfg.n_max) * mask,
            k_vec=rand(cfg.n_max) * mask,
            story_mask=mask,
        )

    return build


@pytest.fixture(scope="session")
def tiny_generation():
    return GenerationConfig(
        buildings={"frame": 2},
        story_ranges={"frame": [2, 4]},
        motions_per_building=1,
        directions=("x", "y"),
        duration_s=2.0,
        dt=0.02,
        train_fraction=0.75,
        workers=1,
    )


@pytest.fixture(scope="session")
def tiny_model_cfg():
    return SrfdConfig(d_model=16, window=16, n_layers=1, n_heads=2, n_kv_groups=1, n_max=4)


@pytest.fixture(scope="session")
def tiny_dataset(tmp_path_factory, tiny_generation):
    """Four-sample dataset: two frame buildings, one motion, two directions."""
    root = tmp_path_factory.mktemp("dataset")
    build_dataset(tiny_generation, seed=7, out_dir=root, workers=1)
    return root


@pytest.fixture(scope="session")
def tiny_checkpoint(tmp_path_factory, tiny_dataset, tiny_model_cfg):
    """Base checkpoint trained for a few steps on the tiny dataset."""
    out = tmp_path_factory.mktemp("run")
    cfg = TrainConfig(steps=20, batch_size=4, learning_rate=1e-3, log_every=0)
    return train(tiny_model_cfg, cfg, tiny_dataset, seed=0, out_dir=out)
