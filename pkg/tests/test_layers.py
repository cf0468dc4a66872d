# Tests for decoder building blocks

import math

import pytest
import torch

from seisforge.errors import ConfigError
from seisforge.model import (
    GQAttention,
    PhysicsAttention,
    RMSNorm,
    SrfdConfig,
    SwiGLU,
    causal_mask,
    rms_norm,
    rope,
    rope_angles,
    silu,
)


@pytest.fixture
def generator():
    return torch.Generator().manual_seed(1234)


@pytest.fixture
def cfg():
    return SrfdConfig(d_model=8, window=6, n_layers=1, n_heads=2, n_kv_groups=1, n_max=3, dtype="float64")


def randn(generator, *shape):
    return torch.randn(*shape, generator=generator, dtype=torch.float64)


class TestSrfdConfig:
    @pytest.mark.parametrize(
        "kwargs, key",
        [
            ({"d_model": 10, "n_heads": 4}, "n_heads"),
            ({"n_heads": 4, "n_kv_groups": 3}, "n_kv_groups"),
            ({"d_model": 12, "n_heads": 4, "n_kv_groups": 2}, "d_model"),
            ({"window": 1}, "window"),
            ({"n_max": 0}, "n_max"),
            ({"lora_rank": -1}, "lora_rank"),
            ({"dtype": "float16"}, "dtype"),
        ],
    )
    def test_invalid(self, kwargs, key):
        with pytest.raises(ConfigError) as excinfo:
            SrfdConfig(**kwargs)
        assert excinfo.value.key == key

    def test_derived_widths(self):
        cfg = SrfdConfig(d_model=16, n_heads=2, n_max=4, ffn_mult=2.0)
        assert cfg.d_head == 8
        assert cfg.out_channels == 8
        assert cfg.input_channels == 17
        assert cfg.hidden_width == 32

    def test_document_round_trip(self, cfg):
        assert SrfdConfig.from_document(cfg.to_document()) == cfg

    def test_unknown_key(self, cfg):
        document = cfg.to_document()
        document["heads"] = 3
        with pytest.raises(ConfigError):
            SrfdConfig.from_document(document)


class TestRmsNorm:
    def test_example(self):
        out = rms_norm(torch.tensor([3.0, 4.0], dtype=torch.float64), torch.ones(2, dtype=torch.float64))
        assert out.tolist() == pytest.approx([0.848528, 1.131371], abs=1e-6)

    def test_zeros_stay_zero(self):
        out = rms_norm(torch.zeros(5), torch.ones(5))
        assert torch.equal(out, torch.zeros(5))

    def test_unit_rms(self, generator):
        x = randn(generator, 4, 7, 32) * 100.0
        out = RMSNorm(32).to(torch.float64)(x)
        rms = out.pow(2).mean(dim=-1).sqrt()
        torch.testing.assert_close(rms, torch.ones_like(rms), rtol=1e-6, atol=0.0)


class TestRope:
    def test_position_zero_is_identity(self, generator):
        x = randn(generator, 1, 8)
        assert torch.equal(rope(x, torch.tensor([0])), x)

    def test_preserves_norm(self, generator):
        x = randn(generator, 2, 10, 8)
        out = rope(x, torch.arange(10))
        torch.testing.assert_close(out.norm(dim=-1), x.norm(dim=-1))

    def test_dot_product_depends_on_offset(self, generator):
        q, k = randn(generator, 1, 8), randn(generator, 1, 8)

        def score(m, n):
            return float((rope(q, torch.tensor([m])) * rope(k, torch.tensor([n]))).sum())

        assert score(5, 2) == pytest.approx(score(13, 10), rel=1e-10)
        assert score(7, 7) == pytest.approx(float((q * k).sum()), rel=1e-10)

    def test_odd_head_width(self):
        with pytest.raises(ConfigError):
            rope_angles(torch.arange(3), 5)


class TestSwiGLU:
    def test_silu(self):
        assert float(silu(torch.tensor(0.0))) == 0.0
        assert float(silu(torch.tensor(2.0))) == pytest.approx(2.0 / (1.0 + math.exp(-2.0)))

    def test_zero_gate_gives_zero(self, generator):
        ffn = SwiGLU(8, 16).to(torch.float64)
        with torch.no_grad():
            ffn.gate.weight.zero_()
        out = ffn(randn(generator, 3, 8))
        assert torch.equal(out, torch.zeros_like(out))


class TestPhysicsAttention:
    def test_rows_are_causal_distributions(self, cfg, generator):
        attn = PhysicsAttention(cfg).to(torch.float64)
        x = randn(generator, 2, cfg.window, cfg.d_model)
        story = torch.rand(2, cfg.n_max, generator=generator, dtype=torch.float64)
        mask = torch.ones(2, cfg.n_max, dtype=torch.bool)
        _, (attn_mass, attn_stiffness) = attn(x, story, story, mask, return_weights=True)
        for weights in (attn_mass, attn_stiffness):
            torch.testing.assert_close(weights.sum(dim=-1), torch.ones(2, cfg.n_heads, cfg.window, dtype=torch.float64))
            assert torch.all(weights[..., ~causal_mask(cfg.window)] == 0.0)

    def test_zero_input(self, cfg, generator):
        attn = PhysicsAttention(cfg).to(torch.float64)
        x = torch.zeros(1, cfg.window, cfg.d_model, dtype=torch.float64)
        story = torch.rand(1, cfg.n_max, generator=generator, dtype=torch.float64)
        mask = torch.ones(1, cfg.n_max, dtype=torch.bool)
        out, (attn_mass, _) = attn(x, story, story, mask, return_weights=True)
        assert torch.equal(out, torch.zeros_like(out))
        for i in range(cfg.window):
            torch.testing.assert_close(attn_mass[0, 0, i, : i + 1], torch.full((i + 1,), 1.0 / (i + 1), dtype=torch.float64))

    def test_identical_branches_double(self, cfg, generator):
        attn = PhysicsAttention(cfg).to(torch.float64)
        with torch.no_grad():
            attn.q_stiffness.weight.copy_(attn.q_mass.weight)
            attn.k_stiffness.weight.copy_(attn.k_mass.weight)
            attn.u_stiffness.copy_(attn.u_mass)
        x = randn(generator, 1, cfg.window, cfg.d_model)
        story = torch.rand(1, cfg.n_max, generator=generator, dtype=torch.float64)
        mask = torch.ones(1, cfg.n_max, dtype=torch.bool)
        out, (attn_mass, attn_stiffness) = attn(x, story, story, mask, return_weights=True)
        assert torch.equal(attn_mass, attn_stiffness)
        v = attn.value(x).view(1, cfg.window, cfg.n_heads, cfg.d_head).transpose(1, 2)
        expected = attn.out((2.0 * attn_mass @ v).transpose(1, 2).reshape(1, cfg.window, cfg.d_model))
        torch.testing.assert_close(out, expected)

    def test_kernel_is_symmetric_psd(self, cfg, generator):
        u = randn(generator, cfg.d_head, cfg.n_max)
        story = torch.rand(2, cfg.n_max, generator=generator, dtype=torch.float64)
        kernel = PhysicsAttention.kernel(u, story)
        torch.testing.assert_close(kernel, kernel.transpose(-2, -1))
        assert torch.all(torch.linalg.eigvalsh(kernel) >= -1e-12)

    def test_padded_stories_are_ignored(self, cfg, generator):
        attn = PhysicsAttention(cfg).to(torch.float64)
        x = randn(generator, 1, cfg.window, cfg.d_model)
        story = torch.rand(1, cfg.n_max, generator=generator, dtype=torch.float64)
        mask = torch.tensor([[True, True, False]])
        changed = story.clone()
        changed[0, 2] = 100.0
        torch.testing.assert_close(attn(x, story, story, mask), attn(x, changed, changed, mask))


class TestGQAttention:
    def test_single_group_matches_shared_heads(self, generator):
        grouped = SrfdConfig(d_model=8, n_heads=2, n_kv_groups=1, n_max=3, dtype="float64")
        full = SrfdConfig(d_model=8, n_heads=2, n_kv_groups=2, n_max=3, dtype="float64")
        gqa = GQAttention(grouped).to(torch.float64)
        mha = GQAttention(full).to(torch.float64)
        with torch.no_grad():
            mha.query.weight.copy_(gqa.query.weight)
            mha.out.weight.copy_(gqa.out.weight)
            mha.key.weight.copy_(gqa.key.weight.repeat(2, 1))
            mha.value.weight.copy_(gqa.value.weight.repeat(2, 1))
        x = randn(generator, 2, 6, 8)
        torch.testing.assert_close(gqa(x), mha(x), rtol=0.0, atol=1e-12)

    def test_single_step_returns_value_projection(self, generator):
        cfg = SrfdConfig(d_model=8, n_heads=2, n_kv_groups=2, n_max=3, dtype="float64")
        gqa = GQAttention(cfg).to(torch.float64)
        x = randn(generator, 1, 1, 8)
        out, (attn,) = gqa(x, return_weights=True)
        assert torch.equal(attn, torch.ones_like(attn))
        torch.testing.assert_close(out, gqa.out(gqa.value(x)))

    def test_causal(self, cfg, generator):
        gqa = GQAttention(cfg).to(torch.float64)
        x = randn(generator, 1, cfg.window, cfg.d_model)
        changed = x.clone()
        changed[:, 4:] += 1.0
        torch.testing.assert_close(gqa(x)[:, :4], gqa(changed)[:, :4], rtol=0.0, atol=1e-12)
