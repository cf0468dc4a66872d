# Tests for buildings and lumped-mass models

import math
from dataclasses import replace

import numpy as np
import pytest

from seisforge.errors import ConfigError, DomainError, RegenerationError
from seisforge.errors.retry import RegenerationPolicy
from seisforge.formats.records import STANDARD_GRAVITY
from seisforge.physics import (
    BuildingConfig,
    ConcreteGrade,
    Direction,
    LumpedMassModel,
    SpringKind,
    StorySpringLaw,
    StructureType,
    apply_scale,
    assemble_matrices,
    axial_load_ratio,
    fundamental_periods,
    match_period,
    modal_summary,
    reduce_to_mdof,
    sample_building,
    stiffness_scale_factor,
)
from seisforge.utils import make_rng


@pytest.fixture
def reference_building():
    return BuildingConfig(
        n_stories=3,
        floor_height_m=3.0,
        slab_thickness_mm=100,
        n_spans_x=4,
        n_spans_y=4,
        span_length_m=6.0,
        aspect_ratio=1.0,
        column_size_mm=(500, 500),
        beam_size_mm=(300, 600),
        wall_thickness_mm=None,
        concrete_grade=ConcreteGrade.C30,
        rebar_strength_mpa=400,
        structure_type=StructureType.FRAME,
    )


def random_model(rng, n):
    return LumpedMassModel(
        masses=rng.uniform(1e5, 5e5, size=n),
        story_stiffness=rng.uniform(1e8, 1e9, size=n),
        damping_ratio=0.05,
    )


class TestBuildingConfig:
    def test_story_band_enforced(self, reference_building):
        with pytest.raises(DomainError):
            replace(reference_building, n_stories=12)

    @pytest.mark.parametrize(
        "field, value",
        [
            ("floor_height_m", 2.5),
            ("slab_thickness_mm", 160),
            ("n_spans_x", 11),
            ("span_length_m", 4.0),
            ("aspect_ratio", 0.5),
            ("rebar_strength_mpa", 500),
            ("wall_thickness_mm", 150),
        ],
    )
    def test_ranges_enforced(self, reference_building, field, value):
        with pytest.raises(DomainError):
            replace(reference_building, **{field: value})

    def test_document_round_trip(self, reference_building):
        document = reference_building.to_document()
        assert BuildingConfig.from_document(document) == reference_building

    def test_unknown_key(self, reference_building):
        document = dict(reference_building.to_document(), floors=3)
        with pytest.raises(ConfigError) as excinfo:
            BuildingConfig.from_document(document)
        assert excinfo.value.key == "building.floors"

    def test_concrete_modulus(self):
        assert ConcreteGrade.C30.elastic_modulus == pytest.approx(4700.0 * math.sqrt(30.0) * 1e6)


class TestSampleBuilding:
    def test_frame_story_band(self):
        for seed in range(50):
            cfg = sample_building(StructureType.FRAME, seed)
            assert 1 <= cfg.n_stories <= 10
            assert cfg.wall_thickness_mm is None

    def test_walled_types(self):
        cfg = sample_building(StructureType.COMPLEX_SHEAR, 3)
        assert 20 <= cfg.n_stories <= 33
        assert cfg.wall_thickness_mm is not None

    def test_deterministic(self):
        assert sample_building(StructureType.SHEAR_FRAME, 7) == sample_building(StructureType.SHEAR_FRAME, 7)

    def test_story_range_narrows(self):
        cfg = sample_building(StructureType.FRAME, 1, story_range=(2, 3))
        assert cfg.n_stories in (2, 3)

    def test_story_range_outside_band(self):
        with pytest.raises(ConfigError):
            sample_building(StructureType.FRAME, 1, story_range=(5, 12))

    def test_axial_limit(self):
        for seed in range(20):
            assert axial_load_ratio(sample_building(StructureType.COMPLEX_SHEAR, seed)) <= 0.9

    def test_exhausted_policy(self, monkeypatch):
        monkeypatch.setattr("seisforge.physics.structure.AXIAL_LIMIT", 0.0)
        with pytest.raises(RegenerationError):
            sample_building(StructureType.FRAME, 0, policy=RegenerationPolicy(max_attempts=3))

    @pytest.mark.slow
    def test_fields_stay_in_ranges(self):
        types = list(StructureType)
        rng = make_rng(0, "table")
        for seed in range(2000):
            cfg = sample_building(types[int(rng.integers(0, 3))], seed)
            assert 3.0 <= cfg.floor_height_m <= 3.6
            assert 80 <= cfg.slab_thickness_mm <= 150
            assert 3 <= cfg.n_spans_x <= 10 and 3 <= cfg.n_spans_y <= 10
            assert 5.0 <= cfg.span_length_m <= 10.0
            assert 2.0 / 3.0 <= cfg.aspect_ratio <= 1.0
            assert 355 <= cfg.rebar_strength_mpa <= 400
            if cfg.wall_thickness_mm is not None:
                assert 200 <= cfg.wall_thickness_mm <= 400


class TestReduceToMdof:
    def test_hand_evaluated_reference(self, reference_building):
        model = reduce_to_mdof(reference_building, Direction.X)
        concrete = 576.0 * 0.1 + 25 * 0.5 * 0.5 * 3.0 + 240.0 * 0.3 * 0.6
        mass = 2500.0 * concrete + 500.0 / STANDARD_GRAVITY * 576.0
        e_c = 4700.0 * math.sqrt(30.0) * 1e6
        stiffness = 25 * 12.0 * e_c * (0.5 ** 4 / 12.0) / 3.0 ** 3
        np.testing.assert_allclose(model.masses, [mass] * 3, rtol=1e-12)
        np.testing.assert_allclose(model.story_stiffness, [stiffness] * 3, rtol=1e-12)
        assert model.floor_height_m == 3.0

    def test_thicker_slab_is_heavier(self, reference_building):
        thin = reduce_to_mdof(replace(reference_building, slab_thickness_mm=80))
        thick = reduce_to_mdof(replace(reference_building, slab_thickness_mm=150))
        assert np.all(thick.masses > thin.masses)

    def test_walls_add_stiffness(self, reference_building):
        frame = replace(reference_building, structure_type=StructureType.SHEAR_FRAME, n_stories=12)
        walled = replace(frame, wall_thickness_mm=300)
        for direction in Direction:
            assert np.all(reduce_to_mdof(walled, direction).story_stiffness > reduce_to_mdof(frame, direction).story_stiffness)

    def test_rectangular_columns_differ_by_direction(self, reference_building):
        cfg = replace(reference_building, column_size_mm=(400, 600))
        kx = reduce_to_mdof(cfg, Direction.X).story_stiffness[0]
        ky = reduce_to_mdof(cfg, Direction.Y).story_stiffness[0]
        assert kx == pytest.approx(ky * (600 / 400) ** 2)


class TestLumpedMassModel:
    def test_validation(self):
        with pytest.raises(DomainError):
            LumpedMassModel(masses=[1.0, -1.0], story_stiffness=[1.0, 1.0])
        with pytest.raises(DomainError):
            LumpedMassModel(masses=[1.0], story_stiffness=[0.0])
        with pytest.raises(DomainError):
            LumpedMassModel(masses=[1.0], story_stiffness=[1.0], damping_ratio=0.2)
        with pytest.raises(DomainError):
            LumpedMassModel(masses=[1.0, 2.0], story_stiffness=[1.0])

    def test_default_springs_are_linear(self):
        model = LumpedMassModel(masses=[1.0, 1.0], story_stiffness=[3.0, 2.0])
        assert [law.k for law in model.spring_law] == [3.0, 2.0]
        assert model.is_linear

    def test_bilinear_and_back(self):
        model = LumpedMassModel(masses=[1.0, 1.0], story_stiffness=[3.0, 2.0]).with_bilinear(0.1, 0.01)
        assert not model.is_linear
        assert all(law.kind is SpringKind.BILINEAR for law in model.spring_law)
        assert model.as_linear().is_linear

    def test_document_round_trip(self):
        model = LumpedMassModel(masses=[1.0, 2.0], story_stiffness=[3.0, 4.0]).with_bilinear(0.05, [0.01, 0.02])
        restored = LumpedMassModel.from_document(model.to_document())
        np.testing.assert_array_equal(restored.masses, model.masses)
        assert restored.spring_law == model.spring_law

    def test_infinite_yield_documented_as_null(self):
        law = StorySpringLaw(k=2.0)
        assert law.to_document()["u_yield_m"] is None
        assert StorySpringLaw.from_document(law.to_document()) == law


class TestMatrices:
    def test_single_story(self):
        M, K = assemble_matrices(LumpedMassModel(masses=[2.0], story_stiffness=[5.0]))
        np.testing.assert_array_equal(M, [[2.0]])
        np.testing.assert_array_equal(K, [[5.0]])

    def test_two_story(self):
        _, K = assemble_matrices(LumpedMassModel(masses=[1.0, 1.0], story_stiffness=[1.0, 1.0]))
        np.testing.assert_array_equal(K, [[2.0, -1.0], [-1.0, 1.0]])

    def test_random_models_positive_definite(self):
        rng = make_rng(0, "matrices")
        for _ in range(20):
            _, K = assemble_matrices(random_model(rng, int(rng.integers(1, 8))))
            np.testing.assert_array_equal(K, K.T)
            assert np.all(np.linalg.eigvalsh(K) > 0)


class TestModalAnalysis:
    def test_single_story_period(self):
        summary = fundamental_periods(np.array([[1.0]]), np.array([[4 * math.pi ** 2]]))
        assert summary.T1 == pytest.approx(1.0, rel=1e-12)

    def test_two_story_roots(self):
        summary = fundamental_periods(np.eye(2), np.array([[2.0, -1.0], [-1.0, 1.0]]))
        expected = [(3 - math.sqrt(5)) / 2, (3 + math.sqrt(5)) / 2]
        np.testing.assert_allclose(summary.omega ** 2, expected, rtol=1e-10)
        assert summary.T1 == pytest.approx(10.1664, abs=1e-4)

    def test_stiffness_scaling_doubles_frequencies(self):
        rng = make_rng(1, "modal")
        model = random_model(rng, 4)
        base = modal_summary(model)
        stiff = modal_summary(LumpedMassModel(masses=model.masses, story_stiffness=4 * model.story_stiffness))
        np.testing.assert_allclose(stiff.omega, 2 * base.omega, rtol=1e-10)

    def test_mode_shapes_mass_normalized(self):
        model = random_model(make_rng(2, "modal"), 5)
        summary = modal_summary(model)
        M, K = assemble_matrices(model)
        phi = summary.mode_shapes
        np.testing.assert_allclose(phi.T @ M @ phi, np.eye(5), atol=1e-9)
        np.testing.assert_allclose(phi.T @ K @ phi, np.diag(summary.omega ** 2), rtol=1e-8, atol=1e-6)
        assert np.all(phi[-1] > 0)

    def test_dense_stiffness(self):
        K = np.array([[3.0, -1.0, 0.5], [-1.0, 2.0, -1.0], [0.5, -1.0, 1.0]])
        summary = fundamental_periods(np.eye(3), K)
        np.testing.assert_allclose(summary.omega ** 2, np.linalg.eigvalsh(K), rtol=1e-10)

    def test_rejects_non_diagonal_mass(self):
        with pytest.raises(DomainError):
            fundamental_periods(np.array([[1.0, 0.1], [0.1, 1.0]]), np.eye(2))


class TestPeriodMatching:
    @pytest.mark.parametrize("T, T_hat, S", [(1.0, 2.0, 0.25), (1.5, 1.5, 1.0), (2.0, 1.0, 4.0)])
    def test_scale_factor(self, T, T_hat, S):
        assert stiffness_scale_factor(T, T_hat) == S

    def test_non_positive_period(self):
        with pytest.raises(DomainError):
            stiffness_scale_factor(0.0, 1.0)

    def test_identity_scale(self):
        model = LumpedMassModel(masses=[1.0], story_stiffness=[5.0])
        assert apply_scale(model, 1.0) is model

    def test_two_seconds_to_one(self):
        k = 4 * math.pi ** 2 / 4.0
        model = LumpedMassModel(masses=[1.0], story_stiffness=[k])
        assert modal_summary(model).T1 == pytest.approx(2.0)
        scaled = match_period(model, 1.0)
        assert modal_summary(scaled).T1 == pytest.approx(1.0, rel=1e-9)

    def test_uniform_two_story_quadrupled(self):
        model = LumpedMassModel(masses=[1.0, 1.0], story_stiffness=[1.0, 1.0])
        scaled = apply_scale(model, 0.25)
        np.testing.assert_allclose(scaled.story_stiffness, [4.0, 4.0])
        assert modal_summary(scaled).T1 == pytest.approx(modal_summary(model).T1 / 2, rel=1e-12)

    def test_bilinear_laws_follow(self):
        model = LumpedMassModel(masses=[1.0], story_stiffness=[2.0]).with_bilinear(0.1, 0.05)
        scaled = apply_scale(model, 0.5)
        assert scaled.spring_law[0].k == 4.0
        assert scaled.spring_law[0].u_yield == 0.05

    def test_random_models(self):
        rng = make_rng(5, "period-matching")
        for _ in range(100):
            model = random_model(rng, int(rng.integers(1, 12)))
            target = float(rng.uniform(0.1, 5.0))
            assert modal_summary(match_period(model, target)).T1 == pytest.approx(target, rel=1e-9)
