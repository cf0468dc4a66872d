# Tests for Newmark time integration

import math

import numpy as np
import pytest

from seisforge.errors import ConfigError, DomainError
from seisforge.physics import (
    BilinearSpring,
    GroundMotion,
    IntegratorParams,
    LinearRestoring,
    LumpedMassModel,
    NewmarkIntegrator,
    NewmarkState,
    ResponseHistory,
    ShearSprings,
    StorySpringLaw,
    SynthSpec,
    damping_matrix,
    interstory_drift,
    match_period,
    modal_summary,
    newmark_step,
    peak_response,
    rayleigh_coeffs,
    restoring_force,
    sdr_response,
    simulate,
    synth_record,
)
from seisforge.physics.structure import SpringKind
from seisforge.utils import make_rng

OMEGA_UNIT = 2 * math.pi


@pytest.fixture
def motion():
    spec = SynthSpec(duration=8.0, corner_frequencies=(0.5, 8.0), envelope=(1.0, 3.0, 3.0), target_pga=3.0, seed=4)
    return synth_record(spec, dt=0.02)


@pytest.fixture
def three_story():
    return LumpedMassModel(
        masses=[2.0e5, 2.0e5, 1.5e5],
        story_stiffness=[2.0e8, 1.8e8, 1.5e8],
        damping_ratio=0.05,
    )


def undamped_sdof(dt):
    M = np.array([[1.0]])
    K = np.array([[OMEGA_UNIT ** 2]])
    integrator = NewmarkIntegrator(M, np.zeros((1, 1)), LinearRestoring(K), IntegratorParams(dt=dt))
    state = NewmarkState(np.array([1.0]), np.array([0.0]), np.array([-OMEGA_UNIT ** 2]))
    return integrator, state


class TestIntegratorParams:
    def test_presets(self):
        assert IntegratorParams.average_acceleration(0.01).is_unconditionally_stable
        linear = IntegratorParams.linear_acceleration(0.01)
        assert not linear.is_unconditionally_stable
        assert linear.critical_dt(1.0) == pytest.approx(2 * math.sqrt(3))

    @pytest.mark.parametrize("kwargs", [{"dt": 0.0}, {"dt": 0.01, "gamma": 0.4}, {"dt": 0.01, "beta": -0.1}])
    def test_invalid(self, kwargs):
        with pytest.raises(DomainError):
            IntegratorParams(**kwargs)


class TestRayleigh:
    def test_substitution(self):
        alpha, beta_r = rayleigh_coeffs(0.05, 2.0, 8.0)
        assert alpha == pytest.approx(0.16, rel=1e-12)
        assert beta_r == pytest.approx(0.01, rel=1e-12)

    def test_closure(self):
        rng = make_rng(0, "rayleigh")
        for _ in range(100):
            zeta = float(rng.uniform(0.001, 0.5))
            omega1 = float(rng.uniform(0.1, 50.0))
            omega2 = omega1 * float(rng.uniform(1.01, 20.0))
            alpha, beta_r = rayleigh_coeffs(zeta, omega1, omega2)
            for omega in (omega1, omega2):
                assert 0.5 * (alpha / omega + beta_r * omega) == pytest.approx(zeta, rel=1e-12)

    @pytest.mark.parametrize("args", [(0.05, 2.0, 2.0), (0.05, 3.0, 2.0), (0.0, 1.0, 2.0), (1.0, 1.0, 2.0)])
    def test_domain(self, args):
        with pytest.raises(DomainError):
            rayleigh_coeffs(*args)

    def test_damping_matrix_matches_first_two_modes(self, three_story):
        C = damping_matrix(three_story)
        summary = modal_summary(three_story)
        phi = summary.mode_shapes
        modal = phi.T @ C @ phi
        for i in (0, 1):
            assert modal[i, i] / (2 * summary.omega[i]) == pytest.approx(0.05, rel=1e-9)


class TestNewmarkStep:
    def test_zero_state_zero_load(self):
        M, K = np.eye(2), np.array([[2.0, -1.0], [-1.0, 1.0]])
        state = newmark_step(NewmarkState.at_rest(2), M, 0.1 * K, LinearRestoring(K), np.zeros(2), IntegratorParams(dt=0.01))
        for vector in state:
            np.testing.assert_array_equal(vector, np.zeros(2))

    def test_equilibrium_at_new_step(self, three_story):
        M = np.diag(three_story.masses)
        C = damping_matrix(three_story)
        K = restoring_force(three_story).initial_stiffness
        state = NewmarkState(np.array([0.01, 0.02, 0.025]), np.array([0.1, -0.2, 0.05]), np.array([1.0, 0.5, -0.5]))
        load = np.array([1.0e5, -2.0e5, 3.0e4])
        new = newmark_step(state, M, C, LinearRestoring(K), load, IntegratorParams(dt=0.02))
        residual = M @ new.a + C @ new.v + K @ new.u - load
        assert np.max(np.abs(residual)) < 1e-8 * np.max(np.abs(load))

    def test_free_vibration_matches_cosine(self):
        dt = 1.0 / 200.0
        integrator, state = undamped_sdof(dt)
        u = [1.0]
        for _ in range(2000):
            state = integrator.step(state, np.zeros(1))
            u.append(float(state.u[0]))
        u = np.array(u)
        t = np.arange(u.size) * dt
        last_cycle = u[-200:]
        assert np.max(np.abs(last_cycle)) == pytest.approx(1.0, rel=5e-3)
        # Period elongation of the average-acceleration rule is about (omega dt)^2 / 12
        assert np.max(np.abs(u - np.cos(OMEGA_UNIT * t))) < 1e-2

    def test_energy_is_conserved(self):
        dt = 1.0 / 200.0
        integrator, state = undamped_sdof(dt)
        k = OMEGA_UNIT ** 2
        initial = 0.5 * k
        worst = 0.0
        for _ in range(10000):
            state = integrator.step(state, np.zeros(1))
            energy = 0.5 * state.v[0] ** 2 + 0.5 * k * state.u[0] ** 2
            worst = max(worst, abs(energy - initial) / initial)
        assert worst < 1e-6

    def test_static_load_settles(self):
        M = np.eye(2)
        K = np.array([[200.0, -100.0], [-100.0, 100.0]])
        omega = np.sqrt(np.linalg.eigvalsh(K))
        alpha, beta_r = rayleigh_coeffs(0.2, float(omega[0]), float(omega[1]))
        G = np.array([3.0, 5.0])
        integrator = NewmarkIntegrator(M, alpha * M + beta_r * K, LinearRestoring(K), IntegratorParams(dt=0.01))
        u, _, _ = integrator.run(np.tile(G, (4000, 1)))
        np.testing.assert_allclose(u[-1], np.linalg.solve(K, G), rtol=1e-8)


class TestBilinearSpring:
    def test_yield_and_unload(self):
        spring = BilinearSpring(StorySpringLaw(SpringKind.BILINEAR, k=1.0, post_yield_ratio=0.1, u_yield=1.0))
        force, tangent = spring.trial(0.5)
        assert (force, tangent) == (0.5, 1.0)
        force, tangent = spring.trial(2.0)
        assert force == pytest.approx(1.1)
        assert tangent == pytest.approx(0.1)
        spring.commit()
        force, tangent = spring.trial(1.5)
        assert force == pytest.approx(0.6)
        assert tangent == 1.0

    def test_reverse_yield(self):
        spring = BilinearSpring(StorySpringLaw(SpringKind.BILINEAR, k=2.0, post_yield_ratio=0.0, u_yield=0.5))
        spring.trial(-3.0)
        spring.commit()
        assert spring.force == pytest.approx(-1.0)

    def test_shear_springs_match_linear_before_yield(self):
        laws = [StorySpringLaw(SpringKind.BILINEAR, k=k, post_yield_ratio=0.1, u_yield=1.0) for k in (3.0, 2.0)]
        springs = ShearSprings(laws)
        u = np.array([0.1, 0.15])
        force, tangent = springs.trial(u)
        np.testing.assert_allclose(force, springs.initial_stiffness @ u)
        np.testing.assert_allclose(tangent, springs.initial_stiffness)


class TestSimulate:
    def test_zero_motion(self, three_story):
        gm = GroundMotion(id="quiet", dt=0.02, samples=np.zeros(100))
        response = simulate(three_story, gm, IntegratorParams(dt=0.02))
        assert response.u.shape == (3, 100)
        for array in (response.u, response.v, response.a):
            assert not np.any(array)

    def test_dt_mismatch(self, three_story, motion):
        with pytest.raises(ConfigError):
            simulate(three_story, motion, IntegratorParams(dt=0.01))

    def test_harmonic_steady_state(self):
        dt = 0.005
        t = np.arange(int(40.0 / dt) + 1) * dt
        forcing = math.pi
        gm = GroundMotion(id="harmonic", dt=dt, samples=np.sin(forcing * t))
        model = LumpedMassModel(masses=[1.0], story_stiffness=[OMEGA_UNIT ** 2], damping_ratio=0.05)
        response = simulate(model, gm, IntegratorParams.average_acceleration(dt))
        ratio = forcing / OMEGA_UNIT
        expected = (1.0 / OMEGA_UNIT ** 2) / math.sqrt((1 - ratio ** 2) ** 2 + (2 * 0.05 * ratio) ** 2)
        steady = response.u[0, t >= 30.0]
        assert np.max(np.abs(steady)) == pytest.approx(expected, rel=0.01)

    def test_infinite_yield_is_linear(self, three_story, motion):
        params = IntegratorParams(dt=motion.dt)
        linear = simulate(three_story, motion, params)
        bilinear = simulate(three_story.with_bilinear(0.1, math.inf), motion, params)
        assert linear.u.tobytes() == bilinear.u.tobytes()
        assert linear.a.tobytes() == bilinear.a.tobytes()

    def test_yielding_changes_response(self, three_story, motion):
        params = IntegratorParams(dt=motion.dt)
        linear = simulate(three_story, motion, params)
        first_story = np.max(np.abs(linear.u[0]))
        yielding = three_story.with_bilinear(0.05, 0.3 * first_story)
        response = simulate(yielding, motion, params)
        assert not np.allclose(response.u, linear.u)

    def test_total_acceleration_includes_ground(self, three_story, motion):
        response = simulate(three_story, motion, IntegratorParams(dt=motion.dt))
        # At rest the relative acceleration at t=0 is -a_g, so the total is zero
        np.testing.assert_allclose(response.a[:, 0], 0.0, atol=1e-12)

    def test_bytes_round_trip(self, three_story, motion):
        response = simulate(three_story, motion, IntegratorParams(dt=motion.dt))
        restored = ResponseHistory.from_bytes(response.to_bytes())
        np.testing.assert_array_equal(restored.u, response.u.astype(np.float32))
        assert restored.dt == response.dt


class TestSdrResponse:
    def test_linear_matched_oracle_is_identical(self, three_story, motion):
        params = IntegratorParams(dt=motion.dt)
        oracle = simulate(three_story, motion, params)
        sdr = sdr_response(three_story, motion, params, oracle_period=modal_summary(three_story).T1)
        assert sdr.u.tobytes() == oracle.u.tobytes()

    def test_bilinear_oracle_differs(self, three_story, motion):
        params = IntegratorParams(dt=motion.dt)
        linear_peak = np.max(np.abs(simulate(three_story, motion, params).u[0]))
        oracle_model = three_story.with_bilinear(0.05, 0.2 * linear_peak)
        oracle = simulate(oracle_model, motion, params)
        sdr = sdr_response(oracle_model, motion, params)
        assert np.mean((sdr.u - oracle.u) ** 2) / np.mean(oracle.u ** 2) > 0.0

    def test_period_matching_applied(self, three_story, motion):
        params = IntegratorParams(dt=motion.dt)
        target = 0.8 * modal_summary(three_story).T1
        sdr = sdr_response(three_story, motion, params, oracle_period=target)
        expected = simulate(match_period(three_story, target), motion, params)
        np.testing.assert_array_equal(sdr.u, expected.u)

    def test_zero_motion(self, three_story):
        gm = GroundMotion(id="quiet", dt=0.02, samples=np.zeros(10))
        assert not np.any(sdr_response(three_story, gm, IntegratorParams(dt=0.02)).u)


class TestDrift:
    def make_history(self, u):
        u = np.asarray(u, dtype=np.float64)
        return ResponseHistory(dt=0.02, u=u, v=np.zeros_like(u), a=np.zeros_like(u))

    def test_single_story(self):
        drift = interstory_drift(self.make_history([[0.03]]), 3.0)
        assert drift[0, 0] == pytest.approx(0.01)

    def test_rigid_body(self):
        drift = interstory_drift(self.make_history(np.full((4, 5), 0.2)), 3.0)
        assert not np.any(drift[1:])

    def test_telescoping_sum(self):
        u = make_rng(0, "drift").normal(size=(6, 40))
        drift = interstory_drift(self.make_history(u), 3.2)
        np.testing.assert_allclose(np.sum(drift * 3.2, axis=0), u[-1], atol=1e-12)

    def test_peaks(self):
        history = self.make_history([[0.03, -0.06], [0.09, -0.09]])
        peaks = peak_response(history, 3.0)
        np.testing.assert_allclose(peaks.displacement, [0.06, 0.09])
        np.testing.assert_allclose(peaks.drift, [0.02, 0.02])
        assert peaks.max_drift == pytest.approx(0.02)

    def test_bad_height(self):
        with pytest.raises(DomainError):
            interstory_drift(self.make_history([[0.0]]), 0.0)
