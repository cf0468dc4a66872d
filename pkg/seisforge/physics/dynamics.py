"""
Newmark time integration of shear-building models under ground motion.

The same integrator produces the oracle response (optionally with bilinear
hysteretic springs) and the simplified dynamic response (SDR) features
(always linear, period-matched).
"""

import abc
import logging
import math
from dataclasses import dataclass
from typing import List, NamedTuple, Optional, Sequence, Tuple

import numpy as np
from scipy import linalg

from seisforge.errors import ConfigError, DomainError, NumericalError
from seisforge.formats.response_file import ResponseBlockCodec
from seisforge.physics.ground_motion import GroundMotion
from seisforge.physics.structure import (
    LumpedMassModel,
    StorySpringLaw,
    assemble_matrices,
    match_period,
    modal_summary,
    shear_stiffness,
)

# Logger
logger = logging.getLogger("seisforge.physics.dynamics")

MAX_NEWTON_ITERATIONS = 50
NEWTON_RTOL = 1e-8
NEWTON_ATOL = 1e-12


@dataclass(frozen=True)
class IntegratorParams:
    """
    Newmark parameters.

    Uses the classical convention ``u_{n+1} = u_n + dt v_n + dt^2
    ((1/2 - beta) a_n + beta a_{n+1})`` and ``v_{n+1} = v_n + dt ((1 -
    gamma) a_n + gamma a_{n+1})``.
    """

    dt: float
    gamma: float = 0.5
    beta: float = 0.25

    def __post_init__(self) -> None:
        if not (self.dt > 0 and math.isfinite(self.dt)):
            raise DomainError(f"dt must be positive, got {self.dt!r}", key="dt")
        if self.gamma < 0.5:
            raise DomainError("gamma below 1/2 introduces negative numerical damping", key="gamma")
        if self.beta < 0:
            raise DomainError("beta must be non-negative", key="beta")

    @classmethod
    def average_acceleration(cls, dt: float) -> "IntegratorParams":
        """Constant average acceleration, gamma = 1/2, beta = 1/4."""
        return cls(dt=dt, gamma=0.5, beta=0.25)

    @classmethod
    def linear_acceleration(cls, dt: float) -> "IntegratorParams":
        """Linear acceleration within a step, gamma = 1/2, beta = 1/6."""
        return cls(dt=dt, gamma=0.5, beta=1.0 / 6.0)

    @property
    def is_unconditionally_stable(self) -> bool:
        return self.gamma >= 0.5 and self.beta >= 0.25 * (self.gamma + 0.5) ** 2

    def critical_dt(self, omega_max: float) -> float:
        """
        Largest stable step for a conditionally stable preset.

        Args:
            omega_max: Highest natural frequency, rad/s

        Returns:
            Critical time step (infinite when unconditionally stable)
        """
        if self.is_unconditionally_stable:
            return math.inf
        return 1.0 / (omega_max * math.sqrt(0.5 * self.gamma - self.beta))


class NewmarkState(NamedTuple):
    """Displacement, velocity and relative acceleration vectors."""

    u: np.ndarray
    v: np.ndarray
    a: np.ndarray

    @classmethod
    def at_rest(cls, n: int) -> "NewmarkState":
        return cls(np.zeros(n), np.zeros(n), np.zeros(n))


@dataclass(frozen=True)
class ResponseHistory:
    """
    Floor response histories, shape (n_stories, n_steps).

    ``a`` holds total accelerations (relative plus ground).
    """

    dt: float
    u: np.ndarray
    v: np.ndarray
    a: np.ndarray

    def __post_init__(self) -> None:
        arrays = [np.array(x, dtype=np.float64) for x in (self.u, self.v, self.a)]
        if arrays[0].ndim != 2 or any(x.shape != arrays[0].shape for x in arrays):
            raise DomainError("u, v and a must share one (n_stories, n_steps) shape")
        for name, array in zip("uva", arrays):
            if not np.all(np.isfinite(array)):
                raise NumericalError(f"response history {name} contains non-finite values")
            array.setflags(write=False)
            object.__setattr__(self, name, array)

    @property
    def n_stories(self) -> int:
        return int(self.u.shape[0])

    @property
    def n_steps(self) -> int:
        return int(self.u.shape[1])

    def to_bytes(self) -> bytes:
        """Serialize as an ``SFRH`` block."""
        return ResponseBlockCodec.encode(self.dt, self.u, self.v, self.a)

    @classmethod
    def from_bytes(cls, data: bytes, offset: int = 0) -> "ResponseHistory":
        (dt, u, v, a), _ = ResponseBlockCodec.decode(data, offset)
        return cls(dt=dt, u=u, v=v, a=a)


@dataclass(frozen=True)
class PeakResponse:
    """Per-story peaks of a response history."""

    displacement: np.ndarray
    acceleration: np.ndarray
    drift: np.ndarray

    @property
    def max_drift(self) -> float:
        return float(np.max(self.drift))


def rayleigh_coeffs(zeta: float, omega1: float, omega2: float) -> Tuple[float, float]:
    """
    Rayleigh damping coefficients matching ``zeta`` at two frequencies.

    Args:
        zeta: Damping ratio in (0, 1)
        omega1: Lower frequency, rad/s
        omega2: Upper frequency, rad/s

    Returns:
        Tuple of (alpha, beta_r) with C = alpha M + beta_r K

    Raises:
        DomainError: If 0 < zeta < 1 or 0 < omega1 < omega2 is violated
    """
    if not 0.0 < zeta < 1.0:
        raise DomainError(f"damping ratio must lie in (0, 1), got {zeta!r}")
    if not 0.0 < omega1 < omega2:
        raise DomainError(f"need 0 < omega1 < omega2, got {omega1!r}, {omega2!r}")
    total = omega1 + omega2
    return 2.0 * zeta * omega1 * omega2 / total, 2.0 * zeta / total


def damping_matrix(model: LumpedMassModel) -> np.ndarray:
    """
    Rayleigh damping matrix from the first two modal frequencies.

    A single-story model uses 3 omega1 as its second frequency.
    """
    M, K = assemble_matrices(model.as_linear())
    omega = modal_summary(model).omega
    omega2 = omega[1] if omega.size > 1 else 3.0 * omega[0]
    alpha, beta_r = rayleigh_coeffs(model.damping_ratio, float(omega[0]), float(omega2))
    return alpha * M + beta_r * K


class BilinearSpring:
    """
    Bilinear spring with kinematic hardening and elastic unloading.

    The force is bounded by two parallel lines of slope ``r k`` offset by
    ``(1 - r) k u_yield``; inside the band the spring unloads elastically
    with slope ``k``.

    Args:
        law: Spring law
    """

    def __init__(self, law: StorySpringLaw):
        self.law = law
        self._u = 0.0
        self._f = 0.0
        self._trial: Tuple[float, float] = (0.0, 0.0)

    @property
    def displacement(self) -> float:
        """Committed deformation."""
        return self._u

    @property
    def force(self) -> float:
        """Committed force."""
        return self._f

    def trial(self, u: float) -> Tuple[float, float]:
        """
        Evaluate the spring at a trial deformation from the committed state.

        Args:
            u: Trial deformation

        Returns:
            Tuple of (force, tangent stiffness)
        """
        k = self.law.k
        f = self._f + k * (u - self._u)
        tangent = k
        if math.isfinite(self.law.u_yield):
            hardening = self.law.post_yield_ratio * k
            offset = (k - hardening) * self.law.u_yield
            upper = hardening * u + offset
            lower = hardening * u - offset
            if f > upper:
                f, tangent = upper, hardening
            elif f < lower:
                f, tangent = lower, hardening
        self._trial = (u, f)
        return f, tangent

    def commit(self) -> None:
        """Accept the last trial state."""
        self._u, self._f = self._trial


class RestoringForce(abc.ABC):
    """Internal force law of a structure."""

    @property
    @abc.abstractmethod
    def initial_stiffness(self) -> np.ndarray:
        """Elastic stiffness matrix."""
        pass

    @property
    def is_linear(self) -> bool:
        return False

    @abc.abstractmethod
    def trial(self, u: np.ndarray) -> Tuple[np.ndarray, np.ndarray]:
        """
        Evaluate at a trial displacement.

        Args:
            u: Floor displacements

        Returns:
            Tuple of (nodal forces, tangent stiffness matrix)
        """
        pass

    def commit(self) -> None:
        """Accept the last trial state."""
        pass


class LinearRestoring(RestoringForce):
    """Restoring force ``K u``."""

    def __init__(self, K: np.ndarray):
        self._K = np.asarray(K, dtype=np.float64)

    @property
    def initial_stiffness(self) -> np.ndarray:
        return self._K

    @property
    def is_linear(self) -> bool:
        return True

    def trial(self, u: np.ndarray) -> Tuple[np.ndarray, np.ndarray]:
        return self._K @ u, self._K


class ShearSprings(RestoringForce):
    """
    Shear-building restoring force from one spring per story.

    Args:
        laws: Spring laws, bottom story first
    """

    def __init__(self, laws: Sequence[StorySpringLaw]):
        self.springs: List[BilinearSpring] = [BilinearSpring(law) for law in laws]
        self._K0 = shear_stiffness([law.k for law in laws])

    @property
    def initial_stiffness(self) -> np.ndarray:
        return self._K0

    def trial(self, u: np.ndarray) -> Tuple[np.ndarray, np.ndarray]:
        drift = np.diff(u, prepend=0.0)
        story_force = np.empty_like(drift)
        story_tangent = np.empty_like(drift)
        for i, spring in enumerate(self.springs):
            story_force[i], story_tangent[i] = spring.trial(float(drift[i]))
        nodal = story_force - np.append(story_force[1:], 0.0)
        return nodal, shear_stiffness(story_tangent)

    def commit(self) -> None:
        for spring in self.springs:
            spring.commit()


def restoring_force(model: LumpedMassModel) -> RestoringForce:
    """Get the restoring-force law of a model."""
    if model.is_linear:
        return LinearRestoring(assemble_matrices(model)[1])
    return ShearSprings(model.spring_law)


class NewmarkIntegrator:
    """
    Implicit Newmark integrator in effective-mass form.

    For a linear restoring force the effective matrix
    ``M + gamma dt C + beta dt^2 K`` is factorized once; otherwise each step
    runs Newton iterations on the acceleration with the tangent stiffness.

    Args:
        M: Mass matrix
        C: Damping matrix
        restoring: Restoring-force law
        params: Newmark parameters
    """

    def __init__(
        self,
        M: np.ndarray,
        C: np.ndarray,
        restoring: RestoringForce,
        params: IntegratorParams,
    ):
        self.M = np.asarray(M, dtype=np.float64)
        self.C = np.asarray(C, dtype=np.float64)
        self.restoring = restoring
        self.params = params
        self.newton_iterations = 0
        self._factor: Optional[Tuple[np.ndarray, bool]] = None
        if restoring.is_linear:
            effective = self._effective(restoring.initial_stiffness)
            try:
                self._factor = linalg.cho_factor(effective)
            except linalg.LinAlgError as e:
                raise NumericalError(f"effective matrix is not positive definite: {e}") from e

    def _effective(self, stiffness: np.ndarray) -> np.ndarray:
        dt = self.params.dt
        return self.M + self.params.gamma * dt * self.C + self.params.beta * dt * dt * stiffness

    def initial_state(self, load: np.ndarray) -> NewmarkState:
        """
        Consistent state at rest under an initial load.

        Args:
            load: Load vector at t = 0

        Returns:
            State with zero displacement and velocity
        """
        n = self.M.shape[0]
        a0 = linalg.solve(self.M, np.asarray(load, dtype=np.float64), assume_a="pos")
        return NewmarkState(np.zeros(n), np.zeros(n), a0)

    def step(self, state: NewmarkState, load: np.ndarray) -> NewmarkState:
        """
        Advance one time step.

        Args:
            state: State at step n
            load: Load vector at step n+1

        Returns:
            State at step n+1

        Raises:
            NumericalError: If Newton iterations do not converge
        """
        dt = self.params.dt
        beta, gamma = self.params.beta, self.params.gamma
        u_pred = state.u + dt * state.v + dt * dt * (0.5 - beta) * state.a
        v_pred = state.v + dt * (1.0 - gamma) * state.a

        if self._factor is not None:
            rhs = load - self.C @ v_pred - self.restoring.initial_stiffness @ u_pred
            a_new = linalg.cho_solve(self._factor, rhs)
        else:
            a_new = self._newton(state.a, u_pred, v_pred, load)

        return NewmarkState(
            u_pred + beta * dt * dt * a_new,
            v_pred + gamma * dt * a_new,
            a_new,
        )

    def _newton(
        self,
        a_guess: np.ndarray,
        u_pred: np.ndarray,
        v_pred: np.ndarray,
        load: np.ndarray,
    ) -> np.ndarray:
        dt = self.params.dt
        beta, gamma = self.params.beta, self.params.gamma
        load_scale = float(np.max(np.abs(load))) if load.size else 0.0
        a_new = a_guess.copy()
        for iteration in range(1, MAX_NEWTON_ITERATIONS + 1):
            u = u_pred + beta * dt * dt * a_new
            v = v_pred + gamma * dt * a_new
            force, tangent = self.restoring.trial(u)
            residual = self.M @ a_new + self.C @ v + force - load
            scale = max(load_scale, float(np.max(np.abs(force))))
            if float(np.max(np.abs(residual))) < NEWTON_RTOL * scale + NEWTON_ATOL:
                self.restoring.commit()
                self.newton_iterations += iteration
                return a_new
            a_new = a_new - linalg.solve(self._effective(tangent), residual)
        raise NumericalError(
            f"Newton iteration did not converge in {MAX_NEWTON_ITERATIONS} iterations",
            iterations=MAX_NEWTON_ITERATIONS,
        )

    def run(self, loads: np.ndarray) -> Tuple[np.ndarray, np.ndarray, np.ndarray]:
        """
        Integrate from rest through a sequence of load vectors.

        Args:
            loads: Array of shape (n_steps, n)

        Returns:
            Tuple of (u, v, a) arrays of shape (n_steps, n)
        """
        loads = np.asarray(loads, dtype=np.float64)
        n_steps, n = loads.shape
        u = np.empty((n_steps, n))
        v = np.empty((n_steps, n))
        a = np.empty((n_steps, n))
        state = self.initial_state(loads[0])
        u[0], v[0], a[0] = state
        for step in range(1, n_steps):
            state = self.step(state, loads[step])
            u[step], v[step], a[step] = state
        if self.newton_iterations:
            logger.debug(f"Newton iterations: {self.newton_iterations} over {n_steps - 1} steps")
        return u, v, a


def newmark_step(
    state: NewmarkState,
    M: np.ndarray,
    C: np.ndarray,
    restoring: RestoringForce,
    load: np.ndarray,
    p: IntegratorParams,
) -> NewmarkState:
    """
    Advance one Newmark step.

    Args:
        state: (u_n, v_n, a_n)
        M: Mass matrix
        C: Damping matrix
        restoring: Restoring-force law (committed on convergence)
        load: Load vector at step n+1
        p: Newmark parameters

    Returns:
        (u_{n+1}, v_{n+1}, a_{n+1})
    """
    return NewmarkIntegrator(M, C, restoring, p).step(state, np.asarray(load, dtype=np.float64))


def simulate(model: LumpedMassModel, gm: GroundMotion, p: IntegratorParams) -> ResponseHistory:
    """
    Response of a model to a ground acceleration record.

    The load is ``G = -M iota a_g``; the model starts at rest.

    Args:
        model: Lumped-mass model, linear or bilinear
        gm: Ground motion sampled at ``p.dt``
        p: Newmark parameters

    Returns:
        Response history with total floor accelerations

    Raises:
        ConfigError: If the record and integrator time steps differ
        NumericalError: If the integration fails
    """
    if gm.dt != p.dt:
        raise ConfigError(f"record dt {gm.dt} differs from integrator dt {p.dt}; resample first", key="dt")
    if not p.is_unconditionally_stable:
        omega_max = float(modal_summary(model).omega[-1])
        if p.dt >= p.critical_dt(omega_max):
            logger.warning(f"dt={p.dt} exceeds the critical step {p.critical_dt(omega_max):.4g}")

    M = np.diag(model.masses)
    C = damping_matrix(model)
    ground = gm.samples
    loads = -np.outer(ground, model.masses)
    integrator = NewmarkIntegrator(M, C, restoring_force(model), p)
    u, v, a_rel = integrator.run(loads)
    a_total = a_rel + ground[:, None]
    return ResponseHistory(dt=p.dt, u=u.T, v=v.T, a=a_total.T)


def sdr_response(
    model: LumpedMassModel,
    gm: GroundMotion,
    p: IntegratorParams,
    oracle_period: Optional[float] = None,
) -> ResponseHistory:
    """
    Simplified dynamic response: linear springs, period-matched.

    Args:
        model: Simplified model
        gm: Ground motion sampled at ``p.dt``
        p: Newmark parameters
        oracle_period: Fundamental period to match (defaults to the model's
            own elastic period)

    Returns:
        Response history of the linear, period-matched model
    """
    linear = model.as_linear()
    if oracle_period is not None:
        linear = match_period(linear, oracle_period)
    return simulate(linear, gm, p)


def interstory_drift(r: ResponseHistory, floor_height: float) -> np.ndarray:
    """
    Inter-story drift ratios ``(u_i - u_{i-1}) / h`` with ``u_0 = 0``.

    Args:
        r: Response history
        floor_height: Story height in m

    Returns:
        Array of shape (n_stories, n_steps)
    """
    if not floor_height > 0:
        raise DomainError("floor_height must be positive")
    return np.diff(r.u, axis=0, prepend=0.0) / floor_height


def peak_response(r: ResponseHistory, floor_height: float) -> PeakResponse:
    """Get per-story peak |u|, |a| and |drift|."""
    return PeakResponse(
        displacement=np.max(np.abs(r.u), axis=1),
        acceleration=np.max(np.abs(r.a), axis=1),
        drift=np.max(np.abs(interstory_drift(r, floor_height)), axis=1),
    )
