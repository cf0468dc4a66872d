"""
Identification of equivalent story stiffnesses from reference responses.

Both backends minimize the normalized displacement misfit
``||u_sim(k) - u_ref||^2 / ||u_ref||^2`` of the linear model with known
masses.
"""

import enum
import logging
import math
from dataclasses import dataclass, field
from typing import Any, Dict, List, Optional, Tuple

import numpy as np
from scipy import optimize

from seisforge.errors import ConfigError, DomainError
from seisforge.physics.dynamics import IntegratorParams, ResponseHistory, simulate
from seisforge.physics.ground_motion import GroundMotion
from seisforge.physics.structure import (
    LumpedMassModel,
    apply_scale,
    modal_summary,
    stiffness_scale_factor,
)
from seisforge.utils.rng import make_rng
from seisforge.utils.workers import WorkerPool

# Logger
logger = logging.getLogger("seisforge.physics.identification")

FD_STEP = 1e-4
OBJECTIVE_FTOL = 1e-10
MAX_ITERATIONS = 200

ES_PARENTS = 8
ES_OFFSPRING = 32


class IdentificationMethod(str, enum.Enum):
    GAUSS_NEWTON = "gauss_newton"
    EVOLUTIONARY = "evolutionary"


@dataclass(frozen=True)
class IdentificationProblem:
    """
    Stiffness identification problem for a shear building with known masses.

    ``bounds`` is a pair of per-story arrays (lo, hi) in N/m.
    """

    masses: np.ndarray
    reference: ResponseHistory
    excitation: GroundMotion
    initial_guess: np.ndarray
    bounds: Tuple[np.ndarray, np.ndarray]
    damping_ratio: float = 0.05
    params: Optional[IntegratorParams] = None

    def __post_init__(self) -> None:
        masses = np.asarray(self.masses, dtype=np.float64)
        guess = np.asarray(self.initial_guess, dtype=np.float64)
        n = masses.size

        if self.reference.n_steps == 0 or not np.any(self.reference.u):
            raise ConfigError("reference response is empty", key="reference")
        if self.reference.n_stories != n or guess.shape != (n,):
            raise ConfigError("masses, initial guess and reference must share the story count")
        try:
            lo = np.broadcast_to(np.asarray(self.bounds[0], dtype=np.float64), guess.shape).copy()
            hi = np.broadcast_to(np.asarray(self.bounds[1], dtype=np.float64), guess.shape).copy()
        except ValueError as e:
            raise ConfigError(f"bounds do not match the story count: {e}", key="bounds") from e
        if self.reference.dt != self.excitation.dt:
            raise ConfigError("reference and excitation must share dt", key="dt")
        if self.reference.n_steps != self.excitation.n_steps:
            raise ConfigError("reference and excitation must have the same length")
        if np.any(lo <= 0) or np.any(lo >= hi):
            raise DomainError("bounds must be positive with lo < hi", key="bounds")
        if np.any(guess < lo) or np.any(guess > hi):
            raise DomainError("initial guess lies outside the bounds", key="initial_guess")

        object.__setattr__(self, "masses", masses)
        object.__setattr__(self, "initial_guess", guess)
        object.__setattr__(self, "bounds", (lo, hi))
        if self.params is None:
            object.__setattr__(self, "params", IntegratorParams.average_acceleration(self.excitation.dt))

    @property
    def n_stories(self) -> int:
        return int(self.masses.size)

    def model(self, stiffness: np.ndarray) -> LumpedMassModel:
        """Get the linear model for a stiffness vector."""
        return LumpedMassModel(
            masses=self.masses,
            story_stiffness=np.asarray(stiffness, dtype=np.float64),
            damping_ratio=self.damping_ratio,
        )

    def residuals(self, stiffness: np.ndarray) -> np.ndarray:
        """Normalized displacement residual vector."""
        response = simulate(self.model(stiffness), self.excitation, self.params)  # type: ignore[arg-type]
        reference = self.reference.u
        return (response.u - reference).ravel() / np.linalg.norm(reference)


@dataclass
class IdentificationResult:
    """Recovered stiffness and convergence report."""

    stiffness: np.ndarray
    objective: float
    iterations: int
    converged: bool
    method: IdentificationMethod = IdentificationMethod.GAUSS_NEWTON
    history: List[float] = field(default_factory=list)

    def to_document(self) -> Dict[str, Any]:
        return {
            "stiffness_n_per_m": self.stiffness.tolist(),
            "objective": self.objective,
            "iterations": self.iterations,
            "converged": self.converged,
            "method": self.method.value,
            "objective_history": list(self.history),
        }


def objective(problem: IdentificationProblem, stiffness: np.ndarray) -> float:
    """
    Normalized displacement misfit of a stiffness vector.

    Args:
        problem: Identification problem
        stiffness: Story stiffnesses in N/m

    Returns:
        ``||u_sim - u_ref||^2 / ||u_ref||^2``
    """
    residual = problem.residuals(stiffness)
    return float(residual @ residual)


def _evaluate(job: Tuple[IdentificationProblem, np.ndarray]) -> float:
    problem, stiffness = job
    return objective(problem, stiffness)


def _gauss_newton(
    problem: IdentificationProblem,
    start: np.ndarray,
    history: List[float],
) -> Tuple[np.ndarray, float, int, bool]:
    # Parameters are scaled by the start point so every unknown is O(1)
    lo, hi = problem.bounds
    best = {"objective": math.inf}

    def fun(x: np.ndarray) -> np.ndarray:
        residual = problem.residuals(x * start)
        value = float(residual @ residual)
        best["objective"] = min(best["objective"], value)
        history.append(best["objective"])
        return residual

    solution = optimize.least_squares(
        fun,
        np.ones_like(start),
        bounds=(lo / start, hi / start),
        method="trf",
        diff_step=FD_STEP,
        ftol=OBJECTIVE_FTOL,
        xtol=1e-12,
        gtol=1e-14,
        max_nfev=MAX_ITERATIONS,
        x_scale=1.0,
    )
    stiffness = np.clip(solution.x * start, lo, hi)
    value = 2.0 * float(solution.cost)
    iterations = int(solution.njev if solution.njev is not None else solution.nfev)
    logger.debug(f"least squares: status={solution.status} nfev={solution.nfev} objective={value:.3e}")
    return stiffness, value, iterations, bool(solution.status > 0)


def _evolutionary(
    problem: IdentificationProblem,
    budget: int,
    seed: int,
    workers: Optional[int],
    history: List[float],
) -> np.ndarray:
    lo, hi = problem.bounds
    origin = problem.initial_guess
    log_lo, log_hi = np.log(lo / origin), np.log(hi / origin)
    n = problem.n_stories
    tau = 1.0 / math.sqrt(2.0 * n)
    rng = make_rng(seed, "identify", "evolutionary")

    parents = np.vstack([np.zeros(n), rng.uniform(log_lo, log_hi, size=(ES_PARENTS - 1, n))])
    sigmas = np.full(ES_PARENTS, 0.3)
    with WorkerPool(workers) as pool:
        fitness = np.array(pool.map(_evaluate, [(problem, origin * np.exp(y)) for y in parents]))
        for generation in range(budget):
            picks = rng.integers(0, ES_PARENTS, size=ES_OFFSPRING)
            child_sigmas = sigmas[picks] * np.exp(tau * rng.standard_normal(ES_OFFSPRING))
            children = parents[picks] + child_sigmas[:, None] * rng.standard_normal((ES_OFFSPRING, n))
            children = np.clip(children, log_lo, log_hi)
            child_fitness = np.array(
                pool.map(_evaluate, [(problem, origin * np.exp(y)) for y in children])
            )

            # Elitist (mu + lambda) selection; stable sort keeps parents first on ties
            pool_y = np.vstack([parents, children])
            pool_sigma = np.concatenate([sigmas, child_sigmas])
            pool_fitness = np.concatenate([fitness, child_fitness])
            order = np.argsort(pool_fitness, kind="stable")[:ES_PARENTS]
            parents, sigmas, fitness = pool_y[order], pool_sigma[order], pool_fitness[order]
            history.append(float(fitness[0]))
            logger.debug(f"generation {generation + 1}/{budget}: best objective {fitness[0]:.3e}")
    return origin * np.exp(parents[0])


def identify_stiffness(
    p: IdentificationProblem,
    method: IdentificationMethod = IdentificationMethod.GAUSS_NEWTON,
    budget: int = 30,
    seed: int = 0,
    workers: Optional[int] = None,
) -> IdentificationResult:
    """
    Recover story stiffnesses that reproduce the reference displacements.

    Args:
        p: Identification problem
        method: ``gauss_newton`` (bounded trust-region least squares with a
            finite-difference Jacobian) or ``evolutionary`` (an (8+32)
            evolution strategy followed by a least-squares polish)
        budget: Generations of the evolution strategy
        seed: Seed of the evolution strategy
        workers: Worker processes for candidate evaluation

    Returns:
        Result whose objective never exceeds that of the initial guess

    Raises:
        NumericalError: If a simulation fails
    """
    method = IdentificationMethod(method)
    history: List[float] = []
    initial_objective = objective(p, p.initial_guess)
    history.append(initial_objective)

    start = p.initial_guess
    if method is IdentificationMethod.EVOLUTIONARY:
        if budget < 0:
            raise ConfigError("budget must be non-negative", key="budget")
        start = _evolutionary(p, budget, seed, workers, history)

    stiffness, value, iterations, converged = _gauss_newton(p, start, history)
    if value > initial_objective:
        stiffness, value = p.initial_guess.copy(), initial_objective
    if method is IdentificationMethod.EVOLUTIONARY:
        iterations += budget

    if converged:
        logger.info(f"Identification converged: objective={value:.3e} after {iterations} iterations")
    else:
        logger.warning(f"Identification stopped before convergence: objective={value:.3e}")
    return IdentificationResult(
        stiffness=stiffness,
        objective=value,
        iterations=iterations,
        converged=converged,
        method=method,
        history=list(np.minimum.accumulate(history)),
    )


def validate_period(model: LumpedMassModel, T_ref: float, tol: float = 0.01) -> LumpedMassModel:
    """
    Rescale a model whose fundamental period misses a reference period.

    Args:
        model: Simplified model
        T_ref: Reference fundamental period in s
        tol: Accepted relative period mismatch

    Returns:
        The model itself when within tolerance, otherwise the period-matched
        model
    """
    if not T_ref > 0:
        raise DomainError(f"reference period must be positive, got {T_ref!r}")
    T_hat = modal_summary(model).T1
    mismatch = abs(T_hat - T_ref) / T_ref
    if mismatch <= tol:
        return model
    logger.debug(f"Period mismatch {mismatch:.3%}; rescaling stiffness")
    return apply_scale(model, stiffness_scale_factor(T_ref, T_hat))
