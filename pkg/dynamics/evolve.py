"""
Population Dynamics
===================
Integrates Ṅ_n = Γ_down + Ω_drive − κN_n from a given start (vacuum by
default) and locates the driven-dissipative steady state.

- evolve: adaptive explicit Runge-Kutta (scipy solve_ivp) with a clamp that
  stops any non-positive population from being pushed further down
- steady_state: integrate for 20/κ, then damped Newton on the analytic Jacobian;
  integrate further and retry until the configured maximum time
"""

import logging
from dataclasses import dataclass, field
from typing import Optional

import numpy as np
from scipy.integrate import solve_ivp

from config import Config
from dynamics.rates import RateModel, energy_weighted_sum
from errors import ConfigError, ConvergenceError, StiffnessError

logger = logging.getLogger(__name__)


@dataclass(frozen=True, eq=False)
class SteadyState:
    """Steady-state populations with convergence metadata"""
    populations: np.ndarray
    residual: float
    tolerance: float
    time_reached: float
    newton_iterations: int
    converged: bool = True

    def as_dict(self) -> dict:
        return {
            'populations': [float(value) for value in self.populations],
            'residual': float(self.residual),
            'tolerance': float(self.tolerance),
            'time_reached': float(self.time_reached),
            'newton_iterations': int(self.newton_iterations),
            'converged': bool(self.converged),
        }


@dataclass(eq=False)
class PopulationTrajectory:
    """Mode occupations N_n(t_k); rows are times, columns modes 1..n_modes"""
    times: np.ndarray
    populations: np.ndarray
    steady_state: Optional[SteadyState] = field(default=None)

    def mode(self, n: int) -> np.ndarray:
        return self.populations[:, n - 1]

    @property
    def final(self) -> np.ndarray:
        return self.populations[-1]

    def total(self) -> np.ndarray:
        return self.populations.sum(axis=1)

    def energy(self) -> np.ndarray:
        return energy_weighted_sum(self.populations)


def _guarded_rhs(model: RateModel):
    def fun(_t, populations):
        clipped = np.maximum(populations, 0.0)
        derivative = model.rhs(clipped)
        derivative[(populations <= 0.0) & (derivative < 0.0)] = 0.0
        return derivative
    return fun


def evolve(initial, model: RateModel, t_end: float, rtol: float = None, atol: float = None,
           n_samples: int = None, method: str = None) -> PopulationTrajectory:
    """Integrate the rate equations on [0, t_end]

    Args:
        initial: starting populations (None = vacuum)
        model: rate model
        t_end: final time (s)
        rtol, atol: integrator tolerances (Config defaults)
        n_samples: number of uniformly spaced output times
        method: solve_ivp explicit method name

    Raises:
        StiffnessError: step size underflow, with the time reached
    """
    if not t_end > 0:
        raise ConfigError(f"t_end={t_end} must be positive")
    rtol = Config.RTOL if rtol is None else rtol
    atol = Config.ATOL if atol is None else atol
    n_samples = Config.TRAJECTORY_SAMPLES if n_samples is None else n_samples
    method = method or Config.INTEGRATOR

    if initial is None:
        initial = np.zeros(model.n_modes)
    initial = model._check(initial)
    if np.any(initial < 0):
        raise ConfigError("initial populations must be non-negative")

    times = np.linspace(0.0, t_end, max(n_samples, 2))
    solution = solve_ivp(
        _guarded_rhs(model), (0.0, t_end), initial,
        method=method, t_eval=times, rtol=rtol, atol=atol,
    )
    if solution.status == -1:
        reached = float(solution.t[-1]) if len(solution.t) else 0.0
        raise StiffnessError(f"integration failed near t={reached:.4e} s: {solution.message}", time=reached)

    logger.debug(f"evolve: {solution.nfev} RHS evaluations to t={t_end:.4e} s")
    return PopulationTrajectory(times=solution.t, populations=solution.y.T.copy())


def _threshold(model: RateModel, populations: np.ndarray, tol: float) -> float:
    return tol * max(model.kappa * float(np.max(populations)), model.Omega0)


def _newton(model: RateModel, populations: np.ndarray, tol: float, max_iter: int):
    """Damped Newton iterations; returns (populations, residual, iterations, converged)"""
    current = np.maximum(populations, 0.0)
    F = model.rhs(current)
    residual = float(np.max(np.abs(F)))
    for iteration in range(max_iter + 1):
        if residual < _threshold(model, current, tol):
            return current, residual, iteration, True
        if iteration == max_iter:
            break
        try:
            step = np.linalg.solve(model.jacobian(current), -F)
        except np.linalg.LinAlgError:
            logger.debug("Newton: singular Jacobian")
            break

        damping = 1.0
        norm = float(np.linalg.norm(F))
        while damping > 1e-6:
            trial = np.maximum(current + damping * step, 0.0)
            trial_F = model.rhs(trial)
            if np.linalg.norm(trial_F) < norm:
                current, F = trial, trial_F
                residual = float(np.max(np.abs(F)))
                break
            damping /= 2
        else:
            logger.debug(f"Newton: no descent after {iteration} iterations")
            break
    return current, residual, iteration, False


def steady_state(model: RateModel, tol: float = None, rtol: float = None, atol: float = None,
                 max_time: float = None, initial=None) -> SteadyState:
    """Long-time integration followed by damped Newton refinement

    Converged when ‖rhs(N*)‖∞ < tol·max(κ·max_n N*_n, Ω0).

    Raises:
        ConvergenceError: no convergence before max_time, with the last residual
    """
    if not (model.kappa > 0 and model.Omega0 > 0):
        raise ConfigError("steady state needs κ > 0 and Ω0 > 0")
    tol = Config.STEADY_STATE_TOL if tol is None else tol
    max_time = Config.STEADY_STATE_MAX_KAPPA_TIMES / model.kappa if max_time is None else max_time

    duration = Config.STEADY_STATE_KAPPA_TIMES / model.kappa
    elapsed = 0.0
    populations = None if initial is None else np.asarray(initial, dtype=float)
    residual = float('nan')

    while True:
        trajectory = evolve(populations, model, duration, rtol=rtol, atol=atol, n_samples=2)
        elapsed += duration
        refined, residual, iterations, converged = _newton(model, trajectory.final, tol, Config.NEWTON_MAX_ITER)
        if converged:
            logger.info(
                f"Steady state after t={elapsed:.4e} s and {iterations} Newton steps "
                f"(residual {residual:.3e})"
            )
            return SteadyState(
                populations=refined, residual=residual,
                tolerance=_threshold(model, refined, tol),
                time_reached=elapsed, newton_iterations=iterations,
            )
        if elapsed >= max_time:
            break
        logger.debug(f"Steady state not reached at t={elapsed:.4e} s (residual {residual:.3e}); integrating on")
        populations = trajectory.final
        duration = min(elapsed, max_time - elapsed)

    raise ConvergenceError(
        f"steady state not reached by t={elapsed:.4e} s; last residual {residual:.3e}",
        residual=residual, time=elapsed,
    )


def relaxation_time(trajectory: PopulationTrajectory, steady: np.ndarray,
                    fraction: float = None) -> float:
    """Time after which every population stays within `fraction`·max N* of N*"""
    fraction = Config.RELAXATION_FRACTION if fraction is None else fraction
    steady = np.asarray(steady, dtype=float)
    scale = float(np.max(steady)) or 1.0
    deviation = np.max(np.abs(trajectory.populations - steady), axis=1) / scale
    outside = np.nonzero(deviation > fraction)[0]
    if len(outside) == 0:
        return 0.0
    last = outside[-1]
    if last == len(trajectory.times) - 1:
        logger.warning("Trajectory ends before settling; relaxation time is a lower bound")
        return float(trajectory.times[-1])
    return float(trajectory.times[last + 1])
