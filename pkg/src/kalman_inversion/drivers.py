"""Iteration drivers for the accelerated inversion loops.

All three algorithms share one protocol: iteration 0 applies the plain update
to the initial ensemble, and every iteration j >= 1 computes the momentum
coefficient, nudges the ensemble against its predecessor, evaluates the model
on the nudged ensemble only, and applies the plain update to it. Acceleration
therefore costs no extra forward evaluations: exactly one model sweep per
iteration, nudged or not.

A trial aborts with :class:`DivergedError` (carrying the iteration index and
the partial history) only on genuine blow-up: non-finite evaluations, an
overflow guard in a model, or a particle norm beyond ``NORM_GUARD``.
Transient cost increases, which momentum can cause, do not abort.
"""

from __future__ import annotations

from dataclasses import dataclass, replace

import numpy as np

from .ensembles import Ensemble, ensemble_mean
from .errors import DivergedError
from .linalg import NotPositiveDefinite
from .models import ForwardModel, evaluate_ensemble
from .schedules import MomentumSchedule, NoAcceleration, momentum_coefficient
from .updates import (
    UkiHyper,
    apply_momentum,
    eki_update,
    etki_transform,
    uki_generate_ensemble,
    uki_update_mean_cov,
)

NORM_GUARD = 1e12


@dataclass(frozen=True)
class IterationRecord:
    """What iteration j actually did: the ensemble the model was evaluated on
    (initial or nudged), its evaluations, and the post-update state."""

    iteration: int
    particles: np.ndarray
    evals: np.ndarray
    updated_mean: np.ndarray
    updated_particles: np.ndarray | None = None
    updated_cov: np.ndarray | None = None

    @property
    def mean_eval(self) -> np.ndarray:
        return self.evals.mean(axis=1)


@dataclass(frozen=True)
class EkiState:
    current: Ensemble
    previous: Ensemble | None
    iteration: int
    dt: float
    schedule: MomentumSchedule

    def __post_init__(self) -> None:
        if self.previous is not None and self.previous.particles.shape != self.current.particles.shape:
            raise ValueError("current and previous ensembles must have identical shape")
        if self.dt <= 0:
            raise ValueError("dt must be positive")

    @classmethod
    def initial(cls, ensemble: Ensemble, dt: float = 1.0, schedule: MomentumSchedule | None = None):
        return cls(ensemble, None, 0, dt, schedule if schedule is not None else NoAcceleration())


@dataclass(frozen=True)
class EtkiState:
    current: Ensemble
    previous: Ensemble | None
    iteration: int
    schedule: MomentumSchedule

    def __post_init__(self) -> None:
        if self.previous is not None and self.previous.particles.shape != self.current.particles.shape:
            raise ValueError("current and previous ensembles must have identical shape")

    @classmethod
    def initial(cls, ensemble: Ensemble, schedule: MomentumSchedule | None = None):
        return cls(ensemble, None, 0, schedule if schedule is not None else NoAcceleration())


@dataclass(frozen=True)
class UkiState:
    mean: np.ndarray
    cov: np.ndarray
    prev_sigma: Ensemble | None
    iteration: int
    hyper: UkiHyper
    schedule: MomentumSchedule

    @classmethod
    def initial(cls, mean, cov, hyper: UkiHyper, schedule: MomentumSchedule | None = None):
        return cls(
            np.asarray(mean, dtype=float),
            np.asarray(cov, dtype=float),
            None,
            0,
            hyper,
            schedule if schedule is not None else NoAcceleration(),
        )


State = EkiState | EtkiState | UkiState


def _nudged(current: Ensemble, previous: Ensemble | None, schedule, j: int):
    if j == 0:
        return current, schedule
    if previous is None:
        raise ValueError(f"state at iteration {j} has no predecessor ensemble to nudge against")
    lam, advanced = momentum_coefficient(schedule, j)
    return apply_momentum(current, previous, lam), advanced


def _evaluate_or_diverge(model: ForwardModel, particles: np.ndarray) -> np.ndarray:
    try:
        evals = evaluate_ensemble(model, particles)
    except OverflowError as exc:
        raise DivergedError(f"forward model overflow: {exc}") from exc
    if not np.all(np.isfinite(evals)):
        raise DivergedError("forward evaluations became non-finite")
    # Evaluations beyond the guard poison the covariance solves (squared
    # magnitudes overflow or drown Gamma in round-off) and only arise after
    # genuine blow-up; abort like the particle-norm guard does.
    if np.abs(evals).max() > NORM_GUARD:
        raise DivergedError(f"forward evaluation magnitude exceeded {NORM_GUARD:.0e}")
    return evals


def _guard_particles(particles: np.ndarray) -> None:
    if np.linalg.norm(particles, axis=0).max() > NORM_GUARD:
        raise DivergedError(f"particle norm exceeded {NORM_GUARD:.0e}")


def _step_ensemble(state: EkiState | EtkiState, model, y, gamma):
    j = state.iteration
    v, schedule = _nudged(state.current, state.previous, state.schedule, j)
    evals = _evaluate_or_diverge(model, v.particles)
    if isinstance(state, EkiState):
        updated = eki_update(v, evals, y, gamma, state.dt)
    else:
        updated = etki_transform(v, evals, y, gamma)
    _guard_particles(updated.particles)
    record = IterationRecord(
        iteration=j,
        particles=v.particles,
        evals=evals,
        updated_mean=ensemble_mean(updated),
        updated_particles=updated.particles,
    )
    new_state = replace(state, current=updated, previous=state.current, iteration=j + 1, schedule=schedule)
    return new_state, record


def _step_uki(state: UkiState, model, y):
    j = state.iteration
    sigma = uki_generate_ensemble(state.mean, state.cov, state.hyper)
    v, schedule = _nudged(sigma, state.prev_sigma, state.schedule, j)
    evals = _evaluate_or_diverge(model, v.particles)
    m_new, c_new = uki_update_mean_cov(v, evals, y, state.hyper.sigma_nu)
    if not (np.all(np.isfinite(m_new)) and np.all(np.isfinite(c_new))):
        raise DivergedError("UKI mean/covariance became non-finite")
    if np.linalg.norm(m_new) > NORM_GUARD:
        raise DivergedError(f"UKI mean norm exceeded {NORM_GUARD:.0e}")
    record = IterationRecord(
        iteration=j,
        particles=v.particles,
        evals=evals,
        updated_mean=m_new,
        updated_cov=c_new,
    )
    new_state = replace(
        state, mean=m_new, cov=c_new, prev_sigma=sigma, iteration=j + 1, schedule=schedule
    )
    return new_state, record


def run_iterations(
    state: State, model: ForwardModel, y: np.ndarray, gamma: np.ndarray, n_iterations: int
) -> tuple[State, list[IterationRecord]]:
    """Run iterations 0..n_iterations (inclusive): one plain update, then
    n_iterations nudge-then-update steps. Returns the final state and one
    record per iteration; on blow-up raises :class:`DivergedError` carrying
    the records completed so far.
    """
    if n_iterations < 0:
        raise ValueError("n_iterations must be >= 0")
    y = np.asarray(y, dtype=float)
    history: list[IterationRecord] = []
    while state.iteration <= n_iterations:
        try:
            if isinstance(state, UkiState):
                state, record = _step_uki(state, model, y)
            else:
                state, record = _step_ensemble(state, model, y, gamma)
        except DivergedError as exc:
            raise DivergedError(str(exc), iteration=state.iteration, history=history) from exc
        except NotPositiveDefinite as exc:
            # Numerical breakdown of a covariance solve aborts the trial like
            # a blow-up does; the original error stays on the cause chain.
            raise DivergedError(
                f"covariance factorization failed: {exc}",
                iteration=state.iteration,
                history=history,
            ) from exc
        history.append(record)
    return state, history


def terminal_mean(state: State) -> np.ndarray:
    return state.mean.copy() if isinstance(state, UkiState) else ensemble_mean(state.current)
