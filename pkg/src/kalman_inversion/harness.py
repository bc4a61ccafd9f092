"""Multi-trial inversion experiments with paired seeding.

A trial is fully determined by (problem, TrialConfig): the observation noise
comes from the trial seed's DATA stream, the initial ensemble from its INIT
stream. Grid cells that share a trial index therefore consume identical
randomness, which pairs the comparison between schedules (and keeps the
iteration-0 cost identical across arms by construction).

Cost is reported as log J with J evaluated at the ensemble mean of the
forward evaluations computed during each iteration, so a convergence series
costs no model calls beyond the driver's own sweeps.
"""

from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field, replace

import numpy as np

from .drivers import EkiState, EtkiState, UkiState, run_iterations, terminal_mean
from .ensembles import Ensemble
from .errors import DivergedError
from .linalg import cholesky_lower, spd_solve
from .models import ForwardModel
from .sampling import (
    STREAM_DATA,
    STREAM_INIT,
    STREAM_PROBLEM,
    DistributionSpec,
    dist_cov,
    dist_mean,
    make_rng,
    sample,
)
from .schedules import MomentumSchedule, NoAcceleration, schedule_label
from .updates import UkiHyper

ALGORITHMS = ("eki", "etki", "uki")

# Floor for log-cost when a trial interpolates the data exactly.
LOG_COST_FLOOR = math.log(1e-300)


@dataclass(frozen=True)
class InverseProblem:
    model: ForwardModel
    gamma: np.ndarray
    truth: np.ndarray
    data: np.ndarray | None
    initial_dist: DistributionSpec
    uki_prior: tuple[np.ndarray, np.ndarray] | None = None

    def __post_init__(self) -> None:
        object.__setattr__(self, "gamma", np.asarray(self.gamma, dtype=float))
        object.__setattr__(self, "truth", np.asarray(self.truth, dtype=float))
        k = self.model.output_dim
        if self.gamma.shape != (k, k):
            raise ValueError(f"gamma must be {k} x {k}")
        if self.truth.shape != (self.model.input_dim,):
            raise ValueError("truth length must match the model input dimension")
        if self.data is not None:
            data = np.asarray(self.data, dtype=float)
            if data.shape != (k,):
                raise ValueError(f"data must have length {k}")
            object.__setattr__(self, "data", data)

    def prior_moments(self) -> tuple[np.ndarray, np.ndarray]:
        if self.uki_prior is not None:
            return self.uki_prior
        return dist_mean(self.initial_dist), dist_cov(self.initial_dist)


@dataclass(frozen=True)
class TrialConfig:
    seed: int
    algorithm: str = "eki"
    schedule: MomentumSchedule = field(default_factory=NoAcceleration)
    ensemble_size: int = 10
    iterations: int = 20
    dt: float = 1.0
    uki_alpha: float = 1.0

    def __post_init__(self) -> None:
        if self.algorithm not in ALGORITHMS:
            raise ValueError(f"algorithm must be one of {ALGORITHMS}, got {self.algorithm!r}")
        if self.iterations < 0:
            raise ValueError("iterations must be >= 0")
        if self.algorithm in ("eki", "etki") and self.ensemble_size < 2:
            raise ValueError("EKI/ETKI need ensemble_size >= 2")
        if not 0.0 < self.uki_alpha <= 1.0:
            raise ValueError("uki_alpha must be in (0, 1]")


@dataclass(frozen=True)
class ConvergenceRecord:
    config: TrialConfig
    log_cost: np.ndarray
    terminal_mean: np.ndarray
    diverged_at: int | None
    n_particles: int

    @property
    def completed(self) -> bool:
        return self.diverged_at is None

    @property
    def status(self) -> str:
        return "completed" if self.completed else f"diverged@{self.diverged_at}"


@dataclass(frozen=True)
class ExperimentSummary:
    mean_log_cost: np.ndarray
    stderr_log_cost: np.ndarray
    n_trials: int
    n_completed: int


def generate_data(model: ForwardModel, truth, gamma, rng: np.random.Generator) -> np.ndarray:
    """Realize y = G(truth) + eta with eta ~ N(0, gamma)."""
    return perturb_observation(model.evaluate(np.asarray(truth, dtype=float)), gamma, rng)


def perturb_observation(g_truth: np.ndarray, gamma, rng: np.random.Generator) -> np.ndarray:
    lower = cholesky_lower(gamma)
    return np.asarray(g_truth, dtype=float) + lower @ rng.standard_normal(len(g_truth))


def misfit_cost(y, g_mean, gamma) -> float:
    """(1/2) (y - g)^T Gamma^{-1} (y - g), computed via an SPD solve."""
    residual = np.asarray(y, dtype=float) - np.asarray(g_mean, dtype=float)
    return 0.5 * float(residual @ spd_solve(gamma, residual))


def log_misfit_cost(y, g_mean, gamma) -> float:
    cost = misfit_cost(y, g_mean, gamma)
    return math.log(cost) if cost > 1e-300 else LOG_COST_FLOOR


def _initial_state(problem: InverseProblem, config: TrialConfig):
    if config.algorithm == "uki":
        mean, cov = problem.prior_moments()
        hyper = UkiHyper.from_prior(mean, cov, problem.gamma, config.uki_alpha)
        return UkiState.initial(mean, cov, hyper, config.schedule)
    rng = make_rng(config.seed, STREAM_INIT)
    ensemble = Ensemble(sample(problem.initial_dist, config.ensemble_size, rng))
    if config.algorithm == "eki":
        return EkiState.initial(ensemble, config.dt, config.schedule)
    return EtkiState.initial(ensemble, config.schedule)


def run_trial(problem: InverseProblem, config: TrialConfig) -> ConvergenceRecord:
    """One seeded trial: draw the initial ensemble (EKI/ETKI; UKI starts from
    deterministic sigma points), run the driver for `iterations` nudged steps
    after the initial update, and log the cost at every iteration.
    """
    if problem.data is None:
        raise ValueError("problem.data must be realized before running a trial")
    state = _initial_state(problem, config)
    n_particles = 2 * problem.model.input_dim + 1 if config.algorithm == "uki" else config.ensemble_size
    diverged_at = None
    try:
        final, history = run_iterations(
            state, problem.model, problem.data, problem.gamma, config.iterations
        )
        final_mean = terminal_mean(final)
    except DivergedError as exc:
        history = exc.history
        diverged_at = exc.iteration
        final_mean = np.full(problem.model.input_dim, np.nan)
    log_cost = np.array(
        [log_misfit_cost(problem.data, rec.mean_eval, problem.gamma) for rec in history]
    )
    return ConvergenceRecord(config, log_cost, final_mean, diverged_at, n_particles)


def summarize_series(records: list[ConvergenceRecord]) -> ExperimentSummary:
    """Per-iteration mean and standard error of log-cost over completed trials."""
    completed = [r for r in records if r.completed]
    if not completed:
        raise ValueError("no completed records to summarize")
    series = np.vstack([r.log_cost for r in completed])
    mean = series.mean(axis=0)
    n = len(completed)
    stderr = series.std(axis=0, ddof=1) / math.sqrt(n) if n > 1 else np.zeros(series.shape[1])
    return ExperimentSummary(mean, stderr, n_trials=len(records), n_completed=n)


@dataclass(frozen=True)
class CellSpec:
    """One grid cell of an experiment: algorithm x schedule x (N, dt)."""

    algorithm: str
    schedule: MomentumSchedule
    ensemble_size: int
    iterations: int
    dt: float = 1.0
    uki_alpha: float = 1.0

    @property
    def cell_id(self) -> str:
        return (
            f"{self.algorithm}-{schedule_label(self.schedule)}"
            f"-N{self.ensemble_size}-dt{self.dt:g}"
        )

    def trial_config(self, seed: int) -> TrialConfig:
        return TrialConfig(
            seed=seed,
            algorithm=self.algorithm,
            schedule=self.schedule,
            ensemble_size=self.ensemble_size,
            iterations=self.iterations,
            dt=self.dt,
            uki_alpha=self.uki_alpha,
        )


@dataclass(frozen=True)
class CellResult:
    cell: CellSpec
    records: list[ConvergenceRecord]
    summary: ExperimentSummary | None

    @property
    def all_diverged(self) -> bool:
        return self.summary is None


def run_experiment(
    problem_builder,
    cells: list[CellSpec],
    n_trials: int,
    base_seed: int,
    n_workers: int = 1,
) -> list[CellResult]:
    """Run every grid cell over n_trials paired trials.

    `problem_builder(rng)` constructs the InverseProblem template (truth and
    noise covariance fixed for the whole experiment; its `data` is ignored).
    Trial t redraws the observation y with seed base_seed + t, shared across
    all cells, then each cell runs with that y and the same trial seed.
    Results are deterministic and independent of the worker count.
    """
    if n_trials < 1:
        raise ValueError("n_trials must be >= 1")
    problem = problem_builder(make_rng(base_seed, STREAM_PROBLEM))
    g_truth = problem.model.evaluate(problem.truth)
    seeds = [base_seed + t for t in range(n_trials)]
    observations = [
        perturb_observation(g_truth, problem.gamma, make_rng(seed, STREAM_DATA)) for seed in seeds
    ]

    def one_trial(cell: CellSpec, t: int) -> ConvergenceRecord:
        trial_problem = replace(problem, data=observations[t])
        return run_trial(trial_problem, cell.trial_config(seeds[t]))

    results = []
    for cell in cells:
        if n_workers > 1:
            with ThreadPoolExecutor(max_workers=n_workers) as pool:
                records = list(pool.map(lambda t: one_trial(cell, t), range(n_trials)))
        else:
            records = [one_trial(cell, t) for t in range(n_trials)]
        completed = [r for r in records if r.completed]
        summary = summarize_series(records) if completed else None
        results.append(CellResult(cell, records, summary))
    return results
