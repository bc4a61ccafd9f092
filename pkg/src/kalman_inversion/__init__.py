"""Derivative-free inverse-problem solvers with optional Nesterov acceleration.

The package provides three ensemble Kalman inversion variants (EKI, ETKI,
UKI) behind one iteration driver, a particle-wise momentum nudge that
accelerates any of them at zero extra model evaluations, benchmark forward
models, and a seeded multi-trial experiment harness with CSV/SVG reporting.
"""

from .drivers import (
    DivergedError,
    EkiState,
    EtkiState,
    IterationRecord,
    UkiState,
    run_iterations,
)
from .ensembles import Ensemble, anomalies, cross_cov, ensemble_mean
from .harness import (
    CellResult,
    CellSpec,
    ConvergenceRecord,
    ExperimentSummary,
    InverseProblem,
    TrialConfig,
    generate_data,
    misfit_cost,
    run_experiment,
    run_trial,
    summarize_series,
)
from .linalg import NotPositiveDefinite, cholesky_lower, spd_solve, sym_sqrt
from .models import ExpSinModel, ForwardModel, LinearModel, Lorenz96Model
from .problems import problem_builder
from .sampling import Gaussian1D, GaussianMV, Lognormal1D, Product, make_rng, sample
from .schedules import (
    ConstantMomentum,
    NoAcceleration,
    OriginalNesterov,
    RecursiveNesterov,
    momentum_coefficient,
    parse_schedule,
)
from .updates import (
    UkiHyper,
    apply_momentum,
    eki_update,
    etki_transform,
    uki_generate_ensemble,
    uki_update_mean_cov,
)

__all__ = [
    "CellResult",
    "CellSpec",
    "ConstantMomentum",
    "ConvergenceRecord",
    "DivergedError",
    "EkiState",
    "Ensemble",
    "EtkiState",
    "ExperimentSummary",
    "ExpSinModel",
    "ForwardModel",
    "Gaussian1D",
    "GaussianMV",
    "InverseProblem",
    "IterationRecord",
    "LinearModel",
    "Lognormal1D",
    "Lorenz96Model",
    "NoAcceleration",
    "NotPositiveDefinite",
    "OriginalNesterov",
    "Product",
    "RecursiveNesterov",
    "TrialConfig",
    "UkiHyper",
    "UkiState",
    "anomalies",
    "apply_momentum",
    "cholesky_lower",
    "cross_cov",
    "eki_update",
    "ensemble_mean",
    "etki_transform",
    "generate_data",
    "make_rng",
    "misfit_cost",
    "momentum_coefficient",
    "parse_schedule",
    "problem_builder",
    "run_experiment",
    "run_iterations",
    "run_trial",
    "sample",
    "spd_solve",
    "summarize_series",
    "sym_sqrt",
    "uki_generate_ensemble",
    "uki_update_mean_cov",
]

__version__ = "0.1.0"
