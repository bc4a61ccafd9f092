"""Benchmark inverse-problem builders.

Each builder returns an :class:`InverseProblem` template with a fixed truth
and noise covariance; observation realizations are drawn per trial by the
harness. Noise levels are configuration defaults chosen to give informative,
non-degenerate problems, not quantities fixed by the benchmark definitions;
override them freely via the `sigma` key.
"""

from __future__ import annotations

import numpy as np

from .darcy import DarcyModel
from .harness import InverseProblem
from .models import ExpSinModel, LinearModel, Lorenz96Model
from .sampling import Gaussian1D, GaussianMV, Lognormal1D, Product

# Allowed override keys per problem (the `sigma` noise std is common to all).
PROBLEM_OVERRIDES = {
    "exp_sin": {"sigma", "quadrature_points"},
    "lorenz96": {"sigma", "dim", "forcing", "rk4_dt", "rk4_steps", "spinup_time"},
    "darcy": {
        "sigma",
        "grid_n",
        "kl_dim",
        "matern_smoothness",
        "matern_length",
        "forcing",
        "obs_stride",
        "kl_grid_n",
        "truth_coeff",
    },
    "linear": {"sigma", "dim_in", "dim_out"},
}


def _check_overrides(name: str, overrides: dict) -> dict:
    allowed = PROBLEM_OVERRIDES[name]
    unknown = set(overrides) - allowed
    if unknown:
        raise ValueError(
            f"unknown {name} override(s): {', '.join(sorted(unknown))} "
            f"(allowed: {', '.join(sorted(allowed))})"
        )
    return overrides


def _gamma(sigma: float, k: int) -> np.ndarray:
    if sigma <= 0:
        raise ValueError("sigma must be positive")
    return sigma**2 * np.eye(k)


def build_exp_sin(overrides: dict, rng: np.random.Generator) -> InverseProblem:
    """Amplitude/shift estimation for exp(u1 sin t + u2); truth (1, 0.8)."""
    ov = _check_overrides("exp_sin", overrides)
    model = ExpSinModel(quadrature_points=int(ov.get("quadrature_points", 2048)))
    sigma = float(ov.get("sigma", 0.1))
    initial = Product((Lognormal1D(-1.38, 0.06), Gaussian1D(0.0, 0.5)))
    return InverseProblem(
        model=model,
        gamma=_gamma(sigma, model.output_dim),
        truth=np.array([1.0, 0.8]),
        data=None,
        initial_dist=initial,
    )


def build_lorenz96(overrides: dict, rng: np.random.Generator) -> InverseProblem:
    """Initial-condition recovery for the chaotic Lorenz '96 flow map.

    The truth is produced by spinning a standard-normal draw onto the
    attractor (default 1000 time units) and taking the endpoint.
    """
    ov = _check_overrides("lorenz96", overrides)
    model = Lorenz96Model(
        dim=int(ov.get("dim", 20)),
        forcing=float(ov.get("forcing", 8.0)),
        dt=float(ov.get("rk4_dt", 0.05)),
        n_steps=int(ov.get("rk4_steps", 8)),
    )
    spinup_time = float(ov.get("spinup_time", 1000.0))
    truth = model.spin_up(rng.standard_normal(model.input_dim), spinup_time)
    sigma = float(ov.get("sigma", 0.5))
    initial = GaussianMV(np.zeros(model.input_dim), np.eye(model.input_dim))
    return InverseProblem(
        model=model,
        gamma=_gamma(sigma, model.output_dim),
        truth=truth,
        data=None,
        initial_dist=initial,
    )


def build_darcy(overrides: dict, rng: np.random.Generator) -> InverseProblem:
    """KL-coefficient recovery for Darcy flow; truth is a constant vector.

    Unless overridden, the noise std scales with the signal:
    sigma = 0.01 * max|G(truth)|.
    """
    ov = _check_overrides("darcy", overrides)
    model = DarcyModel(
        grid_n=int(ov.get("grid_n", 32)),
        kl_dim=int(ov.get("kl_dim", 20)),
        matern_smoothness=float(ov.get("matern_smoothness", 1.0)),
        matern_length=float(ov.get("matern_length", 0.25)),
        forcing=float(ov.get("forcing", 1.0)),
        obs_stride=int(ov.get("obs_stride", 1)),
        kl_grid_n=int(ov["kl_grid_n"]) if "kl_grid_n" in ov else None,
    )
    truth = np.full(model.input_dim, float(ov.get("truth_coeff", -1.5)))
    if "sigma" in ov:
        sigma = float(ov["sigma"])
    else:
        sigma = 0.01 * float(np.abs(model.evaluate(truth)).max())
    initial = GaussianMV(np.zeros(model.input_dim), np.eye(model.input_dim))
    return InverseProblem(
        model=model,
        gamma=_gamma(sigma, model.output_dim),
        truth=truth,
        data=None,
        initial_dist=initial,
    )


def build_linear(overrides: dict, rng: np.random.Generator) -> InverseProblem:
    """Random linear map G(u) = A u with truth of all ones; oracle problem."""
    ov = _check_overrides("linear", overrides)
    dim_in = int(ov.get("dim_in", 2))
    dim_out = int(ov.get("dim_out", 2))
    model = LinearModel(rng.standard_normal((dim_out, dim_in)))
    sigma = float(ov.get("sigma", 0.1))
    initial = GaussianMV(np.zeros(dim_in), np.eye(dim_in))
    return InverseProblem(
        model=model,
        gamma=_gamma(sigma, dim_out),
        truth=np.ones(dim_in),
        data=None,
        initial_dist=initial,
    )


BUILDERS = {
    "exp_sin": build_exp_sin,
    "lorenz96": build_lorenz96,
    "darcy": build_darcy,
    "linear": build_linear,
}


def problem_builder(name: str, overrides: dict | None = None):
    """Builder callable (rng -> InverseProblem) for the named problem."""
    if name not in BUILDERS:
        raise ValueError(f"unknown problem {name!r} (choose from {', '.join(sorted(BUILDERS))})")
    ov = dict(overrides or {})
    build = BUILDERS[name]

    def make(rng: np.random.Generator) -> InverseProblem:
        return build(ov, rng)

    return make
