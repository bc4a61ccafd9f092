"""Seeded random sampling of initial ensembles and observation noise.

Reproducibility contract: one generator per trial, built from a 64-bit seed
and a stream tag via the counter-based Philox bit generator. Identical seed
and call sequence give a bit-identical stream on a given platform / numpy
version. The tags keep the data-noise stream and the initial-ensemble stream
disjoint even though both derive from the same trial seed.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .linalg import cholesky_lower

# Stream tags. PROBLEM seeds problem construction (e.g. drawing a chaotic
# truth state), DATA the observation noise, INIT the initial ensemble.
STREAM_PROBLEM = 0
STREAM_DATA = 1
STREAM_INIT = 2


def make_rng(seed: int, stream: int = 0) -> np.random.Generator:
    """Counter-based generator for (seed, stream); streams never overlap."""
    return np.random.Generator(np.random.Philox(np.random.SeedSequence((int(seed), int(stream)))))


@dataclass(frozen=True)
class Gaussian1D:
    mean: float
    variance: float

    def __post_init__(self) -> None:
        if self.variance <= 0:
            raise ValueError("variance must be positive")


@dataclass(frozen=True)
class Lognormal1D:
    """exp of a Gaussian with the given log-space mean and variance."""

    log_mean: float
    log_variance: float

    def __post_init__(self) -> None:
        if self.log_variance <= 0:
            raise ValueError("log_variance must be positive")


@dataclass(frozen=True)
class GaussianMV:
    mean: np.ndarray
    cov: np.ndarray

    def __post_init__(self) -> None:
        object.__setattr__(self, "mean", np.asarray(self.mean, dtype=float))
        object.__setattr__(self, "cov", np.asarray(self.cov, dtype=float))
        if self.cov.shape != (self.mean.size, self.mean.size):
            raise ValueError("cov shape does not match mean length")


@dataclass(frozen=True)
class Product:
    """Independent product of per-coordinate 1D specs."""

    factors: tuple = field(default_factory=tuple)

    def __post_init__(self) -> None:
        object.__setattr__(self, "factors", tuple(self.factors))
        for f in self.factors:
            if not isinstance(f, (Gaussian1D, Lognormal1D)):
                raise ValueError("Product factors must be 1D specs")


DistributionSpec = Gaussian1D | Lognormal1D | GaussianMV | Product


def sample(spec: DistributionSpec, count: int, rng: np.random.Generator) -> np.ndarray:
    """Draw `count` independent columns from `spec` as a d x count array.

    GaussianMV draws are mean + L z with L the Cholesky factor of the
    covariance and z standard normal; Lognormal1D draws are exp of Gaussian
    draws in log space. Draw order is fixed (row by row for Product) so a
    given (seed, stream) always yields the same ensemble.
    """
    if count < 1:
        raise ValueError("count must be >= 1")
    if isinstance(spec, Gaussian1D):
        z = rng.standard_normal(count)
        return (spec.mean + np.sqrt(spec.variance) * z)[np.newaxis, :]
    if isinstance(spec, Lognormal1D):
        z = rng.standard_normal(count)
        return np.exp(spec.log_mean + np.sqrt(spec.log_variance) * z)[np.newaxis, :]
    if isinstance(spec, GaussianMV):
        lower = cholesky_lower(spec.cov)
        z = rng.standard_normal((spec.mean.size, count))
        return spec.mean[:, np.newaxis] + lower @ z
    if isinstance(spec, Product):
        rows = [sample(f, count, rng)[0] for f in spec.factors]
        return np.vstack(rows)
    raise TypeError(f"unknown distribution spec: {spec!r}")


def dist_mean(spec: DistributionSpec) -> np.ndarray:
    if isinstance(spec, Gaussian1D):
        return np.array([spec.mean])
    if isinstance(spec, Lognormal1D):
        return np.array([np.exp(spec.log_mean + 0.5 * spec.log_variance)])
    if isinstance(spec, GaussianMV):
        return spec.mean.copy()
    if isinstance(spec, Product):
        return np.concatenate([dist_mean(f) for f in spec.factors])
    raise TypeError(f"unknown distribution spec: {spec!r}")


def dist_cov(spec: DistributionSpec) -> np.ndarray:
    if isinstance(spec, Gaussian1D):
        return np.array([[spec.variance]])
    if isinstance(spec, Lognormal1D):
        m2 = np.exp(2.0 * spec.log_mean + spec.log_variance)
        return np.array([[(np.exp(spec.log_variance) - 1.0) * m2]])
    if isinstance(spec, GaussianMV):
        return spec.cov.copy()
    if isinstance(spec, Product):
        variances = [dist_cov(f)[0, 0] for f in spec.factors]
        return np.diag(variances)
    raise TypeError(f"unknown distribution spec: {spec!r}")
