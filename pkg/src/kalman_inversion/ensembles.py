"""Particle ensembles and their empirical statistics.

An ensemble is a d x N array whose columns are parameter particles. All
statistics take an explicit normalization (N or N - 1) because the EKI update
uses 1/N empirical covariances while the transform update builds its
anomalies with 1/sqrt(N - 1); keeping the divisor a parameter lets each
algorithm follow its own convention exactly.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np


@dataclass(frozen=True, eq=False)
class Ensemble:
    """Immutable collection of N particles in R^d, stored as d x N columns."""

    particles: np.ndarray

    def __post_init__(self) -> None:
        arr = np.array(self.particles, dtype=float)
        if arr.ndim == 1:
            arr = arr[np.newaxis, :]
        if arr.ndim != 2:
            raise ValueError(f"particles must be a d x N array, got ndim={arr.ndim}")
        if arr.shape[1] < 1:
            raise ValueError("ensemble needs at least one particle")
        if not np.all(np.isfinite(arr)):
            raise ValueError("ensemble entries must be finite")
        arr.setflags(write=False)
        object.__setattr__(self, "particles", arr)

    @property
    def dim(self) -> int:
        return self.particles.shape[0]

    @property
    def size(self) -> int:
        return self.particles.shape[1]

    def column(self, n: int) -> np.ndarray:
        return self.particles[:, n]


def _as_columns(x) -> np.ndarray:
    if isinstance(x, Ensemble):
        return x.particles
    arr = np.asarray(x, dtype=float)
    if arr.ndim == 1:
        arr = arr[np.newaxis, :]
    return arr


def ensemble_mean(e) -> np.ndarray:
    """Columnwise mean: (1/N) sum_n u^(n)."""
    return _as_columns(e).mean(axis=1)


def anomalies(e, normalization: float) -> np.ndarray:
    """Centered particles scaled by 1/sqrt(normalization).

    Column n is (u^(n) - mean) / sqrt(normalization); normalization is N for
    1/N covariances and N - 1 for transform-style anomalies.
    """
    cols = _as_columns(e)
    if normalization <= 0:
        raise ValueError("normalization must be positive")
    return (cols - cols.mean(axis=1, keepdims=True)) / np.sqrt(normalization)


def cross_cov(a, b, normalization: float) -> np.ndarray:
    """Empirical cross-covariance (1/normalization) sum_n (a_n - abar)(b_n - bbar)^T.

    With a == b the result is symmetric positive semidefinite.
    """
    ca = _as_columns(a)
    cb = _as_columns(b)
    if ca.shape[1] != cb.shape[1]:
        raise ValueError(f"particle counts differ: {ca.shape[1]} vs {cb.shape[1]}")
    if normalization <= 0:
        raise ValueError("normalization must be positive")
    da = ca - ca.mean(axis=1, keepdims=True)
    db = cb - cb.mean(axis=1, keepdims=True)
    return (da @ db.T) / normalization
