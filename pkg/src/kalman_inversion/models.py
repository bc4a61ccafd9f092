"""Benchmark forward maps G: R^d -> R^k.

Models are immutable after construction and `evaluate` is a pure function of
its argument, so evaluations may be dispatched to concurrent workers. The
Darcy model lives in its own module; this one holds the linear oracle model,
the exponential-sine observables, and the Lorenz '96 flow map.
"""

from __future__ import annotations

import abc

import numpy as np

from .errors import DivergedError


class ForwardModel(abc.ABC):
    """Deterministic parameter-to-observation map with declared dimensions."""

    input_dim: int
    output_dim: int

    @abc.abstractmethod
    def evaluate(self, u: np.ndarray) -> np.ndarray:
        """G(u); must be pure and return finite values on the model's domain."""


def evaluate_ensemble(model: ForwardModel, particles: np.ndarray) -> np.ndarray:
    """Evaluate the model on every column, returning a k x N array.

    Columns are evaluated in index order; the reduction order downstream is
    therefore fixed regardless of how callers parallelize trials.
    """
    particles = np.asarray(particles, dtype=float)
    cols = [model.evaluate(particles[:, n]) for n in range(particles.shape[1])]
    return np.column_stack(cols)


class LinearModel(ForwardModel):
    """G(u) = A u; exact-gain oracle for the linear-Gaussian tests."""

    def __init__(self, a: np.ndarray):
        self.a = np.array(a, dtype=float)
        if self.a.ndim != 2:
            raise ValueError("A must be a matrix")
        self.a.setflags(write=False)
        self.output_dim, self.input_dim = self.a.shape

    def evaluate(self, u: np.ndarray) -> np.ndarray:
        u = np.asarray(u, dtype=float)
        if u.shape != (self.input_dim,):
            raise ValueError(f"expected input of length {self.input_dim}, got {u.shape}")
        return self.a @ u


class ExpSinModel(ForwardModel):
    """Observables of f(t, u) = exp(u1 sin t + u2) over one period.

    G(u) = [mean_t f, max_t f - min_t f] on a uniform grid of
    `quadrature_points` samples of [0, 2 pi) (periodic rectangle rule, which
    converges spectrally for the mean; the extrema sit at sin t = +-1 so the
    grid extrema converge fast too).
    """

    input_dim = 2
    output_dim = 2

    # exp argument beyond which float64 overflows.
    OVERFLOW_LIMIT = 700.0

    def __init__(self, quadrature_points: int = 2048):
        if quadrature_points < 2:
            raise ValueError("quadrature_points must be >= 2")
        self.quadrature_points = quadrature_points
        self._sin_grid = np.sin(np.linspace(0.0, 2.0 * np.pi, quadrature_points, endpoint=False))
        self._sin_grid.setflags(write=False)

    def evaluate(self, u: np.ndarray) -> np.ndarray:
        u = np.asarray(u, dtype=float)
        if u.shape != (2,):
            raise ValueError(f"expected input of length 2, got {u.shape}")
        if abs(u[0]) + abs(u[1]) > self.OVERFLOW_LIMIT:
            raise OverflowError(f"|u1| + |u2| = {abs(u[0]) + abs(u[1]):.3g} exceeds exp range")
        f = np.exp(u[0] * self._sin_grid + u[1])
        return np.array([f.mean(), f.max() - f.min()])


def lorenz96_rhs(x: np.ndarray, forcing: float) -> np.ndarray:
    """dx_k/dt = -x_k - x_{k-1} (x_{k-2} - x_{k+1}) + F with cyclic indices."""
    x = np.asarray(x, dtype=float)
    return -x - np.roll(x, 1) * (np.roll(x, 2) - np.roll(x, -1)) + forcing


def rk4_integrate(x0: np.ndarray, rhs, dt: float, n_steps: int) -> np.ndarray:
    """Classical fixed-step RK4 for an autonomous system x' = rhs(x)."""
    if dt <= 0:
        raise ValueError("dt must be positive")
    x = np.array(x0, dtype=float)
    for _ in range(n_steps):
        k1 = rhs(x)
        k2 = rhs(x + 0.5 * dt * k1)
        k3 = rhs(x + 0.5 * dt * k2)
        k4 = rhs(x + dt * k3)
        x = x + (dt / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4)
        if not np.all(np.isfinite(x)):
            raise DivergedError("RK4 state became non-finite")
    return x


class Lorenz96Model(ForwardModel):
    """Flow map of the Lorenz '96 system: G(u) = x(t) from x(0) = u.

    Defaults integrate 8 RK4 steps of 0.05, i.e. the state 0.4 time units
    ahead, with D = 20 and forcing F = 8 (chaotic regime).
    """

    def __init__(self, dim: int = 20, forcing: float = 8.0, dt: float = 0.05, n_steps: int = 8):
        if dim < 4:
            raise ValueError("cyclic indexing needs dim >= 4")
        if dt <= 0:
            raise ValueError("dt must be positive")
        self.input_dim = dim
        self.output_dim = dim
        self.forcing = forcing
        self.dt = dt
        self.n_steps = n_steps

    def evaluate(self, u: np.ndarray) -> np.ndarray:
        u = np.asarray(u, dtype=float)
        if u.shape != (self.input_dim,):
            raise ValueError(f"expected input of length {self.input_dim}, got {u.shape}")
        return rk4_integrate(u, lambda x: lorenz96_rhs(x, self.forcing), self.dt, self.n_steps)

    def spin_up(self, x0: np.ndarray, time_units: float) -> np.ndarray:
        """Integrate x0 forward by `time_units` to land on the attractor."""
        n_steps = int(round(time_units / self.dt))
        return rk4_integrate(x0, lambda x: lorenz96_rhs(x, self.forcing), self.dt, n_steps)
