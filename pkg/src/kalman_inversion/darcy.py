"""Darcy-flow forward model on the unit square.

The log-permeability field is a Gaussian random field with Matern covariance,
represented by a truncated Karhunen-Loeve expansion: the inversion parameters
are the leading KL coefficients. Pressure solves -div(a grad p) = f with a
5-point finite-difference stencil and homogeneous Dirichlet boundary; the
observations are the pressure at (optionally strided) interior nodes.

KL modes are computed numerically: dense Matern covariance on a lattice,
leading eigenpairs, eigenvalues scaled by the cell area so they approximate
the continuum operator. For large solve grids the KL lattice may be coarser
than the solve lattice, with bilinear interpolation in between.
"""

from __future__ import annotations

import math

import numpy as np
import scipy.linalg
import scipy.sparse
import scipy.sparse.linalg
import scipy.special
from scipy.interpolate import RegularGridInterpolator
from scipy.spatial.distance import cdist

from .models import ForwardModel

# Solver residual contract; the method behind it (direct sparse here) is not.
RESIDUAL_RTOL = 1e-9

# Default side length of the KL lattice when the solve grid is large.
DEFAULT_KL_LATTICE = 40


class EllipticSolveError(Exception):
    """The linear solve failed to meet the residual contract."""


def matern_kernel(r, smoothness: float = 1.0, length: float = 0.25, variance: float = 1.0):
    """Stationary Matern covariance k(r); for smoothness 1 this is
    variance * (sqrt(2) r / length) * K_1(sqrt(2) r / length), with k(0) = variance.
    """
    r = np.asarray(r, dtype=float)
    nu = smoothness
    z = np.sqrt(2.0 * nu) * r / length
    out = np.full(r.shape, variance)
    pos = z > 0
    zp = z[pos]
    out[pos] = variance * (2.0 ** (1.0 - nu) / math.gamma(nu)) * zp**nu * scipy.special.kv(nu, zp)
    return out


def _lattice(side: int) -> np.ndarray:
    return np.linspace(0.0, 1.0, side)


def matern_kl_modes(
    grid_n: int, smoothness: float, length: float, n_modes: int
) -> tuple[np.ndarray, np.ndarray]:
    """Leading KL eigenpairs of the Matern field on a grid_n x grid_n lattice.

    Returns (eigenvalues, modes) with eigenvalues sorted descending and modes
    of shape (n_modes, grid_n, grid_n). The lattice covers [0,1]^2 including
    the boundary with spacing h = 1/(grid_n - 1); eigenvalues carry the cell
    area h^2 so they approximate continuum KL eigenvalues, and the modes are
    orthonormal under the h^2-weighted grid inner product.
    """
    if n_modes > grid_n**2:
        raise ValueError(f"n_modes={n_modes} exceeds lattice size {grid_n**2}")
    xs = _lattice(grid_n)
    pts = np.stack(np.meshgrid(xs, xs, indexing="ij"), axis=-1).reshape(-1, 2)
    cov = matern_kernel(cdist(pts, pts), smoothness, length)
    total = grid_n**2
    vals, vecs = scipy.linalg.eigh(cov, subset_by_index=[total - n_modes, total - 1])
    vals = vals[::-1]
    vecs = vecs[:, ::-1]
    if vals[-1] <= 0:
        raise ValueError("requested KL modes reach non-positive eigenvalues; lower n_modes")
    h = 1.0 / (grid_n - 1)
    # Fix the arbitrary eigenvector sign: largest-magnitude entry positive.
    peak = vecs[np.abs(vecs).argmax(axis=0), np.arange(n_modes)]
    vecs = vecs * np.sign(peak)
    modes = (vecs.T / h).reshape(n_modes, grid_n, grid_n)
    return vals * h**2, modes


def permeability_from_coeffs(
    u: np.ndarray, eigenvalues: np.ndarray, modes: np.ndarray
) -> np.ndarray:
    """Permeability a(x) = exp(sum_i u_i sqrt(lambda_i) phi_i(x)), nodewise."""
    u = np.asarray(u, dtype=float)
    if u.size > len(eigenvalues):
        raise ValueError(f"{u.size} coefficients but only {len(eigenvalues)} modes")
    log_field = np.tensordot(u * np.sqrt(eigenvalues[: u.size]), modes[: u.size], axes=1)
    if np.abs(log_field).max() > 700.0:
        raise OverflowError("log-permeability exceeds exp range")
    return np.exp(log_field)


def darcy_solve(a: np.ndarray, f: np.ndarray, grid_n: int) -> np.ndarray:
    """Solve -div(a grad p) = f on the unit square with p = 0 on the boundary.

    `a` and `f` live on the full (grid_n + 2)^2 node grid (grid_n interior
    nodes per side, h = 1/(grid_n + 1)); face coefficients are arithmetic
    means of the adjacent nodes. Returns the full pressure grid, boundary
    exactly zero.
    """
    n = grid_n
    side = n + 2
    a = np.asarray(a, dtype=float)
    f = np.asarray(f, dtype=float)
    if a.shape != (side, side) or f.shape != (side, side):
        raise ValueError(f"fields must be {side} x {side} full-grid arrays")
    if a.min() <= 0:
        raise ValueError("permeability must be strictly positive")
    h = 1.0 / (n + 1)

    center = a[1:-1, 1:-1]
    a_e = 0.5 * (center + a[2:, 1:-1])
    a_w = 0.5 * (center + a[:-2, 1:-1])
    a_n = 0.5 * (center + a[1:-1, 2:])
    a_s = 0.5 * (center + a[1:-1, :-2])

    idx = np.arange(n * n).reshape(n, n)
    rows = [idx.ravel()]
    cols = [idx.ravel()]
    vals = [(a_e + a_w + a_n + a_s).ravel()]
    # x-neighbors (rows of the interior lattice)
    rows += [idx[:-1, :].ravel(), idx[1:, :].ravel()]
    cols += [idx[1:, :].ravel(), idx[:-1, :].ravel()]
    vals += [-a_e[:-1, :].ravel(), -a_w[1:, :].ravel()]
    # y-neighbors (columns)
    rows += [idx[:, :-1].ravel(), idx[:, 1:].ravel()]
    cols += [idx[:, 1:].ravel(), idx[:, :-1].ravel()]
    vals += [-a_n[:, :-1].ravel(), -a_s[:, 1:].ravel()]

    matrix = scipy.sparse.coo_matrix(
        (np.concatenate(vals), (np.concatenate(rows), np.concatenate(cols))),
        shape=(n * n, n * n),
    ).tocsc()
    rhs = (h**2) * f[1:-1, 1:-1].ravel()
    lu = scipy.sparse.linalg.splu(matrix)
    solution = lu.solve(rhs)

    # Iterative refinement against the backward-error residual
    # ||Ax - b|| / (||A|| ||x|| + ||b||); high-contrast permeability fields
    # leave the raw factorization above the contract on the first pass.
    def rel_residual(x):
        scale = abs(matrix).sum(axis=1).max() * np.linalg.norm(x) + np.linalg.norm(rhs)
        return np.linalg.norm(matrix @ x - rhs) / max(scale, 1e-300)

    for _ in range(3):
        if rel_residual(solution) <= RESIDUAL_RTOL:
            break
        solution = solution + lu.solve(rhs - matrix @ solution)
    if not np.all(np.isfinite(solution)) or rel_residual(solution) > RESIDUAL_RTOL:
        raise EllipticSolveError(
            f"relative residual {rel_residual(solution):.3e} exceeds {RESIDUAL_RTOL}"
        )

    pressure = np.zeros((side, side))
    pressure[1:-1, 1:-1] = solution.reshape(n, n)
    return pressure


class DarcyModel(ForwardModel):
    """KL coefficients -> log-permeability -> pressure observations."""

    def __init__(
        self,
        grid_n: int = 32,
        kl_dim: int = 20,
        matern_smoothness: float = 1.0,
        matern_length: float = 0.25,
        forcing: float | np.ndarray = 1.0,
        obs_stride: int = 1,
        kl_grid_n: int | None = None,
    ):
        if obs_stride < 1:
            raise ValueError("obs_stride must be >= 1")
        self.grid_n = grid_n
        self.kl_dim = kl_dim
        self.matern_smoothness = matern_smoothness
        self.matern_length = matern_length
        self.obs_stride = obs_stride
        side = grid_n + 2
        self.kl_grid_n = kl_grid_n if kl_grid_n is not None else min(side, DEFAULT_KL_LATTICE)

        self.eigenvalues, kl_modes = matern_kl_modes(
            self.kl_grid_n, matern_smoothness, matern_length, kl_dim
        )
        if self.kl_grid_n == side:
            self.modes = kl_modes
        else:
            xs_kl = _lattice(self.kl_grid_n)
            xs = _lattice(side)
            grid_pts = np.stack(np.meshgrid(xs, xs, indexing="ij"), axis=-1).reshape(-1, 2)
            interpolated = np.empty((kl_dim, side, side))
            for i in range(kl_dim):
                interp = RegularGridInterpolator((xs_kl, xs_kl), kl_modes[i])
                interpolated[i] = interp(grid_pts).reshape(side, side)
            self.modes = interpolated
        self.modes.setflags(write=False)

        if np.isscalar(forcing):
            self.forcing = np.full((side, side), float(forcing))
        else:
            self.forcing = np.array(forcing, dtype=float)
            if self.forcing.shape != (side, side):
                raise ValueError(f"forcing grid must be {side} x {side}")
        self.forcing.setflags(write=False)

        # Observed interior nodes: every obs_stride-th index along both axes,
        # row-major (x index outer, y index inner).
        self._obs_idx = np.arange(0, grid_n, obs_stride)
        self.input_dim = kl_dim
        self.output_dim = len(self._obs_idx) ** 2

    def pressure_field(self, u: np.ndarray) -> np.ndarray:
        """Full pressure grid for KL coefficients u (used by diagnostics)."""
        a = permeability_from_coeffs(u, self.eigenvalues, self.modes)
        return darcy_solve(a, self.forcing, self.grid_n)

    def evaluate(self, u: np.ndarray) -> np.ndarray:
        u = np.asarray(u, dtype=float)
        if u.shape != (self.input_dim,):
            raise ValueError(f"expected input of length {self.input_dim}, got {u.shape}")
        interior = self.pressure_field(u)[1:-1, 1:-1]
        return interior[np.ix_(self._obs_idx, self._obs_idx)].ravel()
