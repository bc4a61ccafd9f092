"""Dense linear-algebra kernels for symmetric positive definite matrices.

Covariances are always attacked through these helpers: factorizations and
solves, never explicit inverses. A failed factorization is surfaced as
:class:`NotPositiveDefinite` rather than patched with jitter, because silent
regularization would change the algorithm under test.
"""

from __future__ import annotations

import numpy as np

# Relative tolerance for the symmetry check on SPD inputs.
SYMMETRY_RTOL = 1e-12


class NotPositiveDefinite(Exception):
    """Raised when a matrix required to be SPD fails its factorization.

    Typically signals a degenerate covariance, e.g. a collapsed ensemble.
    """


def _check_symmetric(m: np.ndarray, name: str = "matrix") -> np.ndarray:
    m = np.asarray(m, dtype=float)
    if m.ndim != 2 or m.shape[0] != m.shape[1]:
        raise ValueError(f"{name} must be square, got shape {m.shape}")
    scale = np.abs(m).max()
    if scale > 0 and np.abs(m - m.T).max() > SYMMETRY_RTOL * scale:
        raise ValueError(f"{name} is not symmetric to relative tolerance {SYMMETRY_RTOL}")
    return m


def cholesky_lower(m: np.ndarray) -> np.ndarray:
    """Lower-triangular L with L L^T = m, for SPD m."""
    m = _check_symmetric(m, "cholesky input")
    try:
        return np.linalg.cholesky(m)
    except np.linalg.LinAlgError as exc:
        raise NotPositiveDefinite(f"Cholesky failed: {exc}") from exc


def sym_sqrt(m: np.ndarray) -> np.ndarray:
    """Symmetric square root of an SPD matrix via eigendecomposition.

    Eigenvalues in [-tol, 0], with tol = 1e-12 * max|eigenvalue|, are clamped
    to zero (round-off in matrices that are SPD in exact arithmetic); anything
    below -tol raises :class:`NotPositiveDefinite`.
    """
    m = _check_symmetric(m, "sym_sqrt input")
    eigvals, eigvecs = np.linalg.eigh(m)
    tol = 1e-12 * max(np.abs(eigvals).max(), 1e-300)
    if eigvals.min() < -tol:
        raise NotPositiveDefinite(
            f"eigenvalue {eigvals.min():.3e} below -{tol:.3e}: matrix is not PSD"
        )
    eigvals = np.clip(eigvals, 0.0, None)
    root = (eigvecs * np.sqrt(eigvals)) @ eigvecs.T
    return 0.5 * (root + root.T)


def spd_solve(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    """Solve a @ x = b for SPD a via Cholesky; b may be a vector or matrix."""
    import scipy.linalg

    a = _check_symmetric(a, "spd_solve matrix")
    b = np.asarray(b, dtype=float)
    try:
        factor = scipy.linalg.cho_factor(a, lower=True, check_finite=False)
    except scipy.linalg.LinAlgError as exc:
        raise NotPositiveDefinite(f"Cholesky failed in solve: {exc}") from exc
    return scipy.linalg.cho_solve(factor, b, check_finite=False)


def symmetrize(m: np.ndarray) -> np.ndarray:
    """0.5 * (m + m^T); kills round-off asymmetry in covariance products."""
    m = np.asarray(m, dtype=float)
    return 0.5 * (m + m.T)
