"""Single-iteration inversion updates: EKI, ETKI, and UKI.

EKI moves every particle with a shared gain built from 1/N empirical
covariances,

    u^(n) <- u^(n) + dt C^{uG} (Gamma + dt C^{GG})^{-1} (y - G(u^(n))),

deterministically (no perturbed observations). ETKI performs the same
linear-Gaussian update in N-dimensional ensemble space through a transform
matrix, with 1/(N-1) anomalies. UKI replaces the Monte Carlo ensemble with
2d+1 deterministic sigma points around a running mean/covariance pair and
regularizes with prior-derived matrices.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .ensembles import Ensemble, cross_cov, ensemble_mean
from .linalg import NotPositiveDefinite, cholesky_lower, spd_solve, sym_sqrt, symmetrize


def apply_momentum(current: Ensemble, previous: Ensemble, lam: float) -> Ensemble:
    """Particle-wise momentum nudge v^(n) = u^(n) + lam (u^(n) - prev^(n)).

    lam == 0 returns `current` unchanged, so the accelerated driver with a
    zero coefficient is bitwise identical to the plain one.
    """
    if current.particles.shape != previous.particles.shape:
        raise ValueError(
            f"shape mismatch: {current.particles.shape} vs {previous.particles.shape}"
        )
    if not 0.0 <= lam < 1.0:
        raise ValueError(f"momentum coefficient must be in [0, 1), got {lam}")
    if lam == 0.0:
        return current
    nudged = current.particles + lam * (current.particles - previous.particles)
    return Ensemble(nudged)


def eki_update(
    v: Ensemble, gv: np.ndarray, y: np.ndarray, gamma: np.ndarray, dt: float = 1.0
) -> Ensemble:
    """One EKI step applied to the (possibly nudged) ensemble v.

    gv holds the forward evaluations, column n = G(v^(n)). Covariances use
    the 1/N normalization; the solve against Gamma + dt C^{GG} is shared by
    all particles, each with its own innovation y - G(v^(n)).
    """
    gv = np.asarray(gv, dtype=float)
    y = np.asarray(y, dtype=float)
    n = v.size
    if gv.ndim != 2 or gv.shape[1] != n:
        raise ValueError(f"gv must be k x N with N={n}, got shape {gv.shape}")
    if n < 2:
        raise ValueError("EKI needs at least two particles")
    c_ug = cross_cov(v, gv, n)
    c_gg = cross_cov(gv, gv, n)
    innovations = y[:, np.newaxis] - gv
    solved = spd_solve(symmetrize(gamma + dt * c_gg), innovations)
    return Ensemble(v.particles + dt * (c_ug @ solved))


def etki_transform(v: Ensemble, gv: np.ndarray, y: np.ndarray, gamma: np.ndarray) -> Ensemble:
    """ETKI square-root update: returns the transformed ensemble.

    With anomalies Du, DG scaled by 1/sqrt(N-1), the transform is

        Omega = (I + DG^T Gamma^{-1} DG)^{-1}        (N x N)
        w     = Omega DG^T Gamma^{-1} (y - gbar)
        col_n <- ubar + Du (w + sqrt(N-1) col_n(sqrt(Omega)))

    Everything is assembled in ensemble space: the only k-dimensional
    operation is the solve against Gamma.
    """
    gv = np.asarray(gv, dtype=float)
    y = np.asarray(y, dtype=float)
    n = v.size
    if gv.ndim != 2 or gv.shape[1] != n:
        raise ValueError(f"gv must be k x N with N={n}, got shape {gv.shape}")
    if n < 2:
        raise ValueError("ETKI needs at least two particles")
    ubar = ensemble_mean(v)
    gbar = gv.mean(axis=1)
    du = (v.particles - ubar[:, np.newaxis]) / np.sqrt(n - 1)
    dg = (gv - gbar[:, np.newaxis]) / np.sqrt(n - 1)
    ginv_dg = spd_solve(gamma, dg)
    omega = spd_solve(symmetrize(np.eye(n) + dg.T @ ginv_dg), np.eye(n))
    omega = symmetrize(omega)
    w = omega @ (ginv_dg.T @ (y - gbar))
    transform = w[:, np.newaxis] + np.sqrt(n - 1) * sym_sqrt(omega)
    return Ensemble(ubar[:, np.newaxis] + du @ transform)


@dataclass(frozen=True)
class UkiHyper:
    """UKI regularization hyperparameters derived from the prior N(m, C):
    r = m, sigma_omega = (2 - alpha^2) C, sigma_nu = 2 Gamma, alpha in (0, 1].
    """

    r: np.ndarray
    alpha: float
    sigma_omega: np.ndarray
    sigma_nu: np.ndarray

    def __post_init__(self) -> None:
        object.__setattr__(self, "r", np.asarray(self.r, dtype=float))
        object.__setattr__(self, "sigma_omega", np.asarray(self.sigma_omega, dtype=float))
        object.__setattr__(self, "sigma_nu", np.asarray(self.sigma_nu, dtype=float))
        if not 0.0 < self.alpha <= 1.0:
            raise ValueError(f"alpha must be in (0, 1], got {self.alpha}")

    @classmethod
    def from_prior(
        cls, mean: np.ndarray, cov: np.ndarray, gamma: np.ndarray, alpha: float = 1.0
    ) -> "UkiHyper":
        cov = np.asarray(cov, dtype=float)
        return cls(
            r=np.asarray(mean, dtype=float),
            alpha=alpha,
            sigma_omega=(2.0 - alpha**2) * cov,
            sigma_nu=2.0 * np.asarray(gamma, dtype=float),
        )


def uki_gamma_weight(dim: int) -> float:
    """Sigma-point spread gamma = sqrt(d) min(sqrt(4/d), 1)."""
    return np.sqrt(dim) * min(np.sqrt(4.0 / dim), 1.0)


def uki_generate_ensemble(m: np.ndarray, c: np.ndarray, hyper: UkiHyper) -> Ensemble:
    """Deterministic sigma ensemble around the regularized (m, C).

    mhat = r + alpha (m - r) and Chat = alpha^2 C + sigma_omega; the 2d+1
    columns are mhat, then mhat + gamma L_n, then mhat - gamma L_n, with L
    the lower Cholesky factor of Chat.
    """
    m = np.asarray(m, dtype=float)
    mhat = hyper.r + hyper.alpha * (m - hyper.r)
    chat = symmetrize(hyper.alpha**2 * np.asarray(c, dtype=float) + hyper.sigma_omega)
    lower = cholesky_lower(chat)
    d = m.size
    gam = uki_gamma_weight(d)
    points = np.empty((d, 2 * d + 1))
    points[:, 0] = mhat
    points[:, 1 : d + 1] = mhat[:, np.newaxis] + gam * lower
    points[:, d + 1 :] = mhat[:, np.newaxis] - gam * lower
    return Ensemble(points)


def uki_update_mean_cov(
    u: Ensemble, gu: np.ndarray, y: np.ndarray, sigma_nu: np.ndarray
) -> tuple[np.ndarray, np.ndarray]:
    """Kalman update of the UKI mean/covariance from sigma-point evaluations.

    Column 0 of u is the center mhat (its evaluation plays G(mhat)); the
    spread statistics use 1/(2 gamma^2) weights over all 2d+1 points, which
    reconstructs Chat exactly for an un-nudged sigma ensemble and stays well
    defined after a momentum nudge.
    """
    gu = np.asarray(gu, dtype=float)
    y = np.asarray(y, dtype=float)
    d = u.dim
    if u.size != 2 * d + 1:
        raise ValueError(f"sigma ensemble must have 2d+1 = {2 * d + 1} columns, got {u.size}")
    if gu.shape[1] != u.size:
        raise ValueError("gu column count must match the sigma ensemble")
    gam = uki_gamma_weight(d)
    weight = 1.0 / (2.0 * gam**2)
    mhat = u.column(0)
    g_mhat = gu[:, 0]
    du = u.particles - mhat[:, np.newaxis]
    dg = gu - g_mhat[:, np.newaxis]
    chat = symmetrize(weight * (du @ du.T))
    c_ug = weight * (du @ dg.T)
    c_gg = symmetrize(weight * (dg @ dg.T)) + np.asarray(sigma_nu, dtype=float)
    gain_t = spd_solve(symmetrize(c_gg), np.column_stack([y - g_mhat, c_ug.T]))
    m_new = mhat + c_ug @ gain_t[:, 0]
    c_new = symmetrize(chat - c_ug @ gain_t[:, 1:])
    return m_new, c_new
