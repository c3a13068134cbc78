"""VAR(p) process utilities: companion form, stationarity, autocovariances,
and simulation initialised at the stationary distribution."""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from . import linalg
from .errors import DimensionMismatch, NotStationary

RHO_TOL = 1e-8


@dataclass
class VarModel:
    """Error variance and autoregressive coefficient matrices.

    Attributes
    ----------
    sigma : ndarray (m, m)
        SPD error variance matrix.
    phi : list of ndarray (m, m)
        Coefficient matrices, lag 1 first.
    """

    sigma: np.ndarray
    phi: list = field(default_factory=list)

    def __post_init__(self):
        self.sigma = np.asarray(self.sigma, dtype=float)
        self.phi = [np.asarray(p, dtype=float) for p in self.phi]
        m = self.sigma.shape[0]
        if self.sigma.shape != (m, m):
            raise DimensionMismatch("sigma must be square")
        for p in self.phi:
            if p.shape != (m, m):
                raise DimensionMismatch("phi matrices must match sigma's dimension")

    @property
    def dim(self) -> int:
        return self.sigma.shape[0]

    @property
    def order(self) -> int:
        return len(self.phi)


def companion_matrix(phi: list) -> np.ndarray:
    """Block companion matrix stacking (phi_1 .. phi_p) over shifted identities."""
    phi = [np.asarray(p, dtype=float) for p in phi]
    p = len(phi)
    m = phi[0].shape[0]
    comp = np.zeros((m * p, m * p))
    comp[:m, :] = np.hstack(phi)
    if p > 1:
        comp[m:, :-m] = np.eye(m * (p - 1))
    return comp


def is_stationary(phi: list) -> tuple[bool, float]:
    """Whether the companion spectral radius is below one, and the radius."""
    if len(phi) == 0:
        return True, 0.0
    radius = linalg.spectral_radius(companion_matrix(phi))
    return radius < 1.0, radius


def autocovariances(model: VarModel, max_lag: int, rho_tol: float = RHO_TOL) -> list:
    """Autocovariance matrices Gamma_0 .. Gamma_maxlag.

    Convention: Gamma_i = E[y_t y_{t+i}^T], so Gamma_{-i} = Gamma_i^T.
    Lags below p come from the companion-form Lyapunov solve; higher lags
    from the recursion Gamma_j = sum_i Gamma_{j-i} phi_i^T.
    """
    m, p = model.dim, model.order
    if p == 0:
        return [model.sigma.copy()] + [np.zeros((m, m)) for _ in range(max_lag)]
    comp = companion_matrix(model.phi)
    qmat = np.zeros((m * p, m * p))
    qmat[:m, :m] = model.sigma
    state_var = linalg.solve_discrete_lyapunov(comp, qmat, rho_tol=rho_tol)
    # State is (y_t, ..., y_{t-p+1}): block (k, 0) of its variance is Gamma_k.
    gammas = [state_var[k * m:(k + 1) * m, :m] for k in range(p)]
    gammas[0] = linalg.symmetrize(gammas[0])

    def lagged(j):
        return gammas[j] if j >= 0 else gammas[-j].T

    for j in range(p, max_lag + 1):
        gammas.append(sum(lagged(j - i - 1) @ model.phi[i].T for i in range(p)))
    return gammas[:max_lag + 1]


def block_toeplitz(gammas: list, nblocks: int) -> np.ndarray:
    """Joint covariance of nblocks consecutive observations.

    Block (i, j) is Gamma_{j-i} for j >= i and Gamma_{i-j}^T otherwise,
    matching the time-increasing stacking (y_1^T, ..., y_n^T)^T.
    """
    m = gammas[0].shape[0]
    out = np.zeros((nblocks * m, nblocks * m))
    for i in range(nblocks):
        for j in range(nblocks):
            blk = gammas[j - i] if j >= i else gammas[i - j].T
            out[i * m:(i + 1) * m, j * m:(j + 1) * m] = blk
    return linalg.symmetrize(out)


def simulate(model: VarModel, n: int, seed: int) -> np.ndarray:
    """Simulate a length-n trajectory started at the stationary distribution.

    The first p observations are drawn jointly from N(0, G) with G the
    block-Toeplitz stationary covariance; later points follow the VAR
    recursion with N(0, Sigma) shocks.  Deterministic given the seed.
    """
    if n < 1:
        raise DimensionMismatch("n must be >= 1")
    stationary, radius = is_stationary(model.phi)
    if not stationary:
        raise NotStationary(f"companion spectral radius {radius:.6f} >= 1")
    m, p = model.dim, model.order
    rng = np.random.default_rng(seed)
    out = np.zeros((n, m))
    if p > 0:
        gammas = autocovariances(model, p - 1)
        gmat = block_toeplitz(gammas, p)
        chol = linalg.cholesky_with_jitter(gmat)
        init = chol @ rng.standard_normal(m * p)
        head = min(n, p)
        out[:head] = init.reshape(p, m)[:head]
    chol_sigma = linalg.cholesky_with_jitter(model.sigma)
    for t in range(p, n):
        mean = sum(model.phi[i] @ out[t - i - 1] for i in range(p))
        out[t] = mean + chol_sigma @ rng.standard_normal(m)
    return out
