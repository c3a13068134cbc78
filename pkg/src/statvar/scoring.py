"""Posterior predictive simulation and proper scoring rules.

Scores are negatively oriented: smaller values mean better forecasts.
The continuous ranked probability score uses the sample estimator

    CRPS = mean_k |x_k - y|  -  (1 / 2K^2) sum_{k,l} |x_k - x_l|

evaluated in O(K log K) through its sorted form, the energy score is its
multivariate generalisation, and the logarithmic score evaluates an exact
Gaussian mixture over posterior draws of the conditional forecast
distribution (no kernel density estimation).
"""

from __future__ import annotations

from dataclasses import dataclass, replace

import numpy as np
from scipy.special import logsumexp

from . import linalg, process
from .errors import DimensionMismatch, RankDeficientDesign, TooFewSamples
from .priors import PriorSpec, minnesota_moments

LOG2PI = np.log(2.0 * np.pi)


# -- scoring rules ---------------------------------------------------------------


def crps_sample(samples, y: float) -> float:
    """Sample CRPS of a scalar forecast ensemble at observation y.

    Uses the sorted-form identity for the pairwise term, so the cost is
    dominated by one sort.

    Raises
    ------
    TooFewSamples
        With fewer than 2 samples.
    """
    x = np.sort(np.asarray(samples, dtype=float).reshape(-1))
    k = x.size
    if k < 2:
        raise TooFewSamples("crps needs at least 2 samples")
    term_acc = np.abs(x - y).mean()
    weights = 2.0 * np.arange(1, k + 1) - k - 1.0
    term_spread = np.dot(weights, x) / (k * k)
    return float(term_acc - term_spread)


def crps_pairwise(samples, y: float) -> float:
    """Quadratic-time reference estimator of the same CRPS functional."""
    x = np.asarray(samples, dtype=float).reshape(-1)
    if x.size < 2:
        raise TooFewSamples("crps needs at least 2 samples")
    term_acc = np.abs(x - y).mean()
    term_spread = np.abs(x[:, None] - x[None, :]).sum() / (2.0 * x.size ** 2)
    return float(term_acc - term_spread)


def energy_score(samples, y) -> float:
    """Sample energy score of an m-variate ensemble at observation y.

    Reduces exactly to :func:`crps_sample` when m = 1.
    """
    x = np.asarray(samples, dtype=float)
    if x.ndim == 1:
        x = x[:, None]
    y = np.atleast_1d(np.asarray(y, dtype=float))
    k, m = x.shape
    if k < 2:
        raise TooFewSamples("energy score needs at least 2 samples")
    if y.shape != (m,):
        raise DimensionMismatch(f"observation must have length {m}")
    if m == 1:
        return crps_sample(x[:, 0], float(y[0]))
    term_acc = np.linalg.norm(x - y, axis=1).mean()
    total = 0.0
    block = 512
    for lo in range(0, k, block):
        diff = x[lo:lo + block, None, :] - x[None, :, :]
        total += np.sqrt((diff * diff).sum(axis=2)).sum()
    return float(term_acc - total / (2.0 * k * k))


def log_score(means, variances, y: float) -> float:
    """Negative log density of a univariate Gaussian mixture at y.

    One mixture component per posterior draw, with the draw's conditional
    mean and variance; exact under the model.  Underflow of the whole
    mixture is reported as +inf.
    """
    means = np.asarray(means, dtype=float).reshape(-1)
    variances = np.asarray(variances, dtype=float).reshape(-1)
    with np.errstate(over="ignore", divide="ignore"):
        logpdfs = -0.5 * (LOG2PI + np.log(variances) + (y - means) ** 2 / variances)
        val = logsumexp(logpdfs) - np.log(means.size)
    return float(np.inf) if not np.isfinite(val) else float(-val)


def log_score_joint(means, covs, y) -> float:
    """Negative log density of an m-variate Gaussian mixture at y."""
    means = np.asarray(means, dtype=float)
    y = np.asarray(y, dtype=float)
    k, m = means.shape
    logpdfs = np.empty(k)
    for i in range(k):
        chol = linalg.cholesky_with_jitter(covs[i])
        z = np.linalg.solve(chol, y - means[i])
        logpdfs[i] = -0.5 * (m * LOG2PI + z @ z) - np.log(np.diag(chol)).sum()
    val = logsumexp(logpdfs) - np.log(k)
    return float(np.inf) if not np.isfinite(val) else float(-val)


def stationarity_probability(phi_draws) -> float:
    """Fraction of coefficient draws inside the stationary region."""
    phi_draws = np.asarray(phi_draws, dtype=float)
    if phi_draws.ndim != 4:
        raise DimensionMismatch("phi draws must be (ndraw, p, m, m)")
    count = sum(process.is_stationary(list(row))[0] for row in phi_draws)
    return count / phi_draws.shape[0]


# -- posterior predictive simulation ----------------------------------------------


@dataclass
class PredictiveSamples:
    """Forecast samples plus the per-draw conditional moments behind them.

    values has shape (H, K, m); means matches; covs is (H, K, m, m) so the
    logarithmic score can evaluate the exact mixture density.
    """

    values: np.ndarray
    means: np.ndarray
    covs: np.ndarray
    mode: str


def _draw_stacks(draws):
    """Coefficient and variance stacks from a Draws object or a pair."""
    if hasattr(draws, "transformed"):
        tr = draws.transformed()
        return tr["phi"], tr["sigma"]
    phi, sigma = draws
    phi = np.asarray(phi, dtype=float)
    sigma = np.asarray(sigma, dtype=float)
    if sigma.ndim == 2:
        sigma = np.broadcast_to(sigma, (phi.shape[0],) + sigma.shape)
    return phi, sigma


def predictive_draws(draws, data, horizon: int, seed: int,
                     mode: str = "rolling", replicates: int = 1) -> PredictiveSamples:
    """Posterior predictive samples for the last ``horizon`` points of data.

    In rolling mode each held-back point is forecast one step ahead from
    the realised history; in fixed-origin mode the forecast starts at the
    end of the training window and propagates its own uncertainty, with
    per-draw Gaussian moments computed through the companion form.

    ``replicates`` repeats the coefficient draws with fresh shocks, which
    keeps sample-based scores usable when very few posterior draws are
    available; it is bumped automatically so at least two forecast samples
    exist per time point.
    """
    phi, sigma = _draw_stacks(draws)
    data = np.asarray(data, dtype=float)
    nobs, m = data.shape
    if replicates > 1 or phi.shape[0] * replicates < 2:
        reps = max(replicates, int(np.ceil(2 / phi.shape[0])))
        phi = np.repeat(phi, reps, axis=0)
        sigma = np.repeat(sigma, reps, axis=0)
    k, p = phi.shape[0], phi.shape[1]
    if horizon < 1 or horizon >= nobs - p:
        raise DimensionMismatch("horizon must be in [1, n - p)")
    rng = np.random.default_rng(seed)
    chols = np.stack([linalg.cholesky_with_jitter(sigma[i]) for i in range(k)])
    start = nobs - horizon
    values = np.empty((horizon, k, m))
    means = np.empty((horizon, k, m))
    covs = np.empty((horizon, k, m, m))
    if mode == "rolling":
        for h in range(horizon):
            t = start + h
            lags = data[t - p:t][::-1]  # most recent lag first
            mean = np.einsum("kpij,pj->ki", phi, lags)
            shocks = rng.standard_normal((k, m))
            values[h] = mean + np.einsum("kij,kj->ki", chols, shocks)
            means[h] = mean
            covs[h] = sigma
    elif mode == "fixed-origin":
        for i in range(k):
            comp = process.companion_matrix(list(phi[i]))
            qmat = np.zeros((m * p, m * p))
            qmat[:m, :m] = sigma[i]
            state_mean = data[start - p:start][::-1].reshape(-1)
            state_cov = np.zeros((m * p, m * p))
            history = list(data[start - p:start][::-1])
            for h in range(horizon):
                state_mean = comp @ state_mean
                state_cov = comp @ state_cov @ comp.T + qmat
                means[h, i] = state_mean[:m]
                covs[h, i] = state_cov[:m, :m]
                draw_mean = np.zeros(m)
                for lag in range(p):
                    draw_mean += phi[i, lag] @ history[lag]
                point = draw_mean + chols[i] @ rng.standard_normal(m)
                values[h, i] = point
                history = [point] + history[:-1]
    else:
        raise DimensionMismatch(f"unknown mode {mode!r}")
    return PredictiveSamples(values=values, means=means, covs=covs, mode=mode)


# -- Minnesota baseline -------------------------------------------------------------


@dataclass
class MinnesotaFit:
    """Closed-form conjugate posterior over the coefficient matrices."""

    spec: PriorSpec
    sigma_hat: np.ndarray       # plug-in diagonal residual variances, length m
    post_mean: np.ndarray       # (m, p*m) per-equation posterior means
    post_chol: np.ndarray       # (m, p*m, p*m) per-equation covariance factors

    @property
    def sigma(self) -> np.ndarray:
        return np.diag(self.sigma_hat)

    def phi_draws(self, ndraws: int, seed: int) -> np.ndarray:
        """Independent posterior draws shaped (ndraws, p, m, m)."""
        rng = np.random.default_rng(seed)
        m = self.post_mean.shape[0]
        p = self.post_mean.shape[1] // m
        out = np.empty((ndraws, p, m, m))
        for i in range(m):
            z = rng.standard_normal((ndraws, m * p))
            beta = self.post_mean[i] + z @ self.post_chol[i].T
            out[:, :, i, :] = beta.reshape(ndraws, p, m)
        return out


def _univariate_ar_variance(series: np.ndarray, p: int) -> float:
    n = series.size
    design = np.column_stack([series[p - lag - 1:n - lag - 1] for lag in range(p)])
    target = series[p:]
    if np.linalg.matrix_rank(design) < p:
        raise RankDeficientDesign("univariate autoregression design is rank deficient")
    coeff, _, _, _ = np.linalg.lstsq(design, target, rcond=None)
    resid = target - design @ coeff
    dof = max(n - p - p, 1)
    return float(resid @ resid / dof)


def fit_minnesota(data, spec: PriorSpec) -> MinnesotaFit:
    """Conjugate fit with plug-in diagonal error variances.

    Residual variances come from per-variable univariate AR(p) least
    squares; the coefficient posterior is multivariate normal per
    equation and conditions on the first p observations only.
    """
    data = np.asarray(data, dtype=float)
    nobs, m = data.shape
    p = spec.p
    if nobs <= 2 * p + 1:
        raise DimensionMismatch("not enough observations for the baseline fit")
    sigma_hat = np.array([_univariate_ar_variance(data[:, j], p) for j in range(m)])
    spec = replace(spec, sigma_hat=sigma_hat)
    prior_mean, prior_var = minnesota_moments(spec, m)
    design = np.column_stack([data[p - lag - 1:nobs - lag - 1] for lag in range(p)])
    xtx = design.T @ design
    post_mean = np.empty((m, p * m))
    post_chol = np.empty((m, p * m, p * m))
    for i in range(m):
        w_inv = 1.0 / prior_var[:, i, :].reshape(-1)
        m0 = prior_mean[:, i, :].reshape(-1)
        prec = xtx / sigma_hat[i] + np.diag(w_inv)
        rhs = design.T @ data[p:, i] / sigma_hat[i] + w_inv * m0
        chol = np.linalg.cholesky(prec)
        post_mean[i] = np.linalg.solve(chol.T, np.linalg.solve(chol, rhs))
        # covariance factor: inv(prec) = C C^T with C = inv(chol)^T
        post_chol[i] = np.linalg.solve(chol, np.eye(p * m)).T
    return MinnesotaFit(spec=spec, sigma_hat=sigma_hat,
                        post_mean=post_mean, post_chol=post_chol)


# -- report assembly ------------------------------------------------------------------


@dataclass
class ScoreRow:
    label: str
    pr_stationary: float
    crps: np.ndarray        # per variable
    logs: np.ndarray        # per variable
    es_all: float
    es_subset: float


@dataclass
class ScoreReport:
    rows: list
    variables: list
    subset: list            # variable indices entering es_subset
    holdout: int
    mode: str

    def header(self) -> list:
        cols = ["prior", "pr_stat"]
        cols += [f"crps_{self.variables[j]}" for j in range(len(self.variables))]
        cols += [f"logs_{self.variables[j]}" for j in range(len(self.variables))]
        cols += ["es_all", "es_subset", "mode"]
        return cols

    def table_rows(self) -> list:
        out = []
        for row in self.rows:
            cells = [row.label, f"{row.pr_stationary:.4f}"]
            cells += [f"{v:.4f}" for v in row.crps]
            cells += [f"{v:.4f}" for v in row.logs]
            cells += [f"{row.es_all:.4f}", f"{row.es_subset:.4f}", self.mode]
            out.append(cells)
        return out

    def format_table(self) -> str:
        header = self.header()
        rows = self.table_rows()
        widths = [max(len(header[j]), *(len(r[j]) for r in rows)) for j in range(len(header))]
        lines = ["  ".join(h.rjust(w) for h, w in zip(header, widths))]
        for r in rows:
            lines.append("  ".join(c.rjust(w) for c, w in zip(r, widths)))
        return "\n".join(lines)


def score_forecasts(pred: PredictiveSamples, actual: np.ndarray,
                    subset=None) -> dict:
    """Average CRPS/logS per variable plus energy scores over held-back points."""
    actual = np.asarray(actual, dtype=float)
    horizon, ndraw, m = pred.values.shape
    if actual.shape != (horizon, m):
        raise DimensionMismatch("held-back data shape mismatch")
    subset = list(range(min(3, m))) if subset is None else list(subset)
    crps = np.zeros(m)
    logs = np.zeros(m)
    es_all = 0.0
    es_sub = 0.0
    for h in range(horizon):
        for j in range(m):
            crps[j] += crps_sample(pred.values[h, :, j], actual[h, j])
            logs[j] += log_score(pred.means[h, :, j], pred.covs[h, :, j, j],
                                 actual[h, j])
        es_all += energy_score(pred.values[h], actual[h])
        es_sub += energy_score(pred.values[h][:, subset], actual[h, subset])
    return {
        "crps": crps / horizon,
        "logs": logs / horizon,
        "es_all": es_all / horizon,
        "es_subset": es_sub / horizon,
        "subset": subset,
    }


def score_entry(label: str, phi_draws: np.ndarray, sigma_draws, data: np.ndarray,
                holdout: int, seed: int, mode: str = "rolling",
                subset=None) -> ScoreRow:
    """Score one model's posterior draws on the held-back tail of data."""
    pred = predictive_draws((phi_draws, sigma_draws), data, holdout, seed, mode=mode)
    actual = np.asarray(data, dtype=float)[-holdout:]
    scores = score_forecasts(pred, actual, subset=subset)
    return ScoreRow(
        label=label,
        pr_stationary=stationarity_probability(phi_draws),
        crps=scores["crps"],
        logs=scores["logs"],
        es_all=scores["es_all"],
        es_subset=scores["es_subset"],
    )
