"""Posterior evaluation in unconstrained coordinates and a self-contained
Hamiltonian Monte Carlo sampler.

The sampler works on a flat coordinate vector holding, in order: the
entries of the coefficient matrices (row-major per lag), the log-Cholesky
coordinates of the error variance, and transformed latent
hyperparameters (identity for means, log for precisions and mixing
variances).  For the stationary prior kinds the coefficient block holds
the unconstrained A matrices; the vague kind samples its C matrices
natively; the semi-conjugate baseline samples raw coefficients with a
likelihood conditioned on the first p observations.

Gradients are forward-mode algorithmic derivatives threaded through the
whole pipeline (see :mod:`statvar.autodiff`); central finite differences
are kept as a verification oracle and CLI fallback.
"""

from __future__ import annotations

import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np
from scipy.fft import next_fast_len, rfft, irfft
from scipy.stats import norm as _norm

from . import linalg, priors, process, reparam
from .autodiff import Dual, mlogdet, minv, seed as seed_duals, value
from .errors import (
    AllDivergent,
    ConfigInvalid,
    DimensionMismatch,
    NonFinite,
    NotSpd,
    NotStationary,
    TooFewDraws,
)

LOG2PI = np.log(2.0 * np.pi)

# Dual-averaging constants (common defaults; the adaptation schedule is a
# calibration choice, not dictated by the statistical model).
DA_GAMMA = 0.05
DA_T0 = 10.0
DA_KAPPA = 0.75
DIVERGENCE_THRESHOLD = 1000.0


@dataclass
class HmcConfig:
    """Sampler settings; ``iterations`` counts warmup plus kept draws."""

    chains: int = 4
    iterations: int = 2000
    warmup: int = 1000
    target_accept: float = 0.8
    max_leapfrog: int = 64
    seed: int = 0
    init_jitter: float = 0.5
    grad_method: str = "ad"

    def validate(self):
        if not 0 < self.target_accept < 1:
            raise ConfigInvalid("target_accept must be in (0, 1)")
        if self.warmup >= self.iterations:
            raise ConfigInvalid("warmup must be smaller than iterations")
        if self.chains < 1 or self.max_leapfrog < 1:
            raise ConfigInvalid("chains and max_leapfrog must be positive")
        if self.grad_method not in ("ad", "fd"):
            raise ConfigInvalid("grad_method must be 'ad' or 'fd'")


# -- exact likelihood -----------------------------------------------------------


def _block_toeplitz_any(gammas, p, m):
    """Stationary covariance of p consecutive observations; dual-aware."""
    if not any(isinstance(g, Dual) for g in gammas):
        return process.block_toeplitz([value(g) for g in gammas[:p]], p)
    d = next(g for g in gammas if isinstance(g, Dual)).tan.shape[0]
    val = np.zeros((p * m, p * m))
    tan = np.zeros((d, p * m, p * m))
    for i in range(p):
        for j in range(p):
            blk = gammas[j - i] if j >= i else gammas[i - j].T
            if isinstance(blk, Dual):
                val[i * m:(i + 1) * m, j * m:(j + 1) * m] = blk.val
                tan[:, i * m:(i + 1) * m, j * m:(j + 1) * m] = blk.tan
            else:
                val[i * m:(i + 1) * m, j * m:(j + 1) * m] = blk
    return Dual(val, tan)


def _loglik_core(phis, sigma, gammas, y, conditional_only=False):
    """Factorised stationary Gaussian log likelihood; dual-aware.

    The first p observations contribute a joint N(0, G) term with G the
    block-Toeplitz matrix of the autocovariances; later observations
    contribute one-step conditional normal terms.  With
    ``conditional_only`` the initial block is skipped (used by the
    unconstrained baseline, which conditions on the first p points).
    """
    n, m = y.shape
    p = len(phis)
    total = 0.0
    if p > 0 and not conditional_only:
        gmat = _block_toeplitz_any(gammas, p, m)
        head = y[:p].reshape(-1)
        ginv = minv(gmat)
        quad = head @ (ginv @ head)
        total = total + (-0.5) * (p * m * LOG2PI + mlogdet(gmat) + quad)
    if n > p:
        resid = y[p:]
        for i in range(p):
            resid = resid - y[p - i - 1:n - i - 1] @ phis[i].T
        sinv = minv(sigma)
        quad = (resid * (resid @ sinv)).sum()
        total = total + (-0.5) * ((n - p) * (m * LOG2PI + mlogdet(sigma)) + quad)
    return total


def log_likelihood_exact(model: process.VarModel, data: np.ndarray) -> float:
    """Exact log likelihood of a stationary VAR at the given data.

    Raises
    ------
    NotStationary, DimensionMismatch
    """
    data = np.asarray(data, dtype=float)
    if data.ndim != 2 or data.shape[1] != model.dim:
        raise DimensionMismatch(f"data must be (n, {model.dim})")
    if data.shape[0] < model.order:
        raise DimensionMismatch("need at least p observations")
    stationary, radius = process.is_stationary(model.phi)
    if not stationary:
        raise NotStationary(f"companion spectral radius {radius:.6f} >= 1")
    gammas = process.autocovariances(model, max(model.order - 1, 0))
    return float(_loglik_core(model.phi, model.sigma, gammas, data))


# -- coordinate layout -----------------------------------------------------------


def _tril_info(m):
    rows, cols = np.tril_indices(m)
    return rows, cols, rows == cols


def _build_lower(vec, m):
    """Lower-triangular factor from packed coordinates (diag on log scale)."""
    rows, cols, diag = _tril_info(m)
    if isinstance(vec, Dual):
        d = vec.tan.shape[0]
        v = vec.val.copy()
        t = vec.tan.copy()
        ev = np.exp(v[diag])
        val = np.zeros((m, m))
        tan = np.zeros((d, m, m))
        val[rows, cols] = v
        val[rows[diag], cols[diag]] = ev
        tan[:, rows, cols] = t
        tan[:, rows[diag], cols[diag]] = t[:, diag] * ev
        return Dual(val, tan)
    v = np.asarray(vec, dtype=float)
    val = np.zeros((m, m))
    val[rows, cols] = v
    val[rows[diag], cols[diag]] = np.exp(v[diag])
    return val


def _sigma_coords(sigma: np.ndarray) -> np.ndarray:
    """Inverse of :func:`_build_lower` composed with L L^T."""
    chol = np.linalg.cholesky(linalg.symmetrize(sigma))
    rows, cols, diag = _tril_info(sigma.shape[0])
    vec = chol[rows, cols]
    vec[diag] = np.log(vec[diag])
    return vec


class PosteriorModel:
    """Log posterior, gradients, and coordinate packing for one data set."""

    def __init__(self, data: np.ndarray, spec: priors.PriorSpec,
                 grad_method: str = "ad"):
        data = np.asarray(data, dtype=float)
        if data.ndim != 2:
            raise DimensionMismatch("data must be a 2-D array")
        self.data = data
        self.spec = spec
        self.grad_method = grad_method
        self.m = data.shape[1]
        self.p = spec.p
        if data.shape[0] <= self.p:
            raise DimensionMismatch("need more observations than the model order")
        self.n_coeff = self.p * self.m * self.m
        self.n_sigma = self.m * (self.m + 1) // 2
        self.hyper_layout = priors.hyper_layout(spec, self.m)
        self.n_hyper = len(self.hyper_layout)
        self.dim = self.n_coeff + self.n_sigma + self.n_hyper
        self._log_mask = np.array([t == "log" for _, t in self.hyper_layout], dtype=bool)
        _, _, diag = _tril_info(self.m)
        # log-Cholesky Jacobian weights: exponent m - i + 2 for the i-th
        # (1-based) diagonal entry, plus a constant m*log(2).
        w = np.zeros(self.n_sigma)
        w[diag] = self.m - np.arange(self.m) + 1.0
        self._jac_weights = w

    # -- packing -----------------------------------------------------------

    def theta_names(self) -> list:
        kind = self.spec.kind
        prefix = {"rml-vague": "C", "semi-conjugate": "phi"}.get(kind, "A")
        names = [f"{prefix}{s + 1}_{i + 1}{j + 1}"
                 for s in range(self.p)
                 for i in range(self.m) for j in range(self.m)]
        rows, cols, diag = _tril_info(self.m)
        for r, c, dg in zip(rows, cols, diag):
            names.append(f"{'log_L' if dg else 'L'}{r + 1}{c + 1}")
        for name, transform in self.hyper_layout:
            names.append(f"log_{name}" if transform == "log" else name)
        return names

    def pack(self, point: priors.ParameterPoint) -> np.ndarray:
        """Natural-space point to sampler coordinates."""
        if self.spec.kind == priors.RML_VAGUE:
            plist = [reparam.a_to_p(a) for a in point.aseq]
            coeff = reparam.rml_from_ak(point.sigma, plist)
        else:
            coeff = point.aseq
        theta = np.empty(self.dim)
        theta[:self.n_coeff] = np.concatenate([np.asarray(c).reshape(-1) for c in coeff]) \
            if self.p else np.empty(0)
        theta[self.n_coeff:self.n_coeff + self.n_sigma] = _sigma_coords(point.sigma)
        for k, (name, transform) in enumerate(self.hyper_layout):
            v = point.hyper[name]
            theta[self.n_coeff + self.n_sigma + k] = np.log(v) if transform == "log" else v
        return theta

    def unpack(self, theta: np.ndarray) -> priors.ParameterPoint:
        """Sampler coordinates to a natural-space point.

        For the rml-vague kind the coefficient block holds C matrices; they
        are converted back to A's so the returned point is kind-uniform.
        """
        theta = np.asarray(theta, dtype=float)
        coeff = [theta[s * self.m * self.m:(s + 1) * self.m * self.m].reshape(self.m, self.m)
                 for s in range(self.p)]
        lmat = _build_lower(theta[self.n_coeff:self.n_coeff + self.n_sigma], self.m)
        sigma = lmat @ lmat.T
        hyper = {}
        for k, (name, transform) in enumerate(self.hyper_layout):
            raw = theta[self.n_coeff + self.n_sigma + k]
            hyper[name] = float(np.exp(raw)) if transform == "log" else float(raw)
        if self.spec.kind == priors.RML_VAGUE:
            plist = reparam.ak_from_rml(sigma, coeff)
            coeff = [reparam.p_to_a(pm) for pm in plist]
        return priors.ParameterPoint(sigma=sigma, aseq=coeff, hyper=hyper)

    def model_from_theta(self, theta: np.ndarray) -> process.VarModel:
        """Transformed (Sigma, Phi) at a coordinate vector."""
        theta = np.asarray(theta, dtype=float)
        coeff = [theta[s * self.m * self.m:(s + 1) * self.m * self.m].reshape(self.m, self.m)
                 for s in range(self.p)]
        lmat = _build_lower(theta[self.n_coeff:self.n_coeff + self.n_sigma], self.m)
        sigma = lmat @ lmat.T
        kind = self.spec.kind
        if kind == priors.SEMI_CONJUGATE:
            return process.VarModel(sigma=sigma, phi=coeff)
        if kind == priors.RML_VAGUE:
            plist, chain, s_chain, s_inv = reparam.ak_from_rml_core(sigma, coeff)
            phis, _ = reparam._reverse_stage2(plist, chain, s_chain, s_inv)
        else:
            plist = [reparam.a_to_p_core(a) for a in coeff]
            phis, _ = reparam.reverse_map_core(sigma, plist)
        return process.VarModel(sigma=sigma, phi=phis)

    # -- posterior ----------------------------------------------------------

    def _assemble(self, theta):
        """Joint log density in sampler coordinates; theta may be a Dual."""
        m, p = self.m, self.p
        coeff = [theta[s * m * m:(s + 1) * m * m].reshape(m, m) for s in range(p)]
        svec = theta[self.n_coeff:self.n_coeff + self.n_sigma]
        lmat = _build_lower(svec, m)
        sigma = lmat @ lmat.T
        logjac = m * np.log(2.0) + (svec * self._jac_weights).sum()
        hyper_raw = theta[self.n_coeff + self.n_sigma:]
        hyper_nat = _exp_where(hyper_raw, self._log_mask)
        if self.n_hyper and self._log_mask.any():
            logjac = logjac + hyper_raw[self._log_mask].sum()
        kind = self.spec.kind
        if kind == priors.SEMI_CONJUGATE:
            loglik = _loglik_core(coeff, sigma, None, self.data, conditional_only=True)
        elif kind == priors.RML_VAGUE:
            plist, chain, s_chain, s_inv = reparam.ak_from_rml_core(sigma, coeff)
            phis, gammas = reparam._reverse_stage2(plist, chain, s_chain, s_inv)
            loglik = _loglik_core(phis, sigma, gammas, self.data)
        else:
            plist = [reparam.a_to_p_core(a) for a in coeff]
            phis, gammas = reparam.reverse_map_core(sigma, plist)
            loglik = _loglik_core(phis, sigma, gammas, self.data)
        df, scale = self.spec.iw_params(m)
        logprior = priors.iw_logpdf(sigma, df, scale)
        logprior = logprior + priors.coeff_logdensity(self.spec, coeff, hyper_nat, m)
        return loglik + logprior + logjac

    def value(self, theta) -> float:
        """Log posterior; numeric failures come back as -inf."""
        with np.errstate(all="ignore"):
            try:
                out = float(value(self._assemble(np.asarray(theta, dtype=float))))
            except (NotSpd, NotStationary, np.linalg.LinAlgError, FloatingPointError):
                return -np.inf
        return out if np.isfinite(out) else -np.inf

    def value_and_grad(self, theta):
        """Log posterior and gradient from one forward-mode pass (or the
        finite-difference fallback when configured)."""
        if self.grad_method == "fd":
            val = self.value(theta)
            if not np.isfinite(val):
                return -np.inf, np.zeros(self.dim)
            try:
                return val, self.gradient(theta, method="fd")
            except NonFinite:
                return -np.inf, np.zeros(self.dim)
        with np.errstate(all="ignore"):
            try:
                out = self._assemble(seed_duals(np.asarray(theta, dtype=float)))
            except (NotSpd, NotStationary, np.linalg.LinAlgError, FloatingPointError):
                return -np.inf, np.zeros(self.dim)
        val = float(out.val)
        if not np.isfinite(val) or not np.all(np.isfinite(out.tan)):
            return -np.inf, np.zeros(self.dim)
        return val, out.tan.copy()

    def initial_theta(self, rng, jitter: float) -> np.ndarray:
        """Overdispersed start: shrunken prior draw plus uniform jitter."""
        point = priors.sample_prior(self.spec, self.m, self.p,
                                    seed=int(rng.integers(2 ** 62)))
        return 0.1 * self.pack(point) + rng.uniform(-jitter, jitter, size=self.dim)

    def gradient(self, theta, method: str = "ad") -> np.ndarray:
        """Gradient of the log posterior ("ad" exact, "fd" central differences)."""
        theta = np.asarray(theta, dtype=float)
        if method == "ad":
            val, grad = self.value_and_grad(theta)
            if not np.isfinite(val):
                raise NonFinite("log posterior is not finite at theta")
            return grad
        if method != "fd":
            raise ConfigInvalid(f"unknown gradient method {method!r}")
        if not np.isfinite(self.value(theta)):
            raise NonFinite("log posterior is not finite at theta")
        grad = np.empty(self.dim)
        for k in range(self.dim):
            h = 1e-5 * max(1.0, abs(theta[k]))
            up, dn = theta.copy(), theta.copy()
            up[k] += h
            dn[k] -= h
            grad[k] = (self.value(up) - self.value(dn)) / (2.0 * h)
        return grad


def _exp_where(vec, mask):
    """exp() applied to masked coordinates only; dual-aware."""
    if mask.size == 0:
        return vec
    if isinstance(vec, Dual):
        val = vec.val.copy()
        tan = vec.tan.copy()
        ev = np.exp(val[mask])
        val[mask] = ev
        tan[:, mask] *= ev
        return Dual(val, tan)
    out = np.asarray(vec, dtype=float).copy()
    out[mask] = np.exp(out[mask])
    return out


def log_posterior(theta, data, spec: priors.PriorSpec) -> float:
    """Module-level convenience wrapper around :class:`PosteriorModel`."""
    return PosteriorModel(data, spec).value(theta)


def gradient(theta, data, spec: priors.PriorSpec, method: str = "ad") -> np.ndarray:
    return PosteriorModel(data, spec).gradient(theta, method=method)


# -- Hamiltonian Monte Carlo ------------------------------------------------------


@dataclass
class Draws:
    """Post-warmup draws with transformed summaries computed on demand."""

    theta: np.ndarray          # (chains, kept, dim)
    logpost: np.ndarray        # (chains, kept)
    names: list
    accept_rate: np.ndarray    # per chain, post-warmup mean accept probability
    divergences: np.ndarray    # per chain count
    step_size: np.ndarray      # per chain
    inv_mass_diag: np.ndarray  # (chains, dim) diagonal inverse metric
    spec: priors.PriorSpec = None
    data: np.ndarray = None
    _transformed: dict = field(default=None, repr=False)

    @property
    def chains(self) -> int:
        return self.theta.shape[0]

    @property
    def kept(self) -> int:
        return self.theta.shape[1]

    def flat(self) -> np.ndarray:
        return self.theta.reshape(-1, self.theta.shape[2])

    def transformed(self) -> dict:
        """Per-draw (phi, sigma, pacf) stacks in the natural parameterisation.

        The pacf stack is None for the semi-conjugate baseline, whose draws
        need not be stationary.
        """
        if self._transformed is None:
            model = PosteriorModel(self.data, self.spec)
            phis, sigmas, pacfs = [], [], []
            want_pacf = self.spec.kind != priors.SEMI_CONJUGATE
            for row in self.flat():
                vm = model.model_from_theta(row)
                phis.append(np.stack(vm.phi) if vm.phi else np.zeros((0, model.m, model.m)))
                sigmas.append(vm.sigma)
                if want_pacf:
                    point = model.unpack(row)
                    pacfs.append(np.stack([reparam.a_to_p(a) for a in point.aseq]))
            self._transformed = {
                "phi": np.stack(phis),
                "sigma": np.stack(sigmas),
                "pacf": np.stack(pacfs) if want_pacf else None,
            }
        return self._transformed


def leapfrog(post, theta, mom, step: float, nstep: int, minv_diag, lp=None, grad=None):
    """Leapfrog integration of the Hamiltonian flow.

    Returns (theta, mom, lp, grad, ok); ok is False when the trajectory
    hit a non-finite log density.  Time-reversible and volume-preserving:
    negating the momentum and integrating again returns the start point.
    """
    if lp is None or grad is None:
        lp, grad = post.value_and_grad(theta)
    for _ in range(nstep):
        mom = mom + 0.5 * step * grad
        theta = theta + step * minv_diag * mom
        lp, grad = post.value_and_grad(theta)
        if not np.isfinite(lp):
            return theta, mom, lp, grad, False
        mom = mom + 0.5 * step * grad
    return theta, mom, lp, grad, True


def _initial_step_size(post: PosteriorModel, theta, minv_diag, rng) -> float:
    """Crude bracketing of a step size with one-step accept prob near 0.5."""
    eps = 0.1
    lp0, grad0 = post.value_and_grad(theta)
    if not np.isfinite(lp0):
        return eps
    direction = 0
    for _ in range(30):
        mom = rng.standard_normal(post.dim) / np.sqrt(minv_diag)
        h0 = -lp0 + 0.5 * np.sum(mom * mom * minv_diag)
        mom1 = mom + 0.5 * eps * grad0
        theta1 = theta + eps * minv_diag * mom1
        lp1, grad1 = post.value_and_grad(theta1)
        mom1 = mom1 + 0.5 * eps * grad1
        h1 = -lp1 + 0.5 * np.sum(mom1 * mom1 * minv_diag)
        accept = np.exp(min(0.0, h0 - h1)) if np.isfinite(h1) else 0.0
        step = 1 if accept > 0.5 else -1
        if direction == 0:
            direction = step
        elif step != direction:
            break
        eps = eps * (2.0 if step == 1 else 0.5)
        if eps < 1e-10 or eps > 1e4:
            break
    return eps


def _run_chain(post, config: HmcConfig, chain: int):
    rng = np.random.default_rng([config.seed, chain])
    d = post.dim
    theta = post.initial_theta(rng, config.init_jitter)
    kept = config.iterations - config.warmup
    warmup = config.warmup
    w_mass_lo, w_mass_hi = int(0.5 * warmup), int(0.9 * warmup)
    minv_diag = np.ones(d)

    lp, grad = post.value_and_grad(theta)
    for _ in range(100):
        if np.isfinite(lp):
            break
        theta = rng.uniform(-config.init_jitter, config.init_jitter, size=d)
        lp, grad = post.value_and_grad(theta)
    if not np.isfinite(lp):
        raise AllDivergent("could not find a finite starting point")

    eps = _initial_step_size(post, theta, minv_diag, rng)
    mu = np.log(10.0 * eps)
    log_eps, log_eps_bar, h_bar, t_adapt = np.log(eps), 0.0, 0.0, 0
    mass_window = []
    out_theta = np.empty((kept, d))
    out_lp = np.empty(kept)
    accept_sum, div_count = 0.0, 0

    for it in range(config.iterations):
        adapting = it < warmup
        step = np.exp(log_eps) if adapting else np.exp(log_eps_bar)
        nstep = int(rng.integers(1, config.max_leapfrog + 1))
        mom = rng.standard_normal(d) / np.sqrt(minv_diag)
        h0 = -lp + 0.5 * np.sum(mom * mom * minv_diag)
        theta_new, mom_new, lp_new, grad_new, ok = leapfrog(
            post, theta, mom, step, nstep, minv_diag, lp=lp, grad=grad)
        diverged = not ok
        if not diverged:
            h1 = -lp_new + 0.5 * np.sum(mom_new * mom_new * minv_diag)
            delta = h1 - h0
            if not np.isfinite(delta) or delta > DIVERGENCE_THRESHOLD:
                diverged = True
        accept_prob = 0.0 if diverged else float(np.exp(min(0.0, -delta)))
        if not diverged and rng.uniform() < accept_prob:
            theta, lp, grad = theta_new, lp_new, grad_new

        if adapting:
            t_adapt += 1
            frac = 1.0 / (t_adapt + DA_T0)
            h_bar = (1.0 - frac) * h_bar + frac * (config.target_accept - accept_prob)
            log_eps = mu - np.sqrt(t_adapt) / DA_GAMMA * h_bar
            eta = t_adapt ** (-DA_KAPPA)
            log_eps_bar = eta * log_eps + (1.0 - eta) * log_eps_bar
            if w_mass_lo <= it < w_mass_hi:
                mass_window.append(theta.copy())
            if it == w_mass_hi - 1 and len(mass_window) >= 10:
                draws = np.asarray(mass_window)
                var = draws.var(axis=0, ddof=1)
                nw = draws.shape[0]
                minv_diag = (nw / (nw + 5.0)) * var + (5.0 / (nw + 5.0)) * 1e-3
                # restart step-size adaptation under the new metric
                eps = np.exp(log_eps_bar)
                mu = np.log(10.0 * eps)
                log_eps, log_eps_bar, h_bar, t_adapt = np.log(eps), 0.0, 0.0, 0
        else:
            k = it - warmup
            out_theta[k] = theta
            out_lp[k] = lp
            accept_sum += accept_prob
            div_count += int(diverged)

    if kept > 0 and div_count > 0.9 * kept:
        raise AllDivergent(f"chain {chain}: {div_count}/{kept} post-warmup "
                           "proposals diverged; try a smaller target_accept "
                           "step or a tighter prior")
    return (out_theta, out_lp, accept_sum / max(kept, 1), div_count,
            float(np.exp(log_eps_bar)), minv_diag.copy())


def run_hmc(data, spec: priors.PriorSpec, config: HmcConfig) -> Draws:
    """Run adaptive HMC chains; deterministic given (inputs, seed).

    Warmup uses dual-averaging step-size adaptation toward
    ``target_accept`` with a diagonal mass matrix estimated from the
    second half of warmup; sampling jitters the leapfrog length uniformly
    on [1, max_leapfrog].  Proposals whose energy error exceeds 1000 (or
    fails to be finite) count as divergent.

    Raises
    ------
    AllDivergent
        If more than 90% of post-warmup proposals in a chain diverge.
    """
    config.validate()
    post = PosteriorModel(np.asarray(data, dtype=float), spec,
                          grad_method=config.grad_method)
    return _sample(post, config)


def _sample(post, config: HmcConfig) -> Draws:
    """Drive the chains over any target exposing the PosteriorModel protocol
    (dim, initial_theta, value_and_grad, theta_names)."""
    config.validate()
    threads = int(os.environ.get("STATVAR_THREADS", "1") or "1")
    if threads > 1 and config.chains > 1:
        with ThreadPoolExecutor(max_workers=min(threads, config.chains)) as pool:
            futures = [pool.submit(_run_chain, post, config, c)
                       for c in range(config.chains)]
            results = [f.result() for f in futures]
    else:
        results = [_run_chain(post, config, c) for c in range(config.chains)]
    return Draws(
        theta=np.stack([r[0] for r in results]),
        logpost=np.stack([r[1] for r in results]),
        names=post.theta_names(),
        accept_rate=np.array([r[2] for r in results]),
        divergences=np.array([r[3] for r in results]),
        step_size=np.array([r[4] for r in results]),
        inv_mass_diag=np.stack([r[5] for r in results]),
        spec=getattr(post, "spec", None),
        data=getattr(post, "data", None),
    )


# -- convergence diagnostics -------------------------------------------------------


def _split_chains(x: np.ndarray) -> np.ndarray:
    nchain, ndraw = x.shape
    half = ndraw // 2
    return np.concatenate([x[:, :half], x[:, ndraw - half:]], axis=0)


def _rank_normalize(x: np.ndarray) -> np.ndarray:
    from scipy.stats import rankdata

    flat = x.reshape(-1)
    ranks = rankdata(flat, method="average")
    z = _norm.ppf((ranks - 0.375) / (flat.size + 0.25))
    return z.reshape(x.shape)


def split_rhat(x: np.ndarray) -> float:
    """Rank-normalised split-Rhat for draws shaped (chains, iterations)."""
    z = _rank_normalize(_split_chains(np.asarray(x, dtype=float)))
    nchain, ndraw = z.shape
    means = z.mean(axis=1)
    w = z.var(axis=1, ddof=1).mean()
    b = ndraw * means.var(ddof=1)
    if w <= 0:
        return 1.0
    var_plus = (ndraw - 1) / ndraw * w + b / ndraw
    return float(np.sqrt(var_plus / w))


def _autocov(x: np.ndarray) -> np.ndarray:
    n = x.shape[-1]
    xc = x - x.mean(axis=-1, keepdims=True)
    size = next_fast_len(2 * n)
    f = rfft(xc, size, axis=-1)
    acov = irfft(f * np.conj(f), size, axis=-1)[..., :n].real
    return acov / n


def effective_sample_size(x: np.ndarray) -> float:
    """ESS from split chains with Geyer initial-positive-sequence truncation."""
    x = np.asarray(x, dtype=float)
    chains = _split_chains(x)
    nchain, ndraw = chains.shape
    if ndraw < 4:
        raise TooFewDraws("need at least 4 draws per chain")
    acov = _autocov(chains)
    chain_var = acov[:, 0] * ndraw / (ndraw - 1.0)
    w = chain_var.mean()
    mean_acov = acov.mean(axis=0)
    if nchain > 1:
        b = ndraw * chains.mean(axis=1).var(ddof=1)
        var_plus = (ndraw - 1.0) / ndraw * w + b / ndraw
    else:
        var_plus = (ndraw - 1.0) / ndraw * w
    if var_plus <= 0:
        return float(x.size)
    rho = 1.0 - (w - mean_acov) / var_plus
    rho[0] = 1.0
    # Geyer: sum consecutive pairs while they stay positive, enforcing
    # monotone decrease from pair to pair.
    tau = 0.0
    prev_pair = np.inf
    t = 0
    while t + 1 < ndraw:
        pair = rho[t] + rho[t + 1]
        if pair <= 0:
            break
        pair = min(pair, prev_pair)
        tau += pair
        prev_pair = pair
        t += 2
    tau = max(2.0 * tau - 1.0, 1e-8)
    return float(x.size / tau)


def diagnostics(draws: Draws) -> dict:
    """Per-coordinate split-Rhat and effective sample size.

    Raises
    ------
    TooFewDraws
        With fewer than 2 chains or fewer than 4 kept draws.
    """
    theta = draws.theta
    if theta.shape[0] < 2:
        raise TooFewDraws("diagnostics need at least 2 chains")
    if theta.shape[1] < 4:
        raise TooFewDraws("diagnostics need at least 4 kept draws")
    d = theta.shape[2]
    rhat = np.array([split_rhat(theta[:, :, k]) for k in range(d)])
    ess = np.array([effective_sample_size(theta[:, :, k]) for k in range(d)])
    return {"names": list(draws.names), "rhat": rhat, "ess": ess}
