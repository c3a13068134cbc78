"""Prior specifications and densities over the unconstrained parameters.

The hierarchical families place normal priors on the diagonal and
off-diagonal entries of each unconstrained coefficient matrix, with the
group means and precisions themselves given normal and gamma priors.
Because the groups are exchangeable under a common permutation of rows
and columns, the induced prior on the model parameters is exchangeable
with respect to the ordering of the observed series.

Density evaluations are written against the generic helpers in
:mod:`statvar.autodiff`, so the same code produces plain values and
forward-mode derivatives inside the sampler.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
from scipy.special import gammaln, multigammaln
from scipy.stats import invwishart

from . import linalg, reparam
from .autodiff import minv, mlogdet, mtrace
from .errors import (
    ConfigInvalid,
    DimensionMismatch,
    InfiniteVariance,
    NonPositiveHyper,
)

LOG2PI = np.log(2.0 * np.pi)

EXCHANGEABLE = "exchangeable"
DIAGONAL = "diagonal-centred"
ALL_ONES = "all-ones-centred"
SPARSE = "sparse"
RML_VAGUE = "rml-vague"
MINNESOTA = "minnesota"
SEMI_CONJUGATE = "semi-conjugate"

HIERARCHICAL_KINDS = (EXCHANGEABLE, DIAGONAL, ALL_ONES)
STATIONARY_KINDS = HIERARCHICAL_KINDS + (SPARSE, RML_VAGUE)
ALL_KINDS = STATIONARY_KINDS + (MINNESOTA, SEMI_CONJUGATE)


def _per_lag(x, p: int) -> np.ndarray:
    arr = np.atleast_1d(np.asarray(x, dtype=float))
    if arr.shape == (1,):
        arr = np.repeat(arr, p)
    if arr.shape != (p,):
        raise ConfigInvalid(f"per-lag hyperparameter has shape {arr.shape}, need ({p},)")
    return arr


@dataclass
class PriorSpec:
    """Tagged prior configuration.

    Per-lag hyperparameters are arrays of length p.  Group 1 refers to
    diagonal entries and group 2 to off-diagonal entries; the all-ones
    kind shares a single mean across both groups and keeps separate
    precisions.  ``iw_df`` defaults to m + 4 at evaluation time and
    ``iw_scale`` to the identity, which keeps prior variances of the
    error-variance entries finite.
    """

    kind: str
    p: int
    e1: np.ndarray | None = None
    f1: np.ndarray | None = None
    g1: np.ndarray | None = None
    h1: np.ndarray | None = None
    e2: np.ndarray | None = None
    f2: np.ndarray | None = None
    g2: np.ndarray | None = None
    h2: np.ndarray | None = None
    diag_means: np.ndarray | None = None   # diagonal-centred, fixed option
    diag_vars: np.ndarray | None = None
    df_diag: float = 3.0                   # sparse scale-mixture degrees of freedom
    df_offdiag: float = 3.0
    iw_df: float | None = None
    iw_scale: np.ndarray | None = None
    phi_sd: float = 1.0                    # semi-conjugate entry standard deviation
    lambda1: float = 0.2                   # minnesota overall tightness
    lambda2: float = 0.5                   # minnesota cross-variable discount
    own_mean: float = 0.0                  # minnesota own-first-lag prior mean
    sigma_hat: np.ndarray | None = None    # minnesota plug-in variances, set at fit

    def iw_params(self, m: int) -> tuple[float, np.ndarray]:
        df = self.iw_df if self.iw_df is not None else m + 4.0
        scale = self.iw_scale if self.iw_scale is not None else np.eye(m)
        if df <= m - 1:
            raise ConfigInvalid(f"inverse Wishart df {df} must exceed m - 1")
        return float(df), np.asarray(scale, dtype=float)


def exchangeable_spec(p, e1=0.0, f1=np.sqrt(0.7), g1=2.1, h1=0.33,
                      e2=None, f2=None, g2=None, h2=None, **kw) -> PriorSpec:
    """Hierarchical prior, exchangeable across series; group 2 defaults to
    the group-1 values so a single (e, f, g, h) pins both groups."""
    return PriorSpec(
        kind=EXCHANGEABLE, p=p,
        e1=_per_lag(e1, p), f1=_per_lag(f1, p),
        g1=_per_lag(g1, p), h1=_per_lag(h1, p),
        e2=_per_lag(e1 if e2 is None else e2, p),
        f2=_per_lag(f1 if f2 is None else f2, p),
        g2=_per_lag(g1 if g2 is None else g2, p),
        h2=_per_lag(h1 if h2 is None else h2, p), **kw)


def prior1(p: int) -> PriorSpec:
    """Modest-variance exchangeable prior: entry variance 1.0, correlation 0.7."""
    return exchangeable_spec(p, e1=0.0, f1=np.sqrt(0.7), g1=2.1, h1=0.33)


def prior2(p: int) -> PriorSpec:
    """Diffuse exchangeable prior: entry variance 10.0, correlation 0.7."""
    return exchangeable_spec(p, e1=0.0, f1=np.sqrt(7.0), g1=21.0, h1=60.0)


def diagonal_spec(p, e1=0.0, f1=np.sqrt(0.7), g1=2.1, h1=0.33,
                  g2=None, h2=None, diag_means=None, diag_vars=None, **kw) -> PriorSpec:
    """Centred on diagonal pacf matrices: off-diagonal means pinned at zero.

    Passing ``diag_means``/``diag_vars`` replaces the hierarchical diagonal
    group with independent per-element normals.
    """
    if (diag_means is None) != (diag_vars is None):
        raise ConfigInvalid("diag_means and diag_vars must be given together")
    return PriorSpec(
        kind=DIAGONAL, p=p,
        e1=_per_lag(e1, p), f1=_per_lag(f1, p),
        g1=_per_lag(g1, p), h1=_per_lag(h1, p),
        g2=_per_lag(g1 if g2 is None else g2, p),
        h2=_per_lag(h1 if h2 is None else h2, p),
        diag_means=None if diag_means is None else np.asarray(diag_means, dtype=float),
        diag_vars=None if diag_vars is None else np.asarray(diag_vars, dtype=float),
        **kw)


def all_ones_spec(p, e=0.0, f=np.sqrt(0.7), g1=2.1, h1=0.33,
                  g2=None, h2=None, **kw) -> PriorSpec:
    """Centred on scaled all-ones pacf matrices: one mean for all entries,
    separate precisions for the diagonal and off-diagonal groups."""
    return PriorSpec(
        kind=ALL_ONES, p=p,
        e1=_per_lag(e, p), f1=_per_lag(f, p),
        g1=_per_lag(g1, p), h1=_per_lag(h1, p),
        g2=_per_lag(g1 if g2 is None else g2, p),
        h2=_per_lag(h1 if h2 is None else h2, p), **kw)


def sparse_spec(p, df_diag=3.0, df_offdiag=3.0, **kw) -> PriorSpec:
    """Zero-mean scale-mixture of normals with inverse-gamma mixing, giving
    Student-t marginals; continuous mixing keeps the posterior HMC-friendly."""
    return PriorSpec(kind=SPARSE, p=p, df_diag=float(df_diag),
                     df_offdiag=float(df_offdiag), **kw)


def rml_vague_spec(p, **kw) -> PriorSpec:
    """Vague exchangeable prior: standard normal entries in C-coordinates."""
    return PriorSpec(kind=RML_VAGUE, p=p, **kw)


def semi_conjugate_spec(p, phi_sd=1.0, **kw) -> PriorSpec:
    """Baseline: independent normals on raw coefficients, no stationarity."""
    return PriorSpec(kind=SEMI_CONJUGATE, p=p, phi_sd=float(phi_sd), **kw)


def minnesota_spec(p, lambda1=0.2, lambda2=0.5, own_mean=0.0, **kw) -> PriorSpec:
    """Baseline: conjugate shrinkage prior with plug-in error variances."""
    return PriorSpec(kind=MINNESOTA, p=p, lambda1=float(lambda1),
                     lambda2=float(lambda2), own_mean=float(own_mean), **kw)


@dataclass
class ParameterPoint:
    """A point in the natural parameter space.

    ``aseq`` holds the unconstrained coefficient matrices for the
    stationary kinds, the C matrices' preimages for rml-vague (stored as
    A's; C's are recomputed when needed), and the raw autoregressive
    coefficients for both baselines.  ``hyper`` maps latent names from
    :func:`hyper_layout` to natural-space values.
    """

    sigma: np.ndarray
    aseq: list
    hyper: dict = field(default_factory=dict)


# -- latent hyperparameter layout ---------------------------------------------


def hyper_layout(spec: PriorSpec, m: int) -> list:
    """Ordered (name, transform) pairs for the latent hyperparameters.

    ``transform`` is "id" for unconstrained latents and "log" for positive
    ones (sampled on the log scale with a +log(value) Jacobian).
    """
    names = []
    for s in range(1, spec.p + 1):
        if spec.kind == EXCHANGEABLE:
            names += [(f"mu_diag_{s}", "id"), (f"omega_diag_{s}", "log"),
                      (f"mu_offdiag_{s}", "id"), (f"omega_offdiag_{s}", "log")]
        elif spec.kind == DIAGONAL:
            if spec.diag_means is None:
                names += [(f"mu_diag_{s}", "id"), (f"omega_diag_{s}", "log")]
            names += [(f"omega_offdiag_{s}", "log")]
        elif spec.kind == ALL_ONES:
            names += [(f"mu_{s}", "id"), (f"omega_diag_{s}", "log"),
                      (f"omega_offdiag_{s}", "log")]
        elif spec.kind == SPARSE:
            names += [(f"psi_{s}_{i + 1}{j + 1}", "log")
                      for i in range(m) for j in range(m)]
    return names


def hyper_dim(spec: PriorSpec, m: int) -> int:
    return len(hyper_layout(spec, m))


def pack_hyper(spec: PriorSpec, m: int, hyper: dict) -> np.ndarray:
    """Flatten a natural-space hyper dict into layout order."""
    layout = hyper_layout(spec, m)
    try:
        vec = np.array([float(hyper[name]) for name, _ in layout])
    except KeyError as exc:
        raise DimensionMismatch(f"missing hyperparameter {exc.args[0]}") from exc
    for (name, transform), v in zip(layout, vec):
        if transform == "log" and v <= 0:
            raise NonPositiveHyper(f"{name} must be positive, got {v}")
    return vec


def unpack_hyper(spec: PriorSpec, m: int, vec) -> dict:
    return {name: vec[i] for i, (name, _) in enumerate(hyper_layout(spec, m))}


# -- density building blocks ---------------------------------------------------


def _norm_logpdf(x, mean, var):
    return -0.5 * LOG2PI - 0.5 * np.log(var) - 0.5 * (x - mean) ** 2 / var


def _norm_group(x, mean, omega, n):
    """Sum of N(mean, 1/omega) log densities over n entries (dual-aware)."""
    resid = x - mean
    return 0.5 * n * (np.log(omega) - LOG2PI) - 0.5 * omega * (resid * resid).sum()


def _gamma_logpdf(x, shape, rate):
    return (shape * np.log(rate) - gammaln(shape)
            + (shape - 1.0) * np.log(x) - rate * x)


def _invgamma_logpdf(x, shape, scale):
    return (shape * np.log(scale) - gammaln(shape)
            - (shape + 1.0) * np.log(x) - scale / x)


def iw_logpdf(sigma, df: float, scale: np.ndarray):
    """Inverse Wishart log density, full normalising constant, dual-aware."""
    m = scale.shape[0]
    const = (0.5 * df * linalg.spd_logdet(scale) - 0.5 * df * m * np.log(2.0)
             - multigammaln(0.5 * df, m))
    return const - 0.5 * (df + m + 1.0) * mlogdet(sigma) - 0.5 * mtrace(scale @ minv(sigma))


def _diag_idx(m):
    r = np.arange(m)
    return (r, r)


def _offdiag_idx(m):
    return np.where(~np.eye(m, dtype=bool))


def coeff_logdensity(spec: PriorSpec, a_list, hyper_vec, m: int):
    """log pi(coefficients | latents) + log pi(latents), dual-aware.

    ``a_list`` holds the sampler's coefficient matrices (A's, C's, or raw
    phi's depending on the kind) and ``hyper_vec`` the natural-space
    latents in :func:`hyper_layout` order.
    """
    p = spec.p
    ii = _diag_idx(m)
    ij = _offdiag_idx(m)
    noff = m * m - m
    total = 0.0
    if spec.kind == EXCHANGEABLE:
        for s in range(p):
            mu1, om1 = hyper_vec[4 * s], hyper_vec[4 * s + 1]
            mu2, om2 = hyper_vec[4 * s + 2], hyper_vec[4 * s + 3]
            a = a_list[s]
            total = total + _norm_group(a[ii], mu1, om1, m)
            if noff:
                total = total + _norm_group(a[ij], mu2, om2, noff)
            total = total + _norm_logpdf(mu1, spec.e1[s], spec.f1[s] ** 2)
            total = total + _gamma_logpdf(om1, spec.g1[s], spec.h1[s])
            total = total + _norm_logpdf(mu2, spec.e2[s], spec.f2[s] ** 2)
            total = total + _gamma_logpdf(om2, spec.g2[s], spec.h2[s])
    elif spec.kind == DIAGONAL:
        k = 0
        for s in range(p):
            a = a_list[s]
            if spec.diag_means is None:
                mu1, om1 = hyper_vec[k], hyper_vec[k + 1]
                k += 2
                total = total + _norm_group(a[ii], mu1, om1, m)
                total = total + _norm_logpdf(mu1, spec.e1[s], spec.f1[s] ** 2)
                total = total + _gamma_logpdf(om1, spec.g1[s], spec.h1[s])
            else:
                diff = a[ii] - spec.diag_means
                total = total + (-0.5 * m * LOG2PI
                                 - 0.5 * np.sum(np.log(spec.diag_vars))
                                 - 0.5 * (diff * diff / spec.diag_vars).sum())
            om2 = hyper_vec[k]
            k += 1
            if noff:
                total = total + _norm_group(a[ij], 0.0, om2, noff)
            total = total + _gamma_logpdf(om2, spec.g2[s], spec.h2[s])
    elif spec.kind == ALL_ONES:
        for s in range(p):
            mu = hyper_vec[3 * s]
            om1, om2 = hyper_vec[3 * s + 1], hyper_vec[3 * s + 2]
            a = a_list[s]
            total = total + _norm_group(a[ii], mu, om1, m)
            if noff:
                total = total + _norm_group(a[ij], mu, om2, noff)
            total = total + _norm_logpdf(mu, spec.e1[s], spec.f1[s] ** 2)
            total = total + _gamma_logpdf(om1, spec.g1[s], spec.h1[s])
            total = total + _gamma_logpdf(om2, spec.g2[s], spec.h2[s])
    elif spec.kind == SPARSE:
        for s in range(p):
            a = a_list[s]
            psi = hyper_vec[s * m * m:(s + 1) * m * m].reshape(m, m)
            flat_a = a.reshape(m * m)
            flat_psi = psi.reshape(m * m)
            total = total + (-0.5 * m * m * LOG2PI
                             - 0.5 * np.log(flat_psi).sum()
                             - 0.5 * (flat_a * flat_a / flat_psi).sum())
            nu1, nu2 = spec.df_diag, spec.df_offdiag
            total = total + _invgamma_logpdf(psi[ii], 0.5 * nu1, 0.5 * nu1).sum()
            total = total + _invgamma_logpdf(psi[ij], 0.5 * nu2, 0.5 * nu2).sum()
    elif spec.kind == RML_VAGUE:
        for s in range(p):
            c = a_list[s]
            total = total + (-0.5 * m * m * LOG2PI - 0.5 * (c * c).sum())
    elif spec.kind == SEMI_CONJUGATE:
        var = spec.phi_sd ** 2
        for s in range(p):
            a = a_list[s]
            total = total + (-0.5 * m * m * (LOG2PI + np.log(var))
                             - 0.5 * (a * a).sum() / var)
    else:
        raise ConfigInvalid(f"kind {spec.kind} has no sampler-side density")
    return total


def minnesota_moments(spec: PriorSpec, m: int) -> tuple[np.ndarray, np.ndarray]:
    """Prior mean and variance for each coefficient entry, shape (p, m, m)."""
    if spec.sigma_hat is None:
        raise ConfigInvalid("minnesota prior requires plug-in residual variances; "
                            "run the baseline fit first")
    shat = np.sqrt(np.asarray(spec.sigma_hat, dtype=float))
    mean = np.zeros((spec.p, m, m))
    var = np.zeros((spec.p, m, m))
    for s in range(1, spec.p + 1):
        v_own = (spec.lambda1 / s) ** 2
        for i in range(m):
            for j in range(m):
                if i == j:
                    var[s - 1, i, j] = v_own
                else:
                    var[s - 1, i, j] = (spec.lambda1 * spec.lambda2 / s) ** 2 \
                        * (shat[i] / shat[j]) ** 2
        mean[s - 1][np.diag_indices(m)] = spec.own_mean if s == 1 else 0.0
    return mean, var


# -- public operations ----------------------------------------------------------


def log_prior(point: ParameterPoint, spec: PriorSpec) -> float:
    """Log prior density at a natural-space point, up to a constant that is
    fixed for a given spec.

    For the rml-vague kind the density of the C coordinates is pushed to
    the (Sigma, A) coordinates with a finite-difference log-Jacobian; this
    path is for diagnostics only and never enters MCMC, which samples the
    C coordinates natively.
    """
    sigma = np.asarray(point.sigma, dtype=float)
    m = sigma.shape[0]
    a_list = [np.asarray(a, dtype=float) for a in point.aseq]
    if len(a_list) != spec.p:
        raise DimensionMismatch(f"expected {spec.p} coefficient matrices, got {len(a_list)}")
    for a in a_list:
        if a.shape != (m, m):
            raise DimensionMismatch("coefficient matrices must be m x m")
    if spec.kind == MINNESOTA:
        mean, var = minnesota_moments(spec, m)
        stacked = np.stack(a_list)
        return float(np.sum(_norm_logpdf(stacked, mean, var)))
    df, scale = spec.iw_params(m)
    total = iw_logpdf(sigma, df, scale)
    if spec.kind == RML_VAGUE:
        clist = _c_from_a(sigma, a_list)
        total += sum(-0.5 * m * m * LOG2PI - 0.5 * float(np.sum(c * c)) for c in clist)
        total += _rml_fd_logjac(sigma, a_list)
        return float(total)
    hyper_vec = pack_hyper(spec, m, point.hyper)
    total += coeff_logdensity(spec, a_list, hyper_vec, m)
    return float(total)


def _c_from_a(sigma: np.ndarray, a_list: list) -> list:
    plist = [reparam.a_to_p(a) for a in a_list]
    return reparam.rml_from_ak(sigma, plist)


def _rml_fd_logjac(sigma: np.ndarray, a_list: list, step: float = 1e-6) -> float:
    """Finite-difference log |d vec(C) / d vec(A)| at fixed Sigma."""
    m = sigma.shape[0]
    p = len(a_list)
    dim = p * m * m
    flat = np.concatenate([a.reshape(-1) for a in a_list])

    def cvec(x):
        mats = [x[i * m * m:(i + 1) * m * m].reshape(m, m) for i in range(p)]
        return np.concatenate([c.reshape(-1) for c in _c_from_a(sigma, mats)])

    jac = np.empty((dim, dim))
    for k in range(dim):
        h = step * max(1.0, abs(flat[k]))
        up, dn = flat.copy(), flat.copy()
        up[k] += h
        dn[k] -= h
        jac[:, k] = (cvec(up) - cvec(dn)) / (2.0 * h)
    sign, logdet = np.linalg.slogdet(jac)
    return float(logdet)


def sample_prior(spec: PriorSpec, m: int, p: int, seed: int) -> ParameterPoint:
    """Ancestral draw from the prior: latents, then coefficients, then Sigma.

    Deterministic given the seed.  For the stationary kinds the draw is
    guaranteed to map to a stationary model.
    """
    if p != spec.p:
        raise DimensionMismatch(f"spec has p={spec.p}, requested p={p}")
    rng = np.random.default_rng(seed)
    if spec.kind == MINNESOTA:
        mean, var = minnesota_moments(spec, m)
        phis = [mean[s] + np.sqrt(var[s]) * rng.standard_normal((m, m))
                for s in range(p)]
        return ParameterPoint(sigma=np.diag(np.asarray(spec.sigma_hat, dtype=float)),
                              aseq=phis, hyper={})
    df, scale = spec.iw_params(m)
    sigma = np.atleast_2d(invwishart.rvs(df=df, scale=scale, random_state=rng))
    hyper: dict = {}
    a_list = []
    if spec.kind in HIERARCHICAL_KINDS:
        for s in range(p):
            a = np.zeros((m, m))
            if spec.kind == EXCHANGEABLE:
                mu1 = rng.normal(spec.e1[s], spec.f1[s])
                om1 = rng.gamma(spec.g1[s], 1.0 / spec.h1[s])
                mu2 = rng.normal(spec.e2[s], spec.f2[s])
                om2 = rng.gamma(spec.g2[s], 1.0 / spec.h2[s])
                hyper.update({f"mu_diag_{s + 1}": mu1, f"omega_diag_{s + 1}": om1,
                              f"mu_offdiag_{s + 1}": mu2, f"omega_offdiag_{s + 1}": om2})
            elif spec.kind == DIAGONAL:
                if spec.diag_means is None:
                    mu1 = rng.normal(spec.e1[s], spec.f1[s])
                    om1 = rng.gamma(spec.g1[s], 1.0 / spec.h1[s])
                    hyper.update({f"mu_diag_{s + 1}": mu1, f"omega_diag_{s + 1}": om1})
                mu2 = 0.0
                om2 = rng.gamma(spec.g2[s], 1.0 / spec.h2[s])
                hyper[f"omega_offdiag_{s + 1}"] = om2
            else:  # ALL_ONES
                mu1 = mu2 = rng.normal(spec.e1[s], spec.f1[s])
                om1 = rng.gamma(spec.g1[s], 1.0 / spec.h1[s])
                om2 = rng.gamma(spec.g2[s], 1.0 / spec.h2[s])
                hyper.update({f"mu_{s + 1}": mu1, f"omega_diag_{s + 1}": om1,
                              f"omega_offdiag_{s + 1}": om2})
            if spec.kind == DIAGONAL and spec.diag_means is not None:
                a[np.diag_indices(m)] = spec.diag_means \
                    + np.sqrt(spec.diag_vars) * rng.standard_normal(m)
            else:
                a[np.diag_indices(m)] = rng.normal(mu1, 1.0 / np.sqrt(om1), size=m)
            off = ~np.eye(m, dtype=bool)
            a[off] = rng.normal(mu2, 1.0 / np.sqrt(om2), size=m * m - m)
            a_list.append(a)
    elif spec.kind == SPARSE:
        for s in range(p):
            psi = np.empty((m, m))
            psi[np.diag_indices(m)] = 1.0 / rng.gamma(0.5 * spec.df_diag,
                                                      2.0 / spec.df_diag, size=m)
            off = ~np.eye(m, dtype=bool)
            psi[off] = 1.0 / rng.gamma(0.5 * spec.df_offdiag,
                                       2.0 / spec.df_offdiag, size=m * m - m)
            a_list.append(np.sqrt(psi) * rng.standard_normal((m, m)))
            for i in range(m):
                for j in range(m):
                    hyper[f"psi_{s + 1}_{i + 1}{j + 1}"] = psi[i, j]
    elif spec.kind == RML_VAGUE:
        clist = [rng.standard_normal((m, m)) for _ in range(p)]
        plist = reparam.ak_from_rml(sigma, clist)
        a_list = [reparam.p_to_a(pm) for pm in plist]
    elif spec.kind == SEMI_CONJUGATE:
        a_list = [spec.phi_sd * rng.standard_normal((m, m)) for _ in range(p)]
    else:
        raise ConfigInvalid(f"cannot sample prior of kind {spec.kind}")
    return ParameterPoint(sigma=sigma, aseq=a_list, hyper=hyper)


@dataclass
class MarginalMoments:
    mean: float
    variance: float
    correlation: float


def _group_moments(e, f, g, h) -> MarginalMoments:
    if g <= 1.0:
        raise InfiniteVariance(f"gamma shape {g} <= 1 gives infinite entry variance")
    var = f * f + h / (g - 1.0)
    cor = f * f * (g - 1.0) / (f * f * (g - 1.0) + h)
    return MarginalMoments(mean=float(e), variance=float(var), correlation=float(cor))


def marginal_moments(spec: PriorSpec, lag: int) -> tuple[MarginalMoments, MarginalMoments]:
    """Closed-form marginal (mean, variance, within-group correlation) of
    coefficient entries at a given lag (1-based), for the diagonal and
    off-diagonal groups."""
    s = lag - 1
    if not 0 <= s < spec.p:
        raise DimensionMismatch(f"lag {lag} outside 1..{spec.p}")
    if spec.kind == EXCHANGEABLE:
        return (_group_moments(spec.e1[s], spec.f1[s], spec.g1[s], spec.h1[s]),
                _group_moments(spec.e2[s], spec.f2[s], spec.g2[s], spec.h2[s]))
    if spec.kind == DIAGONAL and spec.diag_means is None:
        return (_group_moments(spec.e1[s], spec.f1[s], spec.g1[s], spec.h1[s]),
                _group_moments(0.0, 0.0, spec.g2[s], spec.h2[s]))
    if spec.kind == ALL_ONES:
        return (_group_moments(spec.e1[s], spec.f1[s], spec.g1[s], spec.h1[s]),
                _group_moments(spec.e1[s], spec.f1[s], spec.g2[s], spec.h2[s]))
    if spec.kind == SPARSE:
        def t_moments(df):
            if df <= 2.0:
                raise InfiniteVariance(f"student dof {df} <= 2")
            return MarginalMoments(mean=0.0, variance=df / (df - 2.0), correlation=0.0)
        return t_moments(spec.df_diag), t_moments(spec.df_offdiag)
    raise ConfigInvalid(f"kind {spec.kind} has no closed-form entry moments")


def elicit_from_structure(r_diag: float, r_offdiag: float, m: int) -> tuple[float, float]:
    """Prior-mean seeds (c1, c2) for the diagonal and off-diagonal groups,
    from target common pacf entries (r1, r2) under the structure-preserving
    two-parameter exchangeable map."""
    return reparam.two_param_p_to_a(m, r_diag, r_offdiag)
