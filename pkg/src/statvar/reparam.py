"""Bidirectional maps between VAR coefficients, partial autocorrelation
matrices, and unconstrained square matrices.

The two-part transformation works, for a fixed error variance, through

* a recursion linking stationary coefficients (phi_1..phi_p) with partial
  autocorrelation matrices (P_1..P_p), each of which has all singular
  values below one, and
* a closed-form bijection between each P and an arbitrary real matrix A,
  built from symmetric SPD matrix square roots.

Symmetric square roots (never Cholesky factors) are used throughout so
that orthogonal conjugation of the observation basis commutes with every
map.  The recursion cores are written against the generic helpers in
:mod:`statvar.autodiff` and therefore accept dual numbers, which is how
the posterior gradient is propagated through the full pipeline.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import linalg
from .autodiff import msqrt_inv, msqrt_pair, msym, value
from .errors import DimensionMismatch, NotInVm, NotOrthogonal, NotStationary, OutOfBounds
from .process import VarModel, autocovariances, is_stationary

SV_TOL = 1e-9  # reject P when its largest singular value is >= 1 - SV_TOL
RHO_TOL = 1e-8


@dataclass
class ForwardMapTrace:
    """Intermediate quantities of the coefficient-to-pacf recursion."""

    gammas: list            # Gamma_0 .. Gamma_p
    sigmas_fwd: list        # forward conditional variances Sigma_0 .. Sigma_p
    sigmas_rev: list        # reverse conditional variances Sigma*_0 .. Sigma*_p
    phi_tri: list           # triangular array, phi_tri[s][i] = phi_{s+1, i+1}
    phi_tri_rev: list       # reverse counterpart


def _check_in_vm(pmat: np.ndarray, sv_tol: float = SV_TOL) -> np.ndarray:
    pmat = np.asarray(pmat, dtype=float)
    smax = linalg.singular_values(pmat)[0]
    if smax >= 1.0 - sv_tol:
        raise NotInVm(f"largest singular value {smax:.12f} >= 1 - {sv_tol:g}")
    return pmat


# -- P <-> A ------------------------------------------------------------------


def a_to_p_core(amat):
    """(I + A A^T)^{-1/2} A, accepting arrays or duals."""
    m = value(amat).shape[0]
    return msqrt_inv(np.eye(m) + amat @ amat.T) @ amat


def p_to_a(pmat: np.ndarray, sv_tol: float = SV_TOL) -> np.ndarray:
    """Map a matrix with singular values below one to an unconstrained one.

    A = (I - P P^T)^{-1/2} P.  Inverse of :func:`a_to_p`.

    Raises
    ------
    NotInVm
        If any singular value of P is >= 1 - sv_tol.
    """
    pmat = _check_in_vm(pmat, sv_tol)
    m = pmat.shape[0]
    return linalg.sym_sqrt_inv(np.eye(m) - pmat @ pmat.T) @ pmat


def a_to_p(amat: np.ndarray) -> np.ndarray:
    """Map an arbitrary real square matrix into the unit-singular-value ball."""
    amat = np.asarray(amat, dtype=float)
    if amat.ndim != 2 or amat.shape[0] != amat.shape[1]:
        raise DimensionMismatch("A must be square")
    return a_to_p_core(amat)


# -- reverse mapping: {Sigma, (P_1..P_p)} -> (Sigma, Phi) ----------------------


def _reverse_stage1(sigma, plist):
    """Walk the conditional-variance chain down from Sigma_p = Sigma.

    Each step finds the unique SPD matrix S_s with
    S_s (I - P_{s+1} P_{s+1}^T) S_s = Sigma_{s+1}, which equals
    Sigma_s^{1/2}.  Returns (sigma_chain, s_chain, s_inv_chain) indexed
    0..p, where the two square-root chains are only filled below p.
    """
    p = len(plist)
    m = value(sigma).shape[0]
    sigma_chain = [None] * (p + 1)
    s_chain = [None] * (p + 1)
    s_inv_chain = [None] * (p + 1)
    sigma_chain[p] = sigma
    eye = np.eye(m)
    for s in range(p - 1, -1, -1):
        pmat = plist[s]
        lmat, linv = msqrt_pair(eye - pmat @ pmat.T)
        inner, inner_inv = msqrt_pair(msym(lmat @ sigma_chain[s + 1] @ lmat))
        s_chain[s] = msym(linv @ inner @ linv)
        s_inv_chain[s] = msym(lmat @ inner_inv @ lmat)
        sigma_chain[s] = msym(s_chain[s] @ s_chain[s])
    return sigma_chain, s_chain, s_inv_chain


def _reverse_stage2(plist, sigma_chain, s_chain, s_inv_chain):
    """Rebuild coefficients and autocovariances from the variance chain."""
    p = len(plist)
    phi_fwd = [[None] * p for _ in range(p)]
    phi_rev = [[None] * p for _ in range(p)]
    gammas_t = [None] * (p + 1)  # gammas_t[j] holds Gamma_j^T
    gammas_t[0] = sigma_chain[0]
    sigma_rev = sigma_chain[0]
    for s in range(p):
        if s == 0:
            srev, srev_inv = s_chain[0], s_inv_chain[0]
        else:
            srev, srev_inv = msqrt_pair(sigma_rev)
        phi_ss = s_chain[s] @ plist[s] @ srev_inv
        phi_ss_rev = srev @ plist[s].T @ s_inv_chain[s]
        phi_fwd[s][s] = phi_ss
        phi_rev[s][s] = phi_ss_rev
        for i in range(s):
            phi_fwd[s][i] = phi_fwd[s - 1][i] - phi_ss @ phi_rev[s - 1][s - 1 - i]
            phi_rev[s][i] = phi_rev[s - 1][i] - phi_ss_rev @ phi_fwd[s - 1][s - 1 - i]
        gam = phi_ss @ sigma_rev
        for i in range(1, s + 1):
            gam = gam + phi_fwd[s - 1][i - 1] @ gammas_t[s + 1 - i]
        gammas_t[s + 1] = gam
        if s < p - 1:
            sigma_rev = msym(sigma_rev - phi_ss_rev @ sigma_chain[s] @ phi_ss_rev.T)
    phis = [phi_fwd[p - 1][i] for i in range(p)]
    gammas = [gammas_t[0]] + [g.T for g in gammas_t[1:]]
    return phis, gammas


def reverse_map_core(sigma, plist):
    """Coefficient and autocovariance chain from (Sigma, P's); dual-aware."""
    if len(plist) == 0:
        return [], [sigma]
    sigma_chain, s_chain, s_inv_chain = _reverse_stage1(sigma, plist)
    return _reverse_stage2(plist, sigma_chain, s_chain, s_inv_chain)


def reverse_map(sigma: np.ndarray, plist: list, sv_tol: float = SV_TOL):
    """Map {Sigma, (P_1..P_p)} to a stationary model plus Gamma_0..Gamma_p.

    The returned coefficients are stationary by construction, and the
    conditional-variance chain reproduces Sigma exactly at its top end.

    Returns
    -------
    (model, gammas) : VarModel and the list Gamma_0 .. Gamma_p.
    """
    linalg.spd_eigh(sigma)
    plist = [_check_in_vm(pmat, sv_tol) for pmat in plist]
    phis, gammas = reverse_map_core(np.asarray(sigma, dtype=float), plist)
    return VarModel(sigma=np.asarray(sigma, dtype=float), phi=phis), gammas


# -- forward mapping: (Sigma, Phi) -> {Sigma, (P_1..P_p)} ----------------------


def forward_map(model: VarModel, rho_tol: float = RHO_TOL):
    """Map a stationary model to its partial autocorrelation matrices.

    Returns
    -------
    (plist, trace) : the matrices P_1..P_p and a :class:`ForwardMapTrace`
    carrying Gamma_0..Gamma_p, both conditional-variance chains, and the
    triangular coefficient arrays.

    Raises
    ------
    NotStationary
        If the companion spectral radius is >= 1 - rho_tol.
    NotSpd
        If a conditional variance loses positive definiteness, which
        signals numerical breakdown.
    """
    _, radius = is_stationary(model.phi)
    if radius >= 1.0 - rho_tol:
        raise NotStationary(f"companion spectral radius {radius:.8f} >= 1 - {rho_tol:g}")
    p = model.order
    gammas = autocovariances(model, p, rho_tol=rho_tol)
    sigmas_fwd = [gammas[0]]
    sigmas_rev = [gammas[0]]
    phi_fwd = [[None] * p for _ in range(p)]
    phi_rev = [[None] * p for _ in range(p)]
    plist = []
    for s in range(p):
        s_fwd, s_fwd_inv = linalg.sym_sqrt_pair(sigmas_fwd[s])
        sigma_rev_inv = linalg.spd_solve(sigmas_rev[s], np.eye(model.dim))
        sigma_fwd_inv = s_fwd_inv @ s_fwd_inv
        resid = gammas[s + 1].T
        resid_rev = gammas[s + 1]
        for i in range(1, s + 1):
            resid = resid - phi_fwd[s - 1][i - 1] @ gammas[s + 1 - i].T
            resid_rev = resid_rev - phi_rev[s - 1][i - 1] @ gammas[s + 1 - i]
        phi_ss = resid @ sigma_rev_inv
        phi_ss_rev = resid_rev @ sigma_fwd_inv
        phi_fwd[s][s] = phi_ss
        phi_rev[s][s] = phi_ss_rev
        for i in range(s):
            phi_fwd[s][i] = phi_fwd[s - 1][i] - phi_ss @ phi_rev[s - 1][s - 1 - i]
            phi_rev[s][i] = phi_rev[s - 1][i] - phi_ss_rev @ phi_fwd[s - 1][s - 1 - i]
        s_rev = linalg.sym_sqrt(sigmas_rev[s])
        plist.append(s_fwd_inv @ phi_ss @ s_rev)
        nxt = gammas[0].copy()
        nxt_rev = gammas[0].copy()
        for i in range(1, s + 2):
            nxt = nxt - phi_fwd[s][i - 1] @ gammas[i]
            nxt_rev = nxt_rev - phi_rev[s][i - 1] @ gammas[i].T
        sigmas_fwd.append(linalg.symmetrize(nxt))
        sigmas_rev.append(linalg.symmetrize(nxt_rev))
    trace = ForwardMapTrace(
        gammas=gammas,
        sigmas_fwd=sigmas_fwd,
        sigmas_rev=sigmas_rev,
        phi_tri=phi_fwd,
        phi_tri_rev=phi_rev,
    )
    return plist, trace


# -- structured forms ----------------------------------------------------------


def _scalar_p_to_a(r: float) -> float:
    return r / np.sqrt(1.0 - r * r)


@dataclass(frozen=True)
class ScaledAllOnes:
    """r times the all-ones matrix; needs |r| < 1/m on the P side."""

    dim: int
    scale: float

    def assemble(self) -> np.ndarray:
        return self.scale * np.ones((self.dim, self.dim))


@dataclass(frozen=True)
class DiagonalForm:
    """Diagonal matrix; needs max |r_j| < 1 on the P side."""

    values: tuple

    @property
    def dim(self) -> int:
        return len(self.values)

    def assemble(self) -> np.ndarray:
        return np.diag(np.asarray(self.values, dtype=float))


@dataclass(frozen=True)
class ScaledIdentity:
    """r times the identity; needs |r| < 1 on the P side."""

    dim: int
    scale: float

    def assemble(self) -> np.ndarray:
        return self.scale * np.eye(self.dim)


@dataclass(frozen=True)
class ZeroForm:
    """The zero matrix, fixed point of both maps."""

    dim: int

    def assemble(self) -> np.ndarray:
        return np.zeros((self.dim, self.dim))


@dataclass(frozen=True)
class TwoParamExchangeable:
    """(r1 - r2) I + r2 J, the general permutation-invariant square matrix.

    On the P side the singular values are below one exactly when
    |r1 - r2| < 1 and |r1 + (m - 1) r2| < 1.
    """

    dim: int
    diag: float
    offdiag: float

    def assemble(self) -> np.ndarray:
        m = self.dim
        return (self.diag - self.offdiag) * np.eye(m) + self.offdiag * np.ones((m, m))


def two_param_p_to_a(m: int, r1: float, r2: float) -> tuple[float, float]:
    """Closed-form A-side (c1, c2) for a two-parameter exchangeable P."""
    if abs(r1 - r2) >= 1.0 or abs(r1 + (m - 1) * r2) >= 1.0:
        raise OutOfBounds("two-parameter exchangeable values violate |r1-r2| < 1, "
                          "|r1+(m-1)r2| < 1")
    rt2 = np.sqrt(2.0)
    r1p = rt2 * (r1 - r2) / 2.0
    r2p = rt2 * (r1 + (m - 1) * r2) / m
    s1 = np.sqrt(2.0 - m * m * r2p * r2p)
    s2 = np.sqrt(1.0 - 2.0 * r1p * r1p)
    denom = m * s1 * s2
    cs = []
    for i in (1, 2):
        num = (rt2 * m * r1p * s1) * (2 - i) - rt2 * r1p * s1 + m * r2p * s2
        cs.append(num / denom)
    return cs[0], cs[1]


def structure_p_to_a(form):
    """Apply the P-to-A map in closed form, preserving the structure kind.

    Returns a new instance of the same dataclass whose parameters are the
    A-side values; agrees entrywise with :func:`p_to_a` applied to the
    assembled matrix.

    Raises
    ------
    OutOfBounds
        If the P-side parameters violate the kind's singular-value bounds.
    """
    if isinstance(form, ZeroForm):
        return form
    if isinstance(form, ScaledAllOnes):
        r, m = form.scale, form.dim
        if abs(r) >= 1.0 / m:
            raise OutOfBounds(f"|r| must be < 1/m = {1.0 / m:g}")
        return ScaledAllOnes(dim=m, scale=r / np.sqrt(1.0 - m * m * r * r))
    if isinstance(form, ScaledIdentity):
        if abs(form.scale) >= 1.0:
            raise OutOfBounds("|r| must be < 1")
        return ScaledIdentity(dim=form.dim, scale=_scalar_p_to_a(form.scale))
    if isinstance(form, DiagonalForm):
        vals = np.asarray(form.values, dtype=float)
        if np.max(np.abs(vals)) >= 1.0:
            raise OutOfBounds("max |r_j| must be < 1")
        return DiagonalForm(values=tuple(_scalar_p_to_a(v) for v in vals))
    if isinstance(form, TwoParamExchangeable):
        c1, c2 = two_param_p_to_a(form.dim, form.diag, form.offdiag)
        return TwoParamExchangeable(dim=form.dim, diag=c1, offdiag=c2)
    raise TypeError(f"unknown structured form {type(form).__name__}")


# -- RML parameterisation ------------------------------------------------------


def rml_from_ak(sigma: np.ndarray, plist: list, sv_tol: float = SV_TOL) -> list:
    """C_s = P_s^T Sigma_{s-1}^{1/2} along the conditional-variance chain.

    Each difference V_s = Sigma_{s-1} - Sigma_s equals C_s^T C_s, and is
    SPD whenever P_s has full rank.
    """
    linalg.spd_eigh(sigma)
    plist = [_check_in_vm(pmat, sv_tol) for pmat in plist]
    _, s_chain, _ = _reverse_stage1(np.asarray(sigma, dtype=float), plist)
    return [plist[s].T @ s_chain[s] for s in range(len(plist))]


def ak_from_rml_core(sigma, clist):
    """Backward chain Sigma_{s-1} = Sigma_s + C_s^T C_s; dual-aware.

    Returns (plist, sigma_chain, s_chain, s_inv_chain) so callers can
    reuse the square-root chain.  Rank-deficient C_s are fine: the chain
    stays SPD and P_s = Sigma_{s-1}^{-1/2} C_s^T remains well defined
    (only the orthogonal polar factor of C_s would be non-unique).
    """
    p = len(clist)
    sigma_chain = [None] * (p + 1)
    s_chain = [None] * (p + 1)
    s_inv_chain = [None] * (p + 1)
    sigma_chain[p] = sigma
    for s in range(p - 1, -1, -1):
        sigma_chain[s] = msym(sigma_chain[s + 1] + clist[s].T @ clist[s])
    plist = []
    for s in range(p):
        s_chain[s], s_inv_chain[s] = msqrt_pair(sigma_chain[s])
        plist.append(s_inv_chain[s] @ clist[s].T)
    return plist, sigma_chain, s_chain, s_inv_chain


def ak_from_rml(sigma: np.ndarray, clist: list) -> list:
    """Recover (P_1..P_p) from {Sigma, (C_1..C_p)}.

    Inverse of :func:`rml_from_ak`; every returned matrix has singular
    values strictly below one because Sigma_{s-1} dominates C_s^T C_s.
    """
    linalg.spd_eigh(sigma)
    clist = [np.asarray(c, dtype=float) for c in clist]
    plist, _, _, _ = ak_from_rml_core(np.asarray(sigma, dtype=float), clist)
    return plist


# -- orthogonal conjugation ----------------------------------------------------


def orthogonal_conjugate(mats: list, hmat: np.ndarray, tol: float = 1e-10) -> list:
    """Conjugate every matrix in a sequence as H M H^T.

    Membership of the stationary region, of the unit-singular-value ball,
    and of the unconstrained space are all preserved.

    Raises
    ------
    NotOrthogonal
        If H^T H deviates from the identity by more than tol.
    """
    hmat = np.asarray(hmat, dtype=float)
    if np.abs(hmat.T @ hmat - np.eye(hmat.shape[0])).max() > tol:
        raise NotOrthogonal("H is not orthogonal to tolerance")
    return [hmat @ np.asarray(m, dtype=float) @ hmat.T for m in mats]
