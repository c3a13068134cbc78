"""Dense symmetric linear algebra used throughout the package.

All routines operate on small dense matrices (dimension up to a few tens)
and favour exactness over speed: symmetric eigendecompositions back the
matrix square roots, and the discrete Lyapunov equation is solved through
the dense Kronecker linear system.
"""

from __future__ import annotations

import numpy as np

from .errors import DimensionMismatch, NotSpd, NotStationary, SingularSystem

# Relative tolerances for SPD validation.  Eigenvalues must exceed
# SPD_TOL times the largest eigenvalue; asymmetry is measured relative
# to the largest entry.
SPD_TOL = 1e-12
SYM_TOL = 1e-10


def symmetrize(mat: np.ndarray) -> np.ndarray:
    """Return (M + M^T)/2, guarding against floating-point drift."""
    return 0.5 * (mat + mat.T)


def check_square(mat: np.ndarray, name: str = "matrix") -> np.ndarray:
    mat = np.asarray(mat, dtype=float)
    if mat.ndim != 2 or mat.shape[0] != mat.shape[1]:
        raise NotSpd(f"{name} must be square, got shape {mat.shape}")
    return mat

def spd_eigh(mat, sym_tol: float = SYM_TOL, spd_tol: float = SPD_TOL):
    """Eigendecompose an SPD matrix, validating symmetry and positivity.

    Parameters
    ----------
    mat : ndarray (m, m)
        Candidate SPD matrix.  It is symmetrised before decomposition.

    Returns
    -------
    (w, v) : eigenvalues ascending, orthonormal eigenvectors as columns.

    Raises
    ------
    NotSpd
        If the input is materially asymmetric or any eigenvalue falls at
        or below ``spd_tol`` times the largest eigenvalue.
    """
    mat = check_square(mat)
    scale = np.abs(mat).max()
    if scale > 0 and np.abs(mat - mat.T).max() > sym_tol * scale:
        raise NotSpd("matrix is not symmetric to tolerance")
    w, v = np.linalg.eigh(symmetrize(mat))
    if w[-1] <= 0 or w[0] <= spd_tol * w[-1]:
        raise NotSpd(f"matrix is not positive definite (min eig {w[0]:.3e})")
    return w, v


def sym_sqrt(mat: np.ndarray) -> np.ndarray:
    """Unique symmetric positive definite square root of an SPD matrix."""
    w, v = spd_eigh(mat)
    return symmetrize((v * np.sqrt(w)) @ v.T)


def sym_sqrt_inv(mat: np.ndarray) -> np.ndarray:
    """Inverse of the symmetric square root: R with R M R = I."""
    w, v = spd_eigh(mat)
    return symmetrize((v / np.sqrt(w)) @ v.T)


def sym_sqrt_pair(mat: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Return (M^{1/2}, M^{-1/2}) from a single eigendecomposition."""
    w, v = spd_eigh(mat)
    rw = np.sqrt(w)
    return symmetrize((v * rw) @ v.T), symmetrize((v / rw) @ v.T)


def spd_logdet(mat: np.ndarray) -> float:
    """Log-determinant of an SPD matrix via Cholesky."""
    try:
        chol = np.linalg.cholesky(symmetrize(mat))
    except np.linalg.LinAlgError as exc:
        raise NotSpd("Cholesky factorisation failed") from exc
    return 2.0 * float(np.sum(np.log(np.diag(chol))))


def spd_solve(mat: np.ndarray, rhs: np.ndarray) -> np.ndarray:
    """Solve M x = rhs for SPD M via Cholesky."""
    try:
        chol = np.linalg.cholesky(symmetrize(mat))
    except np.linalg.LinAlgError as exc:
        raise NotSpd("Cholesky factorisation failed") from exc
    y = np.linalg.solve(chol, rhs)
    return np.linalg.solve(chol.T, y)


def cholesky_with_jitter(mat: np.ndarray) -> np.ndarray:
    """Lower Cholesky factor, retrying once with a trace-scaled jitter."""
    mat = symmetrize(mat)
    try:
        return np.linalg.cholesky(mat)
    except np.linalg.LinAlgError:
        jitter = 1e-10 * np.trace(mat) / mat.shape[0]
        try:
            return np.linalg.cholesky(mat + jitter * np.eye(mat.shape[0]))
        except np.linalg.LinAlgError as exc:
            raise NotSpd("matrix is not positive definite even after jitter") from exc


def singular_values(mat: np.ndarray) -> np.ndarray:
    """Singular values of a square matrix in descending order."""
    return np.linalg.svd(np.asarray(mat, dtype=float), compute_uv=False)


def spectral_radius(mat: np.ndarray) -> float:
    """Largest eigenvalue modulus of a square matrix."""
    return float(np.max(np.abs(np.linalg.eigvals(mat))))


def solve_discrete_lyapunov(
    fmat: np.ndarray, qmat: np.ndarray, rho_tol: float = 1e-8
) -> np.ndarray:
    """Solve X = F X F^T + Q through the dense Kronecker linear system.

    O((mp)^6) in the worst case, which is acceptable at desk scale and
    exact to solver precision; no Bartels-Stewart machinery needed.

    Raises
    ------
    NotStationary
        If the spectral radius of F is >= 1 - rho_tol.
    SingularSystem
        If the Kronecker system cannot be solved.
    """
    fmat = check_square(np.asarray(fmat, dtype=float), "F")
    qmat = check_square(np.asarray(qmat, dtype=float), "Q")
    if fmat.shape != qmat.shape:
        raise DimensionMismatch("F and Q must have matching shapes")
    radius = spectral_radius(fmat)
    if radius >= 1.0 - rho_tol:
        raise NotStationary(f"spectral radius {radius:.6f} >= 1 - {rho_tol:g}")
    n = fmat.shape[0]
    lhs = np.eye(n * n) - np.kron(fmat, fmat)
    try:
        x = np.linalg.solve(lhs, qmat.reshape(-1))
    except np.linalg.LinAlgError as exc:
        raise SingularSystem("Kronecker system solve failed") from exc
    return symmetrize(x.reshape(n, n))


def solve_spd_quadratic(amat: np.ndarray, bmat: np.ndarray) -> np.ndarray:
    """Unique SPD solution S of S A S = B for SPD A and B.

    Computed as L^{-1} (L B L)^{1/2} L^{-1} with L = A^{1/2}; uniqueness
    follows because T = A^{1/2} S A^{1/2} must be the SPD square root of
    A^{1/2} B A^{1/2}.
    """
    lmat, linv = sym_sqrt_pair(amat)
    inner = sym_sqrt(lmat @ symmetrize(bmat) @ lmat)
    return symmetrize(linv @ inner @ linv)


def random_orthogonal(dim: int, rng: np.random.Generator) -> np.ndarray:
    """Haar-ish random orthogonal matrix from the QR of a Gaussian draw."""
    q, r = np.linalg.qr(rng.standard_normal((dim, dim)))
    return q * np.sign(np.diag(r))


def random_spd(dim: int, rng: np.random.Generator, spread: float = 1.0) -> np.ndarray:
    """Random SPD matrix with eigenvalues bounded away from zero."""
    a = rng.standard_normal((dim, dim)) * spread
    return symmetrize(a @ a.T + dim * np.eye(dim) * 0.1)
