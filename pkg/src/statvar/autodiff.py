"""Forward-mode automatic differentiation with batched dual numbers.

A :class:`Dual` carries a value array of shape ``S`` together with a
tangent array of shape ``(d,) + S`` holding the partial derivatives with
respect to ``d`` input coordinates.  Putting the tangent axis first means
matrix products of tangents ride on numpy's batched ``matmul`` rather
than einsum.

The module also provides generic matrix helpers (``msqrt``, ``minv``,
``mlogdet``, ...) that accept either plain arrays or duals, so the model
pipeline can be written once and evaluated with or without derivatives.
Derivatives of the symmetric square root avoid differentiating the
eigendecomposition itself: with X = R R, the tangent solves the Sylvester
equation R dR + dR R = dX, which is diagonal in the eigenbasis of X.
"""

from __future__ import annotations

import numpy as np

from . import linalg
from .errors import NotSpd

_HANDLED_UFUNCS = {
    np.add, np.subtract, np.multiply, np.true_divide,
    np.negative, np.exp, np.log, np.sqrt, np.matmul,
}


def _pad_tan(tan: np.ndarray, result_ndim: int) -> np.ndarray:
    """Insert singleton axes after the tangent axis so that tangents
    broadcast against values the same way the values broadcast."""
    own_ndim = tan.ndim - 1
    if own_ndim >= result_ndim:
        return tan
    d = tan.shape[0]
    return tan.reshape((d,) + (1,) * (result_ndim - own_ndim) + tan.shape[1:])


class Dual:
    """Value plus tangents with respect to d seed coordinates."""

    __slots__ = ("val", "tan")

    def __init__(self, val, tan):
        self.val = np.asarray(val, dtype=float)
        self.tan = np.asarray(tan, dtype=float)

    @property
    def npartials(self) -> int:
        return self.tan.shape[0]

    @property
    def shape(self):
        return self.val.shape

    def __repr__(self):
        return f"Dual(val={self.val!r}, d={self.npartials})"

    # -- elementwise arithmetic -------------------------------------------

    def __add__(self, other):
        if isinstance(other, Dual):
            val = self.val + other.val
            return Dual(val, _pad_tan(self.tan, val.ndim) + _pad_tan(other.tan, val.ndim))
        val = self.val + other
        return Dual(val, _grow_tan(self.tan, val.shape))

    __radd__ = __add__

    def __sub__(self, other):
        if isinstance(other, Dual):
            val = self.val - other.val
            return Dual(val, _pad_tan(self.tan, val.ndim) - _pad_tan(other.tan, val.ndim))
        val = self.val - other
        return Dual(val, _grow_tan(self.tan, val.shape))

    def __rsub__(self, other):
        val = other - self.val
        return Dual(val, _grow_tan(-self.tan, val.shape))

    def __mul__(self, other):
        if isinstance(other, Dual):
            val = self.val * other.val
            return Dual(val, _pad_tan(self.tan, val.ndim) * other.val
                        + self.val * _pad_tan(other.tan, val.ndim))
        other = np.asarray(other, dtype=float)
        val = self.val * other
        return Dual(val, _pad_tan(self.tan, val.ndim) * other)

    __rmul__ = __mul__

    def __truediv__(self, other):
        if isinstance(other, Dual):
            inv = 1.0 / other.val
            val = self.val * inv
            return Dual(val, _pad_tan(self.tan, val.ndim) * inv
                        - (val * inv) * _pad_tan(other.tan, val.ndim))
        other = np.asarray(other, dtype=float)
        val = self.val / other
        return Dual(val, _pad_tan(self.tan, val.ndim) / other)

    def __rtruediv__(self, other):
        inv = 1.0 / self.val
        val = other * inv
        return Dual(val, -(val * inv) * _pad_tan(self.tan, val.ndim))

    def __neg__(self):
        return Dual(-self.val, -self.tan)

    def __pow__(self, exponent):
        if not isinstance(exponent, (int, float)):
            return NotImplemented
        val = self.val ** exponent
        return Dual(val, _pad_tan(self.tan, val.ndim)
                    * (exponent * self.val ** (exponent - 1)))

    # -- matrix products ---------------------------------------------------

    def __matmul__(self, other):
        if isinstance(other, Dual):
            return Dual(self.val @ other.val,
                        _tan_matmul_plain(self.tan, other.val)
                        + _plain_matmul_tan(self.val, other.tan))
        other = np.asarray(other, dtype=float)
        return Dual(self.val @ other, _tan_matmul_plain(self.tan, other))

    def __rmatmul__(self, other):
        other = np.asarray(other, dtype=float)
        return Dual(other @ self.val, _plain_matmul_tan(other, self.tan))

    # -- structure ----------------------------------------------------------

    @property
    def T(self):
        if self.val.ndim < 2:
            return self
        return Dual(self.val.T, self.tan.swapaxes(-1, -2))

    def __getitem__(self, idx):
        if not isinstance(idx, tuple):
            idx = (idx,)
        return Dual(self.val[idx], self.tan[(slice(None),) + idx])

    def reshape(self, *shape):
        if len(shape) == 1 and isinstance(shape[0], tuple):
            shape = shape[0]
        return Dual(self.val.reshape(shape),
                    self.tan.reshape((self.tan.shape[0],) + tuple(shape)))

    def sum(self, axis=None):
        if axis is None:
            d = self.tan.shape[0]
            return Dual(self.val.sum(), self.tan.reshape(d, -1).sum(axis=1))
        axis = axis if axis >= 0 else self.val.ndim + axis
        return Dual(self.val.sum(axis=axis), self.tan.sum(axis=axis + 1))

    # -- elementwise transcendental -----------------------------------------

    def exp(self):
        ev = np.exp(self.val)
        return Dual(ev, self.tan * ev)

    def log(self):
        return Dual(np.log(self.val), self.tan / self.val)

    def sqrt(self):
        rv = np.sqrt(self.val)
        return Dual(rv, self.tan / (2.0 * rv))

    # Route numpy ufuncs (np.log(x), ndarray + Dual, ...) through the
    # methods above so pipeline code reads as plain numpy.
    def __array_ufunc__(self, ufunc, method, *inputs, **kwargs):
        if kwargs or ufunc not in _HANDLED_UFUNCS:
            return NotImplemented
        if method == "reduce":
            if ufunc is np.add and len(inputs) == 1:
                return inputs[0].sum()
            return NotImplemented
        if method != "__call__":
            return NotImplemented
        if ufunc is np.add:
            a, b = inputs
            return a + b if isinstance(a, Dual) else b + a
        if ufunc is np.subtract:
            a, b = inputs
            return a - b if isinstance(a, Dual) else (-b) + a
        if ufunc is np.multiply:
            a, b = inputs
            return a * b if isinstance(a, Dual) else b * a
        if ufunc is np.true_divide:
            a, b = inputs
            return a / b if isinstance(a, Dual) else b.__rtruediv__(a)
        if ufunc is np.matmul:
            a, b = inputs
            return a @ b if isinstance(a, Dual) else b.__rmatmul__(a)
        if ufunc is np.negative:
            return -inputs[0]
        if ufunc is np.exp:
            return inputs[0].exp()
        if ufunc is np.log:
            return inputs[0].log()
        if ufunc is np.sqrt:
            return inputs[0].sqrt()
        return NotImplemented


def _grow_tan(tan, val_shape):
    """Broadcast a tangent to match a value shape that grew under a
    constant-operand operation."""
    target = (tan.shape[0],) + tuple(val_shape)
    if tan.shape == target:
        return tan
    return np.broadcast_to(_pad_tan(tan, len(val_shape)), target)


def _tan_matmul_plain(tan, plain):
    """tan[k] @ plain for every tangent slice k."""
    if plain.ndim == 1 or tan.ndim >= 3:
        return np.matmul(tan, plain)
    return tan @ plain  # (d, m) @ (m, n)


def _plain_matmul_tan(plain, tan):
    """plain @ tan[k] for every tangent slice k."""
    if tan.ndim == 2:  # tangent of a vector
        if plain.ndim == 1:
            return tan @ plain
        return tan @ plain.T
    return np.matmul(plain, tan)


def seed(theta: np.ndarray) -> Dual:
    """Attach an identity tangent basis to a flat coordinate vector."""
    theta = np.asarray(theta, dtype=float)
    return Dual(theta, np.eye(theta.shape[0]))


def value(x):
    """Value part of a dual, or the input unchanged."""
    return x.val if isinstance(x, Dual) else x


def is_dual(x) -> bool:
    return isinstance(x, Dual)


# -- generic SPD matrix functions --------------------------------------------


def _dual_eigh(x: Dual):
    val = linalg.symmetrize(x.val)
    w, v = np.linalg.eigh(val)
    if w[-1] <= 0 or w[0] <= linalg.SPD_TOL * w[-1]:
        raise NotSpd(f"matrix is not positive definite (min eig {w[0]:.3e})")
    return w, v


def msqrt(x):
    """Symmetric SPD square root for arrays or duals."""
    if not isinstance(x, Dual):
        return linalg.sym_sqrt(x)
    w, v = _dual_eigh(x)
    rw = np.sqrt(w)
    root = (v * rw) @ v.T
    tan_eig = np.matmul(np.matmul(v.T, x.tan), v)
    tan_eig /= rw[:, None] + rw[None, :]
    return Dual(linalg.symmetrize(root), np.matmul(np.matmul(v, tan_eig), v.T))


def msqrt_pair(x):
    """(X^{1/2}, X^{-1/2}) for arrays or duals, one decomposition."""
    if not isinstance(x, Dual):
        return linalg.sym_sqrt_pair(x)
    w, v = _dual_eigh(x)
    rw = np.sqrt(w)
    root = linalg.symmetrize((v * rw) @ v.T)
    root_inv = linalg.symmetrize((v / rw) @ v.T)
    tan_eig = np.matmul(np.matmul(v.T, x.tan), v)
    tan_eig /= rw[:, None] + rw[None, :]
    droot = np.matmul(np.matmul(v, tan_eig), v.T)
    # d(R^{-1}) = -R^{-1} dR R^{-1}
    dinv = -np.matmul(np.matmul(root_inv, droot), root_inv)
    return Dual(root, droot), Dual(root_inv, dinv)


def msqrt_inv(x):
    if not isinstance(x, Dual):
        return linalg.sym_sqrt_inv(x)
    return msqrt_pair(x)[1]


def minv(x):
    """Matrix inverse for arrays or duals."""
    if not isinstance(x, Dual):
        return np.linalg.inv(x)
    inv = np.linalg.inv(x.val)
    return Dual(inv, -np.matmul(np.matmul(inv, x.tan), inv))


def mlogdet(x):
    """Log-determinant of an SPD matrix, for arrays or duals."""
    if not isinstance(x, Dual):
        return linalg.spd_logdet(x)
    val = linalg.spd_logdet(x.val)
    inv = linalg.spd_solve(x.val, np.eye(x.val.shape[0]))
    return Dual(val, np.einsum("ij,kji->k", inv, x.tan))


def mtrace(x):
    if not isinstance(x, Dual):
        return float(np.trace(x))
    return Dual(np.trace(x.val), np.trace(x.tan, axis1=1, axis2=2))


def msym(x):
    """Symmetrize a matrix (dual-aware)."""
    return 0.5 * (x + x.T)

