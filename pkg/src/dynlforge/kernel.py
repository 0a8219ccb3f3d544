"""Matrix analytic functions, truncated jets and guarded solves.

Every numerical routine in the package is written against :class:`Jet`, a
matrix-valued truncated Taylor series in one real variable ``t``.  A jet of
order 0 is a plain value, a jet of order 1 is a dual number, and a jet of
order ``K`` along ``t -> t*p0`` is a ray jet.  Analytic functions of jets are
evaluated through the block upper-triangular Toeplitz representation, which
is an algebra homomorphism, so ``f(T(A)) = T(f(A))`` for any entire ``f``.
"""

from __future__ import annotations

import numpy as np
import scipy.linalg

from .errors import OutsideAnalyticDomain
from .tolerances import COND_MAX


class Jet:
    """Truncated series ``sum_k c[k] t^k`` with array coefficients.

    ``coeffs`` has shape ``(K+1, *shape)``; ``shape`` is that of the value.
    Products truncate at order ``K``.
    """

    __array_ufunc__ = None

    def __init__(self, coeffs):
        self.c = np.asarray(coeffs, dtype=float)
        if self.c.ndim == 0:
            self.c = self.c.reshape(1)

    # -- construction -----------------------------------------------------
    @classmethod
    def const(cls, value, order=0):
        value = np.asarray(value, dtype=float)
        c = np.zeros((order + 1,) + value.shape)
        c[0] = value
        return cls(c)

    @classmethod
    def line(cls, base, direction, order=1):
        """The jet of ``t -> base + t*direction``."""
        base = np.asarray(base, dtype=float)
        c = np.zeros((order + 1,) + base.shape)
        c[0] = base
        if order >= 1:
            c[1] = direction
        return cls(c)

    # -- shape ------------------------------------------------------------
    @property
    def order(self):
        return self.c.shape[0] - 1

    @property
    def shape(self):
        return self.c.shape[1:]

    @property
    def value(self):
        return self.c[0]

    def coeff(self, k):
        if k > self.order:
            return np.zeros(self.shape)
        return self.c[k]

    def truncate(self, order):
        if order >= self.order:
            pad = np.zeros((order - self.order,) + self.shape)
            return Jet(np.concatenate([self.c, pad]))
        return Jet(self.c[: order + 1])

    def __getitem__(self, key):
        if not isinstance(key, tuple):
            key = (key,)
        return Jet(self.c[(slice(None),) + key])

    def reshape(self, *shape):
        return Jet(self.c.reshape((self.c.shape[0],) + tuple(shape)))

    @property
    def T(self):
        return Jet(np.swapaxes(self.c, -1, -2))

    def __repr__(self):
        return f"Jet(order={self.order}, shape={self.shape})"

    # -- arithmetic -------------------------------------------------------
    def _align(self, other):
        other = other if isinstance(other, Jet) else Jet.const(other, self.order)
        order = max(self.order, other.order)
        return self.truncate(order), other.truncate(order)

    def __add__(self, other):
        a, b = self._align(other)
        return Jet(a.c + b.c)

    __radd__ = __add__

    def __sub__(self, other):
        a, b = self._align(other)
        return Jet(a.c - b.c)

    def __rsub__(self, other):
        a, b = self._align(other)
        return Jet(b.c - a.c)

    def __neg__(self):
        return Jet(-self.c)

    def __mul__(self, other):
        if isinstance(other, Jet):
            a, b = self._align(other)
            out = np.zeros((a.order + 1,) + np.broadcast_shapes(a.shape, b.shape))
            for k in range(a.order + 1):
                for j in range(k + 1):
                    out[k] += a.c[j] * b.c[k - j]
            return Jet(out)
        return Jet(self.c * other)

    __rmul__ = __mul__

    def __truediv__(self, scalar):
        return Jet(self.c / scalar)

    def __matmul__(self, other):
        a, b = self._align(other)
        first = np.matmul(a.c[0], b.c[0])
        out = np.zeros((a.order + 1,) + first.shape)
        out[0] = first
        for k in range(1, a.order + 1):
            acc = out[k]
            for j in range(k + 1):
                acc += np.matmul(a.c[j], b.c[k - j])
        return Jet(out)

    def __rmatmul__(self, other):
        b, a = self._align(other)
        return a @ b


def as_jet(x, order=0):
    return x if isinstance(x, Jet) else Jet.const(x, order)


def concat(blocks, axis):
    """Concatenate jets along a value axis (0 = rows, 1 = columns)."""
    order = max(b.order for b in blocks if isinstance(b, Jet))
    parts = [as_jet(b, order).truncate(order).c for b in blocks]
    return Jet(np.concatenate(parts, axis=axis + 1))


def block(rows):
    """Assemble a block matrix of jets (like ``np.block``)."""
    return concat([concat(list(r), 1) for r in rows], 0)


def einsum(spec, *operands):
    """Multilinear contraction of jets; at most one operand may be a jet.

    Used for contractions against constant structure tensors, where the
    jet dependence is linear.
    """
    jets = [i for i, op in enumerate(operands) if isinstance(op, Jet)]
    if not jets:
        return Jet.const(np.einsum(spec, *operands))
    if len(jets) > 1:
        raise ValueError("einsum supports a single jet operand")
    idx = jets[0]
    j = operands[idx]
    coeffs = []
    for k in range(j.order + 1):
        ops = list(operands)
        ops[idx] = j.c[k]
        coeffs.append(np.einsum(spec, *ops))
    return Jet(np.stack(coeffs))


# -- analytic functions --------------------------------------------------

def toeplitz(jet):
    """Block upper-triangular Toeplitz matrix representing a square jet."""
    K = jet.order
    n = jet.shape[0]
    big = np.zeros(((K + 1) * n, (K + 1) * n))
    for i in range(K + 1):
        for j in range(i, K + 1):
            big[i * n:(i + 1) * n, j * n:(j + 1) * n] = jet.c[j - i]
    return big


def from_toeplitz(big, order, n):
    return Jet(np.stack([big[:n, j * n:(j + 1) * n] for j in range(order + 1)]))


def expm(A):
    """Matrix exponential (scaling and squaring, Pade order 13)."""
    if isinstance(A, Jet):
        n = A.shape[0]
        if A.order == 0:
            return Jet(scipy.linalg.expm(A.c[0])[None])
        return from_toeplitz(scipy.linalg.expm(toeplitz(A)), A.order, n)
    return scipy.linalg.expm(np.asarray(A, dtype=float))


def phi_func(A, k):
    """phi_k(A) for k in {0, 1, 2} via one exponential of an augmented matrix.

    phi_0 = exp, phi_1(x) = (e^x - 1)/x, phi_2(x) = (e^x - 1 - x)/x^2, each
    taken as its everywhere-convergent series, so singular ``A`` is fine.
    """
    if k not in (0, 1, 2):
        raise ValueError("k must be 0, 1 or 2")
    if isinstance(A, Jet):
        n = A.shape[0]
        if n == 0:
            return Jet(np.zeros(A.c.shape))
        big = toeplitz(A) if A.order else A.c[0]
        return from_toeplitz(phi_func(big, k), A.order, n)
    A = np.asarray(A, dtype=float)
    n = A.shape[0]
    if k == 0:
        return scipy.linalg.expm(A)
    aug = np.zeros(((k + 1) * n, (k + 1) * n))
    aug[:n, :n] = A
    eye = np.eye(n)
    for j in range(1, k + 1):
        aug[(j - 1) * n:j * n, j * n:(j + 1) * n] = eye
    return scipy.linalg.expm(aug)[:n, k * n:(k + 1) * n]


def condition(A):
    A = np.asarray(A, dtype=float)
    if A.size == 0:
        return 1.0
    with np.errstate(all="ignore"):
        c = np.linalg.cond(A)
    return float(c) if np.isfinite(c) else np.inf


def solve_block(A, B, cond_max=COND_MAX):
    """Solve ``A X = B`` with partial pivoting; jets are solved order by order.

    Raises OutsideAnalyticDomain when the condition estimate of the value
    part of ``A`` exceeds ``cond_max``.
    """
    if not isinstance(A, Jet) and not isinstance(B, Jet):
        A = np.asarray(A, dtype=float)
        B = np.asarray(B, dtype=float)
        if A.shape[0] == 0:
            return np.zeros((0,) + B.shape[1:])
        cond = condition(A)
        if cond > cond_max:
            raise OutsideAnalyticDomain(cond, cond_max)
        return scipy.linalg.lu_solve(scipy.linalg.lu_factor(A), B)
    A = as_jet(A)
    B = as_jet(B)
    A, B = A._align(B)
    A0 = A.c[0]
    if A0.shape[0] == 0:
        return Jet(np.zeros((A.order + 1, 0) + B.shape[1:]))
    cond = condition(A0)
    if cond > cond_max:
        raise OutsideAnalyticDomain(cond, cond_max)
    lu = scipy.linalg.lu_factor(A0)
    X = np.zeros((A.order + 1,) + (A0.shape[1],) + B.shape[1:])
    for k in range(A.order + 1):
        rhs = B.c[k].copy()
        for j in range(1, k + 1):
            rhs -= A.c[j] @ X[k - j]
        X[k] = scipy.linalg.lu_solve(lu, rhs)
    return Jet(X)


# -- derivatives ---------------------------------------------------------

def dir_derivative(f, p, direction):
    """Exact directional derivative ``d_p f(direction)`` by dual numbers.

    ``f`` maps a jet of points in l* to a jet; returns ``(value, derivative)``.
    """
    out = f(Jet.line(p, direction, order=1))
    return out.c[0], out.coeff(1)


def fd_derivative(f, p, direction, h=1e-3):
    """Central finite difference with one Richardson step (h and h/2).

    ``f`` takes a plain point and returns an array.
    """
    p = np.asarray(p, dtype=float)
    direction = np.asarray(direction, dtype=float)

    def central(step):
        return (np.asarray(f(p + step * direction)) - np.asarray(f(p - step * direction))) / (2 * step)

    coarse = central(h)
    fine = central(h / 2)
    return (4 * fine - coarse) / 3


def ray_jet(f, p0, K):
    """Taylor coefficients of ``t -> f(t*p0)`` to order K, as a Jet."""
    p0 = np.asarray(p0, dtype=float)
    return f(Jet.line(np.zeros_like(p0), p0, order=K))


def eval_poly(jet, t):
    """Evaluate the truncated series at a scalar ``t`` (Horner)."""
    out = np.zeros(jet.shape)
    for k in range(jet.order, -1, -1):
        out = out * t + jet.c[k]
    return out


def opnorm(M):
    """Operator 2-norm (largest singular value)."""
    M = np.asarray(M, dtype=float)
    if M.size == 0:
        return 0.0
    if M.ndim == 1:
        return float(np.linalg.norm(M))
    return float(np.linalg.norm(M, 2))
