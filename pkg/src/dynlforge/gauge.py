"""Gauge action on dynamical l-matrices and the canonical normalization.

Gauge maps are taken in exponential coordinates, sigma_p = exp(Sigma_p),
with Sigma a polynomial map l* -> g.  Formal (multivariate) jets of
l-matrices are held as :class:`Poly` objects; their homogeneous parts are
recovered exactly from ray jets by interpolation over sample directions.
"""

from __future__ import annotations

from functools import lru_cache
from itertools import combinations_with_replacement

import numpy as np

from . import kernel
from .kernel import Jet
from .tolerances import COND_MAX

# normalizing maps below this size are roundoff and are skipped
NEGLIGIBLE = 1e-14


@lru_cache(maxsize=None)
def monomials(dl, degree):
    """Exponent tuples of total degree ``degree`` in ``dl`` variables."""
    out = []
    for combo in combinations_with_replacement(range(dl), degree):
        e = [0] * dl
        for i in combo:
            e[i] += 1
        out.append(tuple(e))
    return tuple(out)


def _monomial_values(p, exps):
    """Values of the monomials at p (array) or a jet of them (Jet input)."""
    if isinstance(p, Jet):
        order = p.order
        dl = p.shape[0]
        top = max((sum(e) for e in exps), default=0)
        # powers[i][k] = p_i ** k as scalar jets
        powers = []
        for i in range(dl):
            row = [Jet.const(1.0, order)]
            for _ in range(top):
                row.append(row[-1] * p[i])
            powers.append(row)
        cols = []
        for e in exps:
            v = Jet.const(1.0, order)
            for i, k in enumerate(e):
                if k:
                    v = v * powers[i][k]
            cols.append(v.c)
        return Jet(np.stack(cols, axis=-1)) if cols else Jet(np.zeros((order + 1, 0)))
    p = np.asarray(p, dtype=float)
    return np.array([np.prod(p ** np.array(e)) if e else 1.0 for e in exps])


class Poly:
    """Polynomial map l* -> arrays of a fixed shape, stored per monomial."""

    def __init__(self, dl, shape, terms=None):
        self.dl = dl
        self.shape = tuple(shape)
        self.terms = dict(terms or {})

    @classmethod
    def zero(cls, dl, shape):
        return cls(dl, shape)

    @property
    def degree(self):
        return max((sum(e) for e in self.terms), default=0)

    def homogeneous(self, k):
        return Poly(self.dl, self.shape, {e: c for e, c in self.terms.items() if sum(e) == k})

    def truncate(self, k):
        return Poly(self.dl, self.shape, {e: c for e, c in self.terms.items() if sum(e) <= k})

    def __add__(self, other):
        terms = dict(self.terms)
        for e, c in other.terms.items():
            terms[e] = terms.get(e, 0) + c
        return Poly(self.dl, self.shape, terms)

    def __sub__(self, other):
        return self + other * -1.0

    def __mul__(self, scalar):
        return Poly(self.dl, self.shape, {e: c * scalar for e, c in self.terms.items()})

    def __call__(self, p):
        exps = list(self.terms)
        if not exps:
            if isinstance(p, Jet):
                return Jet(np.zeros((p.order + 1,) + self.shape))
            return np.zeros(self.shape)
        coef = np.stack([self.terms[e] for e in exps])
        vals = _monomial_values(p, exps)
        if isinstance(vals, Jet):
            return Jet(np.tensordot(vals.c, coef, axes=(1, 0)))
        return np.tensordot(vals, coef, axes=(0, 0))

    def jacobian(self):
        """Derivative as a Poly with an extra trailing axis over l*."""
        terms = {}
        for e, c in self.terms.items():
            for a in range(self.dl):
                if e[a] == 0:
                    continue
                f = list(e)
                f[a] -= 1
                f = tuple(f)
                block = terms.setdefault(f, np.zeros(self.shape + (self.dl,)))
                block[..., a] += e[a] * c
        return Poly(self.dl, self.shape + (self.dl,), terms)

    def max_abs(self):
        return max((float(np.max(np.abs(c))) for c in self.terms.values()), default=0.0)

    def distance(self, other, degree=None):
        diff = self - other
        if degree is not None:
            diff = diff.truncate(degree)
        return diff.max_abs()


def sample_directions(dl, count, seed=0):
    rng = np.random.default_rng(seed)
    u = rng.standard_normal((count, dl))
    return u / np.linalg.norm(u, axis=1, keepdims=True)


def fit_homogeneous(values, directions, k):
    """Homogeneous Poly of degree k from its values at sample directions."""
    dl = directions.shape[1]
    exps = monomials(dl, k)
    V = np.stack([_monomial_values(u, exps) for u in directions])
    flat = values.reshape(values.shape[0], -1)
    coef, *_ = np.linalg.lstsq(V, flat, rcond=None)
    shape = values.shape[1:]
    return Poly(dl, shape, {e: coef[i].reshape(shape) for i, e in enumerate(exps)})


def poly_from_evaluator(f, dl, K, seed=0):
    """Multivariate Taylor polynomial of ``f`` at 0 through degree K.

    ``f`` must accept a jet of points; each ray jet supplies the homogeneous
    parts evaluated at its direction.
    """
    if dl == 0:
        val = np.asarray(f(np.zeros(0)))
        return Poly(0, val.shape, {(): val})
    count = 2 * len(monomials(dl, K)) + 4
    dirs = sample_directions(dl, count, seed)
    jets = [kernel.ray_jet(f, u, K) for u in dirs]
    coeffs = np.stack([j.truncate(K).c for j in jets], axis=1)  # (K+1, count, *shape)
    out = Poly(dl, coeffs.shape[2:])
    for k in range(K + 1):
        out = out + fit_homogeneous(coeffs[k], dirs, k)
    return out


# -- equivariant gauge maps ------------------------------------------------

def _coadjoint_l(G, z, p):
    b = G.basis
    adz = G.g.ad(np.concatenate([z, np.zeros(b.dim_m)]))
    return adz[b.l, b.l].T @ p


def _monomial_gradient(u, e):
    g = np.zeros(len(e))
    for i, k in enumerate(e):
        if k:
            f = np.array(e)
            f[i] -= 1
            g[i] = k * np.prod(u ** f)
    return g


def equivariant_basis(G, k, seed=0):
    """Basis of l-equivariant homogeneous maps Sigma: l* -> g of degree k.

    Equivariance: d_p Sigma(ad*_z p) + ad_z Sigma_p = 0 for z in l.  The
    condition is linear in the coefficients and is imposed at sample points.
    """
    b = G.basis
    dl, n = b.dim_l, b.n
    exps = monomials(dl, k)
    M = len(exps)
    unknowns = M * n
    dirs = sample_directions(dl, 3 * M + 3, seed) if dl else np.zeros((1, 0))
    rows = []
    for z_i in range(dl):
        z = np.zeros(dl)
        z[z_i] = 1.0
        adz = G.g.ad(np.concatenate([z, np.zeros(b.dim_m)]))
        for u in dirs:
            q = _coadjoint_l(G, z, u)
            mono = _monomial_values(u, exps)
            row = np.zeros((n, unknowns))
            for i, e in enumerate(exps):
                row[:, i * n:(i + 1) * n] = (_monomial_gradient(u, e) @ q) * np.eye(n) + mono[i] * adz
            rows.append(row)
    if not rows:
        null = np.eye(unknowns)
    else:
        A = np.vstack(rows)
        _, sv, Vt = np.linalg.svd(A)
        rank = int(np.sum(sv > 1e-9 * max(1.0, sv[0] if sv.size else 1.0)))
        null = Vt[rank:].T
    basis = []
    for j in range(null.shape[1]):
        v = null[:, j]
        basis.append(Poly(dl, (n,), {e: v[i * n:(i + 1) * n] for i, e in enumerate(exps)}))
    return basis


def random_equivariant(G, degrees, rng, scale=0.3):
    """Random l-equivariant polynomial Sigma with the given homogeneous degrees."""
    out = Poly(G.basis.dim_l, (G.basis.n,))
    for k in degrees:
        for B in equivariant_basis(G, k):
            out = out + B * (scale * rng.standard_normal())
    return out


def linear_sigma(G, matrix):
    """Sigma_p = matrix @ p as a Poly (e.g. Sigma_p = -sp on a double)."""
    dl = G.basis.dim_l
    terms = {}
    for a, e in enumerate(monomials(dl, 1)):
        terms[e] = np.asarray(matrix, float)[:, a].copy()
    return Poly(dl, (G.basis.n,), terms)


# -- the action --------------------------------------------------------

def _ad(G, x):
    if isinstance(x, Jet):
        return kernel.einsum("i,ijk->kj", x, G.c)
    return np.einsum("i,ijk->kj", x, G.c)


def _conjugation_generator(adx):
    """Matrix of D_x: T -> ad_x T + T ad_x^T on row-major vectorized n x n matrices."""
    if isinstance(adx, Jet):
        n = adx.shape[0]
        eye = np.eye(n)
        return Jet(np.stack([np.kron(a, eye) + np.kron(eye, a) for a in adx.c]))
    n = adx.shape[0]
    eye = np.eye(n)
    return np.kron(adx, eye) + np.kron(eye, adx)


def _phi1_conjugation(adx, B):
    """phi_1(D_x) B = int_0^1 exp(u ad_x) B exp(u ad_x)^T du."""
    n = B.shape[0]
    D = _conjugation_generator(adx)
    return (kernel.phi_func(D, 1) @ B.reshape(n * n)).reshape(n, n)


def group_cocycle(G, x):
    """pi_{exp x} = phi_1(D_x) varpi_x with D_x T = ad_x T + T ad_x^T."""
    n = G.n
    if isinstance(x, Jet):
        Wx = kernel.einsum("i,ijk->jk", x, G.w)
        if not np.any(Wx.c):
            return Jet(np.zeros((x.order + 1, n, n)))
        return _phi1_conjugation(_ad(G, x), Wx)
    Wx = np.einsum("i,ijk->jk", x, G.w)
    if not np.any(Wx):
        return np.zeros((n, n))
    return _phi1_conjugation(_ad(G, x), Wx)


def coboundary_cocycle(G, r, x):
    """pi_{exp x} = Ad r Ad^T - r for a coboundary cobracket varpi_x = ad_x r + r ad_x^T."""
    Ad = kernel.expm(_ad(G, x))
    return Ad @ r @ Ad.T - r


def gauge_apply(G, f, Sigma, p, cocycle=None):
    """l^sigma_p = Ad l_p Ad^T + theta^sigma_p + pi_{sigma_p} with sigma = exp(Sigma).

    The action is integrated from its infinitesimal form along t -> exp(t Sigma_p),
    which is pointwise in p, giving
    theta^sigma_p = phi_1(D) (d_p Sigma i* - (d_p Sigma i*)^T), D = ad_Sigma (.) + (.) ad_Sigma^T.
    ``cocycle(x)`` overrides the integration of varpi (used for coboundaries).
    """
    b = G.basis
    n, dl = b.n, b.dim_l
    S = Sigma(p)
    J = Sigma.jacobian()(p)
    adS = _ad(G, S)
    Ad = kernel.expm(adS)
    Pi = np.zeros((dl, n))
    Pi[:, :dl] = np.eye(dl)
    B = J @ Pi
    theta = _phi1_conjugation(adS, B - B.T)
    pi = cocycle(S) if cocycle is not None else group_cocycle(G, S)
    L = f(p)
    return Ad @ L @ Ad.T + theta + pi


def gauged(G, f, Sigma, cocycle=None):
    return lambda p: gauge_apply(G, f, Sigma, p, cocycle)


def normalizing_sigma(lk, k, dl, n):
    """Sigma of degree k+1 that removes [l]_k sp, as a Poly."""
    def value(p):
        v = lk(p)[:, :dl] @ p
        out = v.copy()
        out[dl:] *= -1.0 / (k + 1)
        out[:dl] *= -1.0 / (k + 2)
        return out

    if dl == 0:
        return Poly(0, (n,))
    exps = monomials(dl, k + 1)
    dirs = sample_directions(dl, 2 * len(exps) + 4, seed=k)
    vals = np.stack([value(u) for u in dirs])
    return fit_homogeneous(vals, dirs, k + 1)


def gauge_normalize_jets(G, lpoly, K, seed=0):
    """Gauge a formal l-matrix (Poly through degree K) so that [l]_k sp = 0 for k <= K.

    Returns ``(sigmas, normalized)``, one Sigma per degree (composed left to right).
    """
    b = G.basis
    dl, n = b.dim_l, b.n
    current = lpoly.truncate(K)
    sigmas = []
    for k in range(K + 1):
        lk = current.homogeneous(k)
        Sigma = normalizing_sigma(lk, k, dl, n)
        sigmas.append(Sigma)
        if Sigma.max_abs() <= NEGLIGIBLE:
            continue
        prev = current
        current = poly_from_evaluator(lambda p, prev=prev, Sigma=Sigma: gauge_apply(G, prev, Sigma, p),
                                      dl, K, seed=seed + k)
    return sigmas, current


def sp_defect(lpoly, K, dl):
    """max over degrees k <= K of |[l]_k sp| at sample directions."""
    dirs = sample_directions(dl, 8, seed=99) if dl else np.zeros((0, 0))
    worst = 0.0
    for k in range(K + 1):
        lk = lpoly.homogeneous(k)
        for u in dirs:
            worst = max(worst, float(np.max(np.abs(lk(u)[:, :dl] @ u), initial=0.0)))
    return worst
