"""Vertex algebras, the dual algebroid N(U), its trivialization, and duality over l.

Elements of l + g* inside the double are 2n-vectors with zero m-block.  A
point of the vertex algebra g*_p is ``z + xi`` with ``i* xi = ad*_z p``;
its g*_0 image lives in l + l^perp.  Sections of N(U) and of the trivial
algebroid are callables ``p -> vector`` that accept Jets, so that every
derivative in the bracket formulas comes from dual-number evaluation.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import kernel, lmatrix
from .algebra import (
    DecomposedBasis,
    LagrangianSplitting,
    LieAlgebraData,
    QuasiBialgebraData,
    extract_from_splitting,
    opposite,
    twist,
)
from .errors import MembershipError, StructureError
from .gauge import Poly, coboundary_cocycle, gauge_apply, linear_sigma
from .kernel import Jet
from .tolerances import COND_MAX, RESIDUAL, STRUCTURE, tol


# -- vertex algebras g*_p ---------------------------------------------------

@dataclass(frozen=True)
class VertexElement:
    """z + xi in i(l) + g*, attached to the point p."""

    p: np.ndarray
    z: np.ndarray
    xi: np.ndarray

    def vector(self, G):
        b = G.basis
        out = np.zeros(2 * b.n)
        out[b.l] = self.z
        out[b.gstar] = self.xi
        return out

    @classmethod
    def from_vector(cls, G, p, x):
        b = G.basis
        return cls(np.asarray(p, float), np.asarray(x[b.l], float), np.asarray(x[b.gstar], float))

    @classmethod
    def from_coordinates(cls, G, p, z, xi0):
        """X = z + ad_{sp} z + xi0 with xi0 in l^perp; always a member of g*_p."""
        b = G.basis
        p = np.asarray(p, float)
        zd = np.zeros(2 * b.n)
        zd[b.l] = z
        x = zd + lmatrix.ad_sp(G, p) @ zd
        x[b.lperp] += xi0
        x[b.m] = 0.0
        return cls.from_vector(G, p, x)

    def membership_residual(self, G):
        b = G.basis
        return float(np.max(np.abs(self.xi[: b.dim_l] - lmatrix._coadjoint_l(G, self.z, self.p)),
                            initial=0.0))


def _check_member(G, X, what):
    t = tol(RESIDUAL) * max(1.0, float(np.max(np.abs(X.vector(G)))))
    r = X.membership_residual(G)
    if r > t:
        raise MembershipError(f"{what} is not in g*_p: |i*xi - ad*_z p| = {r:.3g} > {t:.3g}")


def _g_embed(G, z):
    return np.concatenate([z, np.zeros(G.basis.dim_m)])


def _varpi_pair(G, xi, eta):
    """<xi, varpi_. eta> as an element of g*."""
    return np.einsum("j,yjk,k->y", xi, G.w, eta)


def vertex_bracket(G, lfun, p, X, Y, L=None, check=True):
    """[X, Y]*_p evaluated term by term from the displayed formula."""
    p = np.asarray(p, float)
    if check:
        _check_member(G, X, "left argument")
        _check_member(G, Y, "right argument")
    if L is None:
        L = lfun(p)
    gl = G.g
    z, zp = _g_embed(G, X.z), _g_embed(G, Y.z)
    xi, xip = X.xi, Y.xi
    adz, adzp = gl.ad(z), gl.ad(zp)
    Lxi, Lxip = L @ xi, L @ xip
    adLxi, adLxip = gl.ad(Lxi), gl.ad(Lxip)
    w_pair = _varpi_pair(G, xi, xip)
    # <xi, varpi_{l_p .} xi'> as an element of g: eta -> <xi, varpi_{l eta} xi'>
    w_l = L.T @ w_pair
    phi_term = np.einsum("i,j,ijk->k", xi, xip, G.phi)
    g_part = (gl.bracket(z, zp) + G.varpi(z) @ xip + adz @ Lxip + L @ (adz.T @ xip)
              - G.varpi(zp) @ xi - adzp @ Lxi - L @ (adzp.T @ xi)
              + gl.bracket(Lxi, Lxip) + L @ (adLxi.T @ xip) - L @ (adLxip.T @ xi)
              + G.varpi(Lxi) @ xip - G.varpi(Lxip) @ xi
              - w_l + phi_term)
    s_part = (-adz.T @ xip + adzp.T @ xi - w_pair - adLxi.T @ xip + adLxip.T @ xi)
    b = G.basis
    off = float(np.max(np.abs(g_part[b.m]), initial=0.0))
    out = VertexElement(p, g_part[b.l].copy(), s_part)
    if check:
        t = tol(RESIDUAL) * max(1.0, float(np.max(np.abs(g_part))))
        if off > t:
            raise MembershipError(f"bracket has an m-component of size {off:.3g}")
        _check_member(G, out, "bracket")
    return out


def vertex_bracket_closed(G, L, p, X, Y):
    """tau_{-L}[tau_L X, tau_L Y]_d, the compact form of the vertex bracket."""
    T = lmatrix.tau(L)
    Tinv = lmatrix.tau(-L)
    v = Tinv @ G.double.bracket(T @ X.vector(G), T @ Y.vector(G))
    return VertexElement.from_vector(G, p, v)


def vertex_iso(G, p, X, L=None, cond_max=COND_MAX):
    """phi_p(X) = Ad_{exp(-sp)} tau_{l_p} X, an element of g*_0 = l + l^perp."""
    p = np.asarray(p, float)
    _check_member(G, X, "argument")
    if L is None:
        L = lmatrix.lcan(G, p, cond_max)
    E = kernel.expm(-lmatrix.ad_sp(G, p))
    y = E @ lmatrix.tau(L) @ X.vector(G)
    b = G.basis
    stray = max(float(np.max(np.abs(y[b.m]), initial=0.0)), float(np.max(np.abs(y[b.mperp]), initial=0.0)))
    if stray > tol(RESIDUAL) * max(1.0, float(np.max(np.abs(y)))):
        raise MembershipError(f"phi_p(X) leaves l + l^perp by {stray:.3g}")
    return VertexElement.from_vector(G, np.zeros(b.dim_l), y)


def vertex_iso_inv(G, p, X0):
    """(p_l phi_1(ad_{sp}) + p_{g*} exp(ad_{sp})) X0 for X0 in g*_0."""
    b = G.basis
    p = np.asarray(p, float)
    X = lmatrix.ad_sp(G, p)
    x0 = X0.vector(G)
    y = np.zeros(2 * b.n)
    y[b.l] = (kernel.phi_func(X, 1) @ x0)[b.l]
    y[b.gstar] = (kernel.expm(X) @ x0)[b.gstar]
    return VertexElement.from_vector(G, p, y)


# -- the flat connection ----------------------------------------------------

def _phi_blocks(G, p):
    X = lmatrix.ad_sp(G, p)
    return X, kernel.phi_func(X, 1), kernel.phi_func(X, 2)


def u_map(G, p):
    """u_p: l* -> l as a dl x dl matrix (accepts jets)."""
    b = G.basis
    _, _, F2 = _phi_blocks(G, p)
    return F2[b.l, b.mperp]


def stilde_map(G, p):
    """s~_p: l* -> g* as an n x dl matrix (accepts jets)."""
    b = G.basis
    _, F1, _ = _phi_blocks(G, p)
    return F1[b.gstar, b.mperp]


def h_map(G, p):
    b = G.basis
    _, F1, _ = _phi_blocks(G, p)
    return F1[b.g, b.mperp]


def nabla(G, p, alpha):
    """nabla_p(alpha) = (u_p alpha, s~_p alpha) in l + g*."""
    alpha = np.asarray(alpha, float)
    return u_map(G, p) @ alpha, stilde_map(G, p) @ alpha


def nabla_forms_residual(G, p, L=None):
    """Agreement of the two descriptions of nabla and the lemma u = h - l s~.

    Returns ``(form, lemma)``: the first compares (u, s alpha + ad_{sp} u alpha
    + v alpha) with (u, s~ alpha); the second compares u alpha, embedded in g,
    with h alpha - l_p s~ alpha.
    """
    b = G.basis
    p = np.asarray(p, float)
    if L is None:
        L = lmatrix.lcan(G, p)
    X, F1, F2 = _phi_blocks(G, p)
    n, dl = b.n, b.dim_l
    S = np.zeros((2 * n, dl))
    S[b.mperp] = np.eye(dl)
    U = np.zeros((2 * n, dl))
    U[b.l] = F2[b.l, b.mperp]
    V = np.zeros((2 * n, dl))
    V[b.lperp] = F1[b.lperp, b.mperp]
    second = (S + X @ U + V)[b.gstar]
    form = float(np.max(np.abs(second - F1[b.gstar, b.mperp]), initial=0.0))
    lemma_vec = F1[b.g, b.mperp] - L @ F1[b.gstar, b.mperp] - U[b.g]
    lemma = float(np.max(np.abs(lemma_vec), initial=0.0))
    return form, lemma


def flatness_residual(G, p, lfun=None, sign=1.0):
    """Left-hand sides of the two flatness equalities, maximized over basis pairs.

    ``sign`` multiplies the <s~ alpha, d_p l(.) s~ beta> term.
    """
    b = G.basis
    p = np.asarray(p, float)
    dl, n = b.dim_l, b.n
    lfun = lfun or lmatrix.evaluator(G)
    L, D = lmatrix.derivatives(lfun, p)
    U, dU = lmatrix.derivatives(lambda q: u_map(G, q), p)
    St, dSt = lmatrix.derivatives(lambda q: stilde_map(G, q), p)
    Dd = G.double
    r1 = r2 = 0.0
    emb_l = np.zeros((2 * n, dl))
    emb_l[b.l] = np.eye(dl)
    for a in range(dl):
        for c in range(dl):
            # d_p u(e_a) e_c - d_p u(e_c) e_a - [u e_a, u e_c] + <s~ e_a, d_p l(.) s~ e_c>
            ua, uc = U[:, a], U[:, c]
            sa, sc = St[:, a], St[:, c]
            br_l = G.g.bracket(_g_embed(G, ua), _g_embed(G, uc))
            pair = np.einsum("i,kij,j->k", sa, D, sc)
            f1 = dU[a][:, c] - dU[c][:, a] - br_l[b.l] + sign * pair
            r1 = max(r1, float(np.max(np.abs(f1), initial=0.0)), float(np.max(np.abs(br_l[b.m]), initial=0.0)))
            ua_d, uc_d = emb_l @ ua, emb_l @ uc
            sa_d = np.concatenate([np.zeros(n), sa])
            sc_d = np.concatenate([np.zeros(n), sc])
            Lsa = np.concatenate([L @ sa, np.zeros(n)])
            Lsc = np.concatenate([L @ sc, np.zeros(n)])
            gs = b.gstar
            f2 = (dSt[a][:, c] - dSt[c][:, a]
                  - Dd.bracket(ua_d, sc_d)[gs] - Dd.bracket(sa_d, uc_d)[gs]
                  - Dd.bracket(sa_d, sc_d)[gs]
                  - Dd.bracket(Lsa, sc_d)[gs] - Dd.bracket(sa_d, Lsc)[gs])
            r2 = max(r2, float(np.max(np.abs(f2), initial=0.0)))
    return r1, r2


# -- trivialization ---------------------------------------------------------

def _embed_g0(G, x0):
    """(z, xi0) in l + l^perp, an n-vector or jet, into the double."""
    b = G.basis
    n, dl = b.n, b.dim_l
    M = np.zeros((2 * n, n))
    M[b.l, :dl] = np.eye(dl)
    M[b.lperp, dl:] = np.eye(b.dim_m)
    return M @ x0 if not isinstance(x0, Jet) else Jet(np.einsum("ij,kj->ki", M, x0.c))


def trivialize(G, p, alpha, x0):
    """T_p(alpha, X0) without l: returns the (dl + n)-vector (z, xi) of N(U).

    ``x0`` holds the l + l^perp coordinates of X0 in g*_0.  Inputs may be jets.
    """
    b = G.basis
    X = lmatrix.ad_sp(G, p)
    F1 = kernel.phi_func(X, 1)
    F2 = kernel.phi_func(X, 2)
    E = kernel.expm(X)
    sa = b.s(alpha)
    xd = _embed_g0(G, x0)
    z = (F2 @ sa)[b.l] - (F1 @ xd)[b.l]
    xi = (F1 @ sa)[b.gstar] - (E @ xd)[b.gstar]
    return kernel.concat([kernel.as_jet(z, _order(X)), kernel.as_jet(xi, _order(X))], 0) \
        if isinstance(X, Jet) else np.concatenate([z, xi])


def _order(x):
    return x.order if isinstance(x, Jet) else 0


def trivialize_with_l(G, p, alpha, x0, L=None):
    """The same map written with l_p: (u alpha - p_l tau_{-l} e^X X0, s~ alpha - p_{g*} e^X X0)."""
    b = G.basis
    p = np.asarray(p, float)
    if L is None:
        L = lmatrix.lcan(G, p)
    X = lmatrix.ad_sp(G, p)
    F1, F2, E = kernel.phi_func(X, 1), kernel.phi_func(X, 2), kernel.expm(X)
    sa = b.s(np.asarray(alpha, float))
    y = E @ _embed_g0(G, np.asarray(x0, float))
    z = (F2 @ sa)[b.l] - (lmatrix.tau(-L) @ y)[b.l]
    xi = (F1 @ sa)[b.gstar] - y[b.gstar]
    return np.concatenate([z, xi])


def trivialization_residuals(G, p, rng, samples=4):
    """(forms, psi): the two forms of T agree; T(0, X0) = -phi_p^{-1} X0."""
    b = G.basis
    p = np.asarray(p, float)
    L = lmatrix.lcan(G, p)
    forms = psi = 0.0
    for _ in range(samples):
        alpha = rng.standard_normal(b.dim_l)
        x0 = rng.standard_normal(b.n)
        t1 = trivialize(G, p, alpha, x0)
        t2 = trivialize_with_l(G, p, alpha, x0, L)
        forms = max(forms, float(np.max(np.abs(t1 - t2))))
        X0 = VertexElement.from_vector(G, np.zeros(b.dim_l), _embed_g0(G, x0))
        inv = vertex_iso_inv(G, p, X0)
        t0 = trivialize(G, p, np.zeros(b.dim_l), x0)
        psi = max(psi, float(np.max(np.abs(t0 + np.concatenate([inv.z, inv.xi])))))
    return forms, psi


# -- algebroid brackets -----------------------------------------------------

@dataclass
class SectionPoly:
    """A section (alpha, X0) of the trivial algebroid l* x g*_0 over U."""

    alpha: Poly
    x0: Poly

    def __post_init__(self):
        if max(self.alpha.degree, self.x0.degree) > 4:
            raise ValueError("section degree must be <= 4")

    @classmethod
    def random(cls, G, degree, rng, scale=0.5):
        b = G.basis
        from .gauge import monomials
        terms_a, terms_x = {}, {}
        for k in range(degree + 1):
            for e in monomials(b.dim_l, k):
                terms_a[e] = scale * rng.standard_normal(b.dim_l)
                terms_x[e] = scale * rng.standard_normal(b.n)
        return cls(Poly(b.dim_l, (b.dim_l,), terms_a), Poly(b.dim_l, (b.n,), terms_x))


def anchor_nu(G, p, v):
    """a(z, xi) = i* xi - ad*_z p for a (dl + n)-vector v at p."""
    b = G.basis
    dl = b.dim_l
    return v[dl:dl + dl] - lmatrix._coadjoint_l(G, v[:dl], p)


def nu_bracket(G, lfun, f1, f2, p, sign=1.0):
    """Bracket of two N(U) sections ``p -> (z, xi)`` at p.

    ``sign`` multiplies the <xi, d_p l(.) xi'> term of the l-component.
    """
    b = G.basis
    dl = b.dim_l
    p = np.asarray(p, float)
    L, D = lmatrix.derivatives(lfun, p)
    v1, v2 = np.asarray(f1(p)), np.asarray(f2(p))
    a1, a2 = anchor_nu(G, p, v1), anchor_nu(G, p, v2)
    _, d2 = kernel.dir_derivative(f2, p, a1)
    _, d1 = kernel.dir_derivative(f1, p, a2)
    z1, x1 = _g_embed(G, v1[:dl]), v1[dl:]
    z2, x2 = _g_embed(G, v2[:dl]), v2[dl:]
    gl = G.g
    first = (d2[:dl] - d1[:dl] - gl.bracket(z1, z2)[b.l]
             + sign * np.einsum("i,kij,j->k", x1, D, x2))
    adLx1, adLx2 = gl.ad(L @ x1), gl.ad(L @ x2)
    second = (d2[dl:] - d1[dl:] + gl.ad(z1).T @ x2 - gl.ad(z2).T @ x1
              + _varpi_pair(G, x1, x2) + adLx1.T @ x2 - adLx2.T @ x1)
    return np.concatenate([first, second])


def trivial_bracket(G, s1, s2, p):
    """Bracket of the trivial algebroid U x (l* + g*_0) at p, as (alpha, x0)."""
    b = G.basis
    p = np.asarray(p, float)
    a1, a2 = s1.alpha(p), s2.alpha(p)
    J = lambda P: P.jacobian()(p)
    alpha = J(s2.alpha) @ a1 - J(s1.alpha) @ a2
    y1, y2 = _embed_g0(G, s1.x0(p)), _embed_g0(G, s2.x0(p))
    br = G.double.bracket(y1, y2)
    x0 = J(s2.x0) @ a1 - J(s1.x0) @ a2 + np.concatenate([br[b.l], br[b.lperp]])
    return alpha, x0


def _section_image(G, s, T):
    return lambda q: T(G, q, s.alpha(q), s.x0(q))


def _frozen_trivialization(G, p, alpha, x0):
    """The p = 0 trivialization used at every p (negative control)."""
    b = G.basis
    zero = np.zeros(b.dim_l)
    if isinstance(alpha, Jet):
        out = []
        for k in range(alpha.order + 1):
            out.append(trivialize(G, zero, alpha.c[k], x0.c[k]))
        return Jet(np.stack(out))
    return trivialize(G, zero, alpha, x0)


def algebroid_morphism_residual(G, pairs, points, lfun=None, sign=1.0, T=None):
    """max over section pairs and points of |T[s, s'] - [Ts, Ts']| and |a T s - alpha|."""
    T = T or trivialize
    lfun = lfun or lmatrix.evaluator(G)
    worst = 0.0
    for s1, s2 in pairs:
        f1, f2 = _section_image(G, s1, T), _section_image(G, s2, T)
        for p in points:
            p = np.asarray(p, float)
            alpha, x0 = trivial_bracket(G, s1, s2, p)
            lhs = T(G, p, alpha, x0)
            rhs = nu_bracket(G, lfun, f1, f2, p, sign)
            worst = max(worst, float(np.max(np.abs(lhs - rhs))))
            for s, f in ((s1, f1), (s2, f2)):
                an = anchor_nu(G, p, np.asarray(f(p)))
                worst = max(worst, float(np.max(np.abs(an - s.alpha(p)), initial=0.0)))
    return worst


def frozen_trivialization():
    return _frozen_trivialization


# -- duality over l ---------------------------------------------------------

@dataclass(frozen=True, eq=False)
class DualData:
    """G* on g* = l + l^perp with the identification bookkeeping.

    ``P`` has columns (l, l^perp, m^perp, m) of d: the adapted basis of the
    double of G*.  ``K`` is the Lie algebra isomorphism d -> d* and ``Kinv``
    its inverse; ``K_residual`` is its homomorphism defect.
    """

    dual: QuasiBialgebraData
    P: np.ndarray
    K: np.ndarray
    Kinv: np.ndarray
    K_residual: float

    @property
    def embedding(self):
        """j_a: g* -> d, the first n columns of ``Kinv``."""
        return self.Kinv[:, : self.dual.n]


def _dual_structure(G):
    b = G.basis
    n, dl = b.n, b.dim_l
    D = G.double
    I = np.eye(2 * n)
    A = np.hstack([I[:, b.l], I[:, b.lperp]])
    B = np.hstack([I[:, b.mperp], I[:, b.m]])
    labels = tuple(b.labels[:dl]) + tuple(lab + "*" for lab in b.labels[dl:])
    basis = DecomposedBasis(dl, b.dim_m, labels)
    raw = extract_from_splitting(D, LagrangianSplitting(A, B), basis, validate=False)
    name = G.name + "*" if G.name else ""
    Gs = raw.with_(w=-raw.w, bidynamical=True, name=name)
    Gs.validate()
    P = np.hstack([A, B])
    signs = np.diag(np.r_[np.ones(n), -np.ones(n)])
    K = signs @ np.linalg.inv(P)
    Kinv = P @ signs
    lhs = np.einsum("ijk,Kk->ijK", D.C, K)
    rhs = np.einsum("ia,jb,abk->ijk", K.T, K.T, Gs.double.C)
    return Gs, P, K, Kinv, float(np.max(np.abs(lhs - rhs)))


def dual_over_l(G):
    """The dual over l: G* = (G_{(d, l + l^perp, m^perp + m)})^-.

    Raises StructureError if K fails to be a Lie algebra isomorphism.
    """
    Gs, P, K, Kinv, res = _dual_structure(G)
    t = tol(STRUCTURE) * G.scale
    if res > t:
        raise StructureError("K_isomorphism", res, t)
    return DualData(Gs, P, K, Kinv, res)


def involution_residual(G):
    """max entry of (G*)* - G^op."""
    Gs = dual_over_l(G).dual
    Gss = dual_over_l(Gs).dual
    return Gss.max_difference(opposite(G))


# -- the double as a bidynamical quasi-bialgebra -------------------------------

def rmx(G):
    """rmx = (p_{g*} - p_g)/2 as a bivector on d."""
    b = G.basis
    Om = G.double.omega
    return 0.5 * (b.projector("gstar") - b.projector("g")) @ np.linalg.inv(Om)


def double_embedding(G):
    """j: g -> d."""
    n = G.n
    return np.vstack([np.eye(n), np.zeros((n, n))])


def double_bidyn(G):
    """G^(2) = (d, [,]_d, d rmx, j phi) with reductive split d = l + (m + g*)."""
    b = G.basis
    n = b.n
    N = 2 * n
    D = G.double
    r = rmx(G)
    W = np.zeros((N, N, N))
    for X in range(N):
        adX = D.C[X].T
        W[X] = adX @ r + r @ adX.T
    j = double_embedding(G)
    phi2 = np.einsum("ai,bj,ck,ijk->abc", j, j, j, G.phi)
    labels = tuple(b.labels) + tuple(lab + "^" for lab in b.labels)
    basis = DecomposedBasis(b.dim_l, N - b.dim_l, labels)
    name = G.name + "^(2)" if G.name else ""
    G2 = QuasiBialgebraData(LieAlgebraData(basis, D.C), W, phi2, True, name)
    G2.validate()
    return G2


def double_twist_residual(G, G2=None):
    """max |cobracket| of twist(G^(2), -rmx); zero when the twist is cocommutative."""
    G2 = G2 or double_bidyn(G)
    return float(np.max(np.abs(twist(G2, -rmx(G)).w)))


def functoriality_residual(G, p, G2=None):
    G2 = G2 or double_bidyn(G)
    j = double_embedding(G)
    return float(np.max(np.abs(j @ lmatrix.lcan(G, p) @ j.T - lmatrix.lcan(G2, p))))


# -- the link identity ------------------------------------------------------

@dataclass
class LinkResult:
    full: float
    constant_literal: float
    constant_corrected: float


def _constants(G, dual):
    b = G.basis
    n = b.n
    r = rmx(G)
    Oms = dual.dual.double.omega
    rs = 0.5 * (np.diag(np.r_[-np.ones(n), np.ones(n)])) @ np.linalg.inv(Oms)
    # rmx* transported from d* to d by K^{-1}
    krk = dual.Kinv @ rs @ dual.Kinv.T
    target = (b.projector("l") - b.projector("mperp")) @ np.linalg.inv(G.double.omega)
    return r, krk, target


def link_residual(G, p, dual=None, G2=None, cond_max=COND_MAX):
    """Both sides of the duality link at p, and the constant identities.

    The full identity compares j_a lcan(G*)_p j_a^T with the gauge transform
    of j lcan(G) j^T by Sigma_p = -sp on G^(2) (coboundary cocycle of rmx),
    shifted by p_l - p_{m^perp}.
    """
    b = G.basis
    p = np.asarray(p, float)
    dual = dual or dual_over_l(G)
    G2 = G2 or double_bidyn(G)
    r, krk, target = _constants(G, dual)
    Ja = dual.embedding
    lhs = Ja @ lmatrix.lcan(dual.dual, p, cond_max) @ Ja.T
    j = double_embedding(G)
    sm = np.zeros((2 * b.n, b.dim_l))
    sm[b.mperp] = np.eye(b.dim_l)
    Sigma = linear_sigma(G2, -sm)
    rhs = gauge_apply(G2, lambda q: j @ lmatrix.lcan(G, q, cond_max) @ j.T, Sigma, p,
                      cocycle=lambda x: coboundary_cocycle(G2, r, x)) - target
    return LinkResult(
        full=kernel.opnorm(lhs - rhs),
        constant_literal=float(np.max(np.abs(krk + r - target))),
        constant_corrected=float(np.max(np.abs(krk - r - target))),
    )
