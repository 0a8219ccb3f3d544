"""The canonical dynamical l-matrix: closed form, recursion and residuals.

An l-matrix value ``L`` is an n x n skew matrix representing l_p: g* -> g in
dual bases.  Columns follow the g* block order m^perp (the dual of l, where
sp lives) then l^perp.  Evaluators accept a plain point of l* or a Jet of
points and return the matching type, so the same code yields values, dual
number derivatives and ray jets.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import kernel
from .kernel import Jet, as_jet, solve_block
from .tolerances import COND_MAX


@dataclass
class KRSOperators:
    """K_p: m^perp -> l, R_p: d -> m, S_p: d -> l, plus the phi-blocks they came from."""

    K: np.ndarray
    R: np.ndarray
    S: np.ndarray
    X: np.ndarray  # ad_{sp}
    E: np.ndarray  # exp(-ad_{sp})
    F1: np.ndarray  # (exp(-ad_{sp}) - 1)/ad_{sp}
    F2: np.ndarray  # (exp(-ad_{sp}) - 1 + ad_{sp})/ad_{sp}^2


@dataclass
class LValue:
    p: np.ndarray
    L: np.ndarray

    def skew_residual(self):
        return float(np.max(np.abs(self.L + self.L.T), initial=0.0))

    def sp_residual(self):
        dl = self.p.shape[0]
        return float(np.linalg.norm(self.L[:, :dl] @ self.p))


def ad_sp(G, p):
    """ad_{sp} on the double, for a point or a jet of points."""
    return G.double.ad(G.basis.s(p))


def krs_operators(G, p, cond_max=COND_MAX):
    b = G.basis
    X = ad_sp(G, p)
    E = kernel.expm(-X)
    F1 = -kernel.phi_func(-X, 1)
    F2 = kernel.phi_func(-X, 2)
    l, m = b.l, b.m
    A_l = F1[l, l]
    S = solve_block(A_l, F1[l, :], cond_max)
    K = solve_block(A_l, F2[l, :], cond_max)[:, b.mperp]
    R = solve_block(E[m, m], E[m, :], cond_max)
    return KRSOperators(K, R, S, X, E, F1, F2)


def _assemble(G, ops, cond_max):
    b = G.basis
    n, dl = b.n, b.dim_l
    l, m, mp, lp = b.l, b.m, b.mperp, b.lperp
    R, S, K, X = ops.R, ops.S, ops.K, ops.X
    jet = isinstance(X, Jet)
    order = X.order if jet else 0
    R, S, K, X = (as_jet(a, order) for a in (R, S, K, X))
    eye_m = Jet.const(np.eye(b.dim_m), order)
    eye_l = Jet.const(np.eye(dl), order)
    Rl, Sm = R[:, l], S[:, m]
    Mm = eye_m - Rl @ Sm
    Ml = eye_l - Sm @ Rl
    # xi in l^perp
    m_xi = solve_block(Mm, Rl @ S[:, lp] - R[:, lp], cond_max)
    l_xi = solve_block(Ml, Sm @ R[:, lp] - S[:, lp], cond_max)
    # s alpha in m^perp; Y = ad phi_2(ad) = phi_1(ad) - 1
    Y = kernel.phi_func(X, 1) - Jet.const(np.eye(2 * n), order)
    RY = R @ Y[:, mp]
    V = S[:, mp] + K
    m_sa = solve_block(Mm, Rl @ V + RY, cond_max)
    l_sa = -solve_block(Ml, V + Sm @ RY, cond_max)
    top = kernel.concat([l_sa, l_xi], 1)
    bottom = kernel.concat([m_sa, m_xi], 1)
    L = kernel.concat([top, bottom], 0)
    return L if jet else L.value


def lcan(G, p, cond_max=COND_MAX):
    """Closed-form canonical l-matrix at ``p`` (point or jet)."""
    ops = krs_operators(G, p, cond_max)
    return _assemble(G, ops, cond_max)


def lcan_eval(G, p, cond_max=COND_MAX):
    p = np.asarray(p, dtype=float)
    return LValue(p, lcan(G, p, cond_max))


def evaluator(G, cond_max=COND_MAX):
    """``p -> lcan`` as a one-argument callable."""
    return lambda p: lcan(G, p, cond_max)


# -- derivatives -----------------------------------------------------------

def derivatives(f, p):
    """Value of ``f`` at p and its partial derivatives along the basis of l*.

    Returns ``(L, D)`` with ``D[a] = d_p f(e_a)``.
    """
    p = np.asarray(p, dtype=float)
    dl = p.shape[0]
    if dl == 0:
        L = np.asarray(as_jet(f(Jet.line(p, p, order=1))).value)
        return L, np.zeros((0,) + L.shape)
    D = []
    L = None
    for a in range(dl):
        e = np.zeros(dl)
        e[a] = 1.0
        val, der = kernel.dir_derivative(f, p, e)
        L = val
        D.append(der)
    return L, np.stack(D)


def _coadjoint_l(G, z, p):
    """ad*_z p in l* for z in l."""
    b = G.basis
    adz = G.g.ad(np.concatenate([z, np.zeros(b.dim_m)]))
    return adz[b.l, b.l].T @ p


# -- residual suites ---------------------------------------------------

def cdybe_tensor(G, L, D):
    """CDYB operator minus phi as a 3-index tensor over g* basis triples."""
    b = G.basis
    n, dl = b.n, b.dim_l
    Dx = np.zeros((n, n, n))
    Dx[:dl] = D
    U = np.vstack([L, np.zeros((n, n))])
    V = np.vstack([L, np.eye(n)])
    br = G.double.bracket_of_columns(U, V)[:, :, :n]
    # T[a, b, c] = (zeta_c, d_p l(i* xi_a) eta_b - [l xi_a, l eta_b + eta_b])
    T = Dx.transpose(0, 2, 1) - br
    cyc = T + T.transpose(2, 0, 1) + T.transpose(1, 2, 0)
    return cyc - G.phi


def cdybe_residual(G, f, p):
    L, D = derivatives(f, p)
    return float(np.max(np.abs(cdybe_tensor(G, L, D))))


def equivariance_operator(G, L, D, z, p):
    b = G.basis
    q = _coadjoint_l(G, z, p)
    zg = np.concatenate([z, np.zeros(b.dim_m)])
    adz = G.g.ad(zg)
    dL = np.einsum("a,aij->ij", q, D) if b.dim_l else np.zeros_like(L)
    return dL + G.varpi(zg) + adz @ L + L @ adz.T


def equivariance_residual(G, f, p, z):
    L, D = derivatives(f, p)
    return kernel.opnorm(equivariance_operator(G, L, D, np.asarray(z, float), np.asarray(p, float)))


def ode_defect(G, L, D, p):
    b = G.basis
    n, dl = b.n, b.dim_l
    X = ad_sp(G, p)
    U = np.vstack([L, np.eye(n)])
    AU = X @ U
    zt = AU[n:]
    Pl = np.zeros((n, n))
    Pl[:dl, :dl] = np.eye(dl)
    lhs = np.einsum("a,aij->ij", p, D) if dl else np.zeros_like(L)
    rhs = AU[:n] - L @ zt - Pl @ L - L @ Pl
    return lhs - rhs


def ode_residual(G, f, p):
    L, D = derivatives(f, p)
    defect = ode_defect(G, L, D, np.asarray(p, float))
    return float(np.max(np.linalg.norm(defect, axis=0), initial=0.0))


def tau(L):
    """tau_L: x + xi -> x + L xi + xi on the double."""
    n = L.shape[0]
    return np.block([[np.eye(n), L], [np.zeros((n, n)), np.eye(n)]])


def pmadtau_residuals(G, p, rng, samples=4, L=None, cond_max=COND_MAX):
    """The four identities of p_m/p_l applied to exp(-ad_{sp}) tau_{l_p}."""
    b = G.basis
    n, dl = b.n, b.dim_l
    p = np.asarray(p, dtype=float)
    ops = krs_operators(G, p, cond_max)
    if L is None:
        L = _assemble(G, ops, cond_max)
    Tau = tau(L)
    E, F1, F2, X = ops.E, ops.F1, ops.F2, ops.X
    out = np.zeros(4)
    for _ in range(samples):
        z = np.zeros(2 * n)
        z[b.l] = rng.standard_normal(dl)
        xi = np.zeros(2 * n)
        xi[b.lperp] = rng.standard_normal(b.dim_m)
        Xp = z + X @ z + xi
        sa = b.s(rng.standard_normal(dl))
        TX, Ts = Tau @ Xp, Tau @ sa
        r = [
            np.linalg.norm((E @ TX)[b.m]),
            np.linalg.norm((F1 @ TX)[b.l] + Xp[b.l]),
            np.linalg.norm((E @ Ts)[b.m] + (F1 @ sa)[b.m]),
            np.linalg.norm((F1 @ Ts)[b.l] + (F2 @ sa)[b.l]),
        ]
        out = np.maximum(out, r)
    return out


# -- formal recursion ----------------------------------------------------

def lcan_jets(G, p0, K):
    """Taylor coefficients of t -> lcan(t p0) by the degree-by-degree recursion."""
    if K > 32:
        raise ValueError("order K must be <= 32")
    b = G.basis
    n, dl = b.n, b.dim_l
    X1 = ad_sp(G, np.asarray(p0, dtype=float))
    Cs = [np.zeros((n, n))]
    zts = [np.zeros((n, n))]
    U0 = np.vstack([np.zeros((n, n)), np.eye(n)])
    for k in range(1, K + 1):
        Uprev = U0 if k == 1 else np.vstack([Cs[k - 1], np.zeros((n, n))])
        AU = X1 @ Uprev
        zts.append(AU[n:])
        Lk = AU[:n].copy()
        for j in range(1, k):
            Lk -= Cs[k - j] @ zts[j]
        Ck = np.empty_like(Lk)
        Ck[dl:, dl:] = Lk[dl:, dl:] / k
        Ck[dl:, :dl] = Lk[dl:, :dl] / (k + 1)
        Ck[:dl, dl:] = Lk[:dl, dl:] / (k + 1)
        Ck[:dl, :dl] = Lk[:dl, :dl] / (k + 2)
        Cs.append(Ck)
    return Jet(np.stack(Cs))
