"""Built-in example setups.

Names: ``sl2-cartan``, ``sl2-cocomm-compat``, ``so3-quadratic-AM``,
``heisenberg-degenerate`` and ``sl2-ev-twist`` with optional arguments
``sl2-ev-twist(alpha,MU)`` or ``sl2-ev-twist(empty)``.

sl2 uses the basis (h, e, f) with [h, e] = 2e, [h, f] = -2f, [e, f] = h and
l = span(h).  Points of l* are given in the basis dual to h; under the
trace form the root pairing (alpha, p) is exactly that coordinate.
"""

from __future__ import annotations

import re

import numpy as np

from .algebra import DecomposedBasis, LieAlgebraData, QuasiBialgebraData, twist
from .errors import UnknownName

SL2_BRACKETS = [(0, 1, 1, 2.0), (0, 2, 2, -2.0), (1, 2, 0, 1.0)]
DEFAULT_MU = 0.7


_PERMS = [((0, 1, 2), 1), ((1, 2, 0), 1), ((2, 0, 1), 1),
          ((1, 0, 2), -1), ((0, 2, 1), -1), ((2, 1, 0), -1)]


def _alt3(n, entries):
    T = np.zeros((n, n, n))
    for i, j, k, v in entries:
        for perm, sign in _PERMS:
            T[tuple((i, j, k)[q] for q in perm)] = sign * v
    return T


def build_setup(n, dim_l, brackets, phi, labels=(), w=None, name="", bidynamical=True):
    """Setup from bracket triples (i, j, k, c_ij^k) and phi triples (i, j, k, value)."""
    c = np.zeros((n, n, n))
    for i, j, k, v in brackets:
        c[i, j, k] += v
        c[j, i, k] -= v
    basis = DecomposedBasis(dim_l, n - dim_l, tuple(labels))
    W = np.zeros((n, n, n)) if w is None else np.asarray(w, float)
    G = QuasiBialgebraData(LieAlgebraData(basis, c), W, _alt3(n, phi), bidynamical, name)
    G.validate()
    return G


def sl2(kappa=1.0, name="sl2"):
    return build_setup(3, 1, SL2_BRACKETS, [(0, 1, 2, kappa)], ("h", "e", "f"), name=name)


def ev_twist_matrix(t_alpha):
    """t = rEV_0 on sl2: t e^alpha = t_alpha e_{-alpha}, t e^{-alpha} = -t_alpha e_alpha."""
    T = np.zeros((3, 3))
    T[2, 1] = t_alpha
    T[1, 2] = -t_alpha
    return T


def ev_t_alpha(gamma, mu):
    if gamma == "alpha":
        if mu == 0:
            raise UnknownName("sl2-ev-twist(alpha, 0): coth((alpha, mu)) is undefined at mu = 0")
        return 1.0 / np.tanh(mu)
    return 1.0


def sl2_ev_twist(gamma="alpha", mu=DEFAULT_MU):
    base = sl2_cocomm_compat()
    t_alpha = ev_t_alpha(gamma, mu)
    label = f"sl2-ev-twist({gamma},{mu:g})" if gamma == "alpha" else "sl2-ev-twist(empty)"
    Gt = twist(base, ev_twist_matrix(t_alpha))
    Gt = Gt.with_(bidynamical=True, name=label)
    Gt.validate()
    return Gt


def sl2_cocomm_compat():
    # phi(xi, eta, zeta) = <xi, [eta, zeta]> with g ~ g* by the trace form
    return sl2(-1.0, "sl2-cocomm-compat")


def so3_quadratic_am():
    return build_setup(3, 3, [(0, 1, 2, 1.0), (1, 2, 0, 1.0), (2, 0, 1, 1.0)],
                       [(0, 1, 2, 1.0)], ("e1", "e2", "e3"), name="so3-quadratic-AM")


def heisenberg_degenerate():
    return build_setup(3, 1, [(1, 2, 0, 1.0)], [(1, 2, 0, 1.0)], ("z", "x", "y"),
                       name="heisenberg-degenerate")


_BUILDERS = {
    "sl2-cartan": lambda: sl2(1.0, "sl2-cartan"),
    "sl2-cocomm-compat": sl2_cocomm_compat,
    "so3-quadratic-AM": so3_quadratic_am,
    "sl2-ev-twist": sl2_ev_twist,
    "heisenberg-degenerate": heisenberg_degenerate,
}
NAMES = tuple(_BUILDERS)

_EV = re.compile(r"^sl2-ev-twist\(\s*(alpha|empty)\s*(?:,\s*([-+0-9.eE]+)\s*)?\)$")


def catalog_get(name):
    """Return the validated setup called ``name``; raise UnknownName otherwise."""
    if name in _BUILDERS:
        return _BUILDERS[name]()
    m = _EV.match(name)
    if m:
        gamma = m.group(1)
        try:
            mu = float(m.group(2)) if m.group(2) else DEFAULT_MU
        except ValueError:
            raise UnknownName(f"bad mu in {name!r}") from None
        return sl2_ev_twist(gamma, mu)
    raise UnknownName(f"unknown catalog entry {name!r}; known: {', '.join(NAMES)}")
