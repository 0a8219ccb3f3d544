"""Lie algebras, Lie quasi-bialgebras and their doubles in structure constants.

Basis conventions.  The Lie algebra g = l + m has basis ``e_0..e_{n-1}`` with
the l-block first.  The double d = g + g* has dimension 2n and basis
``e_0..e_{n-1}, e^0..e^{n-1}``, which is the order l, m, m^perp, l^perp since
the dual basis of the l-block annihilates m.

A bivector (element of Lambda^2 g) is stored as a skew matrix ``T`` acting on
covectors: ``(t xi)_i = sum_j T[i, j] xi_j``.  The cobracket is a stack
``W[i]`` of such matrices, one per basis vector.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from functools import cached_property
from pathlib import Path

import numpy as np

from . import kernel
from .errors import AxiomError, NotBidynamical, ParseError, SplitError, StructureError
from .tolerances import STRUCTURE, tol


@dataclass(frozen=True)
class DecomposedBasis:
    dim_l: int
    dim_m: int
    labels: tuple = ()

    def __post_init__(self):
        if self.dim_l < 0 or self.dim_m < 0 or self.n < 1:
            raise StructureError("dimensions", detail=f"dim_l={self.dim_l}, dim_m={self.dim_m}")
        if not self.labels:
            object.__setattr__(self, "labels", tuple(f"x{i}" for i in range(self.n)))
        else:
            object.__setattr__(self, "labels", tuple(self.labels))
        if len(self.labels) != self.n:
            raise StructureError("labels", detail=f"{len(self.labels)} labels for n={self.n}")

    @property
    def n(self):
        return self.dim_l + self.dim_m

    # slices in g
    @property
    def l(self):
        return slice(0, self.dim_l)

    @property
    def m(self):
        return slice(self.dim_l, self.n)

    # slices in d
    @property
    def g(self):
        return slice(0, self.n)

    @property
    def gstar(self):
        return slice(self.n, 2 * self.n)

    @property
    def mperp(self):
        return slice(self.n, self.n + self.dim_l)

    @property
    def lperp(self):
        return slice(self.n + self.dim_l, 2 * self.n)

    def projector(self, *blocks):
        """Diagonal projector on d onto the union of named blocks."""
        P = np.zeros((2 * self.n, 2 * self.n))
        for name in blocks:
            sl = getattr(self, name)
            P[sl, sl] = np.eye(sl.stop - sl.start)
        return P

    def s(self, p):
        """The embedding s: l* -> g* -> d (p sits on the m^perp block)."""
        if isinstance(p, kernel.Jet):
            z = kernel.Jet(np.zeros((p.order + 1, 2 * self.n)))
            z.c[:, self.mperp] = p.c
            return z
        out = np.zeros(2 * self.n)
        out[self.mperp] = p
        return out

    def op_signs(self):
        return np.concatenate([np.ones(self.dim_l), -np.ones(self.dim_m)])


def _skew_residual(T):
    return float(np.max(np.abs(T + np.swapaxes(T, -1, -2)), initial=0.0))


def jacobi_tensor(C):
    """Jacobiator [[e_i,e_j],e_k] + cyclic, as a 4-index tensor."""
    T1 = np.einsum("ijm,mkn->ijkn", C, C)
    return T1 + np.einsum("jkin->ijkn", T1) + np.einsum("kijn->ijkn", T1)


@dataclass(frozen=True, eq=False)
class LieAlgebraData:
    basis: DecomposedBasis
    c: np.ndarray

    def __post_init__(self):
        n = self.basis.n
        c = np.asarray(self.c, dtype=float)
        if c.shape != (n, n, n):
            raise StructureError("shape", detail=f"bracket tensor shape {c.shape}, expected {(n, n, n)}")
        c.setflags(write=False)
        object.__setattr__(self, "c", c)

    @property
    def n(self):
        return self.basis.n

    def ad(self, x):
        """Matrix of ad_x on g."""
        return np.einsum("i,ijk->kj", x, self.c)

    def bracket(self, x, y):
        return np.einsum("i,j,ijk->k", x, y, self.c)

    def residuals(self):
        b = self.basis
        c = self.c
        return {
            "antisymmetry": float(np.max(np.abs(c + c.transpose(1, 0, 2)))),
            "jacobi": float(np.max(np.abs(jacobi_tensor(c)))),
            "l_closure": float(np.max(np.abs(c[b.l, b.l, b.m]), initial=0.0)),
            "reductivity": float(np.max(np.abs(c[b.l, b.m, b.l]), initial=0.0)),
        }


@dataclass
class ValidationReport:
    """Named structure residuals with their tolerances."""

    records: list = field(default_factory=list)

    def add(self, name, value, tolerance):
        self.records.append({"residual": name, "value": float(value), "tol": float(tolerance),
                             "pass": bool(value <= tolerance)})

    @property
    def ok(self):
        return all(r["pass"] for r in self.records)

    def failures(self):
        return [r for r in self.records if not r["pass"]]


@dataclass(frozen=True, eq=False)
class QuasiBialgebraData:
    """G = (g, [,], varpi, phi) with a reductive decomposition g = l + m."""

    g: LieAlgebraData
    w: np.ndarray
    phi: np.ndarray
    bidynamical: bool = False
    name: str = ""

    def __post_init__(self):
        n = self.g.n
        w = np.asarray(self.w, dtype=float)
        phi = np.asarray(self.phi, dtype=float)
        if w.shape != (n, n, n) or phi.shape != (n, n, n):
            raise StructureError("shape", detail="cobracket and phi must be n x n x n")
        w.setflags(write=False)
        phi.setflags(write=False)
        object.__setattr__(self, "w", w)
        object.__setattr__(self, "phi", phi)

    @property
    def basis(self):
        return self.g.basis

    @property
    def n(self):
        return self.g.n

    @property
    def c(self):
        return self.g.c

    @property
    def scale(self):
        return max(float(np.max(np.abs(self.c))), float(np.max(np.abs(self.w))),
                   float(np.max(np.abs(self.phi))), 1.0)

    @property
    def tol_structure(self):
        return tol(STRUCTURE) * self.scale

    @cached_property
    def double(self):
        return build_double(self)

    def varpi(self, x):
        """varpi_x as a skew matrix g* -> g."""
        return np.einsum("i,ijk->jk", x, self.w)

    def bidynamical_residuals(self):
        b = self.basis
        return {
            "varpi_l": float(np.max(np.abs(self.w[b.l]), initial=0.0)),
            "phi_mod_l": float(np.max(np.abs(self.phi[b.m, b.m, b.m]), initial=0.0)),
        }

    def validate(self, check_bidynamical=None):
        """Run every structural check; raise on the first violated residual."""
        report = ValidationReport()
        tol_s = self.tol_structure
        for name, value in self.g.residuals().items():
            report.add(name, value, tol_s)
        report.add("cobracket_skew", _skew_residual(self.w), tol_s)
        phi = self.phi
        asym = max(float(np.max(np.abs(phi + phi.transpose(1, 0, 2)))),
                   float(np.max(np.abs(phi + phi.transpose(0, 2, 1)))))
        report.add("phi_antisymmetry", asym, tol_s)
        for r in report.failures():
            raise StructureError(r["residual"], r["value"], r["tol"])
        D = _assemble_double(self)
        jac, inv = D.jacobi_residual(), D.invariance_residual()
        report.add("double_jacobi", jac, tol_s)
        report.add("double_invariance", inv, tol_s)
        for r in report.failures():
            raise AxiomError(r["residual"], r["value"], r["tol"],
                             "(g, varpi, phi) is not a Lie quasi-bialgebra")
        object.__setattr__(self, "double", D)
        object.__setattr__(self, "report", report)
        check = self.bidynamical if check_bidynamical is None else check_bidynamical
        for key, value in self.bidynamical_residuals().items():
            report.add(key, value, tol_s)
            if check and value > tol_s:
                raise NotBidynamical(key, value, tol_s)
        if not check:
            # bidynamical residuals are informative only
            for r in report.records:
                if r["residual"] in ("varpi_l", "phi_mod_l"):
                    r["pass"] = True
        return report

    def with_(self, **kw):
        fields_ = dict(g=self.g, w=self.w, phi=self.phi, bidynamical=self.bidynamical, name=self.name)
        fields_.update(kw)
        return QuasiBialgebraData(**fields_)

    def max_difference(self, other):
        return max(float(np.max(np.abs(self.c - other.c))), float(np.max(np.abs(self.w - other.w))),
                   float(np.max(np.abs(self.phi - other.phi))))

    def to_document(self):
        return to_document(self)


@dataclass(frozen=True, eq=False)
class DoubleAlgebra:
    """A quadratic Lie algebra with bracket tensor ``C`` and pairing ``omega``."""

    C: np.ndarray
    omega: np.ndarray
    basis: DecomposedBasis | None = None
    source: QuasiBialgebraData | None = None

    @property
    def dim(self):
        return self.C.shape[0]

    def ad(self, x):
        """Matrix of ad_x; ``x`` may be a jet."""
        if isinstance(x, kernel.Jet):
            return kernel.einsum("i,ijk->kj", x, self.C)
        return np.einsum("i,ijk->kj", x, self.C)

    def bracket(self, x, y):
        if isinstance(x, kernel.Jet) or isinstance(y, kernel.Jet):
            return self.ad(x) @ y if isinstance(x, kernel.Jet) else -(self.ad(y) @ x)
        return np.einsum("i,j,ijk->k", x, y, self.C)

    def pair(self, x, y):
        return x @ self.omega @ y

    def jacobi_residual(self):
        return float(np.max(np.abs(jacobi_tensor(self.C))))

    def invariance_residual(self):
        C, om = self.C, self.omega
        inv = np.einsum("ijm,mk->ijk", C, om) + np.einsum("jm,ikm->ijk", om, C)
        return float(np.max(np.abs(inv)))

    def bracket_of_columns(self, P, Q=None):
        """br[a, b, :] = [P_a, Q_b] in the ambient basis."""
        Q = P if Q is None else Q
        return np.einsum("ia,jb,ijk->abk", P, Q, self.C)


def _assemble_double(G):
    n = G.n
    c, W, phi = G.c, G.w, G.phi
    C = np.zeros((2 * n, 2 * n, 2 * n))
    g, gs = slice(0, n), slice(n, 2 * n)
    C[g, g, g] = c
    # [e_i, e^j] = varpi_{e_i} e^j - ad*_{e_i} e^j
    C[g, gs, g] = W.transpose(0, 2, 1)
    C[g, gs, gs] = -c.transpose(0, 2, 1)
    C[gs, g] = -C[g, gs].transpose(1, 0, 2)
    # [e^i, e^j] = phi(e^i, e^j, .) - <e^i, varpi_. e^j>
    C[gs, gs, g] = phi
    C[gs, gs, gs] = -W.transpose(1, 2, 0)
    omega = np.zeros((2 * n, 2 * n))
    omega[g, gs] = np.eye(n)
    omega[gs, g] = np.eye(n)
    return DoubleAlgebra(C, omega, G.basis, G)


def build_double(G):
    """The double d = g + g*; raises AxiomError if Jacobi or invariance fails."""
    D = _assemble_double(G)
    t = G.tol_structure
    jac = D.jacobi_residual()
    if jac > t:
        raise AxiomError("double_jacobi", jac, t, "(g, varpi, phi) is not a Lie quasi-bialgebra")
    inv = D.invariance_residual()
    if inv > t:
        raise AxiomError("double_invariance", inv, t)
    return D


@dataclass(frozen=True, eq=False)
class LagrangianSplitting:
    """Spanning matrices (columns) of a subalgebra ``a`` and an isotropic complement ``b``."""

    a: np.ndarray
    b: np.ndarray


def extract_from_splitting(D, split, basis=None, bidynamical=False, name="", validate=True):
    """Read the quasi-bialgebra on ``a`` off a lagrangian splitting of ``D``.

    The complement ``b`` is identified with a* through the pairing; the
    structure then sits in the bracket tensor expressed in the adapted basis.
    """
    A = np.asarray(split.a, dtype=float)
    B = np.asarray(split.b, dtype=float)
    N = D.dim
    if A.shape[0] != N or B.shape[0] != N or A.shape[1] != B.shape[1] or 2 * A.shape[1] != N:
        raise SplitError("splitting matrices must be 2n x n")
    n = A.shape[1]
    om = D.omega
    scale = max(1.0, float(np.max(np.abs(D.C))))
    t = tol(STRUCTURE) * scale * max(1.0, float(np.max(np.abs(A))), float(np.max(np.abs(B)))) ** 3
    iso_a = float(np.max(np.abs(A.T @ om @ A)))
    iso_b = float(np.max(np.abs(B.T @ om @ B)))
    if iso_a > t or iso_b > t:
        raise SplitError(f"splitting not isotropic (a: {iso_a:.3g}, b: {iso_b:.3g})")
    M = A.T @ om @ B
    if kernel.condition(M) > 1e12:
        raise SplitError("pairing between a and b is degenerate")
    Bd = B @ np.linalg.inv(M).T
    P = np.hstack([A, Bd])
    if kernel.condition(P) > 1e12:
        raise SplitError("a and b are not complementary")
    br = D.bracket_of_columns(P)
    Cp = np.einsum("kK,abK->abk", np.linalg.inv(P), br)
    closure = float(np.max(np.abs(Cp[:n, :n, n:])))
    if closure > t:
        raise SplitError(f"a is not a subalgebra (closure residual {closure:.3g})")
    c = Cp[:n, :n, :n]
    W = -Cp[n:, n:, n:].transpose(2, 0, 1)
    phi = Cp[n:, n:, :n]
    if basis is None:
        basis = D.basis if D.basis is not None and D.basis.n == n else DecomposedBasis(0, n)
    G = QuasiBialgebraData(LieAlgebraData(basis, c), W, phi, bidynamical, name)
    if validate:
        G.validate()
    return G


def twist(G, t):
    """G^t: replace the complement g* by the graph {t xi + xi}."""
    T = np.asarray(t, dtype=float)
    n = G.n
    if _skew_residual(T) > G.tol_structure:
        raise StructureError("twist_skew", _skew_residual(T), G.tol_structure)
    A = np.vstack([np.eye(n), np.zeros((n, n))])
    B = np.vstack([T, np.eye(n)])
    return extract_from_splitting(G.double, LagrangianSplitting(A, B), G.basis,
                                  bidynamical=False, name=G.name)


def opposite(G):
    """G^op: every structure tensor conjugated by op = (1 on l, -1 on m).

    op is then a Lie algebra isomorphism g -> g^op.  Flipping only the
    mixed [l, m] brackets does not give a Lie algebra in general (Jacobi
    fails on non-abelian m), so conjugation is used throughout.
    """
    b = G.basis
    s = b.op_signs()
    sss = np.einsum("i,j,k->ijk", s, s, s)
    return G.with_(g=LieAlgebraData(b, G.c * sss), w=G.w * sss, phi=G.phi * sss,
                   name=G.name + "^op" if G.name else "")


# -- JSON documents ------------------------------------------------------

def _triples(T, eps=0.0):
    idx = np.argwhere(np.abs(T) > eps)
    return [[int(i), int(j), int(k), float(T[i, j, k])] for i, j, k in idx]


def to_document(G):
    b = G.basis
    return {
        "name": G.name,
        "dim_l": b.dim_l,
        "dim_m": b.dim_m,
        "labels": list(b.labels),
        "brackets": _triples(G.c),
        "cobracket": _triples(G.w),
        "phi": _triples(G.phi),
        "bidynamical": bool(G.bidynamical),
    }


def _tensor(entries, n, key):
    T = np.zeros((n, n, n))
    if not isinstance(entries, list):
        raise ParseError(f"'{key}' must be a list of [i, j, k, value]")
    for e in entries:
        if not isinstance(e, (list, tuple)) or len(e) != 4:
            raise ParseError(f"'{key}' entry {e!r} is not [i, j, k, value]")
        i, j, k, v = e
        if not all(isinstance(x, int) and not isinstance(x, bool) for x in (i, j, k)):
            raise ParseError(f"'{key}' entry {e!r} has non-integer index")
        if not all(0 <= x < n for x in (i, j, k)):
            raise ParseError(f"'{key}' entry {e!r} has index out of range")
        try:
            # decimal strings are accepted for exact entry
            T[i, j, k] += float(v)
        except (TypeError, ValueError):
            raise ParseError(f"'{key}' entry {e!r} has non-numeric value") from None
    return T


def parse_document(doc):
    """Parse a setup document (dict, JSON text or path) without validating axioms."""
    if isinstance(doc, Path) or (isinstance(doc, str) and not doc.lstrip().startswith("{")):
        try:
            doc = Path(doc).read_text()
        except OSError as exc:
            raise ParseError(f"cannot read setup: {exc}") from None
    if isinstance(doc, (str, bytes)):
        try:
            doc = json.loads(doc)
        except json.JSONDecodeError as exc:
            raise ParseError(f"invalid JSON: {exc}") from None
    if not isinstance(doc, dict):
        raise ParseError("setup document must be a JSON object")
    for key, typ in (("dim_l", int), ("dim_m", int)):
        if not isinstance(doc.get(key), typ) or isinstance(doc.get(key), bool):
            raise ParseError(f"'{key}' must be an integer")
    dim_l, dim_m = doc["dim_l"], doc["dim_m"]
    if dim_l < 0 or dim_m < 0 or dim_l + dim_m < 1:
        raise ParseError("dimensions must be non-negative with dim_l + dim_m >= 1")
    n = dim_l + dim_m
    labels = doc.get("labels") or [f"x{i}" for i in range(n)]
    if not isinstance(labels, list) or len(labels) != n or not all(isinstance(s, str) for s in labels):
        raise ParseError(f"'labels' must be a list of {n} strings")
    bidyn = doc.get("bidynamical", False)
    if not isinstance(bidyn, bool):
        raise ParseError("'bidynamical' must be a boolean")
    c = _tensor(doc.get("brackets", []), n, "brackets")
    W = _tensor(doc.get("cobracket", []), n, "cobracket")
    phi = _tensor(doc.get("phi", []), n, "phi")
    basis = DecomposedBasis(dim_l, dim_m, tuple(labels))
    return QuasiBialgebraData(LieAlgebraData(basis, c), W, phi, bidyn, str(doc.get("name", "")))


def load_setup(doc):
    """Parse and validate; the ValidationReport is attached as ``G.report``."""
    G = parse_document(doc)
    G.validate()
    return G
