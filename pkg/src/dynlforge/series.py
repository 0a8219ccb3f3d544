"""Exact rational Taylor series of the scalar functions in the worked examples.

Series are computed in the truncated power series ring QQ[z, a, c] of
``sympy.polys.ring_series``; ``a`` and ``c`` are formal parameters used by
the EV functions (``c`` stands for coth of the shift).  Quotients with a
vanishing constant term in the denominator are handled by cancelling the
common power of z first.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache

import numpy as np
from sympy import QQ
from sympy.polys.ring_series import (
    rs_cos,
    rs_cosh,
    rs_mul,
    rs_series_inversion,
    rs_sin,
    rs_sinh,
    rs_tanh,
    rs_trunc,
)
from sympy.polys.rings import ring

R, z, a, c = ring("z,a,c", QQ)

MAX_ORDER = 64
# spare precision for the z-power cancelled in quotients
_PAD = 6


def _frac(q):
    return Fraction(int(q.numerator), int(q.denominator))


def _valuation(p):
    return min(m[0] for m in p.monoms()) if p else None


def _mul(x, y, prec):
    return rs_mul(x, y, z, prec)


def _div(num, den, prec):
    """num/den to z-precision ``prec``; both are known to at least prec + _PAD terms."""
    k = _valuation(den)
    if k:
        if num and _valuation(num) < k:
            raise ZeroDivisionError("quotient has a pole at 0")
        num = num.quo(z ** k) if num else num
        den = den.quo(z ** k)
    return rs_trunc(_mul(num, rs_series_inversion(den, z, prec), prec), z, prec)


def _trig(prec):
    return rs_sin(z, z, prec), rs_cos(z, z, prec), rs_sinh(z, z, prec), rs_cosh(z, z, prec)


def _raw(name, prec):
    """Series of ``name`` to z-precision ``prec`` (terms z^0 .. z^(prec-1))."""
    P = prec + _PAD
    s, co, sh, ch = _trig(P)
    m = lambda x, y: _mul(x, y, P)
    den = m(ch, s) + m(co, sh)
    if name == "F":
        return _div(m(ch, co) - 1, den, prec)
    if name == "G":
        return _div(m(sh, s), den, prec)
    if name == "H":
        num = m(co, z * ch - sh) - m(s, ch) + z
        return _div(num, z * den, prec)
    if name == "Fstar":
        return _div(2 * m(s, sh), den, prec)
    if name == "Gstar":
        d = m(s, ch) - m(co, sh)
        den2 = m(rs_cosh(2 * z, z, P), rs_cos(2 * z, z, P)) - 1
        return _div(-2 * m(d, d), den2, prec)
    if name == "Hstar":
        num = 2 * z * m(co, ch) - m(s, ch) - m(co, sh)
        return _div(num, z * den, prec)
    if name == "cothm":
        return _div(z * ch - sh, z * sh, prec)
    if name == "tanh":
        return rs_trunc(rs_tanh(z, z, P), z, prec)
    if name == "ev":
        T = rs_tanh(z, z, P)
        return _div(T, 1 - a * T, prec)
    if name == "ev_coth":
        T = rs_tanh(z, z, P)
        return _div(T - c, 1 - c * T, prec)
    if name in ("chp", "chm", "shp", "shm"):
        sign = 1 if name[2] == "p" else -1
        base = (ch + sign * co) if name.startswith("ch") else (sh + sign * s)
        return rs_trunc(base * QQ(1, 2), z, prec)
    raise KeyError(name)


# support patterns (modulus, residue) for the exponents with nonzero coefficient
SUPPORT = {
    "F": (4, 3), "G": (4, 1), "H": (4, 3),
    "Fstar": (4, 1), "Gstar": (4, 2), "Hstar": (4, 3),
    "cothm": (2, 1), "tanh": (2, 1),
    "chp": (4, 0), "chm": (4, 2), "shp": (4, 1), "shm": (4, 3),
    "ev": None, "ev_coth": None,
}
NAMES = tuple(SUPPORT)


@dataclass(frozen=True)
class ScalarSeries:
    """Taylor coefficients through z^N.

    For the parametric series ``ev`` (in a) and ``ev_coth`` (in c = coth a)
    each coefficient is a tuple of Fractions indexed by the parameter power.
    """

    name: str
    N: int
    coeffs: tuple
    pattern: tuple | None

    @property
    def parametric(self):
        return bool(self.coeffs) and isinstance(self.coeffs[0], tuple)

    def support(self):
        if self.parametric:
            return [k for k, cf in enumerate(self.coeffs) if any(cf)]
        return [k for k, cf in enumerate(self.coeffs) if cf != 0]

    def support_holds(self):
        if self.pattern is None:
            return True
        mod, res = self.pattern
        return all(k % mod == res for k in self.support())

    def floats(self):
        if self.parametric:
            raise TypeError("parametric series has no float coefficients")
        return np.array([float(x) for x in self.coeffs])

    def __call__(self, x):
        return float(np.polynomial.polynomial.polyval(x, self.floats()))

    def matrix_eval(self, A):
        """sum_k c_k A^k for a square matrix A (Horner)."""
        A = np.asarray(A, float)
        out = np.zeros_like(A)
        eye = np.eye(A.shape[0])
        for cf in self.floats()[::-1]:
            out = out @ A + cf * eye
        return out


def _coefficients(p, N, parametric):
    if not parametric:
        out = [Fraction(0)] * (N + 1)
        for (k, _, _), q in p.terms():
            if k <= N:
                out[k] += _frac(q)
        return tuple(out)
    table = {}
    for (k, i, j), q in p.terms():
        if k <= N:
            table.setdefault(k, {})[i + j] = _frac(q)
    out = []
    for k in range(N + 1):
        row = table.get(k, {})
        deg = max(row, default=-1)
        out.append(tuple(row.get(d, Fraction(0)) for d in range(deg + 1)))
    return tuple(out)


@lru_cache(maxsize=256)
def scalar_series(name, N):
    """Exact series of a named scalar function through z^N (N <= 64)."""
    if name not in SUPPORT:
        raise KeyError(f"unknown scalar series {name!r}; known: {', '.join(NAMES)}")
    if not 0 <= N <= MAX_ORDER:
        raise ValueError(f"order must be in [0, {MAX_ORDER}]")
    p = _raw(name, N + 1)
    return ScalarSeries(name, N, _coefficients(p, N, name in ("ev", "ev_coth")), SUPPORT[name])


# -- ODE systems ---------------------------------------------------------

def _d(p):
    return p.diff(z)


def _residuals(system, prec):
    P = prec + 2
    m = lambda x, y: _mul(x, y, P)
    get = lambda nm: _raw(nm, P)
    if system == "FGH":
        F, G, H = get("F"), get("G"), get("H")
        return [z * _d(F) + z * (m(F, F) + m(G, G)),
                z * _d(G) - z + z * m(G, H + F) + G,
                z * _d(H) + z * m(G, G) + z * m(H, H) + 2 * H]
    if system == "FGHstar":
        F, G, H = get("Fstar"), get("Gstar"), get("Hstar")
        return [z * _d(F) - z * (1 + m(G, G)),
                z * _d(G) - z * F + z * m(G, H) + G,
                z * _d(H) + 2 * z * G + z * m(H, H) + 2 * H]
    if system == "ev_coth":
        # as printed: f' - f^2 = 1
        f = get("ev_coth")
        return [_d(f) - m(f, f) - 1]
    if system == "ev_coth_corrected":
        f = get("ev_coth")
        return [_d(f) + m(f, f) - 1]
    if system == "ev":
        # as printed: f' + (a^2 - 1) f^2 + 2 a f = -1
        f = get("ev")
        return [_d(f) + m((a ** 2 - 1) * f, f) + 2 * a * f + 1]
    if system == "ev_corrected":
        f = get("ev")
        return [_d(f) - m((a ** 2 - 1) * f, f) - 2 * a * f - 1]
    raise KeyError(system)


SYSTEMS = ("FGH", "FGHstar", "ev_coth", "ev_coth_corrected", "ev", "ev_corrected")


@lru_cache(maxsize=64)
def scalar_ode_residual(system, N):
    """Largest |coefficient| (exact Fraction) of the system residuals through z^N."""
    if system not in SYSTEMS:
        raise KeyError(f"unknown system {system!r}; known: {', '.join(SYSTEMS)}")
    worst = Fraction(0)
    for r in _residuals(system, N + 1):
        for (k, _, _), q in r.terms():
            if k <= N:
                worst = max(worst, abs(_frac(q)))
    return worst
