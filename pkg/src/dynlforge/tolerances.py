"""Default tolerances, scaled by ``DYNLFORGE_TOL_SCALE`` when set."""

import os

COND_MAX = 1e8

# absolute defaults; residual suites multiply by ``scale()``
STRUCTURE = 1e-10
ROUNDTRIP = 1e-12
RESIDUAL = 1e-8
SKEW = 1e-10
NORMALIZATION = 1e-10
PMADTAU = 1e-8
JET_SLOPE_MARGIN = 0.7
AM_SERIES = 1e-10
COMPAT = 1e-10
GAUGE = 1e-7
GAUGE_NORMALIZE = 1e-9
TWIST = 1e-9
VERTEX = 1e-9
FLAT = 1e-9
MORPHISM = 1e-8
DUAL_TWICE = 1e-10
SELF_DUAL = 1e-12
LINK_CONSTANT = 1e-12
LINK = 1e-8
FUNCTORIAL = 1e-9


def scale():
    raw = os.environ.get("DYNLFORGE_TOL_SCALE")
    if not raw:
        return 1.0
    value = float(raw)
    if value <= 0:
        raise ValueError("DYNLFORGE_TOL_SCALE must be positive")
    return value


def tol(value):
    """Scale one tolerance."""
    return value * scale()
