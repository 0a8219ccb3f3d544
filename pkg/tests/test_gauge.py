from __future__ import annotations

import numpy as np
import pytest

from dynlforge import gauge, lmatrix
from dynlforge.algebra import twist
from dynlforge.gauge import Poly

K = 4


@pytest.fixture(scope="module")
def sl2_ref(sl2):
    return gauge.poly_from_evaluator(lmatrix.evaluator(sl2), 1, K)


def test_zero_sigma_is_identity(sl2):
    f = lmatrix.evaluator(sl2)
    p = np.array([0.3])
    out = gauge.gauge_apply(sl2, f, Poly.zero(1, (3,)), p)
    assert np.max(np.abs(out - f(p))) == 0.0


def test_cocycle_trivial_cases(sl2, ev, rng):
    assert np.all(gauge.group_cocycle(sl2, rng.standard_normal(3)) == 0)
    assert np.all(gauge.group_cocycle(ev, np.zeros(3)) == 0)


def test_cocycle_matches_coboundary(sl2, rng):
    R = rng.standard_normal((3, 3))
    t = 0.5 * (R - R.T)
    Gt = twist(sl2, t)
    for _ in range(3):
        x = 0.4 * rng.standard_normal(3)
        diff = gauge.group_cocycle(Gt, x) - gauge.coboundary_cocycle(Gt, t, x)
        assert np.max(np.abs(diff)) <= 1e-10


@pytest.mark.parametrize("name", ["sl2-cartan", "sl2-ev-twist", "heisenberg-degenerate"])
def test_gauged_lcan_stays_dynamical(setups, name, rng):
    G = setups[name]
    dl = G.basis.dim_l
    S = gauge.random_equivariant(G, (1, 2, 3), rng)
    assert S.max_abs() > 0
    fs = gauge.gauged(G, lmatrix.evaluator(G), S)
    for _ in range(3):
        p = 0.5 * rng.standard_normal(dl)
        assert lmatrix.cdybe_residual(G, fs, p) <= 1e-8
        assert lmatrix.equivariance_residual(G, fs, p, rng.standard_normal(dl)) <= 1e-8


def test_equivariant_basis_dimensions(setups):
    dims = {name: [len(gauge.equivariant_basis(G, k)) for k in range(1, 5)]
            for name, G in setups.items() if name != "sl2-ev-twist"}
    assert dims["sl2-cartan"] == [1, 1, 1, 1]
    assert dims["so3-quadratic-AM"] == [1, 0, 1, 0]
    assert dims["heisenberg-degenerate"] == [3, 3, 3, 3]


def test_normalize_leaves_lcan(sl2, sl2_ref):
    sigmas, out = gauge.gauge_normalize_jets(sl2, sl2_ref, K)
    assert all(S.max_abs() <= 1e-12 for S in sigmas)
    assert out.distance(sl2_ref, K) <= 1e-12


@pytest.mark.parametrize("name", ["sl2-cartan", "sl2-ev-twist", "so3-quadratic-AM"])
def test_gauge_maps_fix_lcan(setups, name, rng):
    # every equivariant Sigma is a function times p (sl2: multiples of h), varpi_l = 0,
    # so d Sigma is symmetric and Ad commutes with lcan: lcan is a fixed point
    G = setups[name]
    dl = G.basis.dim_l
    f = lmatrix.evaluator(G)
    S = gauge.random_equivariant(G, (1, 2, 3), rng)
    assert S.max_abs() > 0
    ref = gauge.poly_from_evaluator(f, dl, K)
    moved = gauge.poly_from_evaluator(gauge.gauged(G, f, S), dl, K)
    assert moved.distance(ref, K) <= 1e-12


def test_normalize_recovers_lcan(heis, rng):
    f = lmatrix.evaluator(heis)
    ref = gauge.poly_from_evaluator(f, 1, K)
    S = gauge.random_equivariant(heis, (2, 3), rng)
    moved = gauge.poly_from_evaluator(gauge.gauged(heis, f, S), 1, K)
    assert moved.distance(ref, K) > 1e-3
    assert gauge.sp_defect(moved, K, 1) > 1e-3
    _, out = gauge.gauge_normalize_jets(heis, moved, K)
    assert out.distance(ref, K) <= 1e-9
    assert gauge.sp_defect(out, K, 1) <= 1e-10


def test_degree_one_sigma_is_normalized_at_order_zero(heis, rng):
    # a linear Sigma shifts l_0 away from zero; the k = 0 step must undo it
    ref = gauge.poly_from_evaluator(lmatrix.evaluator(heis), 1, K)
    S = gauge.random_equivariant(heis, (1,), rng)
    moved = gauge.poly_from_evaluator(gauge.gauged(heis, lmatrix.evaluator(heis), S), 1, K)
    assert np.max(np.abs(moved.homogeneous(0)(np.ones(1)))) > 1e-3
    _, out = gauge.gauge_normalize_jets(heis, moved, K)
    assert out.distance(ref, K) <= 1e-9
