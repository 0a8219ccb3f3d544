from __future__ import annotations

import numpy as np
import pytest

from dynlforge import lmatrix
from dynlforge.errors import OutsideAnalyticDomain
from dynlforge.kernel import Jet
from dynlforge.series import scalar_series

PERTURB = 1e-3 * np.array([[0.0, 1.0, 1.0], [-1.0, 0.0, 1.0], [-1.0, -1.0, 0.0]])


def perturbed(f, R):
    return lambda p: f(p) + (Jet.const(R, p.order) if isinstance(p, Jet) else R)


def test_operators_at_zero(setups):
    for G in setups.values():
        b = G.basis
        ops = lmatrix.krs_operators(G, np.zeros(b.dim_l))
        n2 = 2 * b.n
        assert np.array_equal(ops.R, np.eye(n2)[b.m])
        assert np.array_equal(ops.S, np.eye(n2)[b.l])
        assert np.max(np.abs(ops.K), initial=0.0) == 0.0


def test_neumann_factor_invertible(sl2):
    b = sl2.basis
    ops = lmatrix.krs_operators(sl2, np.array([0.3]))
    assert np.linalg.norm(ops.R[:, b.l] @ ops.S[:, b.m], 2) < 1


def test_lcan_vanishes_at_zero(setups):
    for G in setups.values():
        assert np.max(np.abs(lmatrix.lcan(G, np.zeros(G.basis.dim_l)))) == 0.0


def test_lcan_is_skew_and_kills_sp(setups, rng):
    for G in setups.values():
        p = 0.5 * rng.standard_normal(G.basis.dim_l)
        lv = lmatrix.lcan_eval(G, p)
        assert lv.skew_residual() <= 1e-12
        assert lv.sp_residual() <= 1e-12


@pytest.mark.parametrize("r", [0.3, 0.7, 1.0])
def test_am_series(so3, rng, r):
    p = rng.standard_normal(3)
    p *= r / np.linalg.norm(p)
    F = scalar_series("cothm", 40).matrix_eval(lmatrix.ad_sp(so3, p))
    assert np.max(np.abs(lmatrix.lcan(so3, p) - F[:3, 3:])) <= 1e-10


@pytest.mark.parametrize("p0", [0.1, 0.35, 0.5])
def test_compatible_sl2_blocks(sl2, p0):
    b = sl2.basis
    p = np.array([p0])
    X = lmatrix.ad_sp(sl2, p)
    L = lmatrix.lcan(sl2, p)
    th = scalar_series("tanh", 40).matrix_eval(X)
    cm = scalar_series("cothm", 40).matrix_eval(X)
    # l^perp block: tanh(ad_sp); m^perp column: coth(ad_sp) - 1/ad_sp
    assert np.max(np.abs(L[b.m, b.m] - th[b.m, b.lperp])) <= 1e-10
    assert np.max(np.abs(L[:, 0] - cm[:3, b.mperp][:, 0])) <= 1e-10


def test_outside_domain(so3):
    with pytest.raises(OutsideAnalyticDomain):
        lmatrix.lcan(so3, np.array([np.pi, 0.0, 0.0]))


def test_residuals_on_sl2_grid(sl2):
    f = lmatrix.evaluator(sl2)
    for p0 in np.linspace(-0.5, 0.5, 9):
        p = np.array([p0])
        assert lmatrix.cdybe_residual(sl2, f, p) <= 1e-9
        assert lmatrix.equivariance_residual(sl2, f, p, np.array([1.0])) <= 1e-9
        assert lmatrix.ode_residual(sl2, f, p) <= 1e-9


def test_trivial_cases(sl2):
    f = lmatrix.evaluator(sl2)
    p = np.array([0.4])
    assert lmatrix.equivariance_residual(sl2, f, p, np.zeros(1)) == 0.0
    assert lmatrix.ode_residual(sl2, f, np.zeros(1)) == 0.0
    assert np.all(lmatrix.pmadtau_residuals(sl2, np.zeros(1), np.random.default_rng(0)) == 0.0)


def test_perturbations_are_detected(sl2):
    f = lmatrix.evaluator(sl2)
    g = perturbed(f, PERTURB)
    p = np.array([0.4])
    assert lmatrix.cdybe_residual(sl2, g, p) >= 1e-4
    assert lmatrix.equivariance_residual(sl2, g, p, np.array([1.0])) >= 1e-4
    wrong = lmatrix.pmadtau_residuals(sl2, p, np.random.default_rng(0), L=np.zeros((3, 3)))
    assert wrong.max() > 0.1


def test_residuals_on_compatible_so3(so3, rng):
    f = lmatrix.evaluator(so3)
    for _ in range(4):
        p = 0.8 * rng.standard_normal(3)
        assert lmatrix.ode_residual(so3, f, p) <= 1e-9
        assert lmatrix.cdybe_residual(so3, f, p) <= 1e-9


def test_jets_am_coefficients(so3, rng):
    p0 = rng.standard_normal(3)
    jet = lmatrix.lcan_jets(so3, p0, 7)
    X = lmatrix.ad_sp(so3, p0)
    cm = scalar_series("cothm", 7).floats()
    assert np.all(jet.c[0] == 0)
    for k in range(8):
        expect = cm[k] * np.linalg.matrix_power(X, k)[:3, 3:]
        assert np.max(np.abs(jet.c[k] - expect)) <= 1e-12


def test_jets_match_dual_numbers(setups, rng):
    from dynlforge.kernel import ray_jet

    for G in setups.values():
        p0 = 0.7 * rng.standard_normal(G.basis.dim_l)
        rec = lmatrix.lcan_jets(G, p0, 5)
        direct = ray_jet(lmatrix.evaluator(G), p0, 5)
        assert np.max(np.abs(rec.c - direct.c)) <= 1e-10


def test_jets_order_limit(sl2):
    with pytest.raises(ValueError):
        lmatrix.lcan_jets(sl2, np.ones(1), 40)
