from __future__ import annotations

import math

import numpy as np
import pytest

from dynlforge import kernel, lmatrix
from dynlforge.errors import OutsideAnalyticDomain
from dynlforge.kernel import Jet


def taylor_phi(A, k, terms=30):
    out = np.zeros_like(A)
    P = np.eye(A.shape[0])
    for j in range(terms):
        out += P / math.factorial(j + k)
        P = P @ A
    return out


def test_phi_at_zero():
    Z = np.zeros((3, 3))
    assert np.allclose(kernel.phi_func(Z, 0), np.eye(3))
    assert np.allclose(kernel.phi_func(Z, 1), np.eye(3))
    assert np.allclose(kernel.phi_func(Z, 2), np.eye(3) / 2)


def test_phi_nilpotent():
    N = np.array([[0.0, 1.0], [0.0, 0.0]])
    assert np.allclose(kernel.phi_func(N, 0), [[1, 1], [0, 1]], atol=1e-15)
    assert np.allclose(kernel.phi_func(N, 1), [[1, 0.5], [0, 1]], atol=1e-15)
    assert np.allclose(kernel.phi_func(N, 2), [[0.5, 1 / 6], [0, 0.5]], atol=1e-15)


@pytest.mark.parametrize("k", [0, 1, 2])
def test_phi_matches_taylor_sum(k, rng):
    A = 0.5 * rng.standard_normal((6, 6))
    assert np.max(np.abs(kernel.phi_func(A, k) - taylor_phi(A, k))) <= 1e-12


def test_phi_rejects_bad_order():
    with pytest.raises(ValueError):
        kernel.phi_func(np.eye(2), 3)


def test_jet_product_is_cauchy(rng):
    a = Jet(rng.standard_normal((4, 2, 2)))
    b = Jet(rng.standard_normal((4, 2, 2)))
    ab = a @ b
    for k in range(4):
        expect = sum(a.c[i] @ b.c[k - i] for i in range(k + 1))
        assert np.allclose(ab.c[k], expect)


def test_jet_expm_series(rng):
    # exp(t A) = sum t^k A^k / k!
    A = rng.standard_normal((3, 3))
    E = kernel.expm(Jet(np.stack([np.zeros((3, 3)), A, np.zeros((3, 3)), np.zeros((3, 3))])))
    assert np.allclose(E.c[2], A @ A / 2)
    assert np.allclose(E.c[3], A @ A @ A / 6)


def test_dir_derivative_constant_and_linear(sl2):
    const = np.arange(9.0).reshape(3, 3)
    val, der = kernel.dir_derivative(lambda p: Jet.const(const, p.order) if isinstance(p, Jet) else const,
                                     np.array([0.2]), np.array([1.0]))
    assert np.array_equal(der, np.zeros((3, 3)))
    p, d = np.array([0.3]), np.array([0.7])
    val, der = kernel.dir_derivative(lambda q: lmatrix.ad_sp(sl2, q), p, d)
    assert np.allclose(der, lmatrix.ad_sp(sl2, d), atol=1e-15)


def test_dual_numbers_agree_with_finite_differences(sl2):
    f = lmatrix.evaluator(sl2)
    p = np.array([0.4])
    _, der = kernel.dir_derivative(f, p, p)
    fd = kernel.fd_derivative(f, p, p)
    assert np.max(np.abs(der - fd)) <= 1e-7 * max(1.0, np.max(np.abs(der)))


def test_solve_identity_and_near_singular():
    B = np.arange(6.0).reshape(3, 2)
    assert np.allclose(kernel.solve_block(np.eye(3), B), B)
    A = np.diag([1.0, 1.0, 1e-11])
    with pytest.raises(OutsideAnalyticDomain):
        kernel.solve_block(A, B)


def test_ray_jet_of_linear_map(sl2):
    p0 = np.array([0.5])
    jet = kernel.ray_jet(lambda q: lmatrix.ad_sp(sl2, q), p0, 3)
    assert np.allclose(jet.c[0], 0)
    assert np.allclose(jet.c[1], lmatrix.ad_sp(sl2, p0))
    assert np.allclose(jet.c[2:], 0)


def test_ray_jet_of_exponential(sl2):
    p0 = np.array([0.5])
    X = lmatrix.ad_sp(sl2, p0)
    jet = kernel.ray_jet(lambda q: kernel.expm(-lmatrix.ad_sp(sl2, q)), p0, 2)
    assert np.allclose(jet.c[0], np.eye(6))
    assert np.allclose(jet.c[1], -X)
    assert np.allclose(jet.c[2], X @ X / 2)


def test_opnorm():
    assert kernel.opnorm(np.diag([3.0, -4.0])) == pytest.approx(4.0)
    assert kernel.opnorm(np.zeros((0, 0))) == 0.0
