import math

import numpy as np
import pytest

from magrel.lattice import LatticeGrid, VectorPotentialSpec, covariant_derivatives, magnetic_schrodinger
from magrel.opcore import (
    HermitianOperator,
    OperatorDomainError,
    apply_function,
    balakrishnan_power,
    eig,
    lemma21_bounds,
    op_function,
    power,
    resolvent_power,
    semigroup,
)


def _random_hpd(n, seed, shift=0.5):
    rng = np.random.default_rng(seed)
    X = rng.standard_normal((n, n)) + 1j * rng.standard_normal((n, n))
    return HermitianOperator(X @ X.conj().T / n + shift * np.eye(n))


def test_rejects_non_hermitian():
    with pytest.raises(ValueError):
        HermitianOperator(np.array([[1.0, 2.0], [0.0, 1.0]]))


def test_eig_is_cached():
    op = _random_hpd(10, 0)
    assert eig(op) is eig(op)


def test_square_of_sqrt_recovers_operator():
    op = _random_hpd(20, 1)
    R = power(op, 0.5)
    np.testing.assert_allclose(R.matrix @ R.matrix, op.matrix, atol=1e-12)


def test_negative_power_needs_positive_spectrum():
    op = HermitianOperator(np.diag([0.0, 1.0]))
    with pytest.raises(OperatorDomainError):
        power(op, -0.5)


def test_semigroup_property():
    op = _random_hpd(16, 2)
    P = semigroup(op, 0.3).matrix
    Q = semigroup(op, 0.7).matrix
    np.testing.assert_allclose(P @ Q, semigroup(op, 1.0).matrix, atol=1e-13)


def test_apply_function_matches_op_function():
    op = _random_hpd(12, 3)
    u = np.arange(12.0) + 1j
    f = lambda w: np.log1p(w)
    np.testing.assert_allclose(apply_function(op, f, u), op_function(op, f).matrix @ u, atol=1e-12)


def test_shifted_reuses_eigenvectors():
    op = _random_hpd(8, 4)
    eig(op)
    sh = op.shifted(2.0)
    assert sh._spectral is not None
    np.testing.assert_allclose(sh._spectral.eigenvalues, eig(op).eigenvalues + 2.0)


@pytest.mark.parametrize("alpha", [0.3, 1.0, 1.7])
def test_balakrishnan_matches_spectral_power(alpha):
    op = _random_hpd(24, 5)
    u = np.random.default_rng(6).standard_normal(24) + 0j
    ref = power(op, alpha / 2).matrix @ u
    np.testing.assert_allclose(balakrishnan_power(op, alpha, u), ref, rtol=1e-10, atol=1e-12)


@pytest.mark.parametrize("beta", [0.5, 1.0, 2.0])
def test_resolvent_power_matches_spectral_power(beta):
    op = _random_hpd(24, 7)
    u = np.random.default_rng(8).standard_normal(24) + 0j
    ref = power(op, -beta / 2).matrix @ u
    np.testing.assert_allclose(resolvent_power(op, beta, u), ref, rtol=1e-10, atol=1e-12)


def test_fractional_quadratures_need_positive_operator():
    op = HermitianOperator(np.diag([0.0, 1.0]))
    with pytest.raises(OperatorDomainError):
        balakrishnan_power(op, 1.0, np.ones(2))


@pytest.mark.parametrize("t", [0.01, 0.1, 1.0])
def test_heat_semigroup_norm_bounds(t):
    g = LatticeGrid(2, 8)
    A = VectorPotentialSpec.random(2, g.box_length, seed=2)
    S = magnetic_schrodinger(A, 0.0, g)
    rep = lemma21_bounds(S, t, covariant_derivatives(A, g))
    assert rep.passed
    assert rep.sqrt_semigroup_bound == pytest.approx((2 * math.e * t) ** -0.5)
