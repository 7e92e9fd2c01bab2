import numpy as np
import pytest

from magrel.lattice import (
    GaugeFunction,
    GridFunction,
    LatticeGrid,
    PotentialError,
    VectorPotentialSpec,
    bump,
    covariant_derivative,
    covariant_derivatives,
    dft,
    gauge_transform,
    idft,
    magnetic_schrodinger,
    mollify,
    spectral_gradient,
    spectral_laplacian,
)
from magrel.opcore import eig


def test_grid_geometry():
    g = LatticeGrid(2, 16, 4.0)
    assert g.spacing == 0.25
    assert g.shape == (16, 16)
    assert g.total_points == 256
    assert g.axis()[0] == -2.0
    assert g.coords().shape == (2, 16, 16)
    assert g.volume == pytest.approx(16.0)


def test_non_power_of_two_warns():
    with pytest.warns(UserWarning):
        LatticeGrid(1, 12)


@pytest.mark.parametrize("d,n", [(0, 8), (4, 8), (1, 1)])
def test_grid_rejects(d, n):
    with pytest.raises(ValueError):
        LatticeGrid(d, n)


def test_dft_unitary_roundtrip():
    g = LatticeGrid(2, 8)
    rng = np.random.default_rng(0)
    f = GridFunction(rng.standard_normal(g.shape) + 1j * rng.standard_normal(g.shape), g)
    F = dft(f)
    assert np.linalg.norm(F.values) == pytest.approx(np.linalg.norm(f.values))
    np.testing.assert_allclose(idft(F).values, f.values, atol=1e-14)


def test_spectral_derivatives_of_plane_wave():
    g = LatticeGrid(1, 32)
    x = g.axis()
    u = np.exp(3j * x)
    np.testing.assert_allclose(spectral_gradient(u, g)[0], 3j * u, atol=1e-12)
    np.testing.assert_allclose(spectral_laplacian(u, g), -9 * u, atol=1e-11)


def test_zero_potential_operator_is_fd_laplacian():
    g = LatticeGrid(1, 16)
    S = magnetic_schrodinger(VectorPotentialSpec.zero(1), 0.5, g)
    h = g.spacing
    assert S.matrix[0, 0] == pytest.approx(2 / h**2 + 0.25)
    assert S.matrix[0, 1] == pytest.approx(-1 / h**2)
    assert S.matrix[0, -1] == pytest.approx(-1 / h**2)
    # installed Fourier decomposition agrees with a dense solver
    w = np.linalg.eigvalsh(S.matrix)
    np.testing.assert_allclose(np.sort(eig(S).eigenvalues), w, atol=1e-10)


def test_operator_equals_sum_of_covariant_squares():
    g = LatticeGrid(2, 8)
    A = VectorPotentialSpec.random(2, g.box_length, seed=3)
    S = magnetic_schrodinger(A, 1.0, g)
    D = covariant_derivatives(A, g)
    T = sum((Dj.conj().T @ Dj).toarray() for Dj in D) + np.eye(g.total_points)
    np.testing.assert_allclose(S.matrix, T, atol=1e-10)
    np.testing.assert_array_equal(S.matrix, S.matrix.conj().T)


def test_covariant_derivative_of_constant_linear_potential():
    # central scheme on a constant: D_j 1 = -A_j up to O(h^2)
    errs = []
    for n in (32, 64):
        g = LatticeGrid(1, n)
        A = VectorPotentialSpec.expression(1, lambda x: np.array([0.3 * np.sin(x[0])]))
        D = covariant_derivative(1, A, g, scheme="central")
        u = np.ones(g.total_points)
        errs.append(np.max(np.abs(D @ u + 0.3 * np.sin(g.axis()))))
    assert errs[1] < errs[0] / 3.5


def test_covariant_derivative_axis_is_one_based():
    g = LatticeGrid(2, 8)
    with pytest.raises(ValueError):
        covariant_derivative(0, VectorPotentialSpec.zero(2), g)
    with pytest.raises(ValueError):
        covariant_derivative(3, VectorPotentialSpec.zero(2), g)


def test_gauge_covariance_is_exact():
    g = LatticeGrid(2, 8)
    A = VectorPotentialSpec.random(2, g.box_length, seed=1)
    phi = GaugeFunction.quadratic(np.diag([0.4, 0.2]))
    S = magnetic_schrodinger(A, 1.0, g)
    Sg = magnetic_schrodinger(A.with_gauge(phi), 1.0, g)
    np.testing.assert_allclose(Sg.matrix, gauge_transform(S, phi).matrix, atol=1e-12)


def test_nonperiodic_potential_rejected():
    g = LatticeGrid(1, 16)
    A = VectorPotentialSpec.expression(1, lambda x: np.array([x[0]]))
    with pytest.raises(PotentialError):
        magnetic_schrodinger(A, 1.0, g)


def test_linear_potential_requires_symmetric_matrix():
    with pytest.raises(ValueError):
        VectorPotentialSpec.linear([[0.0, 1.0], [-1.0, 0.0]])


def test_bump_is_nonnegative_and_compact():
    g = LatticeGrid(1, 64)
    b = bump(g, radius=1.0)
    assert b.min() >= 0.0
    assert b.max() == pytest.approx(1.0)
    assert np.all(b[np.abs(g.axis()) >= 1.0] == 0.0)


def test_mollify_preserves_mass_and_sign():
    g = LatticeGrid(1, 64)
    f = GridFunction(bump(g, radius=1.0), g)
    out = mollify(f, 0.5)
    assert out.values.min() >= 0.0
    assert out.values.sum() == pytest.approx(f.values.sum(), rel=1e-12)
