import csv
import math

import numpy as np
import pytest

from magrel.kernels import (
    KernelParams,
    SupportError,
    apply_free_fractional,
    chapman_kolmogorov,
    heat_kernel,
    heat_kernel_fourier_oracle,
    kernel_normalization,
    kernel_table,
    levy_density,
    levy_limit_check,
    levy_moments,
    resolvent_fourier_oracle,
    resolvent_kernel,
    resolvent_time_integral,
    spectral_free_fractional,
    write_kernel_table,
)
from magrel.lattice import GridFunction, LatticeGrid


def test_params_validation():
    with pytest.raises(ValueError):
        KernelParams(1.0, 1.5, 1)
    with pytest.raises(ValueError):
        KernelParams(-1.0, 1.0, 1)
    with pytest.raises(ValueError):
        KernelParams(1.0, 1.0, 1, t=0.0)


@pytest.mark.parametrize("r", [0.0, 0.5, 2.0])
def test_massless_cauchy_kernel(r):
    t = 0.7
    assert heat_kernel(KernelParams(0.0, 1.0, 1, t), r) == pytest.approx(t / (math.pi * (t * t + r * r)), rel=1e-13)
    expect3 = t / (math.pi**2 * (t * t + r * r) ** 2)
    assert heat_kernel(KernelParams(0.0, 1.0, 3, t), r) == pytest.approx(expect3, rel=1e-13)


@pytest.mark.parametrize("d", [1, 2, 3])
@pytest.mark.parametrize("r", [0.5, 1.0, 2.0])
def test_integral_form_matches_closed_form(d, r):
    p = KernelParams(1.0, 1.0, d, 0.5)
    assert heat_kernel(p, r, "a1") == pytest.approx(heat_kernel(p, r, "closed"), rel=1e-10)


@pytest.mark.parametrize("p", [KernelParams(1.0, 0.5, 1, 1.0), KernelParams(0.5, 0.7, 3, 0.5)])
def test_fractional_kernel_matches_fourier_oracle(p):
    for r in (0.5, 2.0):
        assert heat_kernel(p, r, "a1") == pytest.approx(heat_kernel_fourier_oracle(p, r), rel=1e-8)


def test_kernel_is_positive_and_decreasing():
    p = KernelParams(1.0, 0.5, 2, 1.0)
    vals = heat_kernel(p, np.array([0.25, 0.5, 1.0, 2.0, 4.0]))
    assert np.all(vals > 0)
    assert np.all(np.diff(vals) < 0)


@pytest.mark.parametrize("p", [KernelParams(1.0, 1.0, 2, 1.0), KernelParams(2.0, 1.0, 3, 0.1)])
def test_normalization(p):
    assert kernel_normalization(p) == pytest.approx(1.0, abs=1e-8)


def test_chapman_kolmogorov_closed_form():
    conv, direct = chapman_kolmogorov(KernelParams(1.0, 1.0, 2, 0.5), 0.5, 1.0)
    assert conv == pytest.approx(direct, rel=1e-6)


def test_levy_density_massless_power_law():
    alpha, d = 1.0, 1
    c = alpha * 2 ** (alpha - 1) * math.gamma((d + alpha) / 2) / (math.pi ** (d / 2) * math.gamma(1 - alpha / 2))
    for r in (0.3, 1.0, 3.0):
        assert levy_density(0.0, alpha, d, r) == pytest.approx(c * r ** -(d + alpha), rel=1e-13)


def test_levy_density_continuous_in_mass():
    assert levy_density(1e-6, 0.5, 2, 1.0) == pytest.approx(levy_density(0.0, 0.5, 2, 1.0), rel=1e-10)


def test_small_time_limit():
    rep = levy_limit_check(1.0, 0.5, 2, 1.0, [1e-1, 1e-2, 1e-3])
    assert rep.monotone
    assert rep.passed


def test_levy_moments_known_values():
    mom = levy_moments(0.0, 1.0, 2, 1.0)
    assert mom.n_kappa == pytest.approx(1.0, rel=1e-8)
    with pytest.raises(ValueError):
        levy_moments(1.0, 1.0, 1, 0.0)


@pytest.mark.parametrize("d", [1, 2, 3])
def test_resolvent_kernel_representations(d):
    for r in (0.5, 2.0):
        k = resolvent_kernel(1.0, d, r)
        assert resolvent_time_integral(1.0, d, r) == pytest.approx(k, rel=1e-9)
        assert resolvent_fourier_oracle(1.0, d, r) == pytest.approx(k, rel=1e-7)


def test_resolvent_requires_mass():
    with pytest.raises(ValueError):
        resolvent_kernel(0.0, 1, 1.0)


def _gaussian(grid, width=0.25):
    x = grid.coords()
    return GridFunction(np.exp(-np.sum(x**2, axis=0) / (2 * width**2)), grid)


@pytest.mark.parametrize("m,alpha", [(1.0, 1.0), (1.0, 0.5), (0.0, 0.5)])
def test_levy_integral_operator_matches_multiplier(m, alpha):
    u = _gaussian(LatticeGrid(1, 256))
    a = apply_free_fractional(u, m, alpha).values
    b = spectral_free_fractional(u, m, alpha).values
    assert np.linalg.norm(a - b) / np.linalg.norm(b) < 1e-6


def test_levy_integral_operator_needs_localized_input():
    g = LatticeGrid(1, 64)
    with pytest.raises(SupportError):
        apply_free_fractional(GridFunction(np.ones(g.shape), g), 1.0, 0.5)


def test_kernel_table_csv(tmp_path):
    rows = kernel_table([KernelParams(1.0, 1.0, 1, 1.0)], [0.5, 1.0])
    path = tmp_path / "k.csv"
    write_kernel_table(rows, path)
    with open(path) as fh:
        rec = list(csv.DictReader(fh))
    assert list(rec[0]) == ["m", "alpha", "d", "t", "r", "value", "method", "err_estimate"]
    assert float(rec[1]["value"]) == pytest.approx(rows[1].value, rel=1e-15)
