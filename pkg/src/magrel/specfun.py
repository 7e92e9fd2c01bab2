"""Gamma function and the modified Bessel function of the third kind K_nu.

K_nu(x) for real nu >= 0 and x > 0 is evaluated with Temme's method: the
pair K_mu, K_{mu+1} with |mu| <= 1/2 comes from Temme's series for x <= 2
and from Steed's continued fraction (Thompson-Barnett CF2) for x > 2, then
forward recurrence carries it to K_nu.  The same code path covers integer
orders because the 1/Gamma(1 +- mu) terms are taken from their Taylor series
instead of a difference quotient.

``bessel_k_oracle`` is an independent quadrature of the integral
representation and is meant for validation only.
"""

import math

import numpy as np
from scipy import integrate

__all__ = [
    "SpecfunError",
    "BesselUnderflowError",
    "QuadratureError",
    "gamma",
    "bessel_k",
    "bessel_k_scaled",
    "bessel_k_oracle",
    "ktransform_check",
    "UNDERFLOW_X",
]

EULER_GAMMA = 0.57721566490153286

# Taylor coefficients of 1/Gamma(z) = sum_k c_k z^k, k = 1..22.
_RGAMMA_TAYLOR = (
    1.0,
    0.57721566490153286,
    -0.65587807152025388,
    -0.042002635034095236,
    0.16653861138229149,
    -0.042197734555544337,
    -0.0096219715278769736,
    0.0072189432466630995,
    -0.0011651675918590651,
    -0.00021524167411495097,
    0.00012805028238811619,
    -2.0134854780788239e-5,
    -1.2504934821426707e-6,
    1.1330272319816959e-6,
    -2.0563384169776071e-7,
    6.1160951044814158e-9,
    5.0020076444692229e-9,
    -1.1812745704870201e-9,
    1.0434267116911005e-10,
    7.7822634399050713e-12,
    -3.6968056186422057e-12,
    5.100370287454476e-13,
)

# Beyond this argument exp(-x) underflows double precision.
UNDERFLOW_X = 700.0

_EPS = 1e-16
_MAXIT = 10000
_SERIES_SWITCH = 2.0


class SpecfunError(ValueError):
    """Argument outside the domain of a special function."""


class BesselUnderflowError(ArithmeticError):
    """K_nu(x) underflows; use :func:`bessel_k_scaled` instead."""


class QuadratureError(RuntimeError):
    """An adaptive quadrature did not reach its requested accuracy."""

    def __init__(self, message, estimate=None, error=None):
        super().__init__(message)
        self.estimate = estimate
        self.error = error


def gamma(x):
    """Gamma function for real x > 0."""
    x = float(x)
    if not math.isfinite(x) or x <= 0.0:
        raise SpecfunError(f"gamma requires finite x > 0, got {x!r}")
    return math.gamma(x)


def _gam12(mu):
    # gam1 = (1/G(1-mu) - 1/G(1+mu)) / (2 mu),  gam2 = (1/G(1-mu) + 1/G(1+mu)) / 2,
    # both from the Taylor series of 1/Gamma, so no cancellation near mu = 0.
    mu2 = mu * mu
    gam1 = np.zeros_like(mu)
    gam2 = np.zeros_like(mu)
    power = np.ones_like(mu)
    for j in range(0, len(_RGAMMA_TAYLOR), 2):
        gam2 = gam2 + _RGAMMA_TAYLOR[j] * power
        if j + 1 < len(_RGAMMA_TAYLOR):
            gam1 = gam1 - _RGAMMA_TAYLOR[j + 1] * power
        power = power * mu2
    gampl = gam2 - mu * gam1
    gammi = gam2 + mu * gam1
    return gam1, gam2, gampl, gammi


def _sinc_ratio(z):
    # z / sin(z), with a series near 0
    out = np.ones_like(z)
    big = np.abs(z) > 1e-4
    out[big] = z[big] / np.sin(z[big])
    small = ~big
    out[small] = 1.0 + z[small] ** 2 / 6.0
    return out


def _sinhc(z):
    # sinh(z) / z, with a series near 0
    out = np.ones_like(z)
    big = np.abs(z) > 1e-4
    out[big] = np.sinh(z[big]) / z[big]
    small = ~big
    out[small] = 1.0 + z[small] ** 2 / 6.0
    return out


def _temme_series(mu, x):
    """K_mu(x), K_{mu+1}(x) for x <= 2 and |mu| <= 1/2."""
    gam1, gam2, gampl, gammi = _gam12(mu)
    x2 = 0.5 * x
    fact = _sinc_ratio(np.pi * mu)
    d = -np.log(x2)
    e = mu * d
    fact2 = _sinhc(e)
    ff = fact * (gam1 * np.cosh(e) + gam2 * fact2 * d)
    total = ff.copy()
    ee = np.exp(e)
    p = 0.5 * ee / gampl
    q = 0.5 / (ee * gammi)
    c = np.ones_like(x)
    dd = x2 * x2
    total1 = p.copy()
    active = np.ones(x.shape, dtype=bool)
    for i in range(1, _MAXIT):
        ff = np.where(active, (i * ff + p + q) / (i * i - mu * mu), ff)
        c = np.where(active, c * dd / i, c)
        p = np.where(active, p / (i - mu), p)
        q = np.where(active, q / (i + mu), q)
        delta = c * ff
        total = np.where(active, total + delta, total)
        total1 = np.where(active, total1 + c * (p - i * ff), total1)
        active &= np.abs(delta) >= np.abs(total) * _EPS
        if not active.any():
            break
    else:
        raise ArithmeticError("Temme series failed to converge")
    return total, total1 * 2.0 / x


def _steed_cf2(mu, x):
    """exp(x) K_mu(x) and exp(x) K_{mu+1}(x) for x > 2 and |mu| <= 1/2."""
    b = 2.0 * (1.0 + x)
    d = 1.0 / b
    h = d.copy()
    delh = d.copy()
    q1 = np.zeros_like(x)
    q2 = np.ones_like(x)
    a1 = 0.25 - mu * mu
    q = a1 * np.ones_like(x)
    c = a1 * np.ones_like(x)
    a = -a1 * np.ones_like(x)
    s = 1.0 + q * delh
    active = np.ones(x.shape, dtype=bool)
    for i in range(2, _MAXIT):
        a = a - 2 * (i - 1)
        c = -a * c / i
        qnew = (q1 - b * q2) / a
        q1, q2 = q2, qnew
        q = q + c * qnew
        b = b + 2.0
        d = 1.0 / (b + a * d)
        delh = (b * d - 1.0) * delh
        h = np.where(active, h + delh, h)
        dels = q * delh
        s = np.where(active, s + dels, s)
        active &= np.abs(dels / s) >= _EPS
        if not active.any():
            break
    else:
        raise ArithmeticError("Steed continued fraction failed to converge")
    kmu = np.sqrt(np.pi / (2.0 * x)) / s
    k1 = kmu * (mu + x + 0.5 - a1 * h) / x
    return kmu, k1


def _bessel_k_impl(nu, x, scaled):
    nu, x = np.broadcast_arrays(np.asarray(nu, dtype=float), np.asarray(x, dtype=float))
    shape = nu.shape
    nu = nu.ravel()
    x = x.ravel()
    if np.any(~np.isfinite(nu)) or np.any(nu < 0):
        raise SpecfunError("bessel_k requires finite order nu >= 0")
    if np.any(~np.isfinite(x)) or np.any(x <= 0):
        raise SpecfunError("bessel_k requires finite x > 0")
    nl = np.floor(nu + 0.5).astype(int)
    mu = nu - nl
    kmu = np.empty_like(x)
    k1 = np.empty_like(x)
    small = x <= _SERIES_SWITCH
    if small.any():
        a, b = _temme_series(mu[small], x[small])
        if scaled:
            ex = np.exp(x[small])
            a, b = a * ex, b * ex
        kmu[small], k1[small] = a, b
    large = ~small
    if large.any():
        a, b = _steed_cf2(mu[large], x[large])
        if not scaled:
            ex = np.exp(-x[large])
            a, b = a * ex, b * ex
        kmu[large], k1[large] = a, b
    xi2 = 2.0 / x
    with np.errstate(over="ignore"):
        for i in range(1, int(nl.max(initial=0)) + 1):
            step = nl >= i
            knext = (mu + i) * xi2 * k1 + kmu
            kmu = np.where(step, k1, kmu)
            k1 = np.where(step, knext, k1)
    if np.any(np.isinf(kmu)):
        raise OverflowError("K_nu(x) overflows double precision")
    return kmu.reshape(shape)


def bessel_k(nu, x):
    """Modified Bessel function of the third kind K_nu(x).

    Accepts scalars or broadcastable arrays; returns a float for scalar input.
    Raises :class:`BesselUnderflowError` when x exceeds ``UNDERFLOW_X``.
    """
    if np.any(np.asarray(x, dtype=float) > UNDERFLOW_X):
        raise BesselUnderflowError(
            f"K_nu(x) underflows for x > {UNDERFLOW_X}; use bessel_k_scaled"
        )
    out = _bessel_k_impl(nu, x, scaled=False)
    return float(out) if out.ndim == 0 else out


def bessel_k_scaled(nu, x):
    """exp(x) * K_nu(x), safe for large x."""
    out = _bessel_k_impl(nu, x, scaled=True)
    return float(out) if out.ndim == 0 else out


def bessel_k_oracle(nu, x, rtol=1e-11):
    """K_nu(x) = int_0^inf exp(-x cosh t) cosh(nu t) dt by adaptive quadrature.

    Independent of :func:`bessel_k`; used by the test-suite.  Raises
    :class:`QuadratureError` carrying the achieved error estimate when the
    requested relative accuracy is not met.
    """
    nu = float(nu)
    x = float(x)
    if nu < 0 or x <= 0:
        raise SpecfunError("oracle requires nu >= 0 and x > 0")

    # Factor out exp(-x) so the integrand is O(1) at t = 0.
    def integrand(t):
        return math.exp(-x * (math.cosh(t) - 1.0) + nu * t - math.log(2.0)) + math.exp(
            -x * (math.cosh(t) - 1.0) - nu * t - math.log(2.0)
        )

    # Integrand is negligible once x (cosh t - 1) - nu t exceeds ~60.
    upper = 1.0
    while x * (math.cosh(upper) - 1.0) - nu * upper < 60.0:
        upper *= 1.5
    # Put a breakpoint near the maximum of the integrand to help the adaptive rule.
    peak = math.asinh(nu / x) if nu > 0 else 0.0
    points = [p for p in (peak,) if 0.0 < p < upper]
    value, err = integrate.quad(
        integrand, 0.0, upper, epsabs=0.0, epsrel=rtol * 0.1, limit=500, points=points or None
    )
    if err > rtol * abs(value):
        raise QuadratureError(
            f"K_{nu}({x}) oracle: error estimate {err:.3e} above tolerance", value, err
        )
    return value * math.exp(-x)


def ktransform_check(mu, nu, a, y, rtol=1e-10):
    """Both sides of the K-transform identity

        int_a^inf x^(1/2-nu) (x^2-a^2)^mu K_nu(xy) (xy)^(1/2) dx
            = 2^mu a^(mu-nu+1) y^(-mu-1/2) Gamma(mu+1) K_(mu-nu+1)(a y)

    Returns ``(lhs, rhs)``; lhs by quadrature, rhs with :func:`bessel_k`.
    The order on the right may be negative; K_{-v} = K_v is used.
    """
    mu = float(mu)
    nu = float(nu)
    a = float(a)
    y = float(y)
    if mu <= -1 or a <= 0 or y <= 0:
        raise SpecfunError("ktransform_check requires mu > -1, a > 0, y > 0")
    kn = abs(nu)

    # x = a + s; the (x^2-a^2)^mu endpoint factor is s^mu (s + 2a)^mu.
    def integrand(s):
        x = a + s
        return (
            x ** (0.5 - nu)
            * (2.0 * a + s) ** mu
            * bessel_k_scaled(kn, x * y)
            * math.exp(-s * y)
            * math.sqrt(x * y)
        )

    upper = 80.0 / y
    if mu < 0:
        # Algebraic endpoint singularity s^mu handled by the weighted rule.
        value, err = integrate.quad(
            integrand, 0.0, upper, weight="alg", wvar=(mu, 0.0), epsabs=0.0, epsrel=rtol, limit=400
        )
    else:
        value, err = integrate.quad(
            lambda s: s**mu * integrand(s), 0.0, upper, epsabs=0.0, epsrel=rtol, limit=400
        )
    if err > 1e3 * rtol * abs(value):
        raise QuadratureError("K-transform quadrature did not converge", value, err)
    lhs = value * math.exp(-a * y)
    rhs = (
        2.0**mu
        * a ** (mu - nu + 1.0)
        * y ** (-mu - 0.5)
        * gamma(mu + 1.0)
        * bessel_k(abs(mu - nu + 1.0), a * y)
    )
    return lhs, rhs
