"""Continuum kernels of the free relativistic operator.

Heat kernel k(t, x) of exp(-t[(|xi|^2 + m^2)^{alpha/2} - m^alpha]), its Levy
density n(y), small- and large-jump moments, the resolvent kernel of
(-Delta + m^2)^{-1/2}, and the Levy-integral application of the fractional
power to grid functions.  All kernels are radial and take r = |x|.
"""

import csv
from dataclasses import dataclass, asdict
import math

import numpy as np
from scipy import integrate as sci_integrate
from scipy import special

from . import _quad
from .lattice import GridFunction, spectral_laplacian
from .specfun import QuadratureError, bessel_k, bessel_k_scaled, gamma

__all__ = [
    "KernelParams",
    "LevyMoments",
    "KernelRow",
    "MomentDivergenceError",
    "SupportError",
    "sphere_area",
    "heat_kernel",
    "heat_kernel_dr",
    "heat_kernel_fourier_oracle",
    "kernel_normalization",
    "chapman_kolmogorov",
    "levy_density",
    "levy_limit_check",
    "LevyLimitReport",
    "levy_moments",
    "resolvent_kernel",
    "resolvent_time_integral",
    "resolvent_fourier_oracle",
    "apply_free_fractional",
    "spectral_free_fractional",
    "kernel_table",
    "write_kernel_table",
]

KERNEL_COLUMNS = ("m", "alpha", "d", "t", "r", "value", "method", "err_estimate")

# exp(-_DECAY) is treated as zero when truncating integrals
_DECAY = 60.0


class MomentDivergenceError(ArithmeticError):
    """Tail extrapolation of a Levy moment is unstable."""


class SupportError(ValueError):
    """Grid function is not concentrated well inside the box."""


@dataclass(frozen=True)
class KernelParams:
    m: float
    alpha: float
    d: int
    t: float = 1.0

    def __post_init__(self):
        if not 0.0 < self.alpha <= 1.0:
            raise ValueError(f"alpha must lie in (0, 1], got {self.alpha}")
        if self.m < 0:
            raise ValueError("mass must be non-negative")
        if self.t <= 0:
            raise ValueError("time must be positive")
        if int(self.d) != self.d or self.d < 1:
            raise ValueError("dimension must be a positive integer")

    def at_time(self, t):
        return KernelParams(self.m, self.alpha, self.d, t)


@dataclass(frozen=True)
class LevyMoments:
    n_inf: float
    n_kappa: float
    kappa: float


@dataclass(frozen=True)
class KernelRow:
    m: float
    alpha: float
    d: int
    t: float
    r: float
    value: float
    method: str
    err_estimate: float


def sphere_area(d):
    """Surface area of the unit sphere in R^d (2 for d = 1)."""
    return 2.0 * math.pi ** (0.5 * d) / gamma(0.5 * d)


def _symbol(rho, m, alpha):
    """(rho^2 + m^2)^{alpha/2} - m^alpha without cancellation for rho << m."""
    rho = np.asarray(rho, dtype=float)
    if m == 0:
        return rho**alpha
    return m**alpha * np.expm1(0.5 * alpha * np.log1p((rho / m) ** 2))


# -- heat kernel ---------------------------------------------------------


def _closed_form(p, r, derivative=False):
    """alpha = 1 kernel (Poisson-type closed form) or its r-derivative; r may be an array."""
    d, m, t = p.d, p.m, p.t
    r = np.asarray(r, dtype=float)
    nu = 0.5 * (d + 1)
    rho = np.hypot(r, t)
    if m == 0:
        c = gamma(nu) / math.pi**nu
        if derivative:
            return -c * t * (d + 1) * r / rho ** (d + 3)
        return c * t / rho ** (d + 1)
    c = 2.0 * (m / (2.0 * math.pi)) ** nu * t
    if derivative:
        # d/drho [rho^-nu K_nu(m rho)] = -m rho^-nu K_{nu+1}(m rho)
        val = -m * bessel_k_scaled(nu + 1, m * rho) / rho**nu * (r / rho)
    else:
        val = bessel_k_scaled(nu, m * rho) / rho**nu
    return c * val * np.exp(m * (t - rho))


def _a1_integral(p, r, derivative=False):
    """Integral representation in tau = sqrt(spectral radius); returns (value, err)."""
    d, m, t, alpha = p.d, p.m, p.t, p.alpha
    mu = 0.5 * d - 1.0
    order = abs(mu + 1.0) if derivative else abs(mu)
    ca = math.cos(0.5 * math.pi * alpha)
    sa = math.sin(0.5 * math.pi * alpha)

    def integrand(tau):
        a = np.sqrt(m * m + tau * tau)
        ta = t * tau**alpha
        bes = bessel_k_scaled(order, a * r) * np.exp(-(a - m) * r)
        out = 2.0 * tau * np.exp(-ta * ca) * np.sin(ta * sa) * a**mu * bes
        return -a * out if derivative else out

    a_max = m + _DECAY / r
    tau_max = math.sqrt(a_max * a_max - m * m)
    if ca > 1e-12:
        tau_max = min(tau_max, (_DECAY / (t * ca)) ** (1.0 / alpha))
    width = min(2.0 / r, 1.5 / t, tau_max / 4.0)
    edges = _quad.merge_edges(
        _quad.graded_edges(0.0, tau_max, width, floor=1e-12),
        np.array([0.5, 1.0, 2.0]) * m,
        lo=0.0,
        hi=tau_max,
    )
    if len(edges) > 200000:
        raise QuadratureError("heat kernel quadrature needs too many panels", math.nan, math.inf)
    val, err = _quad.integrate_err(integrand, edges)
    pref = math.exp(m**alpha * t - m * r) * r ** (-mu) / (math.pi * (2.0 * math.pi) ** (0.5 * d))
    return pref * val, pref * err


def _fourier_cutoff(p):
    target = _DECAY / p.t + p.m**p.alpha
    return math.sqrt(max(target ** (2.0 / p.alpha) - p.m**2, 0.0))


def _fourier_integral(p, r):
    """Radial inverse Fourier transform of the symbol; returns (value, err)."""
    d = p.d
    rho_max = _fourier_cutoff(p)
    F = lambda rho: np.exp(-p.t * _symbol(rho, p.m, p.alpha))
    if r == 0:
        f = lambda rho: rho ** (d - 1) * F(rho)
        edges = _quad.graded_edges(0.0, rho_max, 0.0, ratio=1.5, floor=1e-12)
        val, err = _quad.integrate_err(f, edges)
        c = sphere_area(d) / (2.0 * math.pi) ** d
        return c * val, c * err
    nu = 0.5 * d - 1.0
    f = lambda rho: F(rho) * special.jv(nu, rho * r) * rho ** (0.5 * d)
    width = min(0.5 * math.pi / r, rho_max / 8.0)
    if rho_max / width > 2e5:
        raise QuadratureError("Fourier inversion needs too many panels", math.nan, math.inf)
    edges = _quad.graded_edges(0.0, rho_max, width, floor=1e-12)
    val, err = _quad.integrate_err(f, edges)
    c = (2.0 * math.pi) ** (-0.5 * d) * r ** (1.0 - 0.5 * d)
    return c * val, c * err


def _auto_method(p, r):
    if p.alpha == 1.0:
        return "closed"
    if r == 0 or r * _fourier_cutoff(p) <= 200.0:
        return "fourier"
    return "a1"


def _heat_scalar(p, r, method, derivative=False):
    if r < 0:
        raise ValueError("radius must be non-negative")
    if method == "auto":
        method = _auto_method(p, r)
    if method == "closed":
        if p.alpha != 1.0:
            raise ValueError("closed form exists only for alpha = 1")
        return float(_closed_form(p, r, derivative)), 0.0, method
    if method == "a1":
        if r == 0:
            raise ValueError("the Bessel representation needs r > 0")
        val, err = _a1_integral(p, r, derivative)
        return val, err, method
    if method == "fourier":
        if derivative:
            raise ValueError("derivative available for closed and a1 paths only")
        val, err = _fourier_integral(p, r)
        return val, err, method
    raise ValueError(f"unknown method {method!r}")


def _vectorize(fn, r):
    r_arr = np.asarray(r, dtype=float)
    out = np.array([fn(float(x)) for x in r_arr.ravel()]).reshape(r_arr.shape)
    return float(out) if out.ndim == 0 else out


def heat_kernel(params, r, method="auto", return_error=False):
    """k(t, x) at |x| = r.

    ``method`` is ``closed`` (alpha = 1 only), ``a1`` (Bessel integral in
    the spectral variable, r > 0), ``fourier`` (radial Fourier inversion) or
    ``auto``, which takes the closed form when alpha = 1 and otherwise the
    cheaper of the two quadratures.
    """
    if params.alpha == 1.0 and method in ("auto", "closed") and not return_error:
        r_arr = np.asarray(r, dtype=float)
        if np.any(r_arr < 0):
            raise ValueError("radius must be non-negative")
        out = _closed_form(params, r_arr)
        return float(out) if out.ndim == 0 else out
    if return_error:
        res = [_heat_scalar(params, float(x), method) for x in np.ravel(r)]
        vals = np.array([v for v, _, _ in res])
        errs = np.array([e for _, e, _ in res])
        if np.ndim(r) == 0:
            return float(vals[0]), float(errs[0])
        return vals.reshape(np.shape(r)), errs.reshape(np.shape(r))
    return _vectorize(lambda x: _heat_scalar(params, x, method)[0], r)


def heat_kernel_dr(params, r, method="auto"):
    """Radial derivative dk/dr (r > 0)."""
    def one(x):
        if x <= 0:
            raise ValueError("radius must be positive")
        meth = method
        if meth == "auto":
            meth = "closed" if params.alpha == 1.0 else "a1"
        return _heat_scalar(params, x, meth, derivative=True)[0]
    return _vectorize(one, r)


def heat_kernel_fourier_oracle(params, r):
    """Independent evaluation of k(t, r) by radial Fourier inversion."""
    return _vectorize(lambda x: _fourier_integral(params, x)[0], r)


def kernel_normalization(params, method="auto", r_max=None):
    """Integral of k(t, .) over R^d by radial quadrature with a power-law tail."""
    d, t = params.d, params.t
    if r_max is None:
        r_max = 1e4 if params.m == 0 else max(10.0, 60.0 / params.m + 10.0 * t)
    edges = _quad.merge_edges(
        _quad.graded_edges(0.0, r_max, 0.0, ratio=1.6, floor=1e-9),
        np.arange(0.0, min(r_max, 10.0 * (1.0 + t)), 0.25 * min(1.0, t) + 0.05),
        lo=0.0,
        hi=r_max,
    )
    nodes, weights = _quad.panel_nodes(edges, 16)
    vals = np.asarray(heat_kernel(params, nodes, method))
    total = sphere_area(d) * np.dot(weights, nodes ** (d - 1) * vals)
    if params.m == 0:
        # k ~ t n(r) for r >> t
        c0 = _levy_powerlaw_constant(params.alpha, d)
        total += sphere_area(d) * t * c0 * r_max ** (-params.alpha) / params.alpha
    return float(total)


def chapman_kolmogorov(params, s, r, method="auto", y_max=None):
    """(k_t * k_s)(x) at |x| = r by radial convolution; compare with k_{t+s}(r).

    Returns ``(convolution, k(t+s, r))``.
    """
    d = params.d
    ps = params.at_time(s)
    if y_max is None:
        y_max = 200.0 if params.m == 0 else r + 60.0 / max(params.m, 0.3) + 10.0
    kt = lambda x: np.asarray(heat_kernel(params, np.maximum(x, 1e-12), method))
    ks = lambda x: np.asarray(heat_kernel(ps, x, method))
    if d == 1:
        pts = np.concatenate([[-y_max, y_max], r + np.array([-1, 1]) * 1e-9, [0.0, r]])
        edges = _quad.merge_edges(
            _quad.graded_edges(0.0, y_max, 0.5, floor=1e-7),
            -_quad.graded_edges(0.0, y_max, 0.5, floor=1e-7),
            r + _quad.graded_edges(0.0, y_max, 0.5, floor=1e-7),
            r - _quad.graded_edges(0.0, y_max, 0.5, floor=1e-7),
            pts,
            lo=-y_max,
            hi=y_max,
        )
        y, w = _quad.panel_nodes(edges, 16)
        conv = np.dot(w, kt(np.abs(r - y)) * ks(np.abs(y)))
    else:
        rho_edges = _quad.merge_edges(
            _quad.graded_edges(0.0, y_max, 0.5, floor=1e-7),
            r + _quad.graded_edges(0.0, y_max, 0.5, floor=1e-7),
            r - _quad.graded_edges(0.0, r, 0.5, floor=1e-7),
            lo=0.0,
            hi=y_max,
        )
        rho, wr = _quad.panel_nodes(rho_edges, 16)
        th_edges = np.concatenate([[0.0], np.pi * 2.0 ** -np.arange(20, -1, -1.0)])
        th, wt = _quad.panel_nodes(th_edges, 16)
        R, TH = np.meshgrid(rho, th, indexing="ij")
        dist = np.sqrt(np.maximum(r * r + R * R - 2.0 * r * R * np.cos(TH), 0.0))
        ang = np.sin(TH) ** (d - 2)
        inner = (kt(dist.ravel()).reshape(dist.shape) * ang) @ wt
        conv = sphere_area(d - 1) * np.dot(wr, rho ** (d - 1) * ks(rho) * inner)
    return float(conv), float(heat_kernel(params.at_time(params.t + s), r, method))


# -- Levy density ----------------------------------------------------------


def _levy_powerlaw_constant(alpha, d):
    """n(r) = c r^{-(d+alpha)} for m = 0."""
    return (
        alpha * 2.0 ** (alpha - 1.0) * gamma(0.5 * (d + alpha))
        / (math.pi ** (0.5 * d) * gamma(1.0 - 0.5 * alpha))
    )


def _levy_mass_constant(alpha):
    return (
        2.0 ** (1.0 + 0.5 * alpha) * math.sin(0.5 * math.pi * alpha)
        * (2.0 * math.pi) ** (0.5 * alpha) * gamma(0.5 * alpha + 1.0) / math.pi
    )


def levy_density(m, alpha, d, r):
    """Levy density n(r) of the free operator; r may be an array."""
    if not 0.0 < alpha <= 1.0:
        raise ValueError("alpha must lie in (0, 1]")
    if m < 0:
        raise ValueError("mass must be non-negative")
    r_arr = np.asarray(r, dtype=float)
    if np.any(r_arr <= 0):
        raise ValueError("Levy density needs r > 0")
    nu = 0.5 * (d + alpha)
    if m == 0:
        out = _levy_powerlaw_constant(alpha, d) * r_arr ** (-(d + alpha))
    else:
        x = m * r_arr
        out = (
            _levy_mass_constant(alpha) * (m / (2.0 * math.pi)) ** nu
            * bessel_k_scaled(nu, x) * np.exp(-x) / r_arr**nu
        )
    return float(out) if out.ndim == 0 else out


@dataclass
class LevyLimitReport:
    t: list
    gaps: list
    monotone: bool
    final_gap: float
    tolerance: float = 1e-3

    @property
    def passed(self):
        return self.monotone and self.final_gap <= self.tolerance


def levy_limit_check(m, alpha, d, r, t_sequence, tolerance=1e-3, method="auto"):
    """Relative gap |k(t, r)/t - n(r)| / n(r) along a decreasing t sequence."""
    ts = [float(t) for t in t_sequence]
    if any(b >= a for a, b in zip(ts, ts[1:])):
        raise ValueError("t_sequence must be strictly decreasing")
    n = levy_density(m, alpha, d, r)
    if method == "auto" and alpha < 1.0:
        method = "a1"
    gaps = [abs(heat_kernel(KernelParams(m, alpha, d, t), r, method) / t - n) / n for t in ts]
    mono = all(b < a for a, b in zip(gaps, gaps[1:]))
    return LevyLimitReport(ts, gaps, mono, gaps[-1], tolerance)


def levy_moments(m, alpha, d, kappa, r0=1e-6):
    """Large-jump mass and small-jump moment of the Levy density."""
    if not 0.0 < kappa <= 1.0:
        raise ValueError("kappa must lie in (0, 1]")
    area = sphere_area(d)
    c0 = _levy_powerlaw_constant(alpha, d)
    p = kappa - alpha + 1.0
    n = lambda x: levy_density(m, alpha, d, x)

    def small(lo):
        s_edges = np.arange(math.log(lo), 0.0, 0.5)
        s_edges = np.append(s_edges, 0.0)
        f = lambda s: np.exp(s) ** (d + kappa + 1.0) * n(np.exp(s))
        body = _quad.integrate(f, s_edges)
        # below lo the density follows its power law
        return area * (body + c0 * lo**p / p)

    n_kappa = small(r0)
    check = small(10.0 * r0)
    if not abs(check - n_kappa) <= 1e-6 * abs(n_kappa):
        raise MomentDivergenceError(
            f"small-jump moment unstable under tail extrapolation ({check} vs {n_kappa})"
        )
    r_max = 1e6 if m == 0 else 1.0 + _DECAY / m
    s_edges = np.append(np.arange(0.0, math.log(r_max), 0.25), math.log(r_max))
    f = lambda s: np.exp(s) ** d * n(np.exp(s))
    n_inf = _quad.integrate(f, s_edges)
    if m == 0:
        n_inf += c0 * r_max ** (-alpha) / alpha
    return LevyMoments(float(area * n_inf), float(n_kappa), float(kappa))


# -- resolvent kernel --------------------------------------------------------


def resolvent_kernel(m, d, r):
    """Kernel of (-Delta + m^2)^{-1/2} at |x| = r."""
    if m <= 0:
        raise ValueError("resolvent kernel needs m > 0")
    r_arr = np.asarray(r, dtype=float)
    if np.any(r_arr <= 0):
        raise ValueError("resolvent kernel needs r > 0")
    nu = 0.5 * (d - 1)
    x = m * r_arr
    out = 2.0 * m ** (d - 1) / (2.0 * math.pi) ** (0.5 * (d + 1)) * bessel_k(nu, x) / x**nu
    return float(out) if out.ndim == 0 else out


def resolvent_time_integral(m, d, r):
    """Integral over t of k(t, r) e^{-m t} for alpha = 1."""
    nu = 0.5 * (d + 1)
    c = 2.0 * (m / (2.0 * math.pi)) ** nu

    def f(t):
        rho = np.hypot(r, t)
        return c * t * bessel_k_scaled(nu, m * rho) * np.exp(-m * rho) / rho**nu

    t_max = r + 2.0 * _DECAY / m
    edges = _quad.merge_edges(
        _quad.graded_edges(0.0, t_max, min(r, 1.0 / m), floor=1e-10), lo=0.0, hi=t_max
    )
    return float(_quad.integrate(f, edges))


def resolvent_fourier_oracle(m, d, r):
    """Radial inverse Fourier transform of (|xi|^2 + m^2)^{-1/2}.

    The symbol decays too slowly for absolute convergence when d >= 2, so
    the leading 1/|xi| part is inverted analytically and only the integrable
    remainder is integrated numerically.
    """
    if d == 1:
        val, _ = sci_integrate.quad(
            lambda k: 1.0 / math.sqrt(k * k + m * m), 0.0, np.inf, weight="cos", wvar=r,
            limlst=200,
        )
        return val / math.pi
    # subtract the 1/k asymptote; the rest decays like m^2 / (2 k^3)
    if d == 3:
        # J_{1/2}(x) = sqrt(2/(pi x)) sin x
        h = lambda k: k / math.sqrt(k * k + m * m) - 1.0
        val, _ = sci_integrate.quad(h, 0.0, np.inf, weight="sin", wvar=r, limlst=200)
        # int_0^inf sin(k r) dk = 1/r in the Abel sense
        return (val + 1.0 / r) / (2.0 * math.pi**2 * r)
    if d == 2:
        k_max = 4000.0 / r
        width = 0.5 * math.pi / r
        edges = _quad.graded_edges(0.0, k_max, width, floor=1e-12)
        f = lambda k: (k / np.sqrt(k * k + m * m) - 1.0) * special.j0(k * r)
        val = _quad.integrate(f, edges)
        # the remainder beyond k_max is O(m^2 (k_max r)^{-3/2} / r) and oscillating
        # int_0^inf J0(k r) dk = 1/r
        return (val + 1.0 / r) / (2.0 * math.pi)
    raise ValueError("resolvent Fourier oracle implemented for d = 1, 2, 3")


# -- fractional power through the Levy integral ------------------------------


def spectral_free_fractional(u, m, alpha):
    """(|xi|^2 + m^2)^{alpha/2} applied as a Fourier multiplier on the grid."""
    grid = u.grid
    k2 = np.sum(grid.wavevectors() ** 2, axis=0)
    out = np.fft.ifftn((k2 + m * m) ** (0.5 * alpha) * np.fft.fftn(u.values))
    if np.isrealobj(u.values):
        out = out.real
    return GridFunction(out, grid)


def _periodized_density(m, alpha, grid, images):
    """Levy density summed over periodic images, evaluated at minimal-image displacements."""
    d, L = grid.d, grid.box_length
    disp = grid.displacements()
    r0 = np.sqrt(np.sum(disp**2, axis=0))
    out = np.zeros(grid.shape)
    origin = r0 == 0
    if m == 0 and d == 1:
        s = 1.0 + alpha
        y = disp[0] / L
        c0 = _levy_powerlaw_constant(alpha, 1)
        with np.errstate(divide="ignore"):
            out = c0 * (np.where(origin, 0.0, np.abs(disp[0]) ** -s)
                        + L**-s * (special.zeta(s, 1.0 + y) + special.zeta(s, 1.0 - y)))
        out[origin] = 0.0
        return out
    if images is None:
        images = 4 if m == 0 else int(min(math.ceil(45.0 / (m * L) + 0.5), {1: 2000, 2: 40, 3: 8}[d]))
    ks = np.arange(-images, images + 1)
    for shift in np.array(np.meshgrid(*([ks] * d), indexing="ij")).reshape(d, -1).T:
        rr = np.sqrt(np.sum((disp + L * shift.reshape((d,) + (1,) * d)) ** 2, axis=0))
        if not shift.any():
            rr = np.where(origin, 1.0, rr)
            out += np.where(origin, 0.0, levy_density(m, alpha, d, rr))
        else:
            out += levy_density(m, alpha, d, rr)
    # remaining images: treat the density as constant over each cell
    R = (images + 0.5) * L * (2.0**d / (math.pi ** (0.5 * d) / gamma(0.5 * d + 1.0))) ** (1.0 / d)
    if m == 0:
        tail = sphere_area(d) * _levy_powerlaw_constant(alpha, d) * R ** (-alpha) / alpha
    elif m * R < 50.0:
        tail, _ = sci_integrate.quad(lambda x: x ** (d - 1) * levy_density(m, alpha, d, x), R, np.inf)
        tail *= sphere_area(d)
    else:
        tail = 0.0
    out[~origin] += tail / L**d
    return out


def _cutoff(rho, delta):
    """Smooth radial cutoff, 1 - (rho/delta)^2 + O(rho^4) near 0 and zero beyond delta."""
    s2 = np.minimum((np.asarray(rho) / delta) ** 2, 1.0)
    with np.errstate(divide="ignore", over="ignore"):
        return np.where(s2 < 1.0, np.exp(1.0 - 1.0 / (1.0 - s2 + (s2 >= 1.0))), 0.0)


def apply_free_fractional(u, m, alpha, delta_cut=None, images=None):
    """Apply (H_{0,m})^alpha to a grid function through the Levy integral.

    The jump integral is a lattice sum against the periodized Levy density.
    Near y = 0 the second-order Taylor polynomial of u, weighted by a smooth
    cutoff of radius ``delta_cut``, is removed from the lattice sum and added
    back as a continuum radial integral, so the singularity of the density
    does not limit accuracy.
    """
    if not isinstance(u, GridFunction):
        raise TypeError("u must be a GridFunction")
    if not 0.0 < alpha <= 1.0:
        raise ValueError("alpha must lie in (0, 1]")
    grid = u.grid
    d, h, L = grid.d, grid.spacing, grid.box_length
    vals = u.values
    amax = np.max(np.abs(vals))
    if amax > 0:
        peak = np.array(np.unravel_index(np.argmax(np.abs(vals)), grid.shape))
        x = grid.coords()
        c = grid.axis()[peak].reshape((d,) + (1,) * d)
        far = np.sqrt(np.sum(grid.minimal_image(x - c) ** 2, axis=0)) > 0.25 * L
        if np.max(np.abs(vals[far]), initial=0.0) > 1e-6 * amax:
            raise SupportError("grid function must be supported within radius L/4")
    if delta_cut is None:
        delta_cut = max(3.0 * h, min(1.0, 0.2 * L))
    disp = grid.displacements()
    rad = np.sqrt(np.sum(disp**2, axis=0))
    w = grid.cell_volume * _periodized_density(m, alpha, grid, images)
    conv = np.fft.ifftn(np.fft.fftn(vals) * np.fft.fftn(w))
    if np.isrealobj(vals):
        conv = conv.real
    jump = conv - vals * w.sum()
    # second-order Taylor correction inside the cutoff
    chi = _cutoff(rad, delta_cut)
    safe = np.where(rad > 0, rad, 1.0)
    n_loc = np.where(rad > 0, levy_density(m, alpha, d, safe), 0.0)
    lattice_moment = grid.cell_volume * np.sum(chi * n_loc * rad**2)
    cont_moment, _ = sci_integrate.quad(
        lambda x: _cutoff(x, delta_cut) * levy_density(m, alpha, d, x) * x ** (d + 1),
        0.0, delta_cut, limit=200, epsabs=0.0, epsrel=1e-13,
    )
    cont_moment *= sphere_area(d)
    lap = spectral_laplacian(vals, grid)
    integral = jump + lap / (2.0 * d) * (cont_moment - lattice_moment)
    return GridFunction(m**alpha * vals - integral, grid)


# -- tables ----------------------------------------------------------------


def kernel_table(params_list, radii, method="auto"):
    rows = []
    for p in params_list:
        for r in radii:
            meth = _auto_method(p, r) if method == "auto" else method
            val, err = heat_kernel(p, r, meth, return_error=True)
            rows.append(KernelRow(p.m, p.alpha, p.d, p.t, float(r), val, meth, err))
    return rows


def write_kernel_table(rows, path):
    with open(path, "w", newline="") as fh:
        writer = csv.DictWriter(fh, fieldnames=KERNEL_COLUMNS, lineterminator="\n")
        writer.writeheader()
        for row in rows:
            rec = asdict(row)
            for key in ("m", "alpha", "t", "r", "value", "err_estimate"):
                rec[key] = repr(float(rec[key]))
            writer.writerow(rec)
