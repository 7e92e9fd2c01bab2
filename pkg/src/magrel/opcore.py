"""Dense Hermitian functional calculus.

Every operator in the package (the magnetic Schroedinger operator S, its
square root, fractional powers, semigroups) is a :class:`HermitianOperator`
whose spectral decomposition is computed once and cached.  The integral
formulas for negative and fractional powers are implemented separately as
cross-checks of the spectral route.
"""

from dataclasses import dataclass
import math
import threading

import numpy as np
import scipy.linalg

from .specfun import SpecfunError, gamma

__all__ = [
    "HermitianOperator",
    "SpectralDecomposition",
    "OperatorDomainError",
    "EigenSolverError",
    "eig",
    "op_function",
    "power",
    "semigroup",
    "balakrishnan_power",
    "resolvent_power",
    "lemma21_bounds",
]

HERMITIAN_RTOL = 1e-12


class OperatorDomainError(ValueError):
    """A function is undefined on part of the spectrum."""


class EigenSolverError(ArithmeticError):
    def __init__(self, message, residual):
        super().__init__(message)
        self.residual = residual


@dataclass(frozen=True)
class SpectralDecomposition:
    eigenvalues: np.ndarray
    eigenvectors: np.ndarray

    def reconstruct(self, values=None):
        w = self.eigenvalues if values is None else values
        v = self.eigenvectors
        return (v * w) @ v.conj().T

    def to_basis(self, u):
        return self.eigenvectors.conj().T @ u

    def from_basis(self, c):
        return self.eigenvectors @ c


class HermitianOperator:
    """A dense Hermitian matrix on a lattice with a cached eigendecomposition."""

    def __init__(self, matrix, grid=None, spectral=None, check=True):
        matrix = np.asarray(matrix)
        if matrix.ndim != 2 or matrix.shape[0] != matrix.shape[1]:
            raise ValueError("matrix must be square")
        if not np.iscomplexobj(matrix):
            matrix = matrix.astype(complex)
        if check:
            defect = np.linalg.norm(matrix - matrix.conj().T)
            scale = np.linalg.norm(matrix)
            if defect > HERMITIAN_RTOL * max(scale, 1e-300):
                raise ValueError(f"matrix is not Hermitian (relative defect {defect / scale:.2e})")
        self.matrix = matrix
        self.grid = grid
        self._spectral = spectral
        self._lock = threading.Lock()

    @property
    def size(self):
        return self.matrix.shape[0]

    @property
    def spectral(self):
        return eig(self)

    def __matmul__(self, other):
        if isinstance(other, HermitianOperator):
            return self.matrix @ other.matrix
        return self.matrix @ np.asarray(other)

    def __add__(self, other):
        if isinstance(other, HermitianOperator):
            other = other.matrix
        return HermitianOperator(self.matrix + other, self.grid, check=False)

    def __sub__(self, other):
        if isinstance(other, HermitianOperator):
            other = other.matrix
        return HermitianOperator(self.matrix - other, self.grid, check=False)

    def shifted(self, c):
        """op + c*Id, reusing the cached eigenvectors."""
        spec = None
        if self._spectral is not None:
            spec = SpectralDecomposition(
                self._spectral.eigenvalues + c, self._spectral.eigenvectors
            )
        return HermitianOperator(
            self.matrix + c * np.eye(self.size), self.grid, spectral=spec, check=False
        )

    def min_eigenvalue(self):
        return float(self.spectral.eigenvalues[0])

    def norm(self):
        """Operator 2-norm."""
        w = self.spectral.eigenvalues
        return float(max(abs(w[0]), abs(w[-1])))

    def __repr__(self):
        return f"HermitianOperator(N={self.size}, cached={self._spectral is not None})"


def eig(op, check=True):
    """Spectral decomposition of ``op``, computed once and cached on it."""
    if op._spectral is not None:
        return op._spectral
    with op._lock:
        if op._spectral is None:
            w, v = scipy.linalg.eigh(op.matrix, driver="evr")
            if check:
                scale = max(np.linalg.norm(op.matrix), 1e-300)
                residual = np.linalg.norm(op.matrix @ v - v * w) / scale
                if not np.isfinite(residual) or residual > 1e-10:
                    raise EigenSolverError(
                        f"eigendecomposition residual {residual:.2e}", residual
                    )
            op._spectral = SpectralDecomposition(w, v)
    return op._spectral


def _apply_scalar(f, w):
    with np.errstate(divide="raise", invalid="raise", over="raise"):
        try:
            fw = np.asarray(f(w), dtype=float)
        except FloatingPointError as exc:
            raise OperatorDomainError(f"function undefined on the spectrum: {exc}") from None
    if fw.shape != w.shape or not np.all(np.isfinite(fw)):
        raise OperatorDomainError("function not finite on the spectrum")
    return fw


def op_function(op, f):
    """f(op) = V f(Lambda) V^dagger for a real scalar function f."""
    spec = eig(op)
    fw = _apply_scalar(f, spec.eigenvalues)
    matrix = spec.reconstruct(fw)
    matrix = 0.5 * (matrix + matrix.conj().T)
    # f(op) shares eigenvectors with op; keep them, sorted by f.
    order = np.argsort(fw, kind="stable")
    cached = SpectralDecomposition(fw[order], spec.eigenvectors[:, order])
    return HermitianOperator(matrix, op.grid, spectral=cached, check=False)


def apply_function(op, f, u):
    """f(op) u without forming f(op); u may be a vector or a stack of columns."""
    spec = eig(op)
    fw = _apply_scalar(f, spec.eigenvalues)
    c = spec.to_basis(u)
    c = c * (fw if c.ndim == 1 else fw[:, None])
    return spec.from_basis(c)


def _spectral_power(exponent):
    def f(w):
        if exponent < 0 and np.any(w <= 0):
            raise OperatorDomainError("negative power of an operator with zero in its spectrum")
        return np.power(np.clip(w, 0.0, None), exponent)

    return f


def power(op, exponent):
    """op**exponent for a positive semidefinite op (spectrum clipped at 0)."""
    return op_function(op, _spectral_power(exponent))


def semigroup(op, t):
    """exp(-t op)."""
    return op_function(op, lambda w: np.exp(-t * w))


# -- integral representations of fractional powers ------------------------

_GL_X, _GL_W = np.polynomial.legendre.leggauss(24)


def _log_quadrature(weight_exponent, lam, tol=1e-13, panel=0.5):
    """Integrate e^{p s} exp(-lam e^s) ds over the real line for every lam > 0.

    p = ``weight_exponent`` > 0.  The left tail s < s0 is summed exactly from
    the Taylor series of exp(-lam e^s); the rest uses composite Gauss-Legendre
    panels in s = log t, where the integrand is smooth and double-exponentially
    decaying.
    """
    lam = np.asarray(lam, dtype=float)
    p = float(weight_exponent)
    lam_max = lam.max()
    lam_min = lam.min()
    s0 = math.log(1e-3 / lam_max)
    s1 = math.log(60.0 / lam_min) + 1.0
    edges = np.arange(s0, s1 + panel, panel)
    a, b = edges[:-1], edges[1:]
    half = 0.5 * (b - a)
    nodes = (0.5 * (a + b))[:, None] + half[:, None] * _GL_X[None, :]
    weights = half[:, None] * _GL_W[None, :]
    s = nodes.ravel()
    wq = weights.ravel()
    es = np.exp(s)
    integrand = np.exp(p * s[None, :] - lam[:, None] * es[None, :])
    body = integrand @ wq
    # exact tail: sum_k (-lam)^k e^{s0 (k+p)} / (k! (k+p))
    tail = np.zeros_like(lam)
    term_scale = np.ones_like(lam)
    for k in range(0, 40):
        contrib = term_scale * math.exp(s0 * (k + p)) / (k + p)
        tail = tail + contrib
        if np.all(np.abs(contrib) <= tol * np.abs(tail)):
            break
        term_scale = term_scale * (-lam) / (k + 1)
    return body + tail


def _check_positive(spec, what):
    if spec.eigenvalues[0] <= 0:
        raise OperatorDomainError(f"{what} requires a strictly positive operator (m > 0)")


def balakrishnan_power(S, alpha, u):
    """S^(alpha/2) u from the Gamma-function integral

        S^(alpha/2) u = 1/Gamma((2-alpha)/2) int_0^inf t^(-alpha/2) e^(-tS) S u dt.

    Evaluated in the eigenbasis of S: the quadrature runs once over all
    eigenvalues, then the coefficients of u are rescaled.
    """
    if not 0.0 < alpha < 2.0:
        raise ValueError("alpha must lie in (0, 2)")
    spec = eig(S)
    _check_positive(spec, "balakrishnan_power")
    lam = spec.eigenvalues
    # t = e^s: t^(-alpha/2) e^(-t lam) lam dt = lam e^{(1-alpha/2)s} e^{-lam e^s} ds
    integral = _log_quadrature(1.0 - alpha / 2.0, lam)
    multiplier = lam * integral / gamma(1.0 - alpha / 2.0)
    u = np.asarray(u)
    c = spec.to_basis(u)
    c = c * (multiplier if c.ndim == 1 else multiplier[:, None])
    return spec.from_basis(c)


def resolvent_power(S, beta, u):
    """S^(-beta/2) u from 1/Gamma(beta/2) int_0^inf t^(beta/2-1) e^(-tS) u dt, 0 < beta <= 2."""
    if not 0.0 < beta <= 2.0:
        raise ValueError("beta must lie in (0, 2]")
    spec = eig(S)
    _check_positive(spec, "resolvent_power")
    lam = spec.eigenvalues
    integral = _log_quadrature(beta / 2.0, lam)
    multiplier = integral / gamma(beta / 2.0)
    u = np.asarray(u)
    c = spec.to_basis(u)
    c = c * (multiplier if c.ndim == 1 else multiplier[:, None])
    return spec.from_basis(c)


@dataclass(frozen=True)
class HeatBoundsReport:
    t: float
    sqrt_semigroup_norm: float
    sqrt_semigroup_bound: float
    square_semigroup_norm: float
    square_semigroup_bound: float
    gradient_semigroup_norm: float
    semigroup_gradient_norm: float
    gradient_bound: float

    @property
    def max_violation(self):
        """Largest relative excess over the bounds (<= 0 when all hold)."""
        return max(
            self.sqrt_semigroup_norm / self.sqrt_semigroup_bound - 1.0,
            self.square_semigroup_norm / self.square_semigroup_bound - 1.0,
            self.gradient_semigroup_norm / self.gradient_bound - 1.0,
            self.semigroup_gradient_norm / self.gradient_bound - 1.0,
        )

    @property
    def passed(self):
        return self.max_violation <= 1e-10


def lemma21_bounds(S, t, derivatives=None, mass=0.0):
    """Operator norms of H e^{-tH^2}, H^2 e^{-tH^2} (H = sqrt(S)) and of the
    covariant gradient composed with the massless semigroup.

    ``derivatives`` is the list of covariant difference matrices D_j with
    S = sum_j D_j^dagger D_j + mass^2; when omitted the gradient norms are
    reported as 0.  Bounds: (2et)^(-1/2), (et)^(-1), (d/(2et))^(1/2).
    """
    if t <= 0:
        raise ValueError("t must be positive")
    lam = np.clip(eig(S).eigenvalues, 0.0, None)
    sqrt_norm = float(np.max(np.sqrt(lam) * np.exp(-t * lam)))
    square_norm = float(np.max(lam * np.exp(-t * lam)))
    grad_norm = grad_norm_adj = 0.0
    d = len(derivatives) if derivatives else 1
    if derivatives:
        semi = semigroup(S.shifted(-mass * mass), t).matrix
        # D_j discretizes -i d_j - A_j, so i grad + A is -D_j; the sign drops out of the norms.
        dense = [Dj.toarray() if hasattr(Dj, "toarray") else np.asarray(Dj) for Dj in derivatives]
        grad_norm = float(np.linalg.norm(np.vstack([Dj @ semi for Dj in dense]), 2))
        grad_norm_adj = float(np.linalg.norm(np.hstack([semi @ Dj for Dj in dense]), 2))
    return HeatBoundsReport(
        t=t,
        sqrt_semigroup_norm=sqrt_norm,
        sqrt_semigroup_bound=(2.0 * math.e * t) ** -0.5,
        square_semigroup_norm=square_norm,
        square_semigroup_bound=1.0 / (math.e * t),
        gradient_semigroup_norm=grad_norm,
        semigroup_gradient_norm=grad_norm_adj,
        gradient_bound=(d / (2.0 * math.e * t)) ** 0.5,
    )
