"""Periodic lattice discretization of the torus [-L/2, L/2)^d.

Grid functions are numpy arrays of shape ``(n,) * d`` (axis 0 is x_1) and
are flattened in C order when they act as vectors.  Magnetic derivatives use
Peierls link phases: the hop from x to x + h e_j carries exp(-i h A_j) with
A_j sampled at the link midpoint, so that S = sum_j D_j^dagger D_j + m^2 is
exactly Hermitian, exactly >= m^2 and exactly gauge covariant.
"""

from dataclasses import dataclass, field
import math
from typing import Callable, Optional
import warnings

import numpy as np
import scipy.sparse as sparse

from .opcore import HermitianOperator, SpectralDecomposition

__all__ = [
    "LatticeGrid",
    "GridFunction",
    "VectorPotentialSpec",
    "GaugeFunction",
    "PotentialError",
    "dft",
    "idft",
    "covariant_derivative",
    "covariant_derivatives",
    "magnetic_schrodinger",
    "free_decomposition",
    "mollify",
    "bump",
    "gauge_transform",
    "spectral_gradient",
    "spectral_laplacian",
]


class PotentialError(ValueError):
    """A vector potential is incompatible with the periodic lattice."""


@dataclass(frozen=True)
class LatticeGrid:
    d: int
    n: int
    box_length: float = 2.0 * math.pi

    def __post_init__(self):
        if not 1 <= self.d <= 3:
            raise ValueError("dimension must be 1, 2 or 3")
        if self.n < 2:
            raise ValueError("need at least two points per axis")
        if not self.box_length > 0:
            raise ValueError("box length must be positive")
        if self.n & (self.n - 1):
            warnings.warn(
                f"n={self.n} is not a power of two; the DFT uses the generic transform",
                stacklevel=2,
            )

    @property
    def spacing(self):
        return self.box_length / self.n

    @property
    def shape(self):
        return (self.n,) * self.d

    @property
    def total_points(self):
        return self.n**self.d

    @property
    def cell_volume(self):
        return self.spacing**self.d

    @property
    def volume(self):
        return self.box_length**self.d

    def axis(self):
        return -0.5 * self.box_length + self.spacing * np.arange(self.n)

    def coords(self):
        """Grid point coordinates, shape (d, n, ..., n)."""
        return np.array(np.meshgrid(*([self.axis()] * self.d), indexing="ij"))

    def frequencies(self):
        """Dual frequencies 2 pi k / L in FFT order, k in {-n/2, ..., n/2-1}."""
        return 2.0 * np.pi * np.fft.fftfreq(self.n, d=self.spacing)

    def wavevectors(self):
        return np.array(np.meshgrid(*([self.frequencies()] * self.d), indexing="ij"))

    def minimal_image(self, dx):
        """Map displacements into [-L/2, L/2)."""
        L = self.box_length
        return (dx + 0.5 * L) % L - 0.5 * L

    def displacements(self):
        """Minimal-image displacement of every grid point from the origin, shape (d, ...).

        The grid origin sits at index n/2 of each axis; the displacement
        array is laid out in FFT order (index 0 = zero displacement).
        """
        k = np.fft.fftfreq(self.n, d=1.0 / self.n)
        ax = k * self.spacing
        return np.array(np.meshgrid(*([ax] * self.d), indexing="ij"))

    def norm(self, values):
        """Grid L^2 norm h^{d/2} ||values||."""
        return float(np.sqrt(self.cell_volume) * np.linalg.norm(np.ravel(values)))

    def inner(self, f, g):
        return complex(self.cell_volume * np.vdot(np.ravel(f), np.ravel(g)))

    def l1(self, values):
        return float(self.cell_volume * np.sum(np.abs(values)))


@dataclass
class GridFunction:
    values: np.ndarray
    grid: LatticeGrid

    def __post_init__(self):
        self.values = np.asarray(self.values)
        if self.values.shape != self.grid.shape:
            self.values = self.values.reshape(self.grid.shape)
        if not np.all(np.isfinite(self.values)):
            raise ValueError("grid function has non-finite values")

    @classmethod
    def from_vector(cls, vec, grid):
        return cls(np.asarray(vec).reshape(grid.shape), grid)

    @property
    def vector(self):
        return self.values.ravel()

    def norm(self):
        return self.grid.norm(self.values)

    def __abs__(self):
        return GridFunction(np.abs(self.values), self.grid)


def dft(f):
    """Unitary discrete Fourier transform (FFT order)."""
    return GridFunction(np.fft.fftn(f.values, norm="ortho"), f.grid)


def idft(f):
    return GridFunction(np.fft.ifftn(f.values, norm="ortho"), f.grid)


def spectral_gradient(values, grid):
    """Gradient by Fourier differentiation, shape (d, ...)."""
    fk = np.fft.fftn(values)
    k = grid.wavevectors()
    out = np.array([np.fft.ifftn(1j * k[j] * fk) for j in range(grid.d)])
    return out.real if np.isrealobj(values) else out


def spectral_laplacian(values, grid):
    fk = np.fft.fftn(values)
    k2 = np.sum(grid.wavevectors() ** 2, axis=0)
    out = np.fft.ifftn(-k2 * fk)
    return out.real if np.isrealobj(values) else out


@dataclass(frozen=True)
class GaugeFunction:
    """A real gauge function phi with its gradient.

    ``phi`` and ``grad`` take coordinates of shape (d, ...) and return arrays
    of shape (...) and (d, ...).
    """

    d: int
    phi: Callable
    grad: Callable
    description: str = "custom"

    def samples(self, grid):
        return np.asarray(self.phi(grid.coords()), dtype=float)

    @classmethod
    def constant(cls, d, c):
        return cls(
            d,
            lambda x: np.full(x.shape[1:], float(c)),
            lambda x: np.zeros_like(x, dtype=float),
            f"constant({c})",
        )

    @classmethod
    def quadratic(cls, Q):
        """phi(x) = x.Q.x / 2 with symmetric Q (not periodic on the torus)."""
        Q = np.atleast_2d(np.asarray(Q, dtype=float))
        Q = 0.5 * (Q + Q.T)
        return cls(
            Q.shape[0],
            lambda x: 0.5 * np.einsum("i...,ij,j...->...", x, Q, x),
            lambda x: np.einsum("ij,j...->i...", Q, x),
            "quadratic",
        )

    @classmethod
    def fourier(cls, d, box_length, seed, cutoff=2, amplitude=1.0):
        """Random smooth periodic gauge function (trigonometric polynomial)."""
        modes, a, b = _random_modes(d, seed, cutoff, amplitude)
        kvec = 2.0 * np.pi * modes / box_length

        def phi(x):
            ph = np.einsum("mi,i...->m...", kvec, x)
            return np.einsum("m,m...->...", a, np.cos(ph)) + np.einsum("m,m...->...", b, np.sin(ph))

        def grad(x):
            ph = np.einsum("mi,i...->m...", kvec, x)
            dphi = -a[:, None] * kvec
            dphi2 = b[:, None] * kvec
            return np.einsum("mi,m...->i...", dphi, np.sin(ph)) + np.einsum(
                "mi,m...->i...", dphi2, np.cos(ph)
            )

        return cls(d, phi, grad, f"fourier(seed={seed}, cutoff={cutoff})")


def _random_modes(d, seed, cutoff, amplitude):
    rng = np.random.default_rng(seed)
    rng_modes = np.array(np.meshgrid(*([np.arange(-cutoff, cutoff + 1)] * d), indexing="ij"))
    modes = rng_modes.reshape(d, -1).T
    # keep one representative of each +-k pair, drop k = 0
    keep = [tuple(k) > tuple(-k) for k in modes]
    modes = modes[np.array(keep)]
    weight = amplitude / (1.0 + np.sum(modes**2, axis=1))
    a = weight * rng.standard_normal(len(modes))
    b = weight * rng.standard_normal(len(modes))
    return modes, a, b


@dataclass(frozen=True)
class VectorPotentialSpec:
    """A vector potential A(x), optionally plus the gradient of a gauge function.

    kind is ``"zero"``, ``"linear"`` (A = Adot x with symmetric Adot) or
    ``"expression"`` (a callable).  Expression potentials must be periodic on
    the box unless flagged ``compact_support``.
    """

    d: int
    kind: str = "zero"
    matrix: Optional[np.ndarray] = None
    func: Optional[Callable] = None
    periodic: bool = True
    compact_support: bool = False
    gauge: Optional[GaugeFunction] = None
    description: str = ""

    def __post_init__(self):
        if self.kind not in ("zero", "linear", "expression"):
            raise ValueError(f"unknown potential kind {self.kind!r}")
        if self.kind == "linear":
            M = np.atleast_2d(np.asarray(self.matrix, dtype=float))
            if M.shape != (self.d, self.d):
                raise ValueError("linear potential needs a d x d matrix")
            if not np.allclose(M, M.T, atol=1e-14):
                raise ValueError("linear potential matrix must be symmetric")
            object.__setattr__(self, "matrix", M)
        if self.kind == "expression" and self.func is None:
            raise ValueError("expression potential needs a callable")

    @classmethod
    def zero(cls, d):
        return cls(d, "zero", description="zero")

    @classmethod
    def linear(cls, matrix):
        M = np.atleast_2d(np.asarray(matrix, dtype=float))
        return cls(M.shape[0], "linear", matrix=M, periodic=False, description="linear")

    @classmethod
    def expression(cls, d, func, periodic=True, compact_support=False, description="expression"):
        return cls(d, "expression", func=func, periodic=periodic,
                   compact_support=compact_support, description=description)

    @classmethod
    def random(cls, d, box_length, seed, cutoff=2, amplitude=1.0):
        """Random smooth periodic potential, one trigonometric polynomial per component."""
        comps = [_random_modes(d, (seed, j), cutoff, amplitude) for j in range(d)]
        kvecs = [2.0 * np.pi * c[0] / box_length for c in comps]

        def func(x):
            out = []
            for (modes, a, b), kvec in zip(comps, kvecs):
                ph = np.einsum("mi,i...->m...", kvec, x)
                out.append(
                    np.einsum("m,m...->...", a, np.cos(ph)) + np.einsum("m,m...->...", b, np.sin(ph))
                )
            return np.array(out)

        return cls(d, "expression", func=func, periodic=True,
                   description=f"random(seed={seed}, cutoff={cutoff}, amplitude={amplitude})")

    def with_gauge(self, gauge):
        if gauge.d != self.d:
            raise ValueError("gauge function dimension mismatch")
        if self.gauge is not None:
            raise ValueError("potential already carries a gauge part")
        return VectorPotentialSpec(
            self.d, self.kind, self.matrix, self.func, self.periodic, self.compact_support,
            gauge, f"{self.description}+grad[{gauge.description}]",
        )

    def base(self, x):
        """A(x) without the gauge part; x has shape (d, ...)."""
        x = np.asarray(x, dtype=float)
        if self.kind == "zero":
            return np.zeros_like(x)
        if self.kind == "linear":
            return np.einsum("ij,j...->i...", self.matrix, x)
        return np.asarray(self.func(x), dtype=float).reshape(x.shape)

    def __call__(self, x):
        out = self.base(x)
        if self.gauge is not None:
            out = out + self.gauge.grad(np.asarray(x, dtype=float))
        return out

    @property
    def is_zero(self):
        return self.kind == "zero" and self.gauge is None

    def on_grid(self, grid):
        return self(grid.coords())

    def on_links(self, grid, include_gauge=True):
        """A_j at the midpoint of the link x -> x + h e_j, shape (d, ...)."""
        x = grid.coords()
        out = np.empty_like(x)
        for j in range(grid.d):
            xm = x.copy()
            xm[j] += 0.5 * grid.spacing
            out[j] = (self if include_gauge else self.base)(xm)[j]
        return out

    def check_periodic(self, grid, tol=1e-8):
        if self.kind != "expression" or self.compact_support:
            return
        L = grid.box_length
        for j in range(grid.d):
            lo = grid.coords()
            hi = lo.copy()
            lo[j] = -0.5 * L
            hi[j] = 0.5 * L
            gap = np.max(np.abs(self.base(lo) - self.base(hi)))
            if gap > tol * max(1.0, np.max(np.abs(self.base(lo)))):
                raise PotentialError(
                    "expression potential is not periodic on the box; "
                    "flag it compact_support if its support lies inside the box"
                )


def _shift_matrix(grid, axis):
    """Sparse matrix T with (T u)(x) = u(x + h e_axis), periodic."""
    idx = np.arange(grid.total_points).reshape(grid.shape)
    target = np.roll(idx, -1, axis=axis).ravel()
    N = grid.total_points
    return sparse.csr_matrix((np.ones(N), (np.arange(N), target)), shape=(N, N))


def _link_phases(A, grid, axis, exact_gauge=True):
    """exp(-i * line integral of A along the link x -> x + h e_axis)."""
    h = grid.spacing
    if exact_gauge and A.gauge is not None:
        base = A.on_links(grid, include_gauge=False)[axis]
        phi = A.gauge.samples(grid)
        # exact link difference; telescopes under conjugation by e^{i phi}
        angle = h * base + (np.roll(phi, -1, axis=axis) - phi)
    else:
        angle = h * A.on_links(grid)[axis]
    return np.exp(-1j * angle).ravel()


def covariant_derivative(j, A, grid, scheme="forward", exact_gauge=True):
    """Sparse matrix of -i d_j - A_j for axis j in 1..d.

    ``forward``: (1/(ih)) (U T - 1), the building block of S.
    ``central``: (1/(2ih)) (U_+ T_+ - U_- T_-), second order on smooth functions.
    """
    if not 1 <= j <= grid.d:
        raise ValueError(f"axis {j} out of range for d={grid.d}")
    j -= 1
    if A.d != grid.d:
        raise ValueError("potential and grid dimensions differ")
    A.check_periodic(grid)
    h = grid.spacing
    T = _shift_matrix(grid, j)
    U = sparse.diags(_link_phases(A, grid, j, exact_gauge))
    hop = U @ T
    N = grid.total_points
    if scheme == "forward":
        return ((hop - sparse.identity(N)) / (1j * h)).tocsr()
    if scheme == "central":
        # backward hop x -> x - h e_j is the adjoint of the forward hop
        return ((hop - hop.conj().T) / (2j * h)).tocsr()
    raise ValueError(f"unknown scheme {scheme!r}")


def covariant_derivatives(A, grid, scheme="forward", exact_gauge=True):
    return [covariant_derivative(j, A, grid, scheme, exact_gauge) for j in range(1, grid.d + 1)]


def free_decomposition(grid, m):
    """Exact eigendecomposition of the A = 0 lattice operator by plane waves."""
    h = grid.spacing
    k = grid.wavevectors()
    lam = np.sum((2.0 / h * np.sin(0.5 * h * k)) ** 2, axis=0).ravel() + m * m
    x = grid.coords().reshape(grid.d, -1)
    kk = k.reshape(grid.d, -1)
    V = np.exp(1j * (x.T @ kk)) / math.sqrt(grid.total_points)
    order = np.argsort(lam, kind="stable")
    return SpectralDecomposition(lam[order], V[:, order])


def magnetic_schrodinger(A, m, grid, exact_gauge=True):
    """S = sum_j D_j^dagger D_j + m^2 on the lattice, as a dense HermitianOperator.

    Expanded, S = (2d/h^2 + m^2) - h^-2 sum_j (U_j T_j + h.c.), which is
    assembled directly so that S is Hermitian to the last bit.
    """
    if m < 0:
        raise ValueError("mass must be non-negative")
    if A.d != grid.d:
        raise ValueError("potential and grid dimensions differ")
    A.check_periodic(grid)
    h = grid.spacing
    N = grid.total_points
    hop = sparse.csr_matrix((N, N), dtype=complex)
    for j in range(grid.d):
        hop = hop + sparse.diags(_link_phases(A, grid, j, exact_gauge)) @ _shift_matrix(grid, j)
    hop = hop.toarray()
    S = -(hop + hop.conj().T) / (h * h)
    S[np.diag_indices(N)] += 2.0 * grid.d / (h * h) + m * m
    spectral = free_decomposition(grid, m) if A.is_zero else None
    return HermitianOperator(S, grid, spectral=spectral, check=False)


def bump(grid, center=None, radius=1.0, height=1.0):
    """Smooth compactly supported bump exp(1 - 1/(1 - r^2/radius^2)), peak ``height``."""
    x = grid.coords()
    c = np.zeros(grid.d) if center is None else np.asarray(center, dtype=float)
    dx = grid.minimal_image(x - c.reshape((grid.d,) + (1,) * grid.d))
    r2 = np.sum(dx**2, axis=0) / radius**2
    out = np.zeros(grid.shape)
    inside = r2 < 1.0
    out[inside] = height * np.exp(1.0 - 1.0 / (1.0 - r2[inside]))
    return out


def _mollifier_weights(grid, delta):
    disp = grid.displacements()
    r2 = np.sum(disp**2, axis=0) / delta**2
    rho = np.zeros(grid.shape)
    inside = r2 < 1.0
    rho[inside] = np.exp(-1.0 / (1.0 - r2[inside]))
    rho /= rho.sum() * grid.cell_volume
    return rho


def mollify(f, delta):
    """Periodic convolution with the normalized compact bump of radius delta.

    Summed directly over the kernel support, so non-negative input stays
    non-negative exactly.  delta below the grid spacing returns a copy.
    """
    grid = f.grid
    if delta <= grid.spacing:
        return GridFunction(f.values.copy(), grid)
    rho = _mollifier_weights(grid, delta)
    out = np.zeros_like(f.values, dtype=np.result_type(f.values, float))
    for idx in zip(*np.nonzero(rho)):
        w = rho[idx] * grid.cell_volume
        shift = tuple(-int(s) if s < grid.n // 2 else grid.n - int(s) for s in idx)
        # (rho * f)(x) = sum_y rho(y) f(x - y)
        out += w * np.roll(f.values, tuple(-s for s in shift), axis=tuple(range(grid.d)))
    return GridFunction(out, grid)


def gauge_transform(op, phi):
    """e^{i phi} op e^{-i phi} for a diagonal phase; spectrum and cache carried over."""
    grid = op.grid
    if isinstance(phi, GaugeFunction):
        phi = phi.samples(grid)
    phase = np.exp(1j * np.ravel(phi))
    matrix = op.matrix * np.outer(phase, phase.conj())
    spectral = None
    if op._spectral is not None:
        spectral = SpectralDecomposition(
            op._spectral.eigenvalues, phase[:, None] * op._spectral.eigenvectors
        )
    return HermitianOperator(matrix, grid, spectral=spectral, check=False)
