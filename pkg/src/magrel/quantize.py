"""Three lattice quantizations of sqrt((xi - A(x))^2 + m^2).

* ``weyl_midpoint``: kernel h_m(x - y) exp(i (x - y).A((x + y)/2))
* ``line_integral``: the phase averages A along the segment from y to x
* ``operator_sqrt``: square root of the Peierls operator S

h_m is the kernel of the free multiplier sqrt(|xi|^2 + m^2) on the grid.
Displacements x - y use the minimal-image convention, and the Weyl and
line-integral matrices are Hermitized, which only changes entries whose
segment crosses the seam of a non-periodic potential.
"""

import csv
from dataclasses import dataclass, asdict
from enum import Enum
import math

import numpy as np

from . import _quad
from .lattice import GaugeFunction, LatticeGrid, magnetic_schrodinger
from .opcore import HermitianOperator, SpectralDecomposition, eig, op_function
from .report import VerificationCheck

__all__ = [
    "QuantizationKind",
    "free_kernel_matrix",
    "build_h1",
    "build_h2",
    "build_h3",
    "build",
    "gauge_covariance_check",
    "coincidence_check",
    "CoincidenceReport",
    "ComparisonRow",
    "write_comparison_table",
    "smooth_subspace",
]

COMPARISON_COLUMNS = ("n", "pair", "frobenius_gap", "relative_gap", "subspace_gap",
                      "min_eig_first", "min_eig_second")


class QuantizationKind(str, Enum):
    WEYL_MIDPOINT = "weyl_midpoint"
    LINE_INTEGRAL = "line_integral"
    OPERATOR_SQRT = "operator_sqrt"


def _free_symbol_kernel(m, grid):
    """h_m on the displacement lattice (FFT order), real and even."""
    k2 = np.sum(grid.wavevectors() ** 2, axis=0)
    return np.fft.ifftn(np.sqrt(k2 + m * m)).real


def _pair_data(grid):
    """Index offsets and minimal-image displacements x - y for all pairs."""
    idx = np.indices(grid.shape).reshape(grid.d, -1)
    diff = (idx[:, :, None] - idx[:, None, :]) % grid.n
    signed = np.where(diff >= grid.n // 2, diff - grid.n, diff)
    return diff, signed * grid.spacing


def free_kernel_matrix(m, grid):
    """Matrix of the free operator with entries h_m(x - y)."""
    h = _free_symbol_kernel(m, grid)
    diff, _ = _pair_data(grid)
    K = h[tuple(diff)]
    k2 = np.sum(grid.wavevectors() ** 2, axis=0)
    x = grid.coords().reshape(grid.d, -1)
    V = np.exp(1j * (x.T @ grid.wavevectors().reshape(grid.d, -1))) / math.sqrt(grid.total_points)
    lam = np.sqrt(k2 + m * m).ravel()
    order = np.argsort(lam, kind="stable")
    spec = SpectralDecomposition(lam[order], V[:, order])
    return HermitianOperator(K.astype(complex), grid, spectral=spec, check=False)


def _hermitize(K):
    return 0.5 * (K + K.conj().T)


def _assemble(A, m, grid, phase_fn, exact_gauge):
    if A.d != grid.d:
        raise ValueError("potential and grid dimensions differ")
    A.check_periodic(grid)
    h = _free_symbol_kernel(m, grid)
    diff, delta = _pair_data(grid)
    y = grid.coords().reshape(grid.d, -1)[:, None, :]
    field = A.base if exact_gauge else A

    def along(points):
        return field(points.reshape(grid.d, -1)).reshape(delta.shape)

    phase = phase_fn(delta, y, along)
    if exact_gauge and A.gauge is not None:
        phi = A.gauge.samples(grid).ravel()
        phase = phase + (phi[:, None] - phi[None, :])
    K = h[tuple(diff)] * np.exp(1j * phase)
    return HermitianOperator(_hermitize(K), grid, check=False)


def build_h1(A, m, grid):
    """Weyl quantization with mid-point prescription (gradient part included)."""
    def phase(delta, y, along):
        return np.einsum("i...,i...->...", delta, along(y + 0.5 * delta))

    return _assemble(A, m, grid, phase, exact_gauge=False)


def build_h2(A, m, grid, n_theta=8):
    """Line-integral quantization; the segment average uses n_theta Gauss-Legendre nodes.

    A gauge part grad(phi) enters through the exact difference phi(x) - phi(y).
    """
    x_gl, w_gl = _quad._legendre(n_theta)
    theta = 0.5 * (x_gl + 1.0)
    w_th = 0.5 * w_gl

    def phase(delta, y, along):
        acc = np.zeros(delta.shape[1:])
        for th, w in zip(theta, w_th):
            acc += w * np.einsum("i...,i...->...", delta, along(y + th * delta))
        return acc

    return _assemble(A, m, grid, phase, exact_gauge=True)


def build_h3(A, m, grid):
    """Operator square root of the Peierls magnetic Schrodinger operator."""
    S = magnetic_schrodinger(A, m, grid)
    return op_function(S, lambda w: np.sqrt(np.clip(w, 0.0, None)))


def build(kind, A, m, grid, **kwargs):
    kind = QuantizationKind(kind)
    if kind is QuantizationKind.WEYL_MIDPOINT:
        return build_h1(A, m, grid)
    if kind is QuantizationKind.LINE_INTEGRAL:
        return build_h2(A, m, grid, **kwargs)
    return build_h3(A, m, grid)


def gauge_covariance_check(kind, A, phi, m, grid, tolerance=1e-10):
    """Relative Frobenius defect of H_{A + grad phi} against e^{i phi} H_A e^{-i phi}."""
    kind = QuantizationKind(kind)
    if not isinstance(phi, GaugeFunction):
        raise TypeError("phi must be a GaugeFunction")
    H = build(kind, A, m, grid)
    Hg = build(kind, A.with_gauge(phi), m, grid)
    p = np.exp(1j * phi.samples(grid).ravel())
    conj = H.matrix * np.outer(p, p.conj())
    defect = np.linalg.norm(Hg.matrix - conj) / np.linalg.norm(conj)
    covariant = kind is not QuantizationKind.WEYL_MIDPOINT
    return VerificationCheck(
        name=f"gauge_covariance[{kind.value}]",
        paper_ref="gauge covariance of the quantizations",
        max_violation=float(defect),
        tolerance=tolerance,
        details={"kind": kind.value, "gauge": phi.description, "n": grid.n, "d": grid.d},
        diagnostic=not covariant,
    )


def smooth_subspace(grid, k_max=3, window_radius=None):
    """Orthonormal basis of windowed low-frequency plane waves inside the box.

    Used to compare operators on smooth states, where lattice discretizations
    converge, instead of on the grid-scale modes where they never agree.
    """
    L = grid.box_length
    if window_radius is None:
        window_radius = 0.3 * L
    x = grid.coords()
    r2 = np.sum(x**2, axis=0) / window_radius**2
    inside = r2 < 1.0
    win = np.zeros(grid.shape)
    win[inside] = np.exp(1.0 - 1.0 / (1.0 - r2[inside]))
    ks = np.arange(-k_max, k_max + 1)
    cols = []
    for kv in np.array(np.meshgrid(*([ks] * grid.d), indexing="ij")).reshape(grid.d, -1).T:
        ph = np.einsum("i,i...->...", 2.0 * np.pi * kv / L, x)
        cols.append((win * np.exp(1j * ph)).ravel())
    Q, _ = np.linalg.qr(np.array(cols).T)
    return Q


@dataclass(frozen=True)
class ComparisonRow:
    n: int
    pair: str
    frobenius_gap: float
    relative_gap: float
    subspace_gap: float
    min_eig_first: float
    min_eig_second: float


@dataclass
class CoincidenceReport:
    rows: list
    h1_h2_max_entry_gap: float
    subspace_gaps: list
    relative_gaps: list
    min_eigs: dict

    @property
    def monotone(self):
        g = self.subspace_gaps
        return all(b < a for a, b in zip(g, g[1:]))

    @property
    def halving_ratios(self):
        g = self.subspace_gaps
        return [a / b for a, b in zip(g, g[1:])]


def coincidence_check(A_linear, m, grids, n_theta=8, k_max=3):
    """Compare the three quantizations for a linear potential along a grid sequence.

    Records the entrywise H1 - H2 gap, the relative Frobenius H1 - H3 gap, and
    the H1 - H3 gap compressed to a fixed smooth subspace (Frobenius norm,
    relative to the H3 compression).
    """
    if A_linear.kind != "linear":
        raise ValueError("coincidence_check needs a linear potential")
    rows, sub, rel = [], [], []
    mins = {"h1": [], "h2": [], "h3": []}
    worst12 = 0.0
    for grid in grids:
        H1 = build_h1(A_linear, m, grid)
        H2 = build_h2(A_linear, m, grid, n_theta)
        H3 = build_h3(A_linear, m, grid)
        worst12 = max(worst12, float(np.abs(H1.matrix - H2.matrix).max()))
        diff13 = H1.matrix - H3.matrix
        Q = smooth_subspace(grid, k_max)
        c13 = Q.conj().T @ diff13 @ Q
        c3 = Q.conj().T @ H3.matrix @ Q
        sgap = float(np.linalg.norm(c13) / np.linalg.norm(c3))
        rgap = float(np.linalg.norm(diff13) / np.linalg.norm(H3.matrix))
        e = {k: float(eig(H).eigenvalues[0]) for k, H in (("h1", H1), ("h2", H2), ("h3", H3))}
        for k in mins:
            mins[k].append(e[k])
        rows.append(ComparisonRow(grid.n, "h1-h2", float(np.linalg.norm(H1.matrix - H2.matrix)),
                                  float(np.linalg.norm(H1.matrix - H2.matrix) / np.linalg.norm(H2.matrix)),
                                  0.0, e["h1"], e["h2"]))
        rows.append(ComparisonRow(grid.n, "h1-h3", float(np.linalg.norm(diff13)), rgap, sgap,
                                  e["h1"], e["h3"]))
        sub.append(sgap)
        rel.append(rgap)
    return CoincidenceReport(rows, worst12, sub, rel, mins)


def write_comparison_table(rows, path):
    with open(path, "w", newline="") as fh:
        writer = csv.DictWriter(fh, fieldnames=COMPARISON_COLUMNS, lineterminator="\n")
        writer.writeheader()
        for row in rows:
            rec = asdict(row)
            for key, val in rec.items():
                if isinstance(val, float):
                    rec[key] = repr(val)
            writer.writerow(rec)
