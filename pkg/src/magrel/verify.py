"""Inequality and identity checks on explicitly constructed lattice operators.

Each check returns a :class:`VerificationCheck`.  The magnetic operator is the
Peierls matrix S_A; its free counterpart S_0 uses the same stencil with A = 0,
so that comparisons such as Kato's inequality and semigroup domination are
between matched discretizations.  Functions of S are applied through one
eigendecomposition of S at m = 0, since S + m^2 shares its eigenvectors.
"""

from dataclasses import dataclass
import math

import numpy as np

from .lattice import (
    GridFunction,
    LatticeGrid,
    VectorPotentialSpec,
    bump,
    covariant_derivatives,
    magnetic_schrodinger,
    spectral_gradient,
    spectral_laplacian,
)
from .opcore import eig, lemma21_bounds
from .quantize import build_h3
from .report import VerificationCheck

__all__ = [
    "StateSpec",
    "OperatorPair",
    "sgn",
    "scale",
    "default_test_functions",
    "kato_check",
    "kato_equality_check",
    "difference_quotient_check",
    "epsilon_inequality",
    "epsilon_regularized_check",
    "diamagnetic_check",
    "commutator_identity_check",
    "alpha_limit_check",
    "mass_limit_check",
    "potential_lower_bound_check",
    "heat_bounds_check",
    "fractional_bound_check",
    "weak_l1_quasinorm",
]

ZERO_THRESHOLD = 1e-300

STATE_KINDS = ("gaussian_bump", "random_smooth", "plane_wave", "nonneg_bump")


@dataclass(frozen=True)
class StateSpec:
    """Description of a test state; ``values(grid)`` samples it.

    Bump kinds are centred inside the box and decay to below 1e-12 of their
    peak at the box edge for the default widths.
    """

    kind: str
    center: tuple = ()
    width: float = 0.4
    momentum: tuple = ()
    phase: float = 0.0
    seed: int = 0
    cutoff: int = 3
    normalize: bool = True

    def __post_init__(self):
        if self.kind not in STATE_KINDS:
            raise ValueError(f"unknown state kind {self.kind!r}")

    @classmethod
    def random_bump(cls, d, seed, box_length=2.0 * math.pi):
        """Complex gaussian bump with random centre, width and momentum."""
        rng = np.random.default_rng(seed)
        c = tuple(rng.uniform(-0.1, 0.1, d) * box_length)
        w = float(rng.uniform(0.3, 0.45))
        k = tuple(rng.uniform(-3.0, 3.0, d))
        return cls("gaussian_bump", c, w, k, float(rng.uniform(0, 2 * math.pi)), seed)

    def values(self, grid):
        d = grid.d
        x = grid.coords()
        if self.kind in ("gaussian_bump", "nonneg_bump"):
            c = np.zeros(d) if not self.center else np.asarray(self.center, dtype=float)
            dx = grid.minimal_image(x - c.reshape((d,) + (1,) * d))
            r2 = np.sum(dx**2, axis=0)
            if self.kind == "nonneg_bump":
                v = bump(grid, c, radius=self.width) + 0j
            else:
                k = np.zeros(d) if not self.momentum else np.asarray(self.momentum, dtype=float)
                ph = np.einsum("i,i...->...", k, dx) + self.phase
                v = np.exp(-r2 / (2.0 * self.width**2) + 1j * ph)
        elif self.kind == "plane_wave":
            k = np.zeros(d) if not self.momentum else np.asarray(self.momentum, dtype=float)
            v = np.exp(1j * (np.einsum("i,i...->...", 2.0 * np.pi * k / grid.box_length, x) + self.phase))
        else:
            rng = np.random.default_rng(self.seed)
            ks = np.arange(-self.cutoff, self.cutoff + 1)
            v = np.zeros(grid.shape, dtype=complex)
            for kv in np.array(np.meshgrid(*([ks] * d), indexing="ij")).reshape(d, -1).T:
                amp = (rng.standard_normal() + 1j * rng.standard_normal()) / (1.0 + kv @ kv)
                v += amp * np.exp(1j * np.einsum("i,i...->...", 2.0 * np.pi * kv / grid.box_length, x))
        if self.normalize:
            v = v / grid.norm(v)
        return GridFunction(v, grid)


def sgn(u):
    """conj(u)/|u| where u != 0, else 0."""
    vals = u.values if isinstance(u, GridFunction) else np.asarray(u)
    a = np.abs(vals)
    out = np.zeros(vals.shape, dtype=complex)
    nz = a > ZERO_THRESHOLD
    out[nz] = np.conj(vals[nz]) / a[nz]
    return GridFunction(out, u.grid) if isinstance(u, GridFunction) else out


class OperatorPair:
    """The Peierls operator S_A and its free partner S_0 at m = 0, diagonalized once."""

    def __init__(self, A, grid):
        self.A = A
        self.grid = grid
        self.S_A = magnetic_schrodinger(A, 0.0, grid)
        self.S_0 = magnetic_schrodinger(VectorPotentialSpec.zero(grid.d), 0.0, grid)

    def _spec(self, which):
        return eig(self.S_A if which == "A" else self.S_0)

    def eigenvalues(self, which):
        return np.clip(self._spec(which).eigenvalues, 0.0, None)

    def apply(self, which, f, U):
        """f(S(0)) applied to a vector or a column stack."""
        spec = self._spec(which)
        fw = f(np.clip(spec.eigenvalues, 0.0, None))
        c = spec.to_basis(U)
        c = c * (fw if c.ndim == 1 else fw[:, None])
        return spec.from_basis(c)

    def matrix(self, which, f):
        spec = self._spec(which)
        return spec.reconstruct(f(np.clip(spec.eigenvalues, 0.0, None)))


def _generator(alpha, m):
    """lam -> (lam + m^2)^{alpha/2} - m^alpha, lam the eigenvalue of S at m = 0."""
    return lambda lam: np.power(lam + m * m, 0.5 * alpha) - m**alpha


def _as_stack(states, grid):
    if isinstance(states, (GridFunction, StateSpec)):
        states = [states]
    cols = []
    for s in states:
        gf = s.values(grid) if isinstance(s, StateSpec) else s
        cols.append(np.asarray(gf.values, dtype=complex).ravel())
    return np.array(cols).T


def scale(pair, U, m):
    """||u|| ||H_{A,m} u|| / volume for each column of U."""
    g = pair.grid
    HU = pair.apply("A", lambda lam: np.sqrt(lam + m * m), U)
    nu = np.sqrt(g.cell_volume) * np.linalg.norm(U, axis=0)
    nh = np.sqrt(g.cell_volume) * np.linalg.norm(HU, axis=0)
    return nu * nh / g.volume


def default_test_functions(grid, count=5):
    """Nonnegative bumps of radius L/4 translated along the axes."""
    L = grid.box_length
    shifts = [np.zeros(grid.d)]
    for j in range(grid.d):
        for s in (-1, 1):
            e = np.zeros(grid.d)
            e[j] = s * L / 8.0
            shifts.append(e)
    k = 2
    while len(shifts) < count:
        e = np.zeros(grid.d)
        e[0] = (-1) ** k * L / 4.0
        shifts.append(e)
        k += 1
    return [bump(grid, c, radius=L / 4.0) for c in shifts[:count]]


def _pairings(psis, F, grid):
    P = np.array([p.ravel() for p in psis])
    return grid.cell_volume * (P @ F), np.sqrt(grid.cell_volume) * np.linalg.norm(P, axis=1)


def kato_check(states, A, m, alpha, grid, test_functions=None, tolerance=1e-8, pair=None):
    """Distributional Kato inequality Re[sgn u (H_A^a - m^a) u] >= (H_0^a - m^a)|u|.

    Gates on the pairings with nonnegative test functions; the pointwise
    minimum of L - R is recorded as a diagnostic.
    """
    if alpha < 1.0 and m <= 0:
        raise ValueError("fractional order below 1 needs m > 0")
    pair = pair or OperatorPair(A, grid)
    U = _as_stack(states, grid)
    G = _generator(alpha, m)
    L = np.real(sgn(U) * pair.apply("A", G, U))
    R = np.real(pair.apply("0", G, np.abs(U).astype(complex)))
    sc = scale(pair, U, m)
    psis = test_functions if test_functions is not None else default_test_functions(grid)
    pairings, psi_norm = _pairings(psis, L - R, grid)
    rel = -pairings / (psi_norm[:, None] * sc[None, :])
    pointwise = np.min(L - R, axis=0) / sc
    return VerificationCheck(
        name=f"kato[d={grid.d},alpha={alpha},m={m}]",
        paper_ref="Kato inequality for the magnetic relativistic operator (fractional order)",
        max_violation=max(float(rel.max()), 0.0),
        tolerance=tolerance,
        details={
            "states": U.shape[1],
            "worst_pairing": float(rel.max()),
            "pointwise_min_rel": float(pointwise.min()),
            "potential": A.description,
        },
    )


def kato_equality_check(states, m, alpha, grid, tolerance=1e-12):
    """A = 0 and u >= 0: both sides of Kato's inequality coincide where u > 0.

    Off the support sgn u vanishes while the nonlocal right side does not,
    so the comparison is restricted to the support.
    """
    A = VectorPotentialSpec.zero(grid.d)
    pair = OperatorPair(A, grid)
    U = np.abs(_as_stack(states, grid)).astype(complex)
    G = _generator(alpha, m)
    L = np.real(sgn(U) * pair.apply("A", G, U))
    R = np.real(pair.apply("0", G, U))
    on = np.abs(U) > ZERO_THRESHOLD
    gap = np.max(np.where(on, np.abs(L - R), 0.0), axis=0) / scale(pair, U, m)
    return VerificationCheck(
        name=f"kato_equality[alpha={alpha},m={m}]",
        paper_ref="Kato inequality, equality case",
        max_violation=float(gap.max()),
        tolerance=tolerance,
    )


def difference_quotient_check(states, A, m, alpha, t, grid, tolerance=1e-10, pair=None):
    """Pointwise Re[conj(u) (1 - P_A) u / t] >= |u| (1 - P_0)|u| / t.

    P = exp(-t[H^alpha - m^alpha]).  The Richardson extrapolate of the left
    side in t is compared with |u| times the Kato integrand as a diagnostic.
    """
    if t <= 0:
        raise ValueError("t must be positive")
    pair = pair or OperatorPair(A, grid)
    U = _as_stack(states, grid)
    G = _generator(alpha, m)
    Q = lambda tau: (lambda lam: -np.expm1(-tau * G(lam)) / tau)
    lhs = np.real(np.conj(U) * pair.apply("A", Q(t), U))
    absU = np.abs(U).astype(complex)
    rhs = np.abs(U) * np.real(pair.apply("0", Q(t), absU))
    sc = scale(pair, U, m)
    viol = np.max(rhs - lhs, axis=0) / sc
    half = np.real(np.conj(U) * pair.apply("A", Q(0.5 * t), U))
    rich = 2.0 * half - lhs
    gen = np.real(np.conj(U) * pair.apply("A", G, U))
    return VerificationCheck(
        name=f"difference_quotient[alpha={alpha},m={m},t={t}]",
        paper_ref="difference-quotient inequality from semigroup domination",
        max_violation=max(float(viol.max()), 0.0),
        tolerance=tolerance,
        details={
            "t": t,
            "richardson_gap_rel": float(np.max(np.abs(rich - gen), axis=0).max() / sc.min()),
        },
    )


def epsilon_inequality(a, b, eps):
    """Slack in -|a||b| + |a|^2 >= -a_e b_e + a_e^2 with a_e = sqrt(|a|^2 + eps^2)."""
    a = np.abs(a)
    b = np.abs(b)
    ae = np.sqrt(a * a + eps * eps)
    be = np.sqrt(b * b + eps * eps)
    return (-a * b + a * a) - (-ae * be + ae * ae)


def epsilon_regularized_check(states, A, m, alpha, grid, eps_list, tolerance=1e-10, pair=None):
    """Regularized Kato chain with u_eps = sqrt(|u|^2 + eps^2).

    Checks the elementary inequality on all grid pairs, the pointwise bound
    Re[conj(u)/u_eps G_A u] >= G_0 (u_eps - eps) for every eps, and that both
    sides approach the unregularized Kato quantities monotonically.
    """
    eps_list = [float(e) for e in eps_list]
    if any(b >= a for a, b in zip(eps_list, eps_list[1:])):
        raise ValueError("eps_list must be strictly decreasing")
    pair = pair or OperatorPair(A, grid)
    U = _as_stack(states, grid)
    G = _generator(alpha, m)
    GU = pair.apply("A", G, U)
    absU = np.abs(U)
    sc = scale(pair, U, m)
    L0 = np.real(sgn(U) * GU)
    R0 = np.real(pair.apply("0", G, absU.astype(complex)))
    alg = np.inf
    worst = -np.inf
    gaps_l, gaps_r = [], []
    rng = np.random.default_rng(0)
    col = absU[:, 0]
    idx = rng.integers(0, col.size, size=(2, 2000))
    for eps in eps_list:
        alg = min(alg, float(np.min(epsilon_inequality(col[idx[0]], col[idx[1]], eps))))
        ue = np.sqrt(absU**2 + eps * eps)
        Le = np.real(np.conj(U) / ue * GU)
        Re_ = np.real(pair.apply("0", G, (ue - eps).astype(complex)))
        worst = max(worst, float(np.max((Re_ - Le) / sc[None, :])))
        gaps_l.append(float(np.linalg.norm(Le - L0)))
        gaps_r.append(float(np.linalg.norm(Re_ - R0)))
    mono = all(b <= a for a, b in zip(gaps_l, gaps_l[1:])) and all(
        b <= a for a, b in zip(gaps_r, gaps_r[1:])
    )
    viol = max(worst, -alg / max(1.0, float(col.max()) ** 2), 0.0)
    if not mono:
        viol = math.inf
    return VerificationCheck(
        name=f"epsilon_regularized[alpha={alpha},m={m}]",
        paper_ref="regularized Kato chain with u_eps = sqrt(|u|^2 + eps^2)",
        max_violation=viol,
        tolerance=tolerance,
        details={"eps": eps_list, "lhs_gap": gaps_l, "rhs_gap": gaps_r,
                 "algebraic_min_slack": alg, "monotone": mono},
    )


def diamagnetic_check(pairs_fg, A, m, alpha, t, grid, scalar_tolerance=1e-12,
                      entry_tolerance=1e-10, pair=None):
    """|(f, P_A g)| <= (|f|, P_0 |g|) and the entrywise |P_A| <= P_0.

    P = exp(-t[H^alpha - m^alpha]).  The scalar violation is relative to
    ||f|| ||g||.  Returns two checks: scalar and entrywise.
    """
    pair = pair or OperatorPair(A, grid)
    G = _generator(alpha, m)
    E = lambda lam: np.exp(-t * G(lam))
    PA = pair.matrix("A", E)
    P0 = pair.matrix("0", E)
    entry = float(np.max(np.abs(PA) - P0.real))
    h = grid.cell_volume
    worst = -np.inf
    for f, g in pairs_fg:
        fv = _as_stack(f, grid)[:, 0]
        gv = _as_stack(g, grid)[:, 0]
        lhs = abs(h * np.vdot(fv, PA @ gv))
        rhs = float(np.real(h * np.vdot(np.abs(fv), P0 @ np.abs(gv))))
        norm = h * np.linalg.norm(fv) * np.linalg.norm(gv)
        worst = max(worst, (lhs - rhs) / norm)
    ref = "diamagnetic inequality for the relativistic semigroup"
    return (
        VerificationCheck(f"diamagnetic_scalar[alpha={alpha},m={m},t={t}]", ref,
                          max(worst, 0.0), scalar_tolerance, {"pairs": len(pairs_fg),
                                                              "worst_signed": worst}),
        VerificationCheck(f"diamagnetic_entrywise[alpha={alpha},m={m},t={t}]",
                          "pointwise domination of the magnetic semigroup kernel",
                          max(entry, 0.0), entry_tolerance, {"worst_signed": entry}),
    )


def _sparse_S(A, grid, m=0.0):
    D = covariant_derivatives(A, grid)
    S = sum(Dj.conj().T @ Dj for Dj in D)
    return S + m * m * np.eye(grid.total_points) if m else S


def _commutator_residuals(A, B, psi_fn, v_fn, grid):
    """Residuals of the two commutator identities on one grid (grid L^2 norms)."""
    d = grid.d
    psi = psi_fn(grid)
    v = v_fn(grid).ravel()
    p = psi.ravel()
    SA = _sparse_S(A, grid)
    SB = _sparse_S(B, grid)
    DA = covariant_derivatives(A, grid, scheme="central")
    DB = covariant_derivatives(B, grid, scheme="central")
    D0 = covariant_derivatives(VectorPotentialSpec.zero(d), grid, scheme="central")
    igrad_psi = [1j * gj.ravel() for gj in spectral_gradient(psi, grid)]
    lap_psi = spectral_laplacian(psi, grid).ravel()
    Ax = A.on_grid(grid).reshape(d, -1)
    Bx = B.on_grid(grid).reshape(d, -1)
    # (i grad + A) = -D_A, i grad = -D_0
    lhs1 = SA @ (p * v) - p * (SA @ v)
    rhs1 = lap_psi * v + 2.0 * sum(-(DA[j] @ (igrad_psi[j] * v)) for j in range(d))
    lhs2 = SA @ (p * v) - p * (SB @ v)
    rhs2 = np.zeros_like(v)
    for j in range(d):
        rhs2 += -(DA[j] @ ((igrad_psi[j] + p * Ax[j]) * v))
        rhs2 += (igrad_psi[j] - p * Bx[j]) * (-(DB[j] @ v))
        rhs2 += p * Ax[j] * (-(D0[j] @ v))
        rhs2 += D0[j] @ (p * Bx[j] * v)
    n = lambda w: grid.norm(w)
    return n(lhs1 - rhs1), n(lhs2 - rhs2), n(lhs1 - (SA @ (p * v) - p * (_sparse_S(A, grid) @ v)))


def commutator_identity_check(A, B, psi_fn, v_fn, grids, min_order=1.9):
    """Refinement order of the commutator identities (single- and two-potential forms)."""
    res1, res2 = [], []
    for g in grids:
        r1, r2, _ = _commutator_residuals(A, B, psi_fn, v_fn, g)
        res1.append(r1)
        res2.append(r2)
    ns = [g.n for g in grids]
    order = lambda r: [math.log(a / b) / math.log(n2 / n1)
                       for a, b, n1, n2 in zip(r, r[1:], ns, ns[1:])]
    o1, o2 = order(res1), order(res2)
    worst = min(o1 + o2)
    # with B = A the two-potential left side is the single-potential one
    same = _commutator_residuals(A, A, psi_fn, v_fn, grids[0])[2]
    return VerificationCheck(
        name="commutator_identities",
        paper_ref="commutator identities for the magnetic Schrodinger operator",
        max_violation=max(min_order - worst, 0.0),
        tolerance=0.0,
        details={"n": ns, "residual_single": res1, "residual_two": res2,
                 "order_single": o1, "order_two": o2, "same_potential_gap": same},
    )


def _l1(grid, f):
    return grid.cell_volume * np.sum(np.abs(f), axis=0)


def alpha_limit_check(state, A, m, psi, alpha_sequence, grid, tolerance=1e-6, pair=None):
    """||psi (H^alpha - H) u||_1 along alpha -> 1, relative to ||psi H u||_1."""
    alphas = [float(a) for a in alpha_sequence]
    if any(b <= a for a, b in zip(alphas, alphas[1:])) or alphas[-1] >= 1.0:
        raise ValueError("alpha_sequence must increase strictly towards 1")
    pair = pair or OperatorPair(A, grid)
    u = _as_stack(state, grid)[:, 0]
    p = np.asarray(psi).ravel()
    Hu = pair.apply("A", lambda lam: np.sqrt(lam + m * m), u)
    ref = float(_l1(grid, p * Hu))
    gaps = []
    for a in alphas:
        Hau = pair.apply("A", lambda lam: np.power(lam + m * m, 0.5 * a), u)
        gaps.append(float(_l1(grid, p * (Hau - Hu))))
    mono = all(b < a for a, b in zip(gaps, gaps[1:]))
    rel = gaps[-1] / ref
    return VerificationCheck(
        name=f"alpha_limit[m={m}]",
        paper_ref="convergence of psi H^alpha u to psi H u in L^1 as alpha -> 1",
        max_violation=rel if mono else math.inf,
        tolerance=tolerance,
        details={"alpha": alphas, "gap": gaps, "reference_l1": ref, "monotone": mono,
                 "final_relative": rel},
    )


def mass_limit_check(state, A, psi, m_sequence, grid, min_slope=1.9, pair=None):
    """O(m^2) approach of ||psi H_m u||_1 to the massless value, and monotonicity
    of (u, [H_m - m] u) as m decreases."""
    ms = [float(m) for m in m_sequence]
    if any(b >= a for a, b in zip(ms, ms[1:])) or ms[-1] <= 0:
        raise ValueError("m_sequence must decrease strictly and stay positive")
    pair = pair or OperatorPair(A, grid)
    u = _as_stack(state, grid)[:, 0]
    p = np.asarray(psi).ravel()
    h = grid.cell_volume
    H0u = pair.apply("A", np.sqrt, u)
    base = float(_l1(grid, p * H0u))
    q0 = float(np.real(h * np.vdot(u, H0u)))
    gaps, forms = [], []
    for m in ms:
        Hmu = pair.apply("A", lambda lam: np.sqrt(lam + m * m), u)
        gaps.append(abs(float(_l1(grid, p * Hmu)) - base))
        forms.append(float(np.real(h * np.vdot(u, Hmu - m * u))))
    slope = float(np.polyfit(np.log(ms), np.log(gaps), 1)[0])
    steps = [a - b for a, b in zip(forms, forms[1:])]  # negative when increasing
    viol = max(min_slope - slope, max(steps) / abs(q0), 0.0)
    return VerificationCheck(
        name="mass_limit",
        paper_ref="massless limit estimate and monotonicity of H_m - m in m",
        max_violation=viol,
        tolerance=0.0,
        details={"m": ms, "gap": gaps, "slope": slope, "form": forms, "form_massless": q0,
                 "form_final_gap": q0 - forms[-1]},
    )


def potential_lower_bound_check(A, V, m, grid, tolerance=1e-10):
    """Smallest eigenvalue of H_{A,m} + V is at least m for V >= 0."""
    V = np.asarray(V.values if isinstance(V, GridFunction) else V, dtype=float).ravel()
    if np.any(V < 0):
        raise ValueError("potential must be nonnegative")
    H = build_h3(A, m, grid)
    M = H.matrix + np.diag(V)
    lo = float(np.linalg.eigvalsh(M)[0])
    return VerificationCheck(
        name=f"potential_lower_bound[m={m}]",
        paper_ref="lower bound m for the operator with nonnegative scalar potential",
        max_violation=max(m - lo, 0.0),
        tolerance=tolerance,
        details={"min_eigenvalue": lo, "max_potential": float(V.max())},
    )


def heat_bounds_check(A, m, grid, t_list, tolerance=1e-10):
    """Spectral norm bounds for the heat semigroup of S and its covariant gradient.

    Also checks the L^2 contraction bound exp(-m^2 t) and the L^infinity one
    through absolute row sums of exp(-tS).
    """
    S = magnetic_schrodinger(A, m, grid)
    D = covariant_derivatives(A, grid)
    worst = -np.inf
    rows = []
    for t in t_list:
        rep = lemma21_bounds(S, t, derivatives=D, mass=m)
        lam = eig(S).eigenvalues
        contraction = float(np.max(np.exp(-t * lam))) * math.exp(m * m * t) - 1.0
        semi = eig(S).reconstruct(np.exp(-t * lam))
        rowsum = float(np.max(np.sum(np.abs(semi), axis=1))) * math.exp(m * m * t) - 1.0
        worst = max(worst, rep.max_violation, contraction, rowsum)
        rows.append({"t": t, "sqrt": rep.sqrt_semigroup_norm, "square": rep.square_semigroup_norm,
                     "gradient": rep.gradient_semigroup_norm,
                     "gradient_adjoint": rep.semigroup_gradient_norm,
                     "contraction_excess": contraction, "rowsum_excess": rowsum})
    return VerificationCheck(
        name=f"heat_semigroup_bounds[m={m}]",
        paper_ref="norm bounds for the magnetic heat semigroup",
        max_violation=max(worst, 0.0),
        tolerance=tolerance,
        details={"rows": rows},
    )


def fractional_bound_check(A, m, alpha, psis, grid, tolerance=1e-10, pair=None):
    """||H^alpha psi|| <= ||H_{A, sqrt(m^2+1)} psi|| for each psi."""
    pair = pair or OperatorPair(A, grid)
    U = _as_stack([GridFunction(p, grid) if not isinstance(p, GridFunction) else p
                   for p in psis], grid)
    lhs = np.linalg.norm(pair.apply("A", lambda lam: np.power(lam + m * m, 0.5 * alpha), U), axis=0)
    rhs = np.linalg.norm(pair.apply("A", lambda lam: np.sqrt(lam + m * m + 1.0), U), axis=0)
    return VerificationCheck(
        name=f"fractional_form_bound[alpha={alpha},m={m}]",
        paper_ref="fractional power bounded by the shifted magnetic operator",
        max_violation=max(float(np.max(lhs / rhs - 1.0)), 0.0),
        tolerance=tolerance,
    )


def weak_l1_quasinorm(f, grid=None):
    """sup_s s * |{|f| > s}| on the grid (diagnostic only)."""
    if isinstance(f, GridFunction):
        grid, vals = f.grid, f.values
    else:
        vals = np.asarray(f)
    a = np.sort(np.abs(vals).ravel())[::-1]
    counts = np.arange(1, a.size + 1)
    return float(np.max(a * counts) * grid.cell_volume)
