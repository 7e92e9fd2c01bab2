"""Command-line front end: scenario-driven suites, tables and reports.

Exit codes: 0 all gating checks pass, 1 a gating check failed, 2 usage or
parse error, 3 internal numeric failure.
"""

import argparse
from concurrent.futures import ThreadPoolExecutor
import csv
from importlib import resources
import json
import math
import os
from pathlib import Path
import sys
import threading
import time

import numpy as np

from . import kernels, quantize, subord, verify
from .lattice import GaugeFunction, LatticeGrid, VectorPotentialSpec, bump, magnetic_schrodinger
from .opcore import semigroup
from .report import VerificationCheck
from .scenario import SUITES, ScenarioError, load_scenario, parse_scenario
from .specfun import QuadratureError, SpecfunError

__all__ = ["main", "run_suites", "SUITE_FUNCTIONS", "VERIFY_SUITES"]

EXIT_OK, EXIT_FAIL, EXIT_USAGE, EXIT_NUMERIC = 0, 1, 2, 3

VERIFY_SUITES = (
    "kato", "difference_quotient", "epsilon", "diamagnetic", "subordination", "commutator",
    "alpha_limit", "mass_limit", "potential_bound", "heat_bounds", "fractional_bound",
)

LEVY_COLUMNS = ["m", "alpha", "d", "r", "t", "levy_density", "kernel_over_t", "relative_gap"]


class Context:
    """Per-run shared state: scenario, operator pairs cached across suites, tables."""

    def __init__(self, scenario):
        self.sc = scenario
        self.grid = scenario.grid()
        self.potentials = scenario.potentials()
        self.states = scenario.states()
        self.tables = {}
        self._pairs = {}
        self._lock = threading.Lock()

    def pair(self, k):
        with self._lock:
            if k not in self._pairs:
                self._pairs[k] = verify.OperatorPair(self.potentials[k], self.grid)
            return self._pairs[k]


def _tagged(check, tag):
    check.name = f"{check.name}[{tag}]"
    return check


def suite_kato(ctx):
    sc, g = ctx.sc, ctx.grid
    out = []
    for k, A in enumerate(ctx.potentials):
        for a in sc.alpha_list:
            out.append(_tagged(verify.kato_check(ctx.states, A, sc.m, a, g, pair=ctx.pair(k)), f"A{k}"))
        if 1.0 in sc.alpha_list and sc.m > 0:
            out.append(_tagged(verify.kato_check(ctx.states, A, 0.0, 1.0, g, pair=ctx.pair(k)), f"A{k}"))
    for a in sc.alpha_list:
        pos = [verify.StateSpec("gaussian_bump", width=0.5), verify.StateSpec("nonneg_bump", width=1.0)]
        out.append(verify.kato_equality_check(pos, sc.m, a, g))
    return out


def suite_difference_quotient(ctx):
    sc = ctx.sc
    m = sc.m if sc.m > 0 else 1.0
    return [
        _tagged(verify.difference_quotient_check(ctx.states, A, m, a, t, ctx.grid, pair=ctx.pair(k)), f"A{k}")
        for k, A in enumerate(ctx.potentials) for a in sc.alpha_list for t in sc.t_list
    ]


def suite_epsilon(ctx):
    sc = ctx.sc
    m = sc.m if sc.m > 0 else 1.0
    eps = [1.0, 1e-1, 1e-2, 1e-3, 1e-4]
    return [
        _tagged(verify.epsilon_regularized_check(ctx.states, A, m, a, ctx.grid, eps, pair=ctx.pair(k)), f"A{k}")
        for k, A in enumerate(ctx.potentials) for a in sc.alpha_list
    ]


def suite_diamagnetic(ctx):
    sc, g = ctx.sc, ctx.grid
    states = ctx.states
    pairs = [(states[i], states[(i + 1) % len(states)]) for i in range(len(states))]
    out = []
    for k, A in enumerate(ctx.potentials):
        for a in sc.alpha_list:
            for c in verify.diamagnetic_check(pairs, A, sc.m, a, sc.t_list[0], g, pair=ctx.pair(k)):
                out.append(_tagged(c, f"A{k}"))
    zero = VectorPotentialSpec.zero(g.d)
    pos = [verify.StateSpec("nonneg_bump", width=1.0), verify.StateSpec("gaussian_bump", width=0.5)]
    pair0 = verify.OperatorPair(zero, g)
    E = lambda lam: np.exp(-sc.t_list[0] * (np.sqrt(lam + sc.m**2) - sc.m))
    fv, gv = (verify._as_stack(s, g)[:, 0].real for s in pos)
    lhs = abs(g.inner(fv, pair0.apply("A", E, gv + 0j)))
    rhs = g.inner(np.abs(fv), pair0.apply("0", E, np.abs(gv) + 0j)).real
    out.append(VerificationCheck("diamagnetic_equality", "diamagnetic inequality, equality case",
                                 abs(lhs - rhs) / (g.norm(fv) * g.norm(gv)), 1e-12))
    return out


def suite_subordination(ctx):
    sc, g = ctx.sc, ctx.grid
    out = []
    worst, rows = 0.0, []
    for t in sc.t_list:
        for a in sc.alpha_list:
            for z in (0.1, 1.0, 4.0):
                lhs, rhs = subord.laplace_transform_check(t, a, z)
                worst = max(worst, abs(lhs - rhs) / rhs)
                rows.append({"t": t, "alpha": a, "z": z, "lhs": lhs, "rhs": rhs})
    out.append(VerificationCheck("subordinator_laplace", "Laplace transform of the subordinator density",
                                 worst, 1e-8, {"rows": rows}))
    if sc.m <= 0:
        return out
    A = ctx.potentials[0]
    S_A = magnetic_schrodinger(A, sc.m, g)
    S_0 = magnetic_schrodinger(VectorPotentialSpec.zero(g.d), sc.m, g)
    for a in sc.alpha_list:
        t = sc.t_list[0]
        P = subord.subordinated_semigroup(S_A, t, a, mass=sc.m).matrix
        Q = ctx.pair(0).matrix("A", lambda lam: np.exp(-t * (np.power(lam + sc.m**2, 0.5 * a) - sc.m**a)))
        out.append(VerificationCheck(f"subordinated_semigroup[alpha={a}]",
                                     "subordination formula for the fractional semigroup",
                                     float(np.linalg.norm(P - Q) / np.linalg.norm(Q)), 1e-6))
        out.append(_tagged(subord.subordinated_domination_check(S_A, S_0, t, a, mass=sc.m), f"alpha={a}"))
    return out


def _commutator_fns():
    psi = lambda gr: np.exp(-np.sum(gr.coords() ** 2, axis=0) / 0.5)
    v = lambda gr: np.exp(-np.sum(gr.coords() ** 2, axis=0) / 2.0 + 2j * gr.coords()[0])
    return psi, v


def suite_commutator(ctx):
    sc = ctx.sc
    if sc.d == 1:
        ns = (64, 128, 256)
    else:
        ns = (max(sc.n // 4, 8), max(sc.n // 2, 16), sc.n)
    grids = [LatticeGrid(sc.d, n, sc.box_length) for n in ns]
    A = VectorPotentialSpec.random(sc.d, sc.box_length, 1000 * sc.seed + 11)
    B = VectorPotentialSpec.random(sc.d, sc.box_length, 1000 * sc.seed + 12)
    psi, v = _commutator_fns()
    return [verify.commutator_identity_check(A, B, psi, v, grids)]


def _window(g):
    return bump(g, radius=g.box_length / 4.0)


def suite_alpha_limit(ctx):
    sc = ctx.sc
    m = sc.m if sc.m > 0 else 1.0
    alphas = [1.0 - 10.0**-k for k in range(1, 5)]
    return [verify.alpha_limit_check(ctx.states[0], ctx.potentials[0], m, _window(ctx.grid), alphas,
                                     ctx.grid, pair=ctx.pair(0))]


def suite_mass_limit(ctx):
    g = ctx.grid
    k = np.zeros(g.d)
    k[0] = 5.0
    u = verify.StateSpec("gaussian_bump", width=1.0, momentum=tuple(k))
    ms = [1.0, 0.5, 0.25, 0.125]
    return [_tagged(verify.mass_limit_check(u, A, _window(g), ms, g, pair=ctx.pair(j)), f"A{j}")
            for j, A in enumerate(ctx.potentials)]


def suite_potential_bound(ctx):
    sc, g = ctx.sc, ctx.grid
    rng = np.random.default_rng(1000 * sc.seed + 5)
    out = []
    for k, A in enumerate(ctx.potentials):
        V = 3.0 * rng.random(g.total_points)
        out.append(_tagged(verify.potential_lower_bound_check(A, V, sc.m, g), f"A{k}"))
    return out


def suite_heat_bounds(ctx):
    sc = ctx.sc
    ts = sorted(set([0.01] + list(sc.t_list)))
    return [_tagged(verify.heat_bounds_check(A, sc.m, ctx.grid, ts), f"A{k}")
            for k, A in enumerate(ctx.potentials)]


def suite_fractional_bound(ctx):
    sc, g = ctx.sc, ctx.grid
    L = g.box_length
    psis = [bump(g, radius=r * L) for r in (0.1, 0.2, 0.3)]
    return [_tagged(verify.fractional_bound_check(A, sc.m, a, psis, g, pair=ctx.pair(k)), f"A{k}")
            for k, A in enumerate(ctx.potentials) for a in sc.alpha_list]


def _linear_potential(sc):
    if sc.potential_kind == "linear":
        return VectorPotentialSpec.linear(np.array(sc.potential_matrix))
    M = 0.5 * np.eye(sc.d)
    if sc.d > 1:
        M[0, 1] = M[1, 0] = 0.25
    return VectorPotentialSpec.linear(M)


_QUANT_CAP = {1: 256, 2: 32, 3: 12}


def suite_quantization(ctx):
    sc = ctx.sc
    m = sc.m
    n = min(sc.n, _QUANT_CAP[sc.d])
    grids = [LatticeGrid(sc.d, k, sc.box_length) for k in (n // 4, n // 2, n)]
    A = _linear_potential(sc)
    rep = quantize.coincidence_check(A, m, grids)
    ctx.tables["quantization_comparison.csv"] = ("comparison", rep.rows)
    gaps = rep.subspace_gaps
    out = [
        VerificationCheck("h1_h2_linear", "coincidence of the two magnetic quantizations for linear A",
                          rep.h1_h2_max_entry_gap, 1e-13),
        VerificationCheck("h1_h3_refinement", "agreement of quantizations under refinement",
                          max(max(b - a for a, b in zip(gaps, gaps[1:])), 0.0), 0.0,
                          {"n": [gr.n for gr in grids], "subspace_gap": gaps,
                           "relative_gap": rep.relative_gaps}),
        VerificationCheck("h3_lower_bound", "operator square root bounded below by m",
                          max(m - min(rep.min_eigs["h3"]), 0.0), 1e-10, {"min_eigs": rep.min_eigs}),
    ]
    g = grids[1]
    phi = GaugeFunction.quadratic(np.eye(sc.d) * 0.3)
    base = VectorPotentialSpec.random(sc.d, sc.box_length, 1000 * sc.seed + 21)
    weyl = None
    for kind in quantize.QuantizationKind:
        c = quantize.gauge_covariance_check(kind, base, phi, m, g)
        out.append(c)
        if kind is quantize.QuantizationKind.WEYL_MIDPOINT:
            weyl = c
    out.append(VerificationCheck("weyl_noncovariance", "midpoint quantization is not gauge covariant",
                                 max(1e-6 - weyl.max_violation, 0.0), 0.0,
                                 {"defect": weyl.max_violation}))
    return out


def suite_kernels(ctx):
    sc = ctx.sc
    params = [kernels.KernelParams(sc.m, a, sc.d, t) for a in sc.alpha_list for t in sc.t_list]
    rows = kernels.kernel_table(params, sc.radii)
    ctx.tables["kernel_table.csv"] = ("kernel", rows)
    out = []
    if sc.m > 0 or 1.0 in sc.alpha_list:
        worst = 0.0
        for t in sc.t_list:
            p = kernels.KernelParams(sc.m, 1.0, sc.d, t)
            a1 = kernels.heat_kernel(p, np.array(sc.radii), method="a1")
            cf = kernels.heat_kernel(p, np.array(sc.radii), method="closed")
            worst = max(worst, float(np.max(np.abs(a1 - cf) / np.abs(cf))))
        out.append(VerificationCheck("heat_kernel_closed_form", "closed-form heat kernel at order 1",
                                     worst, 1e-6))
    for p in params:
        err = abs(kernels.kernel_normalization(p) - 1.0)
        out.append(VerificationCheck(f"kernel_normalization[alpha={p.alpha},t={p.t}]",
                                     "heat kernel is a probability density", err, 1e-6))
    return out


def suite_levy(ctx):
    sc = ctx.sc
    out, rows = [], []
    ts = [1e-1, 1e-2, 1e-3]
    m = sc.m if sc.m > 0 else 1.0
    for a in sc.alpha_list:
        rep = kernels.levy_limit_check(m, a, sc.d, 1.0, ts)
        n = kernels.levy_density(m, a, sc.d, 1.0)
        for t, gap in zip(rep.t, rep.gaps):
            rows.append({"m": m, "alpha": a, "d": sc.d, "r": 1.0, "t": t, "levy_density": n,
                         "kernel_over_t": n * (1.0 + gap), "relative_gap": gap})
        out.append(VerificationCheck(f"levy_limit[alpha={a}]", "small-time limit of the heat kernel",
                                     rep.final_gap if rep.monotone else math.inf, rep.tolerance,
                                     {"t": rep.t, "gaps": rep.gaps}))
    ctx.tables["levy_table.csv"] = ("levy", rows)
    return out


def suite_resolvent(ctx):
    sc = ctx.sc
    m = sc.m if sc.m > 0 else 1.0
    worst, rows = 0.0, []
    for r in sc.radii:
        k = kernels.resolvent_kernel(m, sc.d, r)
        ti = kernels.resolvent_time_integral(m, sc.d, r)
        fo = kernels.resolvent_fourier_oracle(m, sc.d, r)
        worst = max(worst, abs(k - ti) / abs(k), abs(k - fo) / abs(k))
        rows.append({"r": r, "closed": k, "time_integral": ti, "fourier": fo})
    return [VerificationCheck("resolvent_kernel", "resolvent kernel of the relativistic operator",
                              worst, 1e-6, {"rows": rows})]


SUITE_FUNCTIONS = {
    "kato": suite_kato,
    "difference_quotient": suite_difference_quotient,
    "epsilon": suite_epsilon,
    "diamagnetic": suite_diamagnetic,
    "subordination": suite_subordination,
    "commutator": suite_commutator,
    "alpha_limit": suite_alpha_limit,
    "mass_limit": suite_mass_limit,
    "potential_bound": suite_potential_bound,
    "heat_bounds": suite_heat_bounds,
    "fractional_bound": suite_fractional_bound,
    "quantization": suite_quantization,
    "kernels": suite_kernels,
    "levy": suite_levy,
    "resolvent": suite_resolvent,
}
assert set(SUITE_FUNCTIONS) == set(SUITES)


def run_suites(scenario, names=None, jobs=None, tol_scale=1.0):
    """Run the named suites (default: the scenario's) and return (checks, tables, timing)."""
    names = list(scenario.suites if names is None else names)
    ctx = Context(scenario)

    def one(name):
        t0 = time.perf_counter()
        checks = SUITE_FUNCTIONS[name](ctx)
        override = scenario.tolerances.get(name)
        for c in checks:
            if override is not None and not c.diagnostic:
                c.tolerance = override
            c.tolerance *= tol_scale
        return checks, time.perf_counter() - t0

    jobs = jobs or os.cpu_count() or 1
    if jobs > 1 and len(names) > 1:
        with ThreadPoolExecutor(max_workers=jobs) as pool:
            results = list(pool.map(one, names))
    else:
        results = [one(n) for n in names]
    checks = [c for chk, _ in results for c in chk]
    timing = {n: dt for n, (_, dt) in zip(names, results)}
    return checks, ctx.tables, timing


def _write_tables(tables, out_dir):
    tdir = Path(out_dir) / "tables"
    tdir.mkdir(parents=True, exist_ok=True)
    for fname, (kind, rows) in sorted(tables.items()):
        path = tdir / fname
        if kind == "kernel":
            kernels.write_kernel_table(rows, path)
        elif kind == "comparison":
            quantize.write_comparison_table(rows, path)
        else:
            with open(path, "w", newline="") as fh:
                w = csv.DictWriter(fh, fieldnames=LEVY_COLUMNS, lineterminator="\n")
                w.writeheader()
                for r in rows:
                    w.writerow({k: repr(v) if isinstance(v, float) else v for k, v in r.items()})


def write_report(path, scenario, checks, timing=None):
    report = {
        "scenario_hash": scenario.digest(),
        "checks": [c.to_dict() for c in checks],
        "timing": timing,
    }
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(report, fh, indent=2, sort_keys=True)
        fh.write("\n")
    return report


def _print_summary(checks, stream=None):
    stream = stream or sys.stdout
    for c in checks:
        print(c.summary(), file=stream)
    n_fail = sum(1 for c in checks if c.status == "fail")
    n_diag = sum(1 for c in checks if c.status == "diagnostic")
    print(f"{len(checks)} checks: {len(checks) - n_fail - n_diag} pass, {n_fail} fail, "
          f"{n_diag} diagnostic", file=stream)
    return n_fail


def _default_scenario_text():
    return resources.files("magrel").joinpath("scenarios/smoke.scn").read_text(encoding="utf-8")


def _load(args):
    if args.config:
        sc = load_scenario(args.config)
    else:
        sc = parse_scenario(_default_scenario_text(), source="smoke.scn")
    if args.seed is not None:
        sc.seed = args.seed
    return sc


def _execute(args, names, write_checks=True):
    sc = _load(args)
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    checks, tables, timing = run_suites(sc, names, jobs=args.jobs, tol_scale=args.tol_scale)
    _write_tables(tables, out)
    if write_checks:
        write_report(out / "report.json", sc, checks, timing if args.timing else None)
    n_fail = _print_summary(checks)
    return EXIT_FAIL if n_fail else EXIT_OK


def cmd_run(args):
    return _execute(args, None)


def cmd_verify(args):
    sc = _load(args)
    names = [s for s in sc.suites if s in VERIFY_SUITES] or list(VERIFY_SUITES)
    return _execute(args, names)


def cmd_kernel_table(args):
    return _execute(args, ["kernels"])


def cmd_levy_table(args):
    return _execute(args, ["levy"])


def cmd_compare(args):
    return _execute(args, ["quantization"])


def selftest_checks():
    """Special-function oracle battery plus the elementary example cases."""
    from .specfun import bessel_k, bessel_k_oracle, gamma, ktransform_check

    out = []
    worst = 0.0
    for nu in (0.0, 0.3, 1.0, 2.5, 4.7):
        for x in (0.05, 0.7, 3.0, 20.0):
            worst = max(worst, abs(bessel_k(nu, x) / bessel_k_oracle(nu, x) - 1.0))
    out.append(VerificationCheck("bessel_k_oracle", "modified Bessel function of the third kind",
                                 worst, 1e-10))
    half = max(abs(bessel_k(0.5, x) / (math.sqrt(math.pi / (2 * x)) * math.exp(-x)) - 1.0)
               for x in (0.01, 1.0, 30.0))
    out.append(VerificationCheck("bessel_k_half_integer", "half-integer closed form", half, 1e-12))
    out.append(VerificationCheck("gamma_half", "Gamma(1/2) = sqrt(pi)",
                                 abs(gamma(0.5) - math.sqrt(math.pi)), 1e-14))
    lhs, rhs = ktransform_check(0.5, 1.0, 1.0, 2.0)
    out.append(VerificationCheck("ktransform", "K-transform identity", abs(lhs - rhs) / rhs, 1e-7))
    # elementary cases
    s = verify.sgn(np.array([2.0, 1j, 0.0]))
    out.append(VerificationCheck("sgn_cases", "sign function", float(np.max(np.abs(s - [1, -1j, 0]))), 0.0))
    a = verify.epsilon_inequality(np.array([1.0]), np.array([2.0]), 1.0)
    out.append(VerificationCheck("epsilon_arithmetic", "regularized elementary inequality",
                                 abs(float(a[0]) - (-1.0 + math.sqrt(10.0) - 2.0)), 1e-14))
    g = LatticeGrid(1, 32)
    S = magnetic_schrodinger(VectorPotentialSpec.zero(1), 1.0, g)
    P = semigroup(S, 0.5).matrix
    out.append(VerificationCheck("semigroup_zero_potential", "free semigroup is positivity preserving",
                                 max(-float(P.real.min()), 0.0), 1e-12))
    rows = kernels.kernel_table([kernels.KernelParams(1.0, 1.0, 1, 1.0)], [1.0])
    out.append(VerificationCheck("kernel_row", "closed-form kernel tabulation",
                                 0.0 if rows[0].value > 0 else 1.0, 0.0))
    return out


def cmd_selftest(args):
    checks = selftest_checks()
    if args.out:
        out = Path(args.out)
        out.mkdir(parents=True, exist_ok=True)
        sc = _load(args)
        write_report(out / "report.json", sc, checks)
    return EXIT_FAIL if _print_summary(checks) else EXIT_OK


def build_parser():
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", help="scenario file (default: bundled smoke.scn)")
    common.add_argument("--out", default="magrel-out", help="output directory")
    common.add_argument("--seed", type=int, default=None, help="override the scenario seed")
    common.add_argument("--tol-scale", type=float, default=1.0, help="multiply all tolerances")
    common.add_argument("--jobs", type=int, default=None, help="parallel suites (default: cores)")
    common.add_argument("--timing", action="store_true", help="record wall times in report.json")
    p = argparse.ArgumentParser(prog="magrel", description=__doc__.splitlines()[0])
    sub = p.add_subparsers(dest="command", required=True)
    for name, fn, help_ in (
        ("run", cmd_run, "run every suite in the scenario"),
        ("verify", cmd_verify, "run the inequality and identity suites"),
        ("kernel-table", cmd_kernel_table, "tabulate heat kernels"),
        ("levy-table", cmd_levy_table, "tabulate the small-time Levy limit"),
        ("compare-quantizations", cmd_compare, "compare the three quantizations"),
        ("selftest", cmd_selftest, "special-function oracles and elementary cases"),
    ):
        sp = sub.add_parser(name, parents=[common], help=help_)
        sp.set_defaults(func=fn)
    return p


def main(argv=None):
    parser = build_parser()
    args = parser.parse_args(argv)
    if args.tol_scale <= 0:
        parser.error("--tol-scale must be positive")
    if args.jobs is not None and args.jobs < 1:
        parser.error("--jobs must be at least 1")
    try:
        return args.func(args)
    except ScenarioError as exc:
        print(f"magrel: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except (ArithmeticError, QuadratureError, SpecfunError, np.linalg.LinAlgError) as exc:
        print(f"magrel: numeric failure: {exc}", file=sys.stderr)
        return EXIT_NUMERIC


if __name__ == "__main__":
    sys.exit(main())
