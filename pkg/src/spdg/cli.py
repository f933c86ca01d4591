"""Command-line interface: rates, solve, certify, bench, plot."""

from __future__ import annotations

import argparse
import math
import sys
from pathlib import Path

import numpy as np

from . import harness, rates
from .operators import certify_moduli
from .partial_inverse import PartialInverse
from .solvers import CONVERGED, SPDGConfig, check_pp_equivalence, spdg_solve

KNOWN_ERRORS = (ValueError, ArithmeticError, rates.BoundViolated, OSError)


def _float_list(text: str) -> list[float]:
    return [float(t) for t in text.split(",") if t]


def _int_list(text: str) -> list[int]:
    return [int(t) for t in text.split(",") if t]


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="spdg",
        description="Solve subspace-constrained monotone inclusions and certify convergence rates.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("rates", help="print rate factors and iteration bounds")
    p.add_argument("--eta", type=float, required=True, help="strong-monotonicity modulus")
    p.add_argument("--L", type=float, required=True, help="Lipschitz constant")
    p.add_argument("--gamma", type=float, default=None, help="scaling factor (default 1/L)")
    p.add_argument(
        "--d0sq-over-rho",
        type=float,
        default=1e6,
        help="ratio d0^2 / rho used for the iteration bounds (default 1e6)",
    )

    p = sub.add_parser("solve", help="solve one problem and write its trace CSV")
    p.add_argument("--problem", type=Path, default=None, help="problem JSON file")
    p.add_argument("--dim", type=int, default=50)
    p.add_argument("--subspace-dim", type=int, default=None, help="default dim // 2")
    p.add_argument("--cond", type=float, default=10.0, help="condition number L/eta (eta = 1)")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--skew-fraction", type=float, default=0.0)
    p.add_argument("--gamma", type=float, default=None, help="scaling factor (default 1/L)")
    p.add_argument("--rho", type=float, default=1e-8)
    p.add_argument("--max-iters", type=int, default=100_000)
    p.add_argument("--out", type=Path, default=Path("trace.csv"))

    p = sub.add_parser("certify", help="run the certification suites; exit 1 on any violation")
    p.add_argument("--quick", action="store_true", help="smaller grids for a fast check")
    p.add_argument("--max-iters", type=int, default=200)
    p.add_argument("--rho", type=float, default=0.0)

    p = sub.add_parser("bench", help="run a sweep and write its rows as CSV")
    p.add_argument("--dims", type=_int_list, default=[10, 50, 100])
    p.add_argument("--conds", type=_float_list, default=None)
    p.add_argument(
        "--cond-range",
        nargs=3,
        type=float,
        default=None,
        metavar=("MIN", "MAX", "N"),
        help="evenly spaced condition numbers",
    )
    p.add_argument("--seed", type=int, default=0, help="first seed")
    p.add_argument("--num-seeds", type=int, default=1)
    p.add_argument("--gamma", type=float, default=None, help="scaling factor (default 1/L)")
    p.add_argument("--iters", type=int, default=200)
    p.add_argument("--rho", type=float, default=0.0)
    p.add_argument("--out", type=Path, default=Path("bench.csv"))

    p = sub.add_parser("plot", help="render a sweep CSV as an SVG chart plus a data CSV")
    p.add_argument("--input", type=Path, required=True, help="bench CSV")
    p.add_argument("--out", type=Path, default=Path("figure.svg"))

    return parser


def cmd_rates(args) -> int:
    eta, L = args.eta, args.L
    gamma = args.gamma if args.gamma is not None else 1.0 / L
    ratio = args.d0sq_over_rho
    if not ratio > 0:
        raise rates.InvalidArgs(f"--d0sq-over-rho must be positive, got {ratio}")
    cert = rates.rate_certificate(eta, L, gamma, d0=math.sqrt(ratio), rho=1.0)
    print(f"eta = {eta!r}")
    print(f"L = {L!r}")
    print(f"condition_number = {L / eta!r}")
    print(f"gamma = {gamma!r}")
    print(f"mu_partial_inverse = {eta / (1.0 + L * L)!r}")
    print(f"mu_scaled = {cert.mu_scaled!r}")
    print(f"factor_old = {cert.factor_old!r}")
    print(f"factor_new = {cert.factor_new!r}")
    print(f"factor_old_opt = {cert.factor_old_opt!r}")
    print(f"factor_new_opt = {cert.factor_new_opt!r}")
    print(f"log_constant_old = {1.0 / math.log(2.0 * L / (2.0 * L - eta))!r}")
    print(f"log_constant_new = {1.0 / math.log((eta + L) / L)!r}")
    print(f"iteration_bound_old(d0^2/rho={ratio:g}) = {cert.iters_old!r} (ceil {math.ceil(cert.iters_old)})")
    print(f"iteration_bound_new(d0^2/rho={ratio:g}) = {cert.iters_new!r} (ceil {math.ceil(cert.iters_new)})")
    return 0


def cmd_solve(args) -> int:
    if args.problem is not None:
        spec = harness.ProblemSpec.load(args.problem)
    else:
        d = args.subspace_dim if args.subspace_dim is not None else args.dim // 2
        spec = harness.generate_problem(
            args.dim, d, 1.0, args.cond, args.seed, args.skew_fraction
        )
    problem = spec.to_problem()
    x_star, u_star = problem.solution
    gamma = args.gamma if args.gamma is not None else 1.0 / spec.L
    config = SPDGConfig(gamma=gamma, rho=args.rho, max_iters=args.max_iters)
    trace = spdg_solve(problem, config)

    gsq = gamma * gamma
    lines = [
        f"# seed={spec.seed}",
        f"# dim={spec.dim}",
        f"# subspace_dim={spec.subspace_basis.shape[1]}",
        f"# eta={spec.eta!r}",
        f"# L={spec.L!r}",
        f"# gamma={gamma!r}",
        f"# rho={args.rho!r}",
        f"# max_iters={args.max_iters}",
        f"# termination={trace.termination_reason}",
        "k,residual,dist_sq",
    ]
    for rec in trace.records:
        ex = x_star - rec.x
        ey = u_star - rec.y
        dist_sq = float(ex @ ex) + gsq * float(ey @ ey)
        lines.append(f"{rec.k},{rec.residual!r},{dist_sq!r}")
    args.out.write_text("\n".join(lines) + "\n")
    print(
        f"{trace.termination_reason} after {trace.iterations} iterations, "
        f"final residual {trace.residuals[-1]:.3e}; trace written to {args.out}"
    )
    return 0


def cmd_certify(args) -> int:
    failures = 0
    if args.quick:
        seeds = range(4)
        dims = (10, 30)
        conds = (1.0, 5.0, 20.0)
        n_equiv, n_mono, mono_samples = 10, 10, 200
    else:
        seeds = range(20)
        dims = (10, 50, 100)
        conds = (1.0, 5.0, 20.0, 100.0)
        n_equiv, n_mono, mono_samples = 100, 100, 1000

    def run_suite(name, fn):
        nonlocal failures
        try:
            detail = fn()
        except Exception as exc:  # noqa: BLE001 - report and flag any violation
            failures += 1
            print(f"{name}: FAIL ({exc})")
        else:
            print(f"{name}: PASS ({detail})")

    def suite_bounds():
        rows = harness.run_sweep(
            dims, conds, seeds, gammas=(None,), rho=args.rho, iters=args.max_iters, certify=True
        )
        return f"{len(rows)} problems, per-iteration bounds of both analyses hold"

    def suite_equivalence():
        rng = np.random.default_rng(20_240_001)
        worst_a = worst_b = 0.0
        for seed in range(n_equiv):
            n = int(rng.integers(2, 101))
            d = int(rng.integers(0, n + 1))
            cond = float(rng.uniform(1.0, 50.0))
            spec = harness.generate_problem(n, d, 1.0, cond, seed)
            problem = spec.to_problem()
            gamma = 1.0 / spec.L
            trace = spdg_solve(problem, SPDGConfig(gamma=gamma, rho=0.0, max_iters=50))
            report = check_pp_equivalence(problem, gamma, trace)
            worst_a = max(worst_a, report.worst_resolvent_gap)
            worst_b = max(worst_b, report.worst_displacement_gap)
        return f"{n_equiv} problems, worst gaps {worst_a:.2e} / {worst_b:.2e}"

    def suite_monotonicity():
        rng = np.random.default_rng(20_240_002)
        worst = math.inf
        for seed in range(n_mono):
            n = int(rng.integers(2, 61))
            d = int(rng.integers(0, n + 1))
            cond = float(rng.uniform(1.0, 50.0))
            spec = harness.generate_problem(n, d, 1.0, cond, seed)
            pi = PartialInverse(spec.operator(), spec.subspace())
            report = pi.check_strong_monotonicity(mono_samples, seed)
            worst = min(worst, report.worst_slack)
        return f"{n_mono} problems x {mono_samples} pairs, worst slack {worst:.2e}"

    def suite_moduli():
        worst = math.inf
        for seed in range(8):
            spec = harness.generate_problem(40, 15, 1.0, 25.0, seed, skew_fraction=0.3)
            report = certify_moduli(spec.operator(), 1000, seed)
            worst = min(worst, report.worst_monotonicity_slack, report.worst_lipschitz_slack)
        return f"skewed generated operators, worst slack {worst:.2e}"

    run_suite("trace-bounds", suite_bounds)
    run_suite("pp-equivalence", suite_equivalence)
    run_suite("partial-inverse-monotonicity", suite_monotonicity)
    run_suite("operator-moduli", suite_moduli)
    return 1 if failures else 0


def cmd_bench(args) -> int:
    if args.cond_range is not None:
        lo, hi, count = args.cond_range
        conds = [float(c) for c in np.linspace(lo, hi, int(count))]
    elif args.conds is not None:
        conds = args.conds
    else:
        conds = [1.0, 5.0, 20.0, 100.0]
    seeds = range(args.seed, args.seed + args.num_seeds)
    rows = harness.run_sweep(
        args.dims, conds, seeds, gammas=(args.gamma,), rho=args.rho, iters=args.iters
    )
    harness.write_result_csv(
        rows,
        args.out,
        params={
            "dims": ",".join(str(d) for d in args.dims),
            "conds": ",".join(repr(c) for c in conds),
            "seeds": f"{args.seed}..{args.seed + args.num_seeds - 1}",
            "gamma": "1/L" if args.gamma is None else repr(args.gamma),
            "iters": args.iters,
            "rho": repr(args.rho),
        },
    )
    print(f"{len(rows)} rows written to {args.out}")
    return 0


def cmd_plot(args) -> int:
    rows = harness.read_result_csv(args.input)
    svg_path, csv_path = harness.emit_figure(args.out, rows=rows)
    print(f"figure written to {svg_path}, data to {csv_path}")
    return 0


COMMANDS = {
    "rates": cmd_rates,
    "solve": cmd_solve,
    "certify": cmd_certify,
    "bench": cmd_bench,
    "plot": cmd_plot,
}


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return COMMANDS[args.command](args)
    except KNOWN_ERRORS as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    raise SystemExit(main())
