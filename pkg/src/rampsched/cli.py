"""Command-line interface.

Subcommands: solve (offline feasibility), simulate (run a policy),
gen (instance families), check (surd-sum queries), bench (measurement
sweeps).  Exit codes for solve/check follow the verdict: 0 feasible,
1 infeasible, 2 indeterminate; usage and format errors exit 64.
"""

from __future__ import annotations

import argparse
import csv
import sys

from .core import PrecisionContext, UnsupportedInstanceError
from .fileio import (
    FileFormatError,
    instance_to_record,
    load_instance,
    save_instance,
    save_schedule,
    save_trace,
    write_plot_data,
)
from .generators import (
    SsrQuery,
    adaptive_adversary,
    check_reduction,
    gen_edd,
    gen_fifo,
    gen_lssf,
    gen_random_feasible,
    gen_srpt,
    recover_ssr_query,
    reduce_ssr,
)
from .offline import Feasibility, lrtb, total_busy_time
from .online import Policy, PolicySpec, busy_time_in_window, max_stretch, simulate

EXIT_FEASIBLE = 0
EXIT_INFEASIBLE = 1
EXIT_INDETERMINATE = 2
EXIT_USAGE = 64

_STATUS_EXIT = {
    Feasibility.FEASIBLE: EXIT_FEASIBLE,
    Feasibility.INFEASIBLE: EXIT_INFEASIBLE,
    Feasibility.INDETERMINATE: EXIT_INDETERMINATE,
}


class _Parser(argparse.ArgumentParser):
    """argparse that exits 64 on usage errors instead of 2."""

    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


def _add_precision(parser):
    parser.add_argument(
        "--precision",
        type=int,
        default=128,
        metavar="BITS",
        help="working precision in bits (default 128; <=53 uses doubles)",
    )
    parser.add_argument(
        "--rel-tol",
        type=float,
        default=None,
        metavar="TOL",
        help="override the relative comparison tolerance",
    )


def _context(args) -> PrecisionContext:
    try:
        return PrecisionContext(bits=args.precision, rel_tol=args.rel_tol)
    except ValueError as exc:
        raise SystemExit(_fail_usage(exc))


def _policy_spec(args) -> PolicySpec:
    return PolicySpec(
        Policy(args.policy),
        alpha=args.alpha,
        speed_cap_factor=args.cap,
    )


def _short(ctx, x):
    return f"{float(x):.12g}"


def _fail_usage(message) -> int:
    print(message, file=sys.stderr)
    return EXIT_USAGE


# --- solve -------------------------------------------------------------------


def cmd_solve(args) -> int:
    ctx = _context(args)
    try:
        instance = load_instance(args.instance, ctx)
    except FileFormatError as exc:
        return _fail_usage(exc)
    query = recover_ssr_query(instance)
    if query is not None:
        verdict = check_reduction(query, ctx)
        schedule = verdict.witness
    else:
        try:
            schedule, verdict = lrtb(instance, ctx)
        except UnsupportedInstanceError as exc:
            return _fail_usage(f"{args.instance}: {exc}")
    print(f"instance: {instance.name or args.instance}")
    print(f"status: {verdict.status.value}")
    if verdict.margin is not None:
        print(f"margin: {_short(ctx, verdict.margin)}")
    if schedule is not None:
        print(f"busy time: {_short(ctx, total_busy_time(schedule))}")
    for jid, deficit in sorted(verdict.deficits.items()):
        print(f"job {jid} deficit: {_short(ctx, deficit)}")
    if verdict.status is Feasibility.INDETERMINATE:
        print(
            f"margin is inside the comparison tolerance at {args.precision} "
            f"bits; retry with --precision {2 * args.precision}"
        )
    if args.out:
        if schedule is None:
            print("no schedule to write (instance not feasible)", file=sys.stderr)
        else:
            save_schedule(instance, schedule, verdict, args.out, ctx)
            print(f"schedule written to {args.out}")
    return _STATUS_EXIT[verdict.status]


# --- simulate ----------------------------------------------------------------


def cmd_simulate(args) -> int:
    ctx = _context(args)
    try:
        instance = load_instance(args.instance, ctx)
        spec = _policy_spec(args)
    except (FileFormatError, ValueError) as exc:
        return _fail_usage(exc)
    trace = simulate(instance, spec, ctx)
    worst = max_stretch(trace)
    missed = [j.id for j in instance.jobs if trace.completions[j.id] > j.due]
    print(f"instance: {instance.name or args.instance}")
    print(f"policy: {spec.kind.value} (alpha={spec.alpha}, cap={spec.speed_cap_factor})")
    print(f"max stretch: {_short(ctx, worst)}")
    print(f"busy time: {_short(ctx, trace.busy_time)}")
    lo, hi = instance.horizon
    print(f"busy fraction of horizon: {float(busy_time_in_window(trace, lo, hi) / (hi - lo)):.4f}")
    if missed:
        print(f"missed due dates: jobs {', '.join(str(j) for j in missed)}")
    else:
        print("missed due dates: none")
    if args.trace_out:
        save_trace(trace, args.trace_out, ctx)
        print(f"trace written to {args.trace_out}")
    if args.plot_out:
        gantt = write_plot_data(trace, args.plot_out, ctx)
        print(f"plot data written to {args.plot_out} and {gantt}")
    return 0


# --- gen ---------------------------------------------------------------------


def cmd_gen(args) -> int:
    ctx = _context(args)
    trace = None
    try:
        if args.family == "lssf":
            instance = gen_lssf(args.n, ctx, rationalize=args.rationalize)
        elif args.family == "srpt":
            instance = gen_srpt(args.n, ctx, rationalize=args.rationalize)
        elif args.family == "fifo":
            instance = gen_fifo(args.target, ctx)
        elif args.family == "edd":
            instance = gen_edd(args.target, ctx)
        elif args.family == "random":
            instance = gen_random_feasible(args.n, args.seed, ctx)
        elif args.family == "reduction":
            query = SsrQuery(_parse_int_list(args.xs), args.threshold)
            instance = reduce_ssr(query, ctx)
        elif args.family == "adversary":
            spec = _policy_spec(args)
            outcome = adaptive_adversary(spec, ctx)
            instance = outcome.instance
            trace = outcome.trace
            print(f"branch: {outcome.branch}")
            print(f"policy missed a due date: {outcome.missed}")
        else:  # pragma: no cover - argparse restricts choices
            return _fail_usage(f"unknown family {args.family}")
    except ValueError as exc:
        return _fail_usage(exc)
    if args.out:
        save_instance(instance, args.out, ctx)
        print(f"instance written to {args.out}")
    else:
        import json

        json.dump(instance_to_record(instance, ctx), sys.stdout, indent=2)
        print()
    if trace is not None and args.trace_out:
        save_trace(trace, args.trace_out, ctx)
        print(f"trace written to {args.trace_out}")
    return 0


def _parse_int_list(text):
    try:
        return tuple(int(tok) for tok in text.split(",") if tok.strip())
    except ValueError as exc:
        raise ValueError(f"expected comma-separated integers, got {text!r}") from exc


def _parse_seed_spec(text):
    """Seed list like "1..100" or "3,7,21" (ranges are inclusive)."""
    seeds = []
    for tok in text.split(","):
        tok = tok.strip()
        if not tok:
            continue
        if ".." in tok:
            lo_text, hi_text = tok.split("..", 1)
            lo, hi = int(lo_text), int(hi_text)
            if hi < lo:
                raise ValueError(f"empty seed range {tok!r}")
            seeds.extend(range(lo, hi + 1))
        else:
            seeds.append(int(tok))
    return seeds


# --- check -------------------------------------------------------------------


def cmd_check(args) -> int:
    ctx = _context(args)
    try:
        query = SsrQuery(_parse_int_list(args.xs), args.threshold)
    except ValueError as exc:
        return _fail_usage(exc)
    verdict = check_reduction(query, ctx)
    total = " + ".join(f"sqrt({x})" for x in query.xs)
    print(f"query: {total} >= {query.threshold}")
    print(f"status: {verdict.status.value}")
    print(f"margin: {_short(ctx, verdict.margin)}")
    if verdict.status is Feasibility.INDETERMINATE:
        print(
            f"margin is inside the comparison tolerance at {args.precision} "
            f"bits; retry with --precision {2 * args.precision}"
        )
    return _STATUS_EXIT[verdict.status]


# --- bench -------------------------------------------------------------------


def cmd_bench(args) -> int:
    ctx = _context(args)
    try:
        seeds = _parse_seed_spec(args.seeds)
    except ValueError as exc:
        return _fail_usage(exc)
    out = open(args.out, "w", newline="") if args.out else sys.stdout
    try:
        writer = csv.writer(out)
        if args.suite == "thrashing":
            writer.writerow(["seed", "n", "variant", "max_stretch", "busy_time"])
            for seed in seeds:
                n = 1 + (seed % args.jobs)
                instance = gen_random_feasible(n, seed, ctx)
                for variant, cap in (("alpha2", None), ("alpha2-cap2", 2)):
                    spec = PolicySpec(Policy.THRASHING, alpha=2, speed_cap_factor=cap)
                    trace = simulate(instance, spec, ctx)
                    writer.writerow(
                        [seed, n, variant,
                         ctx.format(max_stretch(trace)), ctx.format(trace.busy_time)]
                    )
        elif args.suite == "lssf":
            writer.writerow(["n", "expected", "observed", "rel_err"])
            for n in range(3, args.jobs + 1):
                instance = gen_lssf(n, ctx)
                trace = simulate(instance, PolicySpec(Policy.LSSF), ctx)
                observed = max_stretch(trace)
                expected = ctx.sqrt(n - 1)
                rel = abs(observed - expected) / expected
                writer.writerow(
                    [n, ctx.format(expected), ctx.format(observed), _short(ctx, rel)]
                )
        elif args.suite == "policies":
            writer.writerow(["seed", "n", "policy", "max_stretch", "busy_time", "missed"])
            for seed in seeds:
                n = 1 + (seed % args.jobs)
                instance = gen_random_feasible(n, seed, ctx)
                for kind in Policy:
                    trace = simulate(instance, PolicySpec(kind), ctx)
                    missed = sum(
                        1 for j in instance.jobs if trace.completions[j.id] > j.due
                    )
                    writer.writerow(
                        [seed, n, kind.value,
                         ctx.format(max_stretch(trace)), ctx.format(trace.busy_time),
                         missed]
                    )
        else:  # pragma: no cover - argparse restricts choices
            return _fail_usage(f"unknown suite {args.suite}")
    finally:
        if out is not sys.stdout:
            out.close()
    return 0


# --- parser ------------------------------------------------------------------


def build_parser() -> _Parser:
    parser = _Parser(prog="rampsched", description=__doc__)
    sub = parser.add_subparsers(dest="command", required=True)

    p_solve = sub.add_parser("solve", help="offline feasibility and busy time")
    p_solve.add_argument("instance", help="instance JSON file")
    p_solve.add_argument("--out", metavar="FILE", help="write the schedule as JSON")
    _add_precision(p_solve)
    p_solve.set_defaults(func=cmd_solve)

    p_sim = sub.add_parser("simulate", help="run an online policy")
    p_sim.add_argument("instance", help="instance JSON file")
    p_sim.add_argument(
        "--policy", required=True, choices=[p.value for p in Policy]
    )
    p_sim.add_argument("--alpha", type=float, default=2, help="idle threshold")
    p_sim.add_argument(
        "--cap", type=float, default=None,
        help="cap speeds at CAP * speed(due date)",
    )
    p_sim.add_argument("--trace-out", metavar="FILE")
    p_sim.add_argument("--plot-out", metavar="FILE", help="CSV plot data")
    _add_precision(p_sim)
    p_sim.set_defaults(func=cmd_simulate)

    p_gen = sub.add_parser("gen", help="generate instances")
    fam = p_gen.add_subparsers(dest="family", required=True)

    f_lssf = fam.add_parser("lssf", help="stretch cascade family")
    f_lssf.add_argument("--n", type=int, required=True)
    f_lssf.add_argument(
        "--rationalize", type=float, default=None, metavar="REL",
        help="round parameters to nearby decimals (relative error bound)",
    )
    f_srpt = fam.add_parser("srpt", help="shortest-remaining-time starvation family")
    f_srpt.add_argument("--n", type=int, required=True)
    f_srpt.add_argument("--rationalize", type=float, default=None, metavar="REL")
    f_fifo = fam.add_parser("fifo", help="first-in-first-out sliver family")
    f_fifo.add_argument("--target", type=float, required=True)
    f_edd = fam.add_parser("edd", help="earliest-due-date sliver family")
    f_edd.add_argument("--target", type=float, required=True)
    f_rand = fam.add_parser("random", help="random feasible instance")
    f_rand.add_argument("--n", type=int, required=True)
    f_rand.add_argument("--seed", type=int, required=True)
    f_red = fam.add_parser("reduction", help="surd-sum reduction instance")
    f_red.add_argument("--xs", required=True, help="comma-separated integers")
    f_red.add_argument("--threshold", type=int, required=True)
    f_adv = fam.add_parser("adversary", help="adaptive two-phase adversary")
    f_adv.add_argument(
        "--policy", required=True, choices=[p.value for p in Policy]
    )
    f_adv.add_argument("--alpha", type=float, default=2)
    f_adv.add_argument("--cap", type=float, default=None)
    f_adv.add_argument("--trace-out", metavar="FILE")
    for f in (f_lssf, f_srpt, f_fifo, f_edd, f_rand, f_red, f_adv):
        f.add_argument("--out", metavar="FILE", help="write instance JSON here")
        _add_precision(f)
    p_gen.set_defaults(func=cmd_gen)

    p_check = sub.add_parser("check", help="decide sum(sqrt(x)) >= threshold")
    p_check.add_argument("--xs", required=True, help="comma-separated integers")
    p_check.add_argument("--threshold", type=int, required=True)
    _add_precision(p_check)
    p_check.set_defaults(func=cmd_check)

    p_bench = sub.add_parser("bench", help="measurement sweeps as CSV")
    p_bench.add_argument(
        "--suite", required=True, choices=["thrashing", "lssf", "policies"]
    )
    p_bench.add_argument(
        "--seeds", default="", help='seed list, e.g. "1..100" or "3,7"'
    )
    p_bench.add_argument(
        "--jobs", type=int, default=20, help="job-count bound (or sweep top for lssf)"
    )
    p_bench.add_argument("--out", metavar="FILE", help="CSV output path")
    _add_precision(p_bench)
    p_bench.set_defaults(func=cmd_bench)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    return args.func(args)


if __name__ == "__main__":
    sys.exit(main())
