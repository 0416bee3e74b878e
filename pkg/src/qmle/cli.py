"""Command-line interface: ``qmle gen|solve|compare|portfolio``.

Exit codes: 0 success, 1 solver error, 2 usage or input error.
"""

import argparse
import os
import sys

from . import io, problems, solvers
from .errors import NumericError, ParseError, QmleError, ValidationError

CLI_ALGORITHMS = {
    "qem": "qem",
    "rrr": "rrr",
    "drrr-exact": "drrr_exact",
    "drrr-armijo": "drrr_armijo",
    "cover": "cover",
}


class UsageError(Exception):
    pass


def _algorithm(name):
    key = name.strip()
    if key not in CLI_ALGORITHMS:
        raise argparse.ArgumentTypeError(
            f"unknown algorithm {name!r} (choose from {', '.join(CLI_ALGORITHMS)})"
        )
    return CLI_ALGORITHMS[key]


def _algorithm_list(text):
    return [_algorithm(part) for part in text.split(",") if part.strip()]


def _add_solver_flags(p):
    p.add_argument("--max-iters", type=int, default=1000)
    p.add_argument("--tol", type=float, default=1e-8, help="certificate tolerance")
    p.add_argument("--record-every", type=int, default=1)


def build_parser():
    parser = argparse.ArgumentParser(
        prog="qmle", description="Maximum-likelihood quantum state tomography."
    )
    sub = parser.add_subparsers(dest="command", required=True)

    g = sub.add_parser("gen", help="generate a synthetic tomography problem")
    g.add_argument("--dim", type=int, required=True)
    g.add_argument("--bases", type=int, required=True)
    g.add_argument("--shots", type=int, required=True, help="shots per basis")
    g.add_argument("--rank", type=int, default=1, help="rank of the true state")
    g.add_argument("--seed", type=int, default=0)
    g.add_argument("--out", required=True)

    s = sub.add_parser("solve", help="solve a problem file")
    s.add_argument("--algorithm", type=_algorithm, default="qem")
    _add_solver_flags(s)
    s.add_argument("--trace", help="write the convergence trace (CSV) here")
    s.add_argument("problem")

    c = sub.add_parser("compare", help="run several algorithms on one problem")
    c.add_argument("--algorithms", type=_algorithm_list, default=list(CLI_ALGORITHMS.values())[:4])
    _add_solver_flags(c)
    c.add_argument("--trace-dir", help="write <algorithm>.csv traces into this directory")
    c.add_argument("problem")

    pf = sub.add_parser("portfolio", help="growth-optimal portfolio by Cover's method")
    pf.add_argument("--returns", required=True, help="CSV of N periods x D assets")
    pf.add_argument("--tol", type=float, default=1e-8)
    pf.add_argument("--max-iters", type=int, default=100000)
    pf.add_argument("--record-every", type=int, default=1)
    pf.add_argument("--trace")
    return parser


def _options(args, algorithm):
    try:
        return solvers.SolverOptions(algorithm, args.max_iters, args.tol, args.record_every)
    except ValueError as exc:
        raise UsageError(str(exc)) from exc


def cmd_gen(args):
    try:
        inst = problems.gen_instance(args.dim, args.bases, args.shots, args.rank, args.seed)
    except ValueError as exc:
        raise UsageError(str(exc)) from exc
    io.save_problem(inst, args.out)
    print(f"wrote {args.out}: dim={inst.ensemble.dim} outcomes={len(inst.ensemble)}")
    return 0


def cmd_solve(args):
    inst = io.load_problem(args.problem)
    report = solvers.run(inst.ensemble, _options(args, args.algorithm))
    if args.trace:
        io.write_trace(report, args.trace)
    last = report.records[-1]
    print(f"algorithm: {args.algorithm}")
    print(f"stop_reason: {report.stop_reason}")
    print(f"iterations: {report.iterations}")
    print(f"objective: {last.objective_at_rho:.17g}")
    print(f"certificate: {report.final_certificate:.17g}")
    return 0


def cmd_compare(args):
    inst = io.load_problem(args.problem)
    if args.trace_dir:
        os.makedirs(args.trace_dir, exist_ok=True)
    rows = []
    failed = False
    for alg in args.algorithms:
        opts = _options(args, alg)
        try:
            report = solvers.run(inst.ensemble, opts)
        except NumericError as exc:
            print(f"{alg}: {exc}", file=sys.stderr)
            rows.append((alg, "error", "-", "-", "-"))
            failed = True
            continue
        if args.trace_dir:
            io.write_trace(report, os.path.join(args.trace_dir, f"{alg}.csv"))
        last = report.records[-1]
        rows.append(
            (
                alg,
                report.stop_reason,
                str(report.iterations),
                f"{last.objective_at_rho:.10f}",
                f"{report.final_certificate:.3e}",
            )
        )
    header = ("algorithm", "stop_reason", "iters", "objective", "gap_bound")
    widths = [max(len(r[i]) for r in rows + [header]) for i in range(len(header))]
    for row in [header] + rows:
        print("  ".join(cell.ljust(w) for cell, w in zip(row, widths)).rstrip())
    return 1 if failed else 0


def cmd_portfolio(args):
    returns = io.load_returns(args.returns)
    try:
        prob = problems.portfolio_from_returns(returns)
    except ValueError as exc:
        raise UsageError(str(exc)) from exc
    if args.max_iters < 1 or args.record_every < 1 or not args.tol >= 0:
        raise UsageError("--max-iters and --record-every must be >= 1, --tol >= 0")
    report = solvers.solve_portfolio(prob, args.max_iters, args.tol, args.record_every)
    if args.trace:
        io.write_trace(report, args.trace)
    last = report.records[-1]
    print("weights: " + " ".join(f"{v:.10f}" for v in report.final_x))
    print(f"stop_reason: {report.stop_reason}")
    print(f"iterations: {report.iterations}")
    print(f"growth_rate: {-last.objective_at_rho:.17g}")
    print(f"certificate: {min(last.certificate_at_rho, last.certificate_at_rho_bar):.17g}")
    return 0


COMMANDS = {"gen": cmd_gen, "solve": cmd_solve, "compare": cmd_compare, "portfolio": cmd_portfolio}


def cli_main(argv=None):
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    try:
        return COMMANDS[args.command](args)
    except (UsageError, ParseError, ValidationError, OSError) as exc:
        print(f"qmle {args.command}: {exc}", file=sys.stderr)
        return 2
    except QmleError as exc:
        print(f"qmle {args.command}: solver error: {exc}", file=sys.stderr)
        return 1


def main():
    sys.exit(cli_main())


if __name__ == "__main__":
    main()
