"""``nmesolve`` command line: solve, diagnose, gen, bench.

Exit codes: 0 Converged, 1 invalid input or flags, 2 NotSolvable,
3 Breakdown, 4 MaxIterExceeded. Machine-readable output goes to files;
stdout carries a one-line summary.
"""

import argparse
import csv
import sys
from concurrent.futures import ThreadPoolExecutor
from pathlib import Path

from . import _backend
from .diagnostics import diagnose, estimate_rate
from .errors import InsufficientHistory, NMEError
from .io import dumps_problem, read_problem, result_to_dict, write_json
from .probgen import GenSpec, generate
from .solvers import SolveOptions, Status, solve

EXIT = {
    Status.CONVERGED: 0,
    Status.NOT_SOLVABLE: 2,
    Status.BREAKDOWN: 3,
    Status.MAX_ITER: 4,
}
EXIT_INVALID = 1

ALGORITHM_FLAGS = {
    "fixed": "fixed_point",
    "restart": "accel_restart",
    "order-r": "accel_order_r",
    "schedule": "accel_schedule",
    "alternating": "alternating",
}

HISTORY_HEADER = ["iter", "effective_index", "normA", "deltaQ", "residual"]
BENCH_HEADER = ["problem", "algorithm", "status", "iterations", "effective_index",
                "final_residual", "measured_rate", "rho_T1"]


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        print(f"{self.prog}: error: {message}", file=sys.stderr)
        raise SystemExit(EXIT_INVALID)


def _schedule(text):
    try:
        vals = tuple(int(v) for v in text.split(",") if v.strip())
    except ValueError:
        raise argparse.ArgumentTypeError(f"not a comma list of integers: {text!r}") from None
    if not vals:
        raise argparse.ArgumentTypeError("empty schedule")
    return vals


def _add_solver_flags(sp, required_input=True):
    sp.add_argument("--input", required=required_input, help="problem file (JSON)")
    sp.add_argument("--algorithm", choices=sorted(ALGORITHM_FLAGS), default="fixed")
    sp.add_argument("--tol", type=float, default=1e-12)
    sp.add_argument("--max-iter", type=int, default=None)
    sp.add_argument("--ell", type=int, default=1, help="restart length (restart)")
    sp.add_argument("--order", type=int, default=2, help="order r (order-r)")
    sp.add_argument("--schedule", type=_schedule, default=(2,),
                    help="comma list of orders, cycled (schedule)")


def _options(args):
    return SolveOptions(
        algorithm=ALGORITHM_FLAGS[args.algorithm], tol=args.tol, max_iter=args.max_iter,
        ell=args.ell, r=args.order, schedule=args.schedule)


def build_parser():
    ap = _Parser(prog="nmesolve", description=__doc__.splitlines()[0])
    ap.add_argument("--backend", choices=("auto", "compiled", "python"), default="auto",
                    help="kernel backend")
    sub = ap.add_subparsers(dest="command", required=True, parser_class=_Parser)

    sp = sub.add_parser("solve", help="solve a problem file")
    _add_solver_flags(sp)
    sp.add_argument("--output", help="result file (JSON)")
    sp.add_argument("--history", help="convergence history (CSV)")

    sp = sub.add_parser("diagnose", help="solve, then report diagnostics")
    _add_solver_flags(sp)
    sp.add_argument("--output", help="result file with diagnostics (JSON)")
    sp.add_argument("--samples", type=int, default=256, help="unit-circle samples")

    sp = sub.add_parser("gen", help="generate a problem file")
    sp.add_argument("--mode", choices=("solvable", "critical", "unsolvable_scalar_family", "scalar"),
                    default="solvable")
    sp.add_argument("--n", type=int, default=1)
    sp.add_argument("--sign", choices=("plus", "minus"), default="plus")
    sp.add_argument("--operator", default="identity",
                    choices=("identity", "transpose", "conjugate", "involutory_similarity"))
    sp.add_argument("--seed", type=int, default=0)
    sp.add_argument("--a", type=float, default=1.0)
    sp.add_argument("--q", type=float, default=2.0)
    sp.add_argument("--margin", type=float, default=0.5)
    sp.add_argument("--n-critical", type=int, default=1)
    sp.add_argument("--output", required=True)

    sp = sub.add_parser("bench", help="run a suite of problem files")
    sp.add_argument("--suite", required=True, help="text file with one problem path per line")
    sp.add_argument("--algorithms", default="fixed",
                    help="comma list of fixed, restart[-L], order-R, schedule, alternating")
    sp.add_argument("--tol", type=float, default=1e-12)
    sp.add_argument("--max-iter", type=int, default=None)
    sp.add_argument("--schedule", type=_schedule, default=(2, 3, 2))
    sp.add_argument("--jobs", type=int, default=1, help="worker threads")
    sp.add_argument("--output", required=True)
    return ap


def _fmt(x):
    if x is None:
        return ""
    return repr(float(x))


def _write_history(res, path):
    with open(path, "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh)
        w.writerow(HISTORY_HEADER)
        for h in res.history:
            w.writerow([h.iteration, h.effective_index, _fmt(h.norm_A), _fmt(h.delta_Q),
                        _fmt(h.residual)])


def _summary(cmd, res, extra=""):
    res_s = "nan" if res.final_residual is None else f"{res.final_residual:.3e}"
    line = (f"{cmd}: {res.status} iterations={res.iterations} "
            f"effective_index={res.effective_index} residual={res_s}")
    return line + extra


def cmd_solve(args):
    p = read_problem(args.input)
    res = solve(p, _options(args))
    diag = diagnose(p, res)
    if args.output:
        write_json(result_to_dict(p, res, diag), args.output)
    if args.history:
        _write_history(res, args.history)
    print(_summary("solve", res))
    return EXIT[res.status]


def cmd_diagnose(args):
    p = read_problem(args.input)
    res = solve(p, _options(args))
    diag = diagnose(p, res, samples=args.samples)
    if args.output:
        write_json(result_to_dict(p, res, diag), args.output)
    rho = "n/a" if diag.rho_T1 is None else f"{diag.rho_T1:.7f}"
    print(_summary("diagnose", res,
                   f" rho_T1={rho} critical={diag.critical} psi_min_eig={diag.psi_min_eig:.3e}"))
    return EXIT[res.status]


def cmd_gen(args):
    spec = GenSpec(n=args.n, sign=args.sign, operator_kind=args.operator, seed=args.seed,
                   mode=args.mode, margin=args.margin, a=args.a, q=args.q,
                   n_critical=args.n_critical)
    g = generate(spec)
    Path(args.output).write_text(dumps_problem(g.problem), encoding="utf-8")
    print(f"gen: wrote {args.mode} problem n={g.problem.n} to {args.output}")
    return 0


def parse_bench_algorithm(token, schedule=(2, 3, 2)):
    """``(label, SolveOptions kwargs)`` for a bench algorithm token."""
    token = token.strip()
    if token == "fixed":
        return token, {"algorithm": "fixed_point"}
    if token == "alternating":
        return token, {"algorithm": "alternating"}
    if token == "schedule":
        return token, {"algorithm": "accel_schedule", "schedule": schedule}
    if token.startswith("order-"):
        return token, {"algorithm": "accel_order_r", "r": int(token[6:])}
    if token.startswith("restart"):
        ell = int(token[8:]) if token.startswith("restart-") else 2
        return token, {"algorithm": "accel_restart", "ell": ell}
    raise ValueError(f"unknown bench algorithm {token!r}")


def _bench_cell(path, label, kwargs, tol, max_iter):
    p = read_problem(path)
    res = solve(p, SolveOptions(tol=tol, max_iter=max_iter, **kwargs))
    row = [str(path), label, str(res.status)]
    if res.status is not Status.CONVERGED:
        return row + [""] * 5
    try:
        rate = estimate_rate(res.history)
    except InsufficientHistory:
        rate = None
    return row + [res.iterations, res.effective_index, _fmt(res.final_residual),
                  _fmt(rate), _fmt(res.rho_T1)]


def cmd_bench(args):
    suite = Path(args.suite)
    paths = [ln.strip() for ln in suite.read_text(encoding="utf-8").splitlines()
             if ln.strip() and not ln.lstrip().startswith("#")]
    paths = [str((suite.parent / q) if not Path(q).is_absolute() else q) for q in paths]
    algs = [parse_bench_algorithm(t, args.schedule) for t in args.algorithms.split(",") if t.strip()]
    for q in paths:  # fail fast on unreadable files before running anything
        read_problem(q)
    cells = [(q, label, kw) for q in paths for label, kw in algs]
    with ThreadPoolExecutor(max_workers=max(1, args.jobs)) as pool:
        rows = list(pool.map(lambda c: _bench_cell(*c, args.tol, args.max_iter), cells))
    with open(args.output, "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh)
        w.writerow(BENCH_HEADER)
        w.writerows(rows)
    print(f"bench: {len(rows)} rows written to {args.output}")
    return 0


COMMANDS = {"solve": cmd_solve, "diagnose": cmd_diagnose, "gen": cmd_gen, "bench": cmd_bench}


def main(argv=None):
    ap = build_parser()
    try:
        args = ap.parse_args(argv)
    except SystemExit as exc:
        return exc.code if isinstance(exc.code, int) else EXIT_INVALID
    try:
        _backend.set_backend(args.backend)
        return COMMANDS[args.command](args)
    except (NMEError, ValueError, RuntimeError, OSError) as exc:
        print(f"nmesolve {args.command}: error: {exc}", file=sys.stderr)
        return EXIT_INVALID


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())
