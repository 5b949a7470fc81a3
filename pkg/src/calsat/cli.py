"""Command-line interface.

One executable, five verbs plus report rendering:

* ``solve``    — decide one problem file, print result JSON
* ``bench``    — run a suite, write report JSON (and CSV + figures)
* ``diff``     — differential run across strategies, nonzero on disagreement
* ``sample``   — generate benchmark files from the grammar sampler
* ``validate`` — judge a model file against the oracle
* ``report``   — re-render CSV and figures from an existing report JSON

Exit codes for ``solve``: 0 SAT, 1 UNSAT, 2 UNKNOWN, 3 runtime error,
4 usage error. Other verbs: 0 success, 1 semantic failure (disagreement,
violations, skipped suite files), 3 runtime error, 4 usage error.

The solver process comes from ``--solver`` when given, else the
``CALSAT_SOLVER`` environment variable, else autodetection.
"""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

from .backend import BackendError, SolverBackend, Status
from .bench import (SuiteRun, build_report, load_suite, run_suite, write_csv,
                    write_report)
from .encoders import (ALL_STRATEGIES, EncodingError, Strategy, decode_model,
                       encode)
from .evaluate import differential_run, validate_model
from .gregorian import DEFAULT_BOUNDS, Bounds, Date, parse_iso_date
from .parser import load_problem
from .sampler import SamplerConfig, sample_problems

EXIT_SAT = 0
EXIT_UNSAT = 1
EXIT_UNKNOWN = 2
EXIT_ERROR = 3
EXIT_USAGE = 4

_STRATEGY_NAMES = [str(s) for s in ALL_STRATEGIES]


class _Parser(argparse.ArgumentParser):
    # argparse exits 2 on bad usage, which would collide with UNKNOWN
    def error(self, message: str):
        self.print_usage(sys.stderr)
        print(f"{self.prog}: error: {message}", file=sys.stderr)
        raise SystemExit(EXIT_USAGE)


def _bounds(args) -> Bounds:
    lb = parse_iso_date(args.lb) if args.lb else DEFAULT_BOUNDS.lb
    ub = parse_iso_date(args.ub) if args.ub else DEFAULT_BOUNDS.ub
    return Bounds(lb, ub)


def _strategies(names) -> list[Strategy]:
    return [Strategy.from_name(n) for n in names]


def _print_json(doc) -> None:
    print(json.dumps(doc, indent=2, sort_keys=True))


# --- solve -----------------------------------------------------------------------


def _cmd_solve(args) -> int:
    problem = load_problem(args.file)
    strategy = Strategy.from_name(args.strategy)
    backend = SolverBackend(args.solver)
    try:
        inst = encode(problem, strategy, bounds=_bounds(args),
                      backend=backend, timeout_ms=args.timeout_ms)
        if args.dump_smt:
            Path(args.dump_smt).write_text(inst.session.dump())
        status = inst.session.check()
        model = None
        if status is Status.SAT:
            decoded = decode_model(inst, inst.session.model())
            model = {k: str(v) if isinstance(v, Date) else v
                     for k, v in decoded.items()}
        _print_json({
            "status": str(status),
            "model": model,
            "time_ms": round(inst.session.last_solve_ms, 3),
            "strategy": str(strategy),
        })
    finally:
        backend.close()
    return {Status.SAT: EXIT_SAT, Status.UNSAT: EXIT_UNSAT}.get(
        status, EXIT_UNKNOWN)


# --- bench -----------------------------------------------------------------------


def _cmd_bench(args) -> int:
    cfg = SuiteRun(suite=args.suite, strategies=_strategies(args.strategies),
                   repeats=args.repeats, timeout_ms=args.timeout_ms,
                   bounds=_bounds(args), workers=args.workers)
    backends = None
    if args.solver:
        backends = {s: SolverBackend(args.solver) for s in cfg.strategies}
        for b in backends.values():
            b.warmup()
    try:
        result = run_suite(cfg, backends)
    finally:
        if backends:
            for b in backends.values():
                b.close()
    report = build_report(result, cfg)
    write_report(report, args.out)
    print(f"wrote {args.out}")
    if args.csv:
        write_csv(result.records, args.csv)
        print(f"wrote {args.csv}")
        if not args.no_figures:
            _render(report, Path(args.csv).parent, Path(args.csv).stem)
    for f, why in result.skipped:
        print(f"skipped {f}: {why}", file=sys.stderr)
    return 0 if result.ok else 1


def _render(report: dict, out_dir: Path, stem: str) -> None:
    from .figures import render_report_figures  # defer the matplotlib import

    for p in render_report_figures(report, out_dir, stem):
        print(f"wrote {p}")


def _cmd_report(args) -> int:
    report = json.loads(Path(args.report).read_text())
    out_dir = Path(args.out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    stem = Path(args.report).stem
    csv_path = out_dir / f"{stem}.csv"
    write_csv(report.get("records", []), csv_path)
    print(f"wrote {csv_path}")
    _render(report, out_dir, stem)
    return 0


# --- diff ------------------------------------------------------------------------


def _cmd_diff(args) -> int:
    problems, skipped = load_suite(args.path)
    for f, why in skipped:
        print(f"skipped {f}: {why}", file=sys.stderr)
    strategies = _strategies(args.strategies)
    backends = {s: SolverBackend(args.solver) for s in strategies}
    reports = []
    try:
        for b in backends.values():
            b.warmup()
        for problem in problems:
            reports.append(differential_run(
                problem, strategies, timeout_ms=args.timeout_ms,
                bounds=_bounds(args), backends=backends))
    finally:
        for b in backends.values():
            b.close()
    if len(reports) == 1:
        _print_json(reports[0].to_json())
    else:
        _print_json({"ok": all(r.ok for r in reports),
                     "reports": [r.to_json() for r in reports]})
    return 0 if all(r.ok for r in reports) and not skipped else 1


# --- sample ----------------------------------------------------------------------


def _cmd_sample(args) -> int:
    cfg = SamplerConfig(seed=args.seed, max_depth=args.max_depth,
                        n_atoms=args.atoms, n_date_vars=args.date_vars)
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    for problem in sample_problems(cfg, args.count):
        path = out / f"{problem.name}.json"
        path.write_text(json.dumps(problem.to_json(), indent=2) + "\n")
        print(f"wrote {path}")
    return 0


# --- validate --------------------------------------------------------------------


def _load_assignment(problem, path: str) -> dict:
    raw = json.loads(Path(path).read_text())
    if not isinstance(raw, dict):
        raise ValueError("model file must be a JSON object")
    env = {}
    for name, value in raw.items():
        sort = problem.declarations.get(name)
        env[name] = parse_iso_date(value) \
            if str(sort) == "date" and isinstance(value, str) else value
    return env


def _cmd_validate(args) -> int:
    problem = load_problem(args.file)
    env = _load_assignment(problem, args.model)
    violations = validate_model(problem, env, _bounds(args))
    if not violations:
        print("Ok")
        return 0
    for v in violations:
        print(v)
    return 1


# --- wiring ----------------------------------------------------------------------


def _add_bounds(p) -> None:
    p.add_argument("--lb", metavar="YYYY-MM-DD",
                   help=f"lower date bound (default {DEFAULT_BOUNDS.lb})")
    p.add_argument("--ub", metavar="YYYY-MM-DD",
                   help=f"upper date bound (default {DEFAULT_BOUNDS.ub})")


def _add_strategies(p) -> None:
    p.add_argument("--strategies", nargs="+", choices=_STRATEGY_NAMES,
                   default=_STRATEGY_NAMES, metavar="NAME",
                   help=f"strategies to run (default: all of "
                        f"{', '.join(_STRATEGY_NAMES)})")


def build_parser() -> argparse.ArgumentParser:
    top = _Parser(prog="calsat",
                  description="Date-constraint satisfiability solver.")
    top.add_argument("--solver", metavar="CMD",
                     help="solver command (overrides CALSAT_SOLVER)")
    sub = top.add_subparsers(dest="command", required=True,
                             parser_class=_Parser)

    p = sub.add_parser("solve", help="decide one problem file")
    p.add_argument("file")
    p.add_argument("--strategy", choices=_STRATEGY_NAMES,
                   default="alpha-beta-table")
    p.add_argument("--timeout-ms", type=int, default=60000)
    _add_bounds(p)
    p.add_argument("--dump-smt", metavar="PATH",
                   help="also write the SMT-LIB2 script here")
    p.set_defaults(run=_cmd_solve)

    p = sub.add_parser("bench", help="run a benchmark suite")
    p.add_argument("suite", help="directory of benchmark JSON files, or one")
    _add_strategies(p)
    p.add_argument("--repeats", type=int, default=10)
    p.add_argument("--timeout-ms", type=int, default=60000)
    _add_bounds(p)
    p.add_argument("--workers", type=int, default=1)
    p.add_argument("--out", default="report.json")
    p.add_argument("--csv", metavar="PATH",
                   help="also write the flat record matrix here")
    p.add_argument("--no-figures", action="store_true",
                   help="skip figure rendering next to the CSV")
    p.set_defaults(run=_cmd_bench)

    p = sub.add_parser("diff", help="differential run across strategies")
    p.add_argument("path", help="problem file or suite directory")
    _add_strategies(p)
    p.add_argument("--timeout-ms", type=int, default=10000)
    _add_bounds(p)
    p.set_defaults(run=_cmd_diff)

    p = sub.add_parser("sample", help="generate benchmark files")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--count", type=int, default=1)
    p.add_argument("--out", default="sampled")
    p.add_argument("--max-depth", type=int, default=4)
    p.add_argument("--atoms", type=int, default=3)
    p.add_argument("--date-vars", type=int, default=10)
    p.set_defaults(run=_cmd_sample)

    p = sub.add_parser("validate", help="judge a model against the oracle")
    p.add_argument("file")
    p.add_argument("--model", required=True, metavar="PATH",
                   help="JSON object mapping variables to values")
    _add_bounds(p)
    p.set_defaults(run=_cmd_validate)

    p = sub.add_parser("report", help="render CSV and figures from a report")
    p.add_argument("report")
    p.add_argument("--out-dir", default=".")
    p.set_defaults(run=_cmd_report)

    return top


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.run(args)
    except (EncodingError, BackendError, ValueError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_ERROR


if __name__ == "__main__":
    raise SystemExit(main())
