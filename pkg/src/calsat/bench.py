"""Benchmark harness: repeated timed runs, aggregation, speedup reports.

The protocol: each (benchmark, strategy) pair is solved `repeats` times,
UNKNOWN results are recorded with the full timeout as their elapsed time,
and per-constraint solve times are averaged across repeats before any
summary statistic is taken. Solve rate is the mean over runs of the
per-run percentage of decided constraints. Speedups are reported against
the naive strategy with three clamping conventions:

* naive timed out, the other strategy finished — naive's time enters at
  the timeout, giving a conservative speedup estimate;
* the other strategy timed out while naive finished — the speedup is
  pinned at 1e-3 so the point stays plottable;
* both timed out — the pair is omitted, the comparison is meaningless.

Timing covers the backend check call only; encoding cost is recorded in
a separate column. A worker owns its solver process and runs a given
benchmark's repeats back-to-back.
"""

from __future__ import annotations

import csv
import json
import statistics
import threading
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterable, Mapping, Sequence

from .backend import BackendError, SolverBackend, Status
from .encoders import ALL_STRATEGIES, EncodingError, Strategy, decode_model, encode
from .evaluate import validate_model
from .gregorian import DEFAULT_BOUNDS, Bounds
from .parser import load_problem
from .syntax import Problem

DECIDED = (Status.SAT, Status.UNSAT)


@dataclass(frozen=True)
class SolveRecord:
    """One timed solve of one benchmark under one strategy."""

    problem: str
    strategy: str
    repeat: int
    status: str  # sat | unsat | unknown | error
    solve_ms: float  # unknown is pinned at the timeout
    encode_ms: float
    model_ok: bool | None = None  # None unless status == sat

    @property
    def decided(self) -> bool:
        return self.status in ("sat", "unsat")

    def to_json(self) -> dict:
        return {
            "problem": self.problem,
            "strategy": self.strategy,
            "repeat": self.repeat,
            "status": self.status,
            "solve_ms": round(self.solve_ms, 3),
            "encode_ms": round(self.encode_ms, 3),
            "model_ok": self.model_ok,
        }


@dataclass
class SuiteRun:
    """Configuration for one benchmark campaign."""

    suite: str | Path  # directory of benchmark JSON files, or one file
    strategies: Sequence[Strategy | str] = ALL_STRATEGIES
    repeats: int = 10
    timeout_ms: int = 60000
    bounds: Bounds = DEFAULT_BOUNDS
    workers: int = 1
    validate: bool = True


@dataclass
class SuiteResult:
    records: list[SolveRecord]
    skipped: list[tuple[str, str]] = field(default_factory=list)  # (file, why)

    @property
    def ok(self) -> bool:
        return not self.skipped


def load_suite(suite: str | Path) -> tuple[list[Problem], list[tuple[str, str]]]:
    """All parseable problems in a suite (sorted by file name), plus the
    files that could not be loaded."""
    path = Path(suite)
    files = [path] if path.is_file() else sorted(path.glob("*.json"))
    problems: list[Problem] = []
    skipped: list[tuple[str, str]] = []
    for f in files:
        try:
            problems.append(load_problem(f))
        except (ValueError, OSError) as exc:
            skipped.append((str(f), str(exc)))
    return problems, skipped


def _solve_records(problem: Problem, strategy: Strategy, cfg: SuiteRun,
                   backend: SolverBackend) -> list[SolveRecord]:
    out = []
    for repeat in range(cfg.repeats):
        status, solve_ms, encode_ms, model_ok = "error", 0.0, 0.0, None
        try:
            inst = encode(problem, strategy, bounds=cfg.bounds,
                          backend=backend, timeout_ms=cfg.timeout_ms)
            encode_ms = inst.encode_ms
            got = inst.session.check()
            status = str(got)
            solve_ms = inst.session.last_solve_ms
            if got is Status.UNKNOWN:
                solve_ms = float(cfg.timeout_ms)
            elif got is Status.SAT and cfg.validate:
                model = decode_model(inst, inst.session.model())
                model_ok = not validate_model(problem, model, cfg.bounds)
        except (EncodingError, BackendError, ValueError):
            status = "error"
        out.append(SolveRecord(problem.name, str(strategy), repeat, status,
                               solve_ms, encode_ms, model_ok))
    return out


def run_suite(cfg: SuiteRun,
              backends: Mapping[Strategy, SolverBackend] | None = None
              ) -> SuiteResult:
    """The full record matrix: every benchmark x strategy x repeat.

    With `backends`, each strategy reuses the given (warm) solver process
    and `workers` is ignored in favor of the caller's arrangement;
    otherwise each worker thread owns one freshly warmed process.
    """
    problems, skipped = load_suite(cfg.suite)
    strategies = [Strategy.from_name(s) if isinstance(s, str) else s
                  for s in cfg.strategies]
    tasks = [(p, s) for p in problems for s in strategies]
    records: list[SolveRecord] = []

    if backends is not None:
        for problem, strategy in tasks:
            records.extend(_solve_records(problem, strategy, cfg,
                                          backends[strategy]))
    else:
        local = threading.local()
        owned: list[SolverBackend] = []
        lock = threading.Lock()

        def solve(task):
            backend = getattr(local, "backend", None)
            if backend is None:
                backend = local.backend = SolverBackend()
                backend.warmup()
                with lock:
                    owned.append(backend)
            problem, strategy = task
            return _solve_records(problem, strategy, cfg, backend)

        try:
            if cfg.workers <= 1:
                for task in tasks:
                    records.extend(solve(task))
            else:
                with ThreadPoolExecutor(max_workers=cfg.workers) as ex:
                    for chunk in ex.map(solve, tasks):
                        records.extend(chunk)
        finally:
            for b in owned:
                b.close()

    records.sort(key=lambda r: (r.problem, r.strategy, r.repeat))
    return SuiteResult(records, skipped)


# --- aggregation -----------------------------------------------------------------


def _per_constraint_means(records: Iterable[SolveRecord]
                          ) -> dict[str, dict[str, float]]:
    """strategy -> problem -> mean solve_ms across repeats."""
    sums: dict[str, dict[str, list[float]]] = {}
    for r in records:
        sums.setdefault(r.strategy, {}).setdefault(r.problem, []).append(
            r.solve_ms)
    return {s: {p: statistics.fmean(v) for p, v in by_problem.items()}
            for s, by_problem in sums.items()}


def _timed_out(records: Iterable[SolveRecord]) -> dict[str, dict[str, bool]]:
    """strategy -> problem -> True when no repeat was decided."""
    seen: dict[str, dict[str, bool]] = {}
    for r in records:
        prev = seen.setdefault(r.strategy, {}).setdefault(r.problem, True)
        seen[r.strategy][r.problem] = prev and not r.decided
    return seen


@dataclass(frozen=True)
class StrategySummary:
    strategy: str
    solve_rate: float  # mean over runs of per-run decided fraction, 0..1
    median_ms: float
    mean_ms: float
    stddev_ms: float
    median_encode_ms: float

    def to_json(self) -> dict:
        return {
            "strategy": self.strategy,
            "solve_rate": round(self.solve_rate, 4),
            "median_s": round(self.median_ms / 1000, 2),
            "mean_s": round(self.mean_ms / 1000, 2),
            "stddev_s": round(self.stddev_ms / 1000, 2),
            "median_encode_s": round(self.median_encode_ms / 1000, 2),
            "median_ms": round(self.median_ms, 3),
            "mean_ms": round(self.mean_ms, 3),
            "stddev_ms": round(self.stddev_ms, 3),
            "median_encode_ms": round(self.median_encode_ms, 3),
        }


def summarize(records: Sequence[SolveRecord]) -> dict[str, StrategySummary]:
    """Per-strategy statistics, aggregated as the protocol prescribes:
    constraint times are averaged across runs first, and the solve rate
    is the mean of per-run decided percentages."""
    means = _per_constraint_means(records)
    out: dict[str, StrategySummary] = {}
    for strategy in sorted(means):
        rows = [r for r in records if r.strategy == strategy]
        by_run: dict[int, list[bool]] = {}
        for r in rows:
            by_run.setdefault(r.repeat, []).append(r.decided)
        rate = statistics.fmean(
            statistics.fmean(flags) for flags in by_run.values())
        per_constraint = sorted(means[strategy].values())
        enc = sorted(statistics.fmean(
            [r.encode_ms for r in rows if r.problem == p])
            for p in means[strategy])
        out[strategy] = StrategySummary(
            strategy=strategy,
            solve_rate=rate,
            median_ms=statistics.median(per_constraint),
            mean_ms=statistics.fmean(per_constraint),
            stddev_ms=(statistics.stdev(per_constraint)
                       if len(per_constraint) > 1 else 0.0),
            median_encode_ms=statistics.median(enc),
        )
    return out


@dataclass(frozen=True)
class SpeedupRecord:
    problem: str
    strategy: str
    speedup: float  # naive mean time / strategy mean time, after clamping
    annotation: str = ""  # "", "conservative", or "pinned"

    def to_json(self) -> dict:
        return {
            "problem": self.problem,
            "strategy": self.strategy,
            "speedup": round(self.speedup, 6),
            "annotation": self.annotation,
        }


BASELINE = str(Strategy.NAIVE)
PINNED_SPEEDUP = 1e-3


def speedups(records: Sequence[SolveRecord],
             timeout_ms: float | None = None) -> list[SpeedupRecord]:
    """Per-constraint speedups versus naive, with the clamping rules."""
    means = _per_constraint_means(records)
    outs = _timed_out(records)
    if BASELINE not in means:
        raise ValueError("speedups need naive records as the baseline")
    if timeout_ms is None:
        timeout_ms = max((r.solve_ms for r in records), default=0.0)
    out: list[SpeedupRecord] = []
    for strategy in sorted(means):
        if strategy == BASELINE:
            continue
        for problem in sorted(means[strategy]):
            if problem not in means[BASELINE]:
                continue
            naive_out = outs[BASELINE].get(problem, False)
            mine_out = outs[strategy].get(problem, False)
            if naive_out and mine_out:
                continue  # both timed out: comparison is meaningless
            if mine_out:
                out.append(SpeedupRecord(problem, strategy, PINNED_SPEEDUP,
                                         "pinned"))
                continue
            naive_ms = means[BASELINE][problem]
            note = ""
            if naive_out:
                naive_ms = float(timeout_ms)  # conservative estimate
                note = "conservative"
            out.append(SpeedupRecord(
                problem, strategy, naive_ms / max(means[strategy][problem],
                                                  1e-9), note))
    return out


def median_speedups(speedup_records: Sequence[SpeedupRecord]
                    ) -> dict[str, float]:
    by_strategy: dict[str, list[float]] = {}
    for r in speedup_records:
        by_strategy.setdefault(r.strategy, []).append(r.speedup)
    return {s: statistics.median(v) for s, v in sorted(by_strategy.items())}


# --- reports ---------------------------------------------------------------------


def build_report(result: SuiteResult, cfg: SuiteRun) -> dict:
    summary = summarize(result.records)
    ups = speedups(result.records, cfg.timeout_ms) \
        if any(r.strategy == BASELINE for r in result.records) else []
    return {
        "config": {
            "suite": str(cfg.suite),
            "strategies": [str(s) for s in cfg.strategies],
            "repeats": cfg.repeats,
            "timeout_ms": cfg.timeout_ms,
            "bounds": [str(cfg.bounds.lb), str(cfg.bounds.ub)],
        },
        "summary": {s: v.to_json() for s, v in summary.items()},
        "speedups": [r.to_json() for r in ups],
        "median_speedups": median_speedups(ups),
        "records": [r.to_json() for r in result.records],
        "skipped": [{"file": f, "reason": why} for f, why in result.skipped],
    }


CSV_COLUMNS = ("problem", "strategy", "repeat", "status", "solve_ms",
               "encode_ms", "model_ok")


def write_csv(records: Iterable[SolveRecord | dict], path: str | Path) -> None:
    """Flat mirror of the record matrix."""
    with open(path, "w", newline="") as fh:
        w = csv.DictWriter(fh, fieldnames=CSV_COLUMNS)
        w.writeheader()
        for r in records:
            w.writerow(r if isinstance(r, dict) else r.to_json())


def write_report(report: dict, path: str | Path) -> None:
    Path(path).write_text(json.dumps(report, indent=2, sort_keys=True) + "\n")
