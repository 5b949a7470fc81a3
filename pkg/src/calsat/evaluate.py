"""Concrete evaluation of constraints, model validation, differential runs.

The evaluator here is the ground truth the solver pipeline is judged
against: it interprets constraint ASTs directly over concrete
assignments, with date arithmetic delegated to the calendar oracle in
`gregorian`. A SAT model is accepted only if every constraint evaluates
to True, every date flowing through is a real calendar date, and every
date subexpression lands inside the bounds the encoding promised.

`differential_run` solves one problem under several strategies in
independent sessions and flags SAT/UNSAT disagreements (UNKNOWNs and
infrastructure failures abstain). Disagreements are shrunk with ddmin
over the constraint list, then over conjuncts, so a fuzzing campaign
reports small witnesses instead of hundred-atom monsters.
"""

from __future__ import annotations

import operator
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from typing import Iterable, Mapping, Sequence

from .backend import BackendError, SolverBackend, Status
from .encoders import ALL_STRATEGIES, EncodingError, Strategy, decode_model, encode
from .gregorian import (
    DEFAULT_BOUNDS,
    Bounds,
    Date,
    add_period,
    period_neg,
    valid,
)
from .passes import fold_period_expr
from .syntax import (
    And,
    BoolCmp,
    BoolLit,
    Cmp,
    DateAdd,
    DateCmp,
    DateConst,
    DateCtor,
    DateSub,
    Expr,
    Field,
    Implies,
    IntAdd,
    IntLit,
    IntMul,
    IntNeg,
    IntSub,
    Not,
    Or,
    Problem,
    Sort,
    Var,
    free_vars,
    render,
    sort_of,
    walk,
)
from .terms import EvalError

Value = bool | int | Date
EvalEnv = Mapping[str, Value]

_CMP = {
    "<": operator.lt, "<=": operator.le, ">": operator.gt,
    ">=": operator.ge, "==": operator.eq, "!=": operator.ne,
}


def _date_value(name: str, v: Value) -> Date:
    if not isinstance(v, Date):
        raise EvalError(f"{name}: expected a Date, got {v!r}")
    if not valid(v):
        raise EvalError(f"{name}: {v} is not a valid date")
    return v


def eval_expr(e: Expr, env: EvalEnv) -> Value:
    """Oracle evaluation of a constraint AST under a concrete assignment.

    Total on closed, well-formed input; raises EvalError for unmapped
    variables, sort mismatches, and invalid dates (from the environment
    or from a Date() constructor).
    """
    if isinstance(e, Var):
        try:
            v = env[e.name]
        except KeyError:
            raise EvalError(f"no value for variable {e.name!r}") from None
        if e.sort == Sort.DATE:
            return _date_value(e.name, v)
        if e.sort == Sort.BOOL:
            if not isinstance(v, bool):
                raise EvalError(f"{e.name}: expected a boolean, got {v!r}")
            return v
        if isinstance(v, bool) or not isinstance(v, int):
            raise EvalError(f"{e.name}: expected an integer, got {v!r}")
        return v
    if isinstance(e, (IntLit, BoolLit, DateConst)):
        return e.value
    if isinstance(e, IntNeg):
        return -eval_expr(e.operand, env)
    if isinstance(e, IntAdd):
        return eval_expr(e.left, env) + eval_expr(e.right, env)
    if isinstance(e, IntSub):
        return eval_expr(e.left, env) - eval_expr(e.right, env)
    if isinstance(e, IntMul):
        return eval_expr(e.left, env) * eval_expr(e.right, env)
    if isinstance(e, Field):
        d = eval_expr(e.date, env)
        return getattr(d, e.name)
    if isinstance(e, DateCtor):
        d = Date(eval_expr(e.year, env), eval_expr(e.month, env),
                 eval_expr(e.day, env))
        if not valid(d):
            raise EvalError(f"Date({d.year}, {d.month}, {d.day}) is not a "
                            "valid date")
        return d
    if isinstance(e, DateAdd):
        return add_period(eval_expr(e.date, env), fold_period_expr(e.period))
    if isinstance(e, DateSub):
        return add_period(eval_expr(e.date, env),
                          period_neg(fold_period_expr(e.period)))
    if isinstance(e, (Cmp, DateCmp, BoolCmp)):
        return _CMP[e.op](eval_expr(e.left, env), eval_expr(e.right, env))
    if isinstance(e, Not):
        return not eval_expr(e.operand, env)
    # strict evaluation: no short-circuiting, so a bad operand is never masked
    if isinstance(e, And):
        left, right = eval_expr(e.left, env), eval_expr(e.right, env)
        return left and right
    if isinstance(e, Or):
        left, right = eval_expr(e.left, env), eval_expr(e.right, env)
        return left or right
    if isinstance(e, Implies):
        left, right = eval_expr(e.left, env), eval_expr(e.right, env)
        return (not left) or right
    raise EvalError(f"unhandled node {e!r}")


# --- model validation ------------------------------------------------------------


@dataclass(frozen=True)
class Violation:
    """One reason a model is rejected, tied to a 0-based constraint index."""

    index: int
    reason: str

    def __str__(self) -> str:
        return f"constraint {self.index}: {self.reason}"


def validate_model(problem: Problem, assignment: EvalEnv,
                   bounds: Bounds = DEFAULT_BOUNDS) -> list[Violation]:
    """Judge a model against the oracle. Empty list means the model is good.

    Rejects when a constraint is false (or cannot be evaluated), and when
    any date subexpression's concrete value escapes the bounds window.
    """
    out: list[Violation] = []
    for i, c in enumerate(problem.constraints):
        try:
            v = eval_expr(c, assignment)
        except EvalError as exc:
            out.append(Violation(i, str(exc)))
            continue
        if v is not True:
            out.append(Violation(i, f"evaluates to {v!r}, expected True"))
        for sub in walk(c):
            if sort_of(sub) != Sort.DATE:
                continue
            try:
                d = eval_expr(sub, assignment)
            except EvalError:
                continue  # already reported through the constraint itself
            if not bounds.contains(d):
                out.append(Violation(
                    i, f"{render(sub)} = {d} outside [{bounds.lb}, {bounds.ub}]"))
    return out


# --- differential running --------------------------------------------------------


@dataclass
class StrategyOutcome:
    """What one strategy did on one problem."""

    strategy: Strategy
    status: Status | None  # None: infrastructure failure, excluded from agreement
    solve_ms: float = 0.0
    encode_ms: float = 0.0
    model: dict[str, Value] | None = None
    violations: tuple[Violation, ...] = ()
    error: str | None = None

    @property
    def model_ok(self) -> bool | None:
        if self.model is None:
            return None
        return not self.violations

    def to_json(self) -> dict:
        doc: dict = {
            "strategy": str(self.strategy),
            "status": str(self.status) if self.status else "error",
            "solve_ms": round(self.solve_ms, 3),
            "encode_ms": round(self.encode_ms, 3),
        }
        if self.model is not None:
            doc["model"] = {k: str(v) if isinstance(v, Date) else v
                            for k, v in self.model.items()}
            doc["model_ok"] = self.model_ok
        if self.violations:
            doc["violations"] = [str(v) for v in self.violations]
        if self.error:
            doc["error"] = self.error
        return doc


@dataclass
class DiffReport:
    problem: Problem
    outcomes: list[StrategyOutcome]
    witness: Problem | None = None  # minimized, only on disagreement

    @property
    def decided(self) -> dict[Strategy, Status]:
        return {o.strategy: o.status for o in self.outcomes
                if o.status in (Status.SAT, Status.UNSAT)}

    @property
    def agree(self) -> bool:
        return len(set(self.decided.values())) <= 1

    @property
    def models_ok(self) -> bool:
        return all(o.model_ok is not False for o in self.outcomes)

    @property
    def ok(self) -> bool:
        return self.agree and self.models_ok

    def to_json(self) -> dict:
        doc = {
            "problem": self.problem.name,
            "agree": self.agree,
            "models_ok": self.models_ok,
            "ok": self.ok,
            "outcomes": [o.to_json() for o in self.outcomes],
        }
        if self.witness is not None:
            doc["witness"] = self.witness.to_json()
        return doc


def _solve_once(problem: Problem, strategy: Strategy, bounds: Bounds,
                timeout_ms: int, backend: SolverBackend | None,
                validate: bool = True) -> StrategyOutcome:
    out = StrategyOutcome(strategy=strategy, status=None)
    try:
        inst = encode(problem, strategy, bounds=bounds, backend=backend,
                      timeout_ms=timeout_ms)
        out.encode_ms = inst.encode_ms
        out.status = inst.session.check()
        out.solve_ms = inst.session.last_solve_ms
        if out.status is Status.SAT:
            out.model = decode_model(inst, inst.session.model())
            if validate:
                out.violations = tuple(
                    validate_model(problem, out.model, bounds))
    except (EncodingError, BackendError, ValueError) as exc:
        out.error = f"{type(exc).__name__}: {exc}"
        out.status = None
    return out


def _subproblem(problem: Problem, constraints: Sequence[Expr]) -> Problem:
    used: dict[str, Sort] = {}
    for c in constraints:
        for name, sort in free_vars(c).items():
            used.setdefault(name, sort)
    decls = {n: s for n, s in problem.declarations.items() if n in used}
    return Problem(name=problem.name + ".min", declarations=decls,
                   constraints=tuple(constraints))


def _split_conjuncts(constraints: Sequence[Expr]) -> list[Expr]:
    out: list[Expr] = []
    stack = list(reversed(constraints))
    while stack:
        c = stack.pop()
        if isinstance(c, And):
            stack.append(c.right)
            stack.append(c.left)
        else:
            out.append(c)
    return out


def _ddmin(items: list, failing, budget: int = 200) -> list:
    """Zeller's ddmin: smallest sublist on which `failing` stays true."""
    n = 2
    checks = 0
    while len(items) >= 2 and checks < budget:
        size = len(items) // n
        chunks = [items[i:i + size] for i in range(0, len(items), size)]
        reduced = False
        for i, chunk in enumerate(chunks):
            complement = [x for j, c in enumerate(chunks) if j != i for x in c]
            checks += 1
            if failing(chunk):
                items, n, reduced = chunk, 2, True
                break
            checks += 1
            if complement and failing(complement):
                items, n, reduced = complement, max(n - 1, 2), True
                break
        if not reduced:
            if n >= len(items):
                break
            n = min(2 * n, len(items))
    return items


def _minimize(problem: Problem, a: Strategy, b: Strategy, bounds: Bounds,
              timeout_ms: int,
              backends: Mapping[Strategy, SolverBackend]) -> Problem:
    def disagrees(constraints: Sequence[Expr]) -> bool:
        sub = _subproblem(problem, constraints)
        got = set()
        for strategy in (a, b):
            o = _solve_once(sub, strategy, bounds, timeout_ms,
                            backends.get(strategy), validate=False)
            if o.status not in (Status.SAT, Status.UNSAT):
                return False
            got.add(o.status)
        return len(got) == 2

    kept = _ddmin(list(problem.constraints), disagrees)
    conjuncts = _split_conjuncts(kept)
    if len(conjuncts) > len(kept) and disagrees(conjuncts):
        kept = _ddmin(conjuncts, disagrees)
    return _subproblem(problem, kept)


def differential_run(
    problem: Problem,
    strategies: Iterable[Strategy | str] = ALL_STRATEGIES,
    timeout_ms: int = 10000,
    bounds: Bounds = DEFAULT_BOUNDS,
    backends: Mapping[Strategy, SolverBackend] | None = None,
    minimize: bool = True,
) -> DiffReport:
    """Solve under every strategy in its own session and compare verdicts.

    UNKNOWN results and infrastructure failures abstain from the agreement
    check. SAT models are validated against the oracle. When strategies
    disagree, the witness problem is minimized (best effort, bounded work).
    """
    chosen = [Strategy.from_name(s) if isinstance(s, str) else s
              for s in strategies]
    own: dict[Strategy, SolverBackend] = {}
    pool = dict(backends) if backends else {}
    try:
        if not backends:
            for s in chosen:
                own[s] = pool[s] = SolverBackend()

        with ThreadPoolExecutor(max_workers=max(len(chosen), 1)) as ex:
            futures = [
                ex.submit(_solve_once, problem, s, bounds, timeout_ms,
                          pool.get(s))
                for s in chosen
            ]
            outcomes = [f.result() for f in futures]

        report = DiffReport(problem=problem, outcomes=outcomes)
        if not report.agree and minimize:
            decided = report.decided
            sat = next(s for s, st in decided.items() if st is Status.SAT)
            unsat = next(s for s, st in decided.items() if st is Status.UNSAT)
            report.witness = _minimize(problem, sat, unsat, bounds,
                                       min(timeout_ms, 5000), pool)
        return report
    finally:
        for b in own.values():
            b.close()
