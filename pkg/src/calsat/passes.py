"""Lowering passes between parsing and encoding.

fold_periods: every period expression is built from literal components, so
it folds to a single concrete Period; date subtraction becomes addition of
the negated period. After this pass the only period nodes are PeriodLit.

desugar: Date(e1, e2, e3) constructors with constant arguments become
checked date constants; symbolic ones are replaced by a fresh date variable
pinned by three component-equality constraints appended to the problem. The
returned mapping remembers, for each fresh variable, the expression that
determines it, so a validator can reconstruct omitted values.
"""

from __future__ import annotations

from .gregorian import Date, Period, period_add, period_neg, period_scale, valid
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
    PeriodAdd,
    PeriodLit,
    PeriodScale,
    PeriodSub,
    Problem,
    Sort,
    Var,
    WellFormednessError,
    sort_of,
    walk,
)
from .parser import _const_int


def fold_period_expr(e: Expr) -> Period:
    """Evaluate a period-sorted expression to a concrete Period."""
    if isinstance(e, PeriodLit):
        return e.value
    if isinstance(e, PeriodAdd):
        return period_add(fold_period_expr(e.left), fold_period_expr(e.right))
    if isinstance(e, PeriodSub):
        return period_add(fold_period_expr(e.left),
                          period_neg(fold_period_expr(e.right)))
    if isinstance(e, PeriodScale):
        return period_scale(e.factor, fold_period_expr(e.operand))
    raise TypeError(f"not a period expression: {e!r}")


def fold_periods(e: Expr) -> Expr:
    if sort_of(e) == Sort.PERIOD:
        return PeriodLit(fold_period_expr(e))
    if isinstance(e, DateSub):
        return DateAdd(fold_periods(e.date),
                       PeriodLit(period_neg(fold_period_expr(e.period))))
    if isinstance(e, DateAdd):
        return DateAdd(fold_periods(e.date), fold_periods(e.period))
    if isinstance(e, (Var, IntLit, BoolLit, DateConst)):
        return e
    if isinstance(e, IntNeg):
        return IntNeg(fold_periods(e.operand))
    if isinstance(e, Not):
        return Not(fold_periods(e.operand))
    if isinstance(e, Field):
        return Field(fold_periods(e.date), e.name)
    if isinstance(e, DateCtor):
        return DateCtor(fold_periods(e.year), fold_periods(e.month),
                        fold_periods(e.day))
    cls = type(e)
    if isinstance(e, (Cmp, DateCmp, BoolCmp)):
        return cls(e.op, fold_periods(e.left), fold_periods(e.right))
    if isinstance(e, (IntAdd, IntSub, IntMul, And, Or, Implies)):
        return cls(fold_periods(e.left), fold_periods(e.right))
    raise TypeError(f"unhandled node {e!r}")


def fold_problem_periods(problem: Problem) -> Problem:
    return Problem(
        name=problem.name,
        declarations=problem.declarations,
        constraints=tuple(fold_periods(c) for c in problem.constraints),
        description=problem.description,
        coverage_tags=problem.coverage_tags,
    )


def desugar(problem: Problem) -> tuple[Problem, dict[str, Expr]]:
    """Eliminate Date() constructors; returns the rewritten problem and the
    defining expression for each fresh variable introduced."""
    decls = dict(problem.declarations)
    defs: dict[str, Expr] = {}
    extra: list[Expr] = []
    counter = 0

    def fresh_name() -> str:
        nonlocal counter
        while True:
            name = f"_d{counter}"
            counter += 1
            if name not in decls:
                return name

    def tx(e: Expr) -> Expr:
        if isinstance(e, DateCtor):
            y = tx(e.year)
            m = tx(e.month)
            d = tx(e.day)
            cy, cm, cd = _const_int(y), _const_int(m), _const_int(d)
            if cy is not None and cm is not None and cd is not None:
                value = Date(cy, cm, cd)
                if not valid(value):
                    raise WellFormednessError(
                        f"invalid date literal Date({cy}, {cm}, {cd})")
                return DateConst(value)
            name = fresh_name()
            decls[name] = Sort.DATE
            var = Var(name, Sort.DATE)
            defs[name] = DateCtor(y, m, d)
            extra.append(Cmp("==", Field(var, "year"), y))
            extra.append(Cmp("==", Field(var, "month"), m))
            extra.append(Cmp("==", Field(var, "day"), d))
            return var
        if isinstance(e, (Var, IntLit, BoolLit, DateConst, PeriodLit)):
            return e
        if isinstance(e, IntNeg):
            return IntNeg(tx(e.operand))
        if isinstance(e, Not):
            return Not(tx(e.operand))
        if isinstance(e, Field):
            return Field(tx(e.date), e.name)
        if isinstance(e, PeriodScale):
            return PeriodScale(e.factor, tx(e.operand), e.factor_on_left)
        if isinstance(e, (DateAdd, DateSub)):
            return type(e)(tx(e.date), tx(e.period))
        if isinstance(e, (Cmp, DateCmp, BoolCmp)):
            return type(e)(e.op, tx(e.left), tx(e.right))
        if isinstance(e, (IntAdd, IntSub, IntMul, PeriodAdd, PeriodSub,
                          And, Or, Implies)):
            return type(e)(tx(e.left), tx(e.right))
        raise TypeError(f"unhandled node {e!r}")

    constraints = [tx(c) for c in problem.constraints]
    constraints.extend(extra)
    lowered = Problem(name=problem.name, declarations=decls,
                      constraints=tuple(constraints),
                      description=problem.description,
                      coverage_tags=problem.coverage_tags)
    return lowered, defs


def lower(problem: Problem) -> tuple[Problem, dict[str, Expr]]:
    """desugar then fold periods — the shape encoders expect."""
    lowered, defs = desugar(problem)
    return fold_problem_periods(lowered), defs


def collect_date_subexprs(problem: Problem) -> list[Expr]:
    """All distinct date-sorted subexpressions, in first-appearance order."""
    seen: dict[Expr, None] = {}
    for c in problem.constraints:
        for node in walk(c):
            if sort_of(node) == Sort.DATE and node not in seen:
                seen[node] = None
    return list(seen)
