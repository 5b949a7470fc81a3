"""Abstract syntax for the date-constraint language.

Expression nodes are frozen dataclasses with structural equality. Every node
has a fixed sort (bool, int, date or period); the parser resolves sorts, so
code downstream never sees an ill-sorted tree.

render() produces concrete syntax that reparses to an equal tree; equality
operators are parenthesized as if they bound loosest (they do at the boolean
level, and extra parentheses around integer/date equalities keep the output
unambiguous).
"""

from __future__ import annotations

import enum
from dataclasses import dataclass, field

from .gregorian import Date, Period


class Sort(enum.Enum):
    BOOL = "Bool"
    INT = "Int"
    DATE = "Date"
    PERIOD = "Period"

    def __str__(self) -> str:
        return self.value


class ParseError(ValueError):
    """Syntax error, with 1-based position when known."""

    def __init__(self, message: str, line: int | None = None, col: int | None = None):
        if line is not None:
            message = f"{message} (line {line}, column {col})"
        super().__init__(message)
        self.line = line
        self.col = col


class SortError(ParseError):
    """Operator/operand sort mismatch or undeclared variable."""


class WellFormednessError(ValueError):
    """Structurally valid input denoting an impossible construct."""


CMP_OPS = ("<", "<=", ">", ">=", "==", "!=")
DATE_FIELDS = ("year", "month", "day")
RESERVED = frozenset({"Date", "Period", "True", "False"})


@dataclass(frozen=True, slots=True)
class Expr:
    pass


@dataclass(frozen=True, slots=True)
class Var(Expr):
    name: str
    sort: Sort


@dataclass(frozen=True, slots=True)
class IntLit(Expr):
    value: int


@dataclass(frozen=True, slots=True)
class BoolLit(Expr):
    value: bool


@dataclass(frozen=True, slots=True)
class IntNeg(Expr):
    operand: Expr


@dataclass(frozen=True, slots=True)
class IntAdd(Expr):
    left: Expr
    right: Expr


@dataclass(frozen=True, slots=True)
class IntSub(Expr):
    left: Expr
    right: Expr


@dataclass(frozen=True, slots=True)
class IntMul(Expr):
    """Linear multiplication: at least one operand is a literal constant."""

    left: Expr
    right: Expr


@dataclass(frozen=True, slots=True)
class Field(Expr):
    """Component extraction: date_expr . (year|month|day)."""

    date: Expr
    name: str


@dataclass(frozen=True, slots=True)
class DateConst(Expr):
    """A constructor whose arguments folded to a valid concrete date."""

    value: Date


@dataclass(frozen=True, slots=True)
class DateCtor(Expr):
    """Date(y, m, d) with integer-expression arguments."""

    year: Expr
    month: Expr
    day: Expr


@dataclass(frozen=True, slots=True)
class PeriodLit(Expr):
    value: Period


@dataclass(frozen=True, slots=True)
class PeriodAdd(Expr):
    left: Expr
    right: Expr


@dataclass(frozen=True, slots=True)
class PeriodSub(Expr):
    left: Expr
    right: Expr


@dataclass(frozen=True, slots=True)
class PeriodScale(Expr):
    """k * p with k a literal integer (keeps arithmetic linear)."""

    factor: int
    operand: Expr
    factor_on_left: bool = field(default=True, compare=False)


@dataclass(frozen=True, slots=True)
class DateAdd(Expr):
    date: Expr
    period: Expr


@dataclass(frozen=True, slots=True)
class DateSub(Expr):
    date: Expr
    period: Expr


@dataclass(frozen=True, slots=True)
class Cmp(Expr):
    """Integer comparison; op in CMP_OPS."""

    op: str
    left: Expr
    right: Expr


@dataclass(frozen=True, slots=True)
class DateCmp(Expr):
    """Lexicographic date comparison; op in CMP_OPS."""

    op: str
    left: Expr
    right: Expr


@dataclass(frozen=True, slots=True)
class BoolCmp(Expr):
    """Boolean (in)equivalence; op is '==' or '!='."""

    op: str
    left: Expr
    right: Expr


@dataclass(frozen=True, slots=True)
class Not(Expr):
    operand: Expr


@dataclass(frozen=True, slots=True)
class And(Expr):
    left: Expr
    right: Expr


@dataclass(frozen=True, slots=True)
class Or(Expr):
    left: Expr
    right: Expr


@dataclass(frozen=True, slots=True)
class Implies(Expr):
    left: Expr
    right: Expr


_SORTS = {
    Var: None,  # carried on the node
    IntLit: Sort.INT,
    BoolLit: Sort.BOOL,
    IntNeg: Sort.INT,
    IntAdd: Sort.INT,
    IntSub: Sort.INT,
    IntMul: Sort.INT,
    Field: Sort.INT,
    DateConst: Sort.DATE,
    DateCtor: Sort.DATE,
    DateAdd: Sort.DATE,
    DateSub: Sort.DATE,
    PeriodLit: Sort.PERIOD,
    PeriodAdd: Sort.PERIOD,
    PeriodSub: Sort.PERIOD,
    PeriodScale: Sort.PERIOD,
    Cmp: Sort.BOOL,
    DateCmp: Sort.BOOL,
    BoolCmp: Sort.BOOL,
    Not: Sort.BOOL,
    And: Sort.BOOL,
    Or: Sort.BOOL,
    Implies: Sort.BOOL,
}


def sort_of(e: Expr) -> Sort:
    if isinstance(e, Var):
        return e.sort
    return _SORTS[type(e)]


def children(e: Expr) -> tuple[Expr, ...]:
    if isinstance(e, (Var, IntLit, BoolLit, DateConst, PeriodLit)):
        return ()
    if isinstance(e, (IntNeg, Not)):
        return (e.operand,)
    if isinstance(e, PeriodScale):
        return (e.operand,)
    if isinstance(e, Field):
        return (e.date,)
    if isinstance(e, DateCtor):
        return (e.year, e.month, e.day)
    if isinstance(e, (DateAdd, DateSub)):
        return (e.date, e.period)
    if isinstance(e, (Cmp, DateCmp, BoolCmp)):
        return (e.left, e.right)
    return (e.left, e.right)  # binary int/period/bool nodes


def walk(e: Expr):
    """Yield e and all descendants, preorder."""
    stack = [e]
    while stack:
        node = stack.pop()
        yield node
        stack.extend(reversed(children(node)))


def free_vars(e: Expr) -> dict[str, Sort]:
    out: dict[str, Sort] = {}
    for node in walk(e):
        if isinstance(node, Var):
            out.setdefault(node.name, node.sort)
    return out


@dataclass(frozen=True)
class Problem:
    """A named set of declarations and boolean constraints."""

    name: str
    declarations: dict[str, Sort]
    constraints: tuple[Expr, ...]
    description: str | None = None
    coverage_tags: tuple[str, ...] = ()

    def to_json(self) -> dict:
        doc: dict = {"name": self.name}
        if self.description is not None:
            doc["description"] = self.description
        # benchmark document layout: declarations as "name: sort" strings
        doc["declarations"] = [
            f"{n}: {str(s).lower()}" for n, s in self.declarations.items()]
        doc["constraints"] = [render(c) for c in self.constraints]
        if self.coverage_tags:
            doc["coverage_tags"] = list(self.coverage_tags)
        return doc


# --- rendering ---------------------------------------------------------------

# Binding strength, loosest first. Equality renders at the loosest level in
# all sorts so mixed chains never need sort context to reparse.
_LVL_IMPLIES = 1
_LVL_EQ = 2
_LVL_OR = 3
_LVL_AND = 4
_LVL_NOT = 5
_LVL_CMP = 6
_LVL_ADD = 7
_LVL_MUL = 8
_LVL_NEG = 9
_LVL_POSTFIX = 10
_LVL_ATOM = 11


def _level(e: Expr) -> int:
    if isinstance(e, Implies):
        return _LVL_IMPLIES
    if isinstance(e, BoolCmp):
        return _LVL_EQ
    if isinstance(e, (Cmp, DateCmp)):
        return _LVL_EQ if e.op in ("==", "!=") else _LVL_CMP
    if isinstance(e, Or):
        return _LVL_OR
    if isinstance(e, And):
        return _LVL_AND
    if isinstance(e, Not):
        return _LVL_NOT
    if isinstance(e, (IntAdd, IntSub, DateAdd, DateSub, PeriodAdd, PeriodSub)):
        return _LVL_ADD
    if isinstance(e, (IntMul, PeriodScale)):
        return _LVL_MUL
    if isinstance(e, IntNeg):
        return _LVL_NEG
    if isinstance(e, Field):
        return _LVL_POSTFIX
    return _LVL_ATOM


def render(e: Expr) -> str:
    return _render(e, 0)


def _paren(text: str, lvl: int, minimum: int) -> str:
    return f"({text})" if lvl < minimum else text


def _render(e: Expr, minimum: int) -> str:
    lvl = _level(e)
    if isinstance(e, Var):
        return e.name
    if isinstance(e, IntLit):
        return str(e.value)
    if isinstance(e, BoolLit):
        return "True" if e.value else "False"
    if isinstance(e, DateConst):
        d = e.value
        return f"Date({d.year}, {d.month}, {d.day})"
    if isinstance(e, DateCtor):
        args = ", ".join(_render(a, 0) for a in (e.year, e.month, e.day))
        return f"Date({args})"
    if isinstance(e, PeriodLit):
        p = e.value
        return f"Period({p.years}, {p.months}, {p.days})"
    if isinstance(e, IntNeg):
        return _paren(f"-{_render(e.operand, _LVL_NEG)}", lvl, minimum)
    if isinstance(e, Field):
        return _paren(f"{_render(e.date, _LVL_ATOM)}.{e.name}", lvl, minimum)
    if isinstance(e, Not):
        return _paren(f"!{_render(e.operand, _LVL_NOT)}", lvl, minimum)
    if isinstance(e, (Cmp, DateCmp, BoolCmp)):
        body = f"{_render(e.left, lvl + 1)} {e.op} {_render(e.right, lvl + 1)}"
        return _paren(body, lvl, minimum)
    if isinstance(e, Implies):
        # right-associative
        body = f"{_render(e.left, _LVL_IMPLIES + 1)} -> {_render(e.right, _LVL_IMPLIES)}"
        return _paren(body, lvl, minimum)
    if isinstance(e, PeriodScale):
        inner = _render(e.operand, _LVL_MUL + 1)
        body = f"{e.factor} * {inner}" if e.factor_on_left else f"{inner} * {e.factor}"
        return _paren(body, lvl, minimum)
    if isinstance(e, IntMul):
        body = f"{_render(e.left, _LVL_MUL)} * {_render(e.right, _LVL_MUL + 1)}"
        return _paren(body, lvl, minimum)
    ops = {
        IntAdd: "+",
        IntSub: "-",
        DateAdd: "+",
        DateSub: "-",
        PeriodAdd: "+",
        PeriodSub: "-",
        And: "&&",
        Or: "||",
    }
    op = ops[type(e)]
    l, r = children(e)
    body = f"{_render(l, lvl)} {op} {_render(r, lvl + 1)}"  # left-associative
    return _paren(body, lvl, minimum)
