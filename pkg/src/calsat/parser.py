"""Parser for the date-constraint language.

Two phases: a recursive-descent parse into a raw (sort-free) tree, then
sort resolution against declared variable sorts into the typed AST in
syntax.py. `==`/`!=` live at two grammar levels — boolean equivalence binds
loosest, while integer/date equality is an ordinary comparison — so the
parser decides which production applies from the shape (and declared sort)
of the left operand, and resolution picks the typed node from operand sorts.

Variables may be declared up front (the strict path used for problem files)
or inferred; inference propagates sorts from literals and operators to a
fixpoint and defaults leftover names to int in arithmetic positions and bool
in boolean positions.
"""

from __future__ import annotations

import json
import re
from dataclasses import dataclass
from pathlib import Path
from typing import Mapping, Union

from .gregorian import Date, Period
from .syntax import (
    And,
    BoolCmp,
    BoolLit,
    Cmp,
    DATE_FIELDS,
    DateAdd,
    DateCmp,
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
    ParseError,
    PeriodAdd,
    PeriodLit,
    PeriodScale,
    PeriodSub,
    Problem,
    RESERVED,
    Sort,
    SortError,
    Var,
    sort_of,
)

# --- lexer -------------------------------------------------------------------

_TOKEN_RE = re.compile(
    r"""
    (?P<ws>\s+)
  | (?P<comment>\#[^\n]*)
  | (?P<int>\d+)
  | (?P<ident>[A-Za-z_][A-Za-z0-9_]*)
  | (?P<op>->|==|!=|<=|>=|\|\||&&|[-+*!<>().,])
    """,
    re.VERBOSE,
)


@dataclass(frozen=True, slots=True)
class Token:
    kind: str  # 'int' | 'ident' | 'op' | 'eof'
    text: str
    line: int
    col: int


def tokenize(text: str) -> list[Token]:
    tokens: list[Token] = []
    pos = 0
    line, line_start = 1, 0
    while pos < len(text):
        m = _TOKEN_RE.match(text, pos)
        if not m:
            raise ParseError(
                f"unexpected character {text[pos]!r}", line, pos - line_start + 1
            )
        kind = m.lastgroup
        tok_text = m.group()
        if kind not in ("ws", "comment"):
            tokens.append(Token(kind, tok_text, line, m.start() - line_start + 1))
        nl = tok_text.count("\n")
        if nl:
            line += nl
            line_start = m.start() + tok_text.rindex("\n") + 1
        pos = m.end()
    tokens.append(Token("eof", "", line, len(text) - line_start + 1))
    return tokens


# --- raw parse tree ----------------------------------------------------------


@dataclass(frozen=True, slots=True)
class RNode:
    pos: tuple[int, int]


@dataclass(frozen=True, slots=True)
class RInt(RNode):
    value: int


@dataclass(frozen=True, slots=True)
class RBool(RNode):
    value: bool


@dataclass(frozen=True, slots=True)
class RName(RNode):
    name: str


@dataclass(frozen=True, slots=True)
class RNeg(RNode):
    operand: RNode


@dataclass(frozen=True, slots=True)
class RNot(RNode):
    operand: RNode


@dataclass(frozen=True, slots=True)
class RBin(RNode):
    op: str
    left: RNode
    right: RNode


@dataclass(frozen=True, slots=True)
class RField(RNode):
    base: RNode
    name: str


@dataclass(frozen=True, slots=True)
class RDate(RNode):
    year: RNode
    month: RNode
    day: RNode


@dataclass(frozen=True, slots=True)
class RPeriod(RNode):
    years: int
    months: int
    days: int


_CMP = {"<", "<=", ">", ">=", "==", "!="}
_BOOL_OPS = {"&&", "||", "->"} | _CMP


def _definitely_bool(node: RNode, decls: Mapping[str, Sort] | None) -> bool:
    """True when a raw node can only denote a boolean."""
    if isinstance(node, (RNot, RBool)):
        return True
    if isinstance(node, RBin) and node.op in _BOOL_OPS:
        return True
    if isinstance(node, RName) and decls is not None:
        return decls.get(node.name) == Sort.BOOL
    return False


class _Parser:
    def __init__(self, tokens: list[Token], decls: Mapping[str, Sort] | None):
        self.tokens = tokens
        self.i = 0
        self.decls = decls

    # -- token helpers --
    def peek(self) -> Token:
        return self.tokens[self.i]

    def next(self) -> Token:
        t = self.tokens[self.i]
        self.i += 1
        return t

    def at_op(self, *texts: str) -> bool:
        t = self.peek()
        return t.kind == "op" and t.text in texts

    def expect_op(self, text: str) -> Token:
        t = self.peek()
        if t.kind != "op" or t.text != text:
            raise ParseError(f"expected {text!r}, found {t.text or 'end of input'!r}",
                             t.line, t.col)
        return self.next()

    def _pos(self) -> tuple[int, int]:
        t = self.peek()
        return (t.line, t.col)

    # -- grammar, loosest first --
    def parse_expr(self) -> RNode:
        return self.parse_implication()

    def parse_implication(self) -> RNode:
        left = self.parse_equality()
        if self.at_op("->"):
            pos = self._pos()
            self.next()
            return RBin(pos, "->", left, self.parse_implication())  # right-assoc
        return left

    def parse_equality(self) -> RNode:
        left = self.parse_disjunction()
        if self.at_op("==", "!="):
            pos = self._pos()
            op = self.next().text
            right = self.parse_disjunction()
            if self.at_op("==", "!="):
                t = self.peek()
                raise ParseError("equality does not chain", t.line, t.col)
            return RBin(pos, op, left, right)
        return left

    def parse_disjunction(self) -> RNode:
        left = self.parse_conjunction()
        while self.at_op("||"):
            pos = self._pos()
            self.next()
            left = RBin(pos, "||", left, self.parse_conjunction())
        return left

    def parse_conjunction(self) -> RNode:
        left = self.parse_negation()
        while self.at_op("&&"):
            pos = self._pos()
            self.next()
            left = RBin(pos, "&&", left, self.parse_negation())
        return left

    def parse_negation(self) -> RNode:
        if self.at_op("!"):
            pos = self._pos()
            self.next()
            return RNot(pos, self.parse_negation())
        return self.parse_relation()

    def parse_relation(self) -> RNode:
        left = self.parse_additive()
        if self.peek().kind == "op" and self.peek().text in _CMP:
            # ==/!= on a boolean left operand belongs to the (looser)
            # equality production, not to a comparison
            if self.peek().text in ("==", "!=") and _definitely_bool(left, self.decls):
                return left
            pos = self._pos()
            op = self.next().text
            right = self.parse_additive()
            t = self.peek()
            if t.kind == "op" and t.text in ("<", "<=", ">", ">="):
                raise ParseError("comparisons do not chain", t.line, t.col)
            return RBin(pos, op, left, right)
        return left

    def parse_additive(self) -> RNode:
        left = self.parse_term()
        while self.at_op("+", "-"):
            pos = self._pos()
            op = self.next().text
            left = RBin(pos, op, left, self.parse_term())
        return left

    def parse_term(self) -> RNode:
        left = self.parse_factor()
        while self.at_op("*"):
            pos = self._pos()
            self.next()
            left = RBin(pos, "*", left, self.parse_factor())
        return left

    def parse_factor(self) -> RNode:
        if self.at_op("-"):
            pos = self._pos()
            self.next()
            return RNeg(pos, self.parse_factor())
        return self.parse_postfix()

    def parse_postfix(self) -> RNode:
        node = self.parse_primary()
        while self.at_op("."):
            pos = self._pos()
            self.next()
            t = self.next()
            if t.kind != "ident" or t.text not in DATE_FIELDS:
                raise ParseError(
                    f"expected a date field {DATE_FIELDS}, found {t.text!r}",
                    t.line, t.col)
            node = RField(pos, node, t.text)
        return node

    def parse_signed_int(self) -> int:
        sign = 1
        if self.at_op("-"):
            self.next()
            sign = -1
        t = self.next()
        if t.kind != "int":
            raise ParseError(f"expected an integer, found {t.text!r}", t.line, t.col)
        return sign * int(t.text)

    def parse_primary(self) -> RNode:
        t = self.peek()
        pos = (t.line, t.col)
        if t.kind == "int":
            self.next()
            return RInt(pos, int(t.text))
        if t.kind == "ident":
            if t.text == "True" or t.text == "False":
                self.next()
                return RBool(pos, t.text == "True")
            if t.text == "Date":
                self.next()
                self.expect_op("(")
                y = self.parse_additive()
                self.expect_op(",")
                m = self.parse_additive()
                self.expect_op(",")
                d = self.parse_additive()
                self.expect_op(")")
                return RDate(pos, y, m, d)
            if t.text == "Period":
                self.next()
                self.expect_op("(")
                ys = self.parse_signed_int()
                self.expect_op(",")
                ms = self.parse_signed_int()
                self.expect_op(",")
                ds = self.parse_signed_int()
                self.expect_op(")")
                return RPeriod(pos, ys, ms, ds)
            self.next()
            return RName(pos, t.text)
        if self.at_op("("):
            self.next()
            inner = self.parse_expr()
            self.expect_op(")")
            return inner
        raise ParseError(f"unexpected {t.text or 'end of input'!r}", t.line, t.col)


# --- sort inference (used only when no declarations are given) ---------------


def _infer_sorts(root: RNode) -> dict[str, Sort]:
    known: dict[str, Sort] = {}

    def shape(node: RNode) -> Sort | None:
        if isinstance(node, RInt):
            return Sort.INT
        if isinstance(node, RBool):
            return Sort.BOOL
        if isinstance(node, RDate):
            return Sort.DATE
        if isinstance(node, RPeriod):
            return Sort.PERIOD
        if isinstance(node, RField):
            return Sort.INT
        if isinstance(node, (RNeg,)):
            return Sort.INT
        if isinstance(node, RNot):
            return Sort.BOOL
        if isinstance(node, RName):
            return known.get(node.name)
        if isinstance(node, RBin):
            if node.op in ("&&", "||", "->"):
                return Sort.BOOL
            if node.op in _CMP:
                return Sort.BOOL
            ls, rs = shape(node.left), shape(node.right)
            if node.op == "*":
                return Sort.PERIOD if Sort.PERIOD in (ls, rs) else Sort.INT
            # + and -: date/period combine, otherwise int
            if ls == Sort.DATE:
                return Sort.DATE
            if rs == Sort.PERIOD:
                # only dates and periods can absorb a period; vars are never
                # period-sorted, so an unknown left side must be a date
                return Sort.PERIOD if ls == Sort.PERIOD else Sort.DATE
            if ls == Sort.PERIOD:
                return Sort.PERIOD
            return Sort.INT
        return None

    def note(node: RNode, sort: Sort) -> bool:
        if isinstance(node, RName) and node.name not in known:
            known[node.name] = sort
            return True
        return False

    def sweep(node: RNode, bool_ctx: bool) -> bool:
        changed = False
        if isinstance(node, RName):
            if bool_ctx:
                changed |= note(node, Sort.BOOL)
            return changed
        if isinstance(node, RNot):
            return sweep(node.operand, True)
        if isinstance(node, RField):
            changed |= note(node.base, Sort.DATE)
            return changed | sweep(node.base, False)
        if isinstance(node, (RNeg,)):
            changed |= note(node.operand, Sort.INT)
            return changed | sweep(node.operand, False)
        if isinstance(node, RDate):
            for a in (node.year, node.month, node.day):
                changed |= note(a, Sort.INT)
                changed |= sweep(a, False)
            return changed
        if isinstance(node, RBin):
            if node.op in ("&&", "||", "->"):
                changed |= note(node.left, Sort.BOOL)
                changed |= note(node.right, Sort.BOOL)
                return changed | sweep(node.left, True) | sweep(node.right, True)
            if node.op in _CMP:
                ls, rs = shape(node.left), shape(node.right)
                s = ls or rs
                if s in (Sort.DATE, Sort.INT, Sort.BOOL):
                    changed |= note(node.left, s)
                    changed |= note(node.right, s)
                return changed | sweep(node.left, False) | sweep(node.right, False)
            ls, rs = shape(node.left), shape(node.right)
            if node.op in ("+", "-"):
                if rs == Sort.PERIOD and ls != Sort.PERIOD:
                    changed |= note(node.left, Sort.DATE)
                elif rs == Sort.INT:
                    changed |= note(node.left, Sort.INT)
                if ls == Sort.INT:
                    changed |= note(node.right, Sort.INT)
            return changed | sweep(node.left, False) | sweep(node.right, False)
        return False

    for _ in range(50):
        if not sweep(root, True):
            break

    # leftovers default to int (arithmetic positions) / bool (handled above)
    def default_rest(node: RNode) -> None:
        if isinstance(node, RName):
            known.setdefault(node.name, Sort.INT)
        elif isinstance(node, (RNeg, RNot)):
            default_rest(node.operand)
        elif isinstance(node, RField):
            default_rest(node.base)
        elif isinstance(node, RDate):
            for a in (node.year, node.month, node.day):
                default_rest(a)
        elif isinstance(node, RBin):
            default_rest(node.left)
            default_rest(node.right)

    default_rest(root)
    return known


# --- resolution --------------------------------------------------------------


def _const_int(e: Expr) -> int | None:
    if isinstance(e, IntLit):
        return e.value
    if isinstance(e, IntNeg):
        v = _const_int(e.operand)
        return None if v is None else -v
    return None


def _resolve(node: RNode, decls: Mapping[str, Sort]) -> Expr:
    line, col = node.pos

    def fail(msg: str) -> SortError:
        return SortError(msg, line, col)

    if isinstance(node, RInt):
        return IntLit(node.value)
    if isinstance(node, RBool):
        return BoolLit(node.value)
    if isinstance(node, RName):
        sort = decls.get(node.name)
        if sort is None:
            raise fail(f"undeclared variable {node.name!r}")
        return Var(node.name, sort)
    if isinstance(node, RNeg):
        inner = _resolve(node.operand, decls)
        if sort_of(inner) != Sort.INT:
            raise fail(f"cannot negate a {sort_of(inner)} expression")
        return IntNeg(inner)
    if isinstance(node, RNot):
        inner = _resolve(node.operand, decls)
        if sort_of(inner) != Sort.BOOL:
            raise fail(f"'!' needs a boolean, got {sort_of(inner)}")
        return Not(inner)
    if isinstance(node, RField):
        base = _resolve(node.base, decls)
        if sort_of(base) != Sort.DATE:
            raise fail(f".{node.name} needs a date, got {sort_of(base)}")
        return Field(base, node.name)
    if isinstance(node, RDate):
        args = []
        for a in (node.year, node.month, node.day):
            e = _resolve(a, decls)
            if sort_of(e) != Sort.INT:
                raise fail(f"Date() arguments must be integers, got {sort_of(e)}")
            args.append(e)
        return DateCtor(*args)
    if isinstance(node, RPeriod):
        return PeriodLit(Period(node.years, node.months, node.days))
    if isinstance(node, RBin):
        left = _resolve(node.left, decls)
        right = _resolve(node.right, decls)
        ls, rs = sort_of(left), sort_of(right)
        op = node.op
        if op in ("&&", "||", "->"):
            for side, s in (("left", ls), ("right", rs)):
                if s != Sort.BOOL:
                    raise fail(f"{op!r} needs boolean operands, {side} is {s}")
            cls = {"&&": And, "||": Or, "->": Implies}[op]
            return cls(left, right)
        if op in _CMP:
            if ls == Sort.PERIOD or rs == Sort.PERIOD:
                raise fail("periods cannot be compared")
            if ls == Sort.DATE and rs == Sort.DATE:
                return DateCmp(op, left, right)
            if ls == Sort.INT and rs == Sort.INT:
                return Cmp(op, left, right)
            if ls == Sort.BOOL and rs == Sort.BOOL:
                if op not in ("==", "!="):
                    raise fail(f"{op!r} cannot order booleans")
                return BoolCmp(op, left, right)
            raise fail(f"cannot compare {ls} with {rs}")
        if op == "*":
            if Sort.PERIOD in (ls, rs):
                if ls == Sort.PERIOD and rs == Sort.PERIOD:
                    raise fail("cannot multiply two periods")
                k_expr, p_expr = (right, left) if ls == Sort.PERIOD else (left, right)
                k = _const_int(k_expr)
                if k is None:
                    raise fail("period scaling needs a literal integer factor")
                return PeriodScale(k, p_expr, factor_on_left=(p_expr is right))
            if ls != Sort.INT or rs != Sort.INT:
                raise fail(f"cannot multiply {ls} with {rs}")
            if _const_int(left) is None and _const_int(right) is None:
                raise fail("multiplication needs a literal integer operand "
                           "(linear arithmetic only)")
            return IntMul(left, right)
        # op is + or -
        pairs = {
            ("+", Sort.DATE, Sort.PERIOD): DateAdd,
            ("-", Sort.DATE, Sort.PERIOD): DateSub,
            ("+", Sort.PERIOD, Sort.PERIOD): PeriodAdd,
            ("-", Sort.PERIOD, Sort.PERIOD): PeriodSub,
            ("+", Sort.INT, Sort.INT): IntAdd,
            ("-", Sort.INT, Sort.INT): IntSub,
        }
        cls = pairs.get((op, ls, rs))
        if cls is None:
            raise fail(f"cannot apply {op!r} to {ls} and {rs}")
        return cls(left, right)
    raise AssertionError(f"unhandled raw node {node!r}")


def parse(text: str, declarations: Mapping[str, Sort] | None = None) -> Expr:
    """Parse one constraint. Undeclared names are an error when declarations
    are given, and sort-inferred (defaulting to int) otherwise."""
    tokens = tokenize(text)
    parser = _Parser(tokens, declarations)
    raw = parser.parse_expr()
    tail = parser.peek()
    if tail.kind != "eof":
        raise ParseError(f"trailing input starting at {tail.text!r}",
                         tail.line, tail.col)
    decls = dict(declarations) if declarations is not None else _infer_sorts(raw)
    for name, sort in decls.items():
        if isinstance(sort, str):  # accept "Date" etc. alongside Sort members
            if sort not in _SORT_NAMES:
                raise SortError(f"unknown sort {sort!r} for {name!r}")
            decls[name] = _SORT_NAMES[sort]
    expr = _resolve(raw, decls)
    if sort_of(expr) != Sort.BOOL:
        raise SortError(f"a constraint must be boolean, got {sort_of(expr)}")
    return expr


# --- problem files -----------------------------------------------------------

_IDENT_RE = re.compile(r"^[A-Za-z_][A-Za-z0-9_]*$")
_SORT_NAMES = {"Date": Sort.DATE, "Int": Sort.INT, "Bool": Sort.BOOL}


def _declared_sort(var: str, sort_name: str) -> tuple[str, Sort]:
    if not _IDENT_RE.match(var) or var in RESERVED:
        raise ValueError(f"bad variable name {var!r}")
    canon = _SORT_NAMES.get(sort_name) or _SORT_NAMES.get(sort_name.capitalize())
    if canon is None:
        raise ValueError(
            f"variable {var!r}: sort must be one of {sorted(_SORT_NAMES)}, "
            f"got {sort_name!r}")
    return var, canon


def problem_from_dict(data: dict, name: str = "problem") -> Problem:
    if not isinstance(data, dict):
        raise ValueError("problem must be a JSON object")
    name = data.get("name", name)
    if not isinstance(name, str):
        raise ValueError("problem name must be a string")
    raw_decls = data.get("declarations")
    decls: dict[str, Sort] = {}
    if isinstance(raw_decls, dict):
        for var, sort_name in raw_decls.items():
            var, sort = _declared_sort(var, str(sort_name))
            decls[var] = sort
    elif isinstance(raw_decls, list):
        # benchmark document layout: ["x: date", "n: int", ...]
        for entry in raw_decls:
            if not isinstance(entry, str) or ":" not in entry:
                raise ValueError(
                    f"declaration {entry!r}: expected 'name: sort'")
            var, _, sort_name = entry.partition(":")
            var, sort = _declared_sort(var.strip(), sort_name.strip())
            if var in decls:
                raise ValueError(f"variable {var!r} declared twice")
            decls[var] = sort
    else:
        raise ValueError("problem needs a 'declarations' list or object")
    raw_constraints = data.get("constraints")
    if not isinstance(raw_constraints, list) or not all(
            isinstance(c, str) for c in raw_constraints):
        raise ValueError("problem needs a 'constraints' list of strings")
    constraints = []
    for i, text in enumerate(raw_constraints):
        try:
            constraints.append(parse(text, decls))
        except ParseError as exc:
            raise ValueError(f"constraint {i}: {exc}") from exc
    description = data.get("description")
    if description is not None and not isinstance(description, str):
        raise ValueError("'description' must be a string")
    raw_tags = data.get("coverage_tags", ())
    if not all(isinstance(t, str) for t in raw_tags):
        raise ValueError("'coverage_tags' must be a list of strings")
    return Problem(name=name, declarations=decls, constraints=tuple(constraints),
                   description=description, coverage_tags=tuple(raw_tags))


def load_problem(source: Union[str, Path, dict]) -> Problem:
    """Load a problem from a JSON file (or an already-decoded dict)."""
    if isinstance(source, dict):
        return problem_from_dict(source)
    path = Path(source)
    try:
        data = json.loads(path.read_text())
    except json.JSONDecodeError as exc:
        raise ValueError(f"{path}: not valid JSON: {exc}") from exc
    try:
        return problem_from_dict(data, name=path.stem)
    except ValueError as exc:
        raise ValueError(f"{path}: {exc}") from exc
