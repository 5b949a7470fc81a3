"""Term construction for quantifier-free linear integer arithmetic.

Terms are immutable, hash-consed nodes (building the same term twice in one
pool returns the same object), printable as SMT-LIB2 expressions, and
concretely evaluable — both one assignment at a time and vectorized over
numpy arrays, which is what makes exhaustive formula-vs-oracle sweeps cheap.

Multiplication, division and modulo take one constant operand so every term
stays linear; div/mod follow the SMT-LIB Euclidean convention (remainder in
[0, |n|)).
"""

from __future__ import annotations

from typing import Iterable, Mapping, Union

import numpy as np

INT = "Int"
BOOL = "Bool"
ARRAY = "(Array Int Int)"

Value = Union[int, bool]


class TermError(ValueError):
    pass


class Term:
    """A formula node; equality and hashing are by identity (see TermPool)."""

    __slots__ = ("op", "args", "value", "sort")

    def __init__(self, op: str, args: tuple["Term", ...], value, sort: str):
        self.op = op
        self.args = args
        self.value = value
        self.sort = sort

    def __repr__(self) -> str:
        return f"<Term {to_smt(self)}>"


def euclid_div(a: int, n: int) -> int:
    q, r = divmod(a, n)
    if r < 0:  # Python floor-mod has r's sign follow n; Euclidean wants r >= 0
        q += 1
    return q


def euclid_mod(a: int, n: int) -> int:
    r = a % n
    if r < 0:
        r -= n
    return r


class TermPool:
    """Interning constructor set for Terms.

    One pool per solver session: identical construction sequences produce
    identical (shared) nodes, keeping emitted scripts byte-stable and
    memoized evaluation linear in distinct nodes.
    """

    def __init__(self) -> None:
        self._pool: dict[tuple, Term] = {}

    def _mk(self, op: str, args: tuple[Term, ...], value, sort: str) -> Term:
        key = (op, tuple(id(a) for a in args), value)
        term = self._pool.get(key)
        if term is None:
            term = Term(op, args, value, sort)
            self._pool[key] = term
        return term

    # -- leaves --
    def int_const(self, v: int) -> Term:
        return self._mk("int", (), int(v), INT)

    def bool_const(self, v: bool) -> Term:
        return self._mk("bool", (), bool(v), BOOL)

    def var(self, name: str, sort: str = INT) -> Term:
        if sort not in (INT, BOOL, ARRAY):
            raise TermError(f"bad sort {sort!r}")
        return self._mk("var", (), name, sort)

    def const_array_from_table(self, name: str, values: Iterable[int]) -> Term:
        return self._mk("table", (), (name, tuple(int(v) for v in values)), ARRAY)

    # -- coercion --
    def _int(self, x) -> Term:
        if isinstance(x, Term):
            if x.sort != INT:
                raise TermError(f"expected Int term, got {x.sort}")
            return x
        if isinstance(x, bool) or not isinstance(x, int):
            raise TermError(f"expected Int term, got {x!r}")
        return self.int_const(x)

    def _bool(self, x) -> Term:
        if isinstance(x, Term):
            if x.sort != BOOL:
                raise TermError(f"expected Bool term, got {x.sort}")
            return x
        if isinstance(x, bool):
            return self.bool_const(x)
        raise TermError(f"expected Bool term, got {x!r}")

    # -- integer arithmetic --
    def add(self, a, b) -> Term:
        return self._mk("add", (self._int(a), self._int(b)), None, INT)

    def sub(self, a, b) -> Term:
        return self._mk("sub", (self._int(a), self._int(b)), None, INT)

    def neg(self, a) -> Term:
        return self._mk("neg", (self._int(a),), None, INT)

    def mul_const(self, k: int, a) -> Term:
        if not isinstance(k, int) or isinstance(k, bool):
            raise TermError("mul_const factor must be a Python int")
        return self._mk("mul", (self._int(a),), k, INT)

    def div_const(self, a, n: int) -> Term:
        if not isinstance(n, int) or isinstance(n, bool) or n == 0:
            raise TermError("div_const divisor must be a nonzero int")
        return self._mk("div", (self._int(a),), n, INT)

    def mod_const(self, a, n: int) -> Term:
        if not isinstance(n, int) or isinstance(n, bool) or n == 0:
            raise TermError("mod_const divisor must be a nonzero int")
        return self._mk("mod", (self._int(a),), n, INT)

    def ite(self, c, a, b) -> Term:
        c = self._bool(c)
        if isinstance(a, Term) and a.sort == BOOL or isinstance(a, bool):
            a, b = self._bool(a), self._bool(b)
            return self._mk("ite", (c, a, b), None, BOOL)
        a, b = self._int(a), self._int(b)
        return self._mk("ite", (c, a, b), None, INT)

    def min_(self, a, b) -> Term:
        a, b = self._int(a), self._int(b)
        return self.ite(self.le(a, b), a, b)

    # -- comparisons --
    def lt(self, a, b) -> Term:
        return self._mk("lt", (self._int(a), self._int(b)), None, BOOL)

    def le(self, a, b) -> Term:
        return self._mk("le", (self._int(a), self._int(b)), None, BOOL)

    def gt(self, a, b) -> Term:
        return self._mk("gt", (self._int(a), self._int(b)), None, BOOL)

    def ge(self, a, b) -> Term:
        return self._mk("ge", (self._int(a), self._int(b)), None, BOOL)

    def eq(self, a, b) -> Term:
        a, b = self._same_sorted(a, b)
        return self._mk("eq", (a, b), None, BOOL)

    def neq(self, a, b) -> Term:
        a, b = self._same_sorted(a, b)
        return self._mk("neq", (a, b), None, BOOL)

    def _same_sorted(self, a, b) -> tuple[Term, Term]:
        if isinstance(a, bool) or (isinstance(a, Term) and a.sort == BOOL):
            return self._bool(a), self._bool(b)
        if isinstance(b, bool) or (isinstance(b, Term) and b.sort == BOOL):
            return self._bool(a), self._bool(b)
        return self._int(a), self._int(b)

    # -- boolean connectives --
    def and_(self, *items) -> Term:
        flat = self._bool_list(items)
        if not flat:
            return self.bool_const(True)
        if len(flat) == 1:
            return flat[0]
        return self._mk("and", tuple(flat), None, BOOL)

    def or_(self, *items) -> Term:
        flat = self._bool_list(items)
        if not flat:
            return self.bool_const(False)
        if len(flat) == 1:
            return flat[0]
        return self._mk("or", tuple(flat), None, BOOL)

    def _bool_list(self, items) -> list[Term]:
        if len(items) == 1 and isinstance(items[0], (list, tuple)):
            items = items[0]
        return [self._bool(x) for x in items]

    def not_(self, a) -> Term:
        return self._mk("not", (self._bool(a),), None, BOOL)

    def implies(self, a, b) -> Term:
        return self._mk("implies", (self._bool(a), self._bool(b)), None, BOOL)

    # -- arrays --
    def select(self, array: Term, idx) -> Term:
        if array.sort != ARRAY:
            raise TermError("select needs an array term")
        return self._mk("select", (array, self._int(idx)), None, INT)


# --- SMT-LIB2 printing ---------------------------------------------------------

_SMT_OP = {
    "add": "+", "sub": "-", "lt": "<", "le": "<=", "gt": ">", "ge": ">=",
    "eq": "=", "and": "and", "or": "or", "not": "not", "implies": "=>",
    "ite": "ite",
}


def _smt_int(v: int) -> str:
    return str(v) if v >= 0 else f"(- {-v})"


def to_smt(t: Term, cache: dict[int, str] | None = None) -> str:
    """Render a term as an SMT-LIB2 expression (shared nodes re-render)."""
    if cache is None:
        cache = {}
    got = cache.get(id(t))
    if got is not None:
        return got
    op = t.op
    if op == "int":
        out = _smt_int(t.value)
    elif op == "bool":
        out = "true" if t.value else "false"
    elif op == "var":
        out = t.value
    elif op == "table":
        out = t.value[0]
    elif op == "neg":
        out = f"(- {to_smt(t.args[0], cache)})"
    elif op == "mul":
        out = f"(* {_smt_int(t.value)} {to_smt(t.args[0], cache)})"
    elif op == "div":
        out = f"(div {to_smt(t.args[0], cache)} {_smt_int(t.value)})"
    elif op == "mod":
        out = f"(mod {to_smt(t.args[0], cache)} {_smt_int(t.value)})"
    elif op == "neq":
        out = f"(distinct {to_smt(t.args[0], cache)} {to_smt(t.args[1], cache)})"
    elif op == "select":
        out = f"(select {to_smt(t.args[0], cache)} {to_smt(t.args[1], cache)})"
    else:
        parts = " ".join(to_smt(a, cache) for a in t.args)
        out = f"({_SMT_OP[op]} {parts})"
    cache[id(t)] = out
    return out


# --- concrete evaluation --------------------------------------------------------


class EvalError(ValueError):
    pass


def eval_term(t: Term, env: Mapping[str, Value],
              memo: dict[int, Value] | None = None) -> Value:
    """Evaluate one assignment; env maps variable names to int/bool."""
    if memo is None:
        memo = {}
    got = memo.get(id(t))
    if got is not None or id(t) in memo:
        return got
    op = t.op
    if op in ("int", "bool"):
        out = t.value
    elif op == "var":
        if t.value not in env:
            raise EvalError(f"no value for variable {t.value!r}")
        out = env[t.value]
    elif op == "table":
        raise EvalError("array term outside select")
    elif op == "select":
        arr = t.args[0]
        if arr.op != "table":
            raise EvalError("select on a non-table array")
        idx = eval_term(t.args[1], env, memo)
        values = arr.value[1]
        if not 0 <= idx < len(values):
            raise EvalError(f"select index {idx} outside table {arr.value[0]}")
        out = values[idx]
    else:
        args = [eval_term(a, env, memo) for a in t.args]
        if op == "add":
            out = args[0] + args[1]
        elif op == "sub":
            out = args[0] - args[1]
        elif op == "neg":
            out = -args[0]
        elif op == "mul":
            out = t.value * args[0]
        elif op == "div":
            out = euclid_div(args[0], t.value)
        elif op == "mod":
            out = euclid_mod(args[0], t.value)
        elif op == "ite":
            out = args[1] if args[0] else args[2]
        elif op == "lt":
            out = args[0] < args[1]
        elif op == "le":
            out = args[0] <= args[1]
        elif op == "gt":
            out = args[0] > args[1]
        elif op == "ge":
            out = args[0] >= args[1]
        elif op == "eq":
            out = args[0] == args[1]
        elif op == "neq":
            out = args[0] != args[1]
        elif op == "and":
            out = all(args)
        elif op == "or":
            out = any(args)
        elif op == "not":
            out = not args[0]
        elif op == "implies":
            out = (not args[0]) or args[1]
        else:
            raise EvalError(f"unhandled op {op}")
    memo[id(t)] = out
    return out


def _vec_euclid_div(a: np.ndarray, n: int) -> np.ndarray:
    q = a // n
    if n < 0:
        r = a - q * n
        q = np.where(r != 0, q + 1, q)
    return q


def _vec_euclid_mod(a: np.ndarray, n: int) -> np.ndarray:
    r = a % n
    if n < 0:
        r = np.where(r != 0, r - n, r)
    return r


def eval_term_vec(t: Term, env: Mapping[str, np.ndarray | Value],
                  memo: dict[int, np.ndarray] | None = None):
    """Vectorized evaluation: env values are numpy arrays (or scalars) of a
    common broadcastable shape. Both ite branches are computed — fine here
    since all divisors are constants."""
    if memo is None:
        memo = {}
    if id(t) in memo:
        return memo[id(t)]
    op = t.op
    if op == "int":
        out = np.int64(t.value)
    elif op == "bool":
        out = np.bool_(t.value)
    elif op == "var":
        if t.value not in env:
            raise EvalError(f"no value for variable {t.value!r}")
        out = np.asarray(env[t.value])
    elif op == "table":
        raise EvalError("array term outside select")
    elif op == "select":
        arr = t.args[0]
        if arr.op != "table":
            raise EvalError("select on a non-table array")
        idx = eval_term_vec(t.args[1], env, memo)
        values = np.asarray(arr.value[1], dtype=np.int64)
        if idx.size and (int(idx.min()) < 0 or int(idx.max()) >= len(values)):
            raise EvalError(f"select index outside table {arr.value[0]}")
        out = values[idx]
    else:
        args = [eval_term_vec(a, env, memo) for a in t.args]
        if op == "add":
            out = args[0] + args[1]
        elif op == "sub":
            out = args[0] - args[1]
        elif op == "neg":
            out = -args[0]
        elif op == "mul":
            out = t.value * args[0]
        elif op == "div":
            out = _vec_euclid_div(args[0], t.value)
        elif op == "mod":
            out = _vec_euclid_mod(args[0], t.value)
        elif op == "ite":
            out = np.where(args[0], args[1], args[2])
        elif op == "lt":
            out = args[0] < args[1]
        elif op == "le":
            out = args[0] <= args[1]
        elif op == "gt":
            out = args[0] > args[1]
        elif op == "ge":
            out = args[0] >= args[1]
        elif op == "eq":
            out = args[0] == args[1]
        elif op == "neq":
            out = args[0] != args[1]
        elif op == "and":
            out = args[0]
            for a in args[1:]:
                out = out & a
        elif op == "or":
            out = args[0]
            for a in args[1:]:
                out = out | a
        elif op == "not":
            out = ~args[0]
        elif op == "implies":
            out = ~args[0] | args[1]
        else:
            raise EvalError(f"unhandled op {op}")
    memo[id(t)] = out
    return out
