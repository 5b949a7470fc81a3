"""Encoding strategies: lowering date constraints to integer SMT terms.

Five interchangeable mappings from the constraint language to quantifier-free
linear integer arithmetic (plus arrays for the table variant):

- naive:            dates as (year, month, day) triples; period arithmetic
                    unrolled day by day through fresh intermediate states
- epoch:            dates as a single day-offset from 2000-03-01
- hybrid:           both of the above, kept consistent lazily via concrete
                    encode-time flags
- alpha-beta:       dates as (months since epoch, zero-based day of month)
- alpha-beta-table: alpha-beta with the 48-month day tables as array lookups
                    (requires bounds within the default 1900/2100 window)

Every distinct date subexpression gets one shared representation and a
lb <= e <= ub bounds assertion in the strategy's native comparison form.
Fresh variables introduced by the encoders carry "mirror" definitions so the
emitted formulas can also be evaluated concretely, without a solver.
"""

from __future__ import annotations

import bisect
import enum
import time
from dataclasses import dataclass
from typing import Iterable, Mapping

import numpy as np

from . import syntax
from .gregorian import (
    DEFAULT_BOUNDS,
    Bounds,
    Date,
    Period,
    build_month_tables,
    from_alpha_beta,
    from_epoch_days,
    to_alpha_beta,
    to_epoch_days,
    valid,
)
from .backend import SolverBackend, SolverSession
from .passes import lower
from .syntax import Problem, Sort
from .terms import BOOL, INT, Term, TermPool, eval_term, eval_term_vec

EPOCH_CYCLE = 1461  # days; leap cycle length from the 2000-03-01 epoch

DIM48, DBM48 = build_month_tables()


class EncodingError(ValueError):
    """Unencodable input or a violated encoder invariant."""


class Strategy(enum.Enum):
    NAIVE = "naive"
    EPOCH = "epoch"
    HYBRID = "hybrid"
    ALPHA_BETA = "alpha-beta"
    ALPHA_BETA_TABLE = "alpha-beta-table"

    def __str__(self) -> str:
        return self.value

    @classmethod
    def from_name(cls, name: str) -> "Strategy":
        for s in cls:
            if s.value == name:
                return s
        raise EncodingError(f"unknown strategy {name!r}; expected one of "
                            + ", ".join(s.value for s in cls))


ALL_STRATEGIES = tuple(Strategy)


# --- mirror definitions -------------------------------------------------------------
# Fresh solver variables fall into two groups: *defined* ones pinned by an
# equality to a term over earlier variables, and the table encoding's month
# index, pinned only by interval constraints. Both carry enough information
# to recompute their value from the base variables.


@dataclass(frozen=True)
class TermDef:
    name: str
    term: Term


@dataclass(frozen=True)
class TableIndexDef:
    """i is the unique index with dbm[i] <= offset < dbm[i] + dim[i]."""
    name: str
    offset: Term
    dbm: tuple[int, ...]


MirrorDef = TermDef | TableIndexDef


# --- per-strategy date representations ----------------------------------------------


@dataclass
class NaiveRepr:
    y: Term
    m: Term
    d: Term


@dataclass
class EpochRepr:
    delta: Term


@dataclass
class HybridRepr:
    # components may be stale; the concrete flags say which view is current
    y: Term | None
    m: Term | None
    d: Term | None
    delta: Term | None
    ymd_ok: bool
    delta_ok: bool


@dataclass
class AlphaBetaRepr:
    alpha: Term
    beta: Term


DateRepr = NaiveRepr | EpochRepr | HybridRepr | AlphaBetaRepr


@dataclass
class EncodedInstance:
    problem: Problem            # as given
    lowered: Problem            # desugared and period-folded
    ctor_defs: dict             # fresh date var -> originating constructor
    strategy: Strategy
    bounds: Bounds
    session: SolverSession
    var_terms: dict[str, Term]          # declared int/bool variables
    date_vars: dict[str, "DateRepr"]    # declared date variables
    reprs: dict                         # date subexpression -> DateRepr
    mirror_defs: list
    encode_ms: float = 0.0

    def dump(self) -> str:
        return self.session.dump()


# --- term-building helpers ----------------------------------------------------------


def _leap_term(p: TermPool, y: Term) -> Term:
    return p.and_(p.eq(p.mod_const(y, 4), 0),
                  p.or_(p.neq(p.mod_const(y, 100), 0),
                        p.eq(p.mod_const(y, 400), 0)))


def _nb_days_ym(p: TermPool, y: Term, m: Term) -> Term:
    """ITE expansion of days-in-month over (year, month) terms."""
    thirty = p.or_(p.eq(m, 4), p.eq(m, 6), p.eq(m, 9), p.eq(m, 11))
    feb = p.ite(_leap_term(p, y), p.int_const(29), p.int_const(28))
    return p.ite(thirty, p.int_const(30), p.ite(p.eq(m, 2), feb, p.int_const(31)))


class _Ops:
    """One strategy's term-level operations, bound to an encoder."""

    def __init__(self, enc: "ProblemEncoder"):
        self.enc = enc
        self.p = enc.pool

    # subclasses implement:
    #   fresh(name), const(date), add_period(r, period), field(r, name),
    #   lt_eq(a, b) -> (a<b term, a=b term), decode(r, env)

    def compare(self, op: str, a, b) -> Term:
        p = self.p
        if op in (">", ">="):
            return self.compare("<" if op == ">" else "<=", b, a)
        lt, eq = self.lt_eq(a, b)
        if op == "<":
            return lt
        if op == "<=":
            return p.or_(lt, eq)
        if op == "==":
            return eq
        if op == "!=":
            return p.not_(eq)
        raise EncodingError(f"bad comparison {op!r}")

    # shared lexicographic comparison over component lists
    def _lex(self, xs: list[Term], ys: list[Term]) -> tuple[Term, Term]:
        p = self.p
        eqs = [p.eq(x, y) for x, y in zip(xs, ys)]
        clauses = []
        for i, (x, y) in enumerate(zip(xs, ys)):
            clauses.append(p.and_(*eqs[:i], p.lt(x, y)))
        return p.or_(*clauses), p.and_(*eqs)


# --- naive ---------------------------------------------------------------------------


class _NaiveOps(_Ops):
    def fresh(self, name: str) -> NaiveRepr:
        enc, p = self.enc, self.p
        y = enc.declare(name + ".y")
        m = enc.declare(name + ".m")
        d = enc.declare(name + ".d")
        enc.assert_(p.and_(p.le(p.int_const(1), m), p.le(m, 12)))
        enc.assert_(p.and_(p.le(p.int_const(1), d),
                           p.le(d, _nb_days_ym(p, y, m))))
        return NaiveRepr(y, m, d)

    def const(self, date: Date) -> NaiveRepr:
        p = self.p
        return NaiveRepr(p.int_const(date.year), p.int_const(date.month),
                         p.int_const(date.day))

    def _add_months(self, r: NaiveRepr, n: int) -> NaiveRepr:
        enc, p = self.enc, self.p
        base = enc.fresh_base()
        t = p.add(r.m, n - 1)  # zero-based month plus the offset
        y = enc.define(base + ".y", p.add(r.y, p.div_const(t, 12)))
        m = enc.define(base + ".m", p.add(p.mod_const(t, 12), 1))
        nb = _nb_days_ym(p, y, m)
        d = enc.define(base + ".d", p.ite(p.gt(r.d, nb), nb, r.d))
        return NaiveRepr(y, m, d)

    def _step_forward(self, r: NaiveRepr) -> NaiveRepr:
        enc, p = self.enc, self.p
        base = enc.fresh_base()
        over = p.gt(p.add(r.d, 1), _nb_days_ym(p, r.y, r.m))
        wrap = p.eq(r.m, 12)
        y = enc.define(base + ".y", p.ite(over, p.ite(wrap, p.add(r.y, 1), r.y), r.y))
        m = enc.define(base + ".m", p.ite(over, p.ite(wrap, p.int_const(1), p.add(r.m, 1)), r.m))
        d = enc.define(base + ".d", p.ite(over, p.int_const(1), p.add(r.d, 1)))
        return NaiveRepr(y, m, d)

    def _step_backward(self, r: NaiveRepr) -> NaiveRepr:
        enc, p = self.enc, self.p
        base = enc.fresh_base()
        under = p.le(r.d, 1)
        wrap = p.eq(r.m, 1)
        prev_nb = _nb_days_ym(p, r.y, p.sub(r.m, 1))
        y = enc.define(base + ".y", p.ite(under, p.ite(wrap, p.sub(r.y, 1), r.y), r.y))
        m = enc.define(base + ".m", p.ite(under, p.ite(wrap, p.int_const(12), p.sub(r.m, 1)), r.m))
        d = enc.define(base + ".d", p.ite(under, p.ite(wrap, p.int_const(31), prev_nb), p.sub(r.d, 1)))
        return NaiveRepr(y, m, d)

    def add_period(self, r: NaiveRepr, per: Period) -> NaiveRepr:
        n = 12 * per.years + per.months
        if n:
            r = self._add_months(r, n)
        step = self._step_forward if per.days > 0 else self._step_backward
        for _ in range(abs(per.days)):
            r = step(r)
        return r

    def lt_eq(self, a: NaiveRepr, b: NaiveRepr):
        return self._lex([a.y, a.m, a.d], [b.y, b.m, b.d])

    def field(self, r: NaiveRepr, name: str) -> Term:
        return {"year": r.y, "month": r.m, "day": r.d}[name]

    def decode(self, r: NaiveRepr, env) -> Date:
        return Date(eval_term(r.y, env), eval_term(r.m, env), eval_term(r.d, env))


# --- epoch ---------------------------------------------------------------------------


class _EpochOps(_Ops):
    def __init__(self, enc):
        super().__init__(enc)
        self._from_delta_memo: dict[int, tuple[Term, Term, Term]] = {}

    def fresh(self, name: str) -> EpochRepr:
        return EpochRepr(self.enc.declare(name + ".delta"))

    def const(self, date: Date) -> EpochRepr:
        return EpochRepr(self.p.int_const(to_epoch_days(date)))

    # day offset -> (y, m, d), written out as term formulas. Within the
    # default bounds the four-year leap cycle is exact; beyond them the
    # century corrections are included. Intermediates become named defined
    # variables with their (implied) ranges asserted outright: stated small
    # ranges prune far faster than re-deriving them from div/mod semantics.
    def from_delta(self, delta: Term) -> tuple[Term, Term, Term]:
        got = self._from_delta_memo.get(id(delta))
        if got is not None:
            return got
        enc, p = self.enc, self.p
        base = enc.fresh_base()
        if enc.bounds.within_default():
            q = enc.define(base + ".q", p.div_const(delta, EPOCH_CYCLE))
            r = enc.define(base + ".r", p.mod_const(delta, EPOCH_CYCLE))
            yo = enc.define(
                base + ".yo",
                p.div_const(p.sub(r, p.div_const(r, EPOCH_CYCLE - 1)), 365))
            doy = enc.define(base + ".doy", p.sub(r, p.mul_const(365, yo)))
            enc.assert_(p.and_(p.le(p.int_const(0), yo),
                               p.le(yo, p.int_const(3))))
            ys = p.add(p.add(p.mul_const(4, q), yo), 2000)  # March-anchored
        else:
            z = p.add(delta, 730485)
            era = p.div_const(z, 146097)
            doe = enc.define(base + ".doe", p.mod_const(z, 146097))
            yoe = enc.define(
                base + ".yoe",
                p.div_const(
                    p.sub(p.add(p.sub(doe, p.div_const(doe, 1460)),
                                p.div_const(doe, 36524)),
                          p.div_const(doe, 146096)),
                    365))
            doy = enc.define(
                base + ".doy",
                p.sub(doe, p.sub(p.add(p.mul_const(365, yoe),
                                       p.div_const(yoe, 4)),
                                 p.div_const(yoe, 100))))
            enc.assert_(p.and_(p.le(p.int_const(0), yoe),
                               p.le(yoe, p.int_const(399))))
            ys = p.add(p.mul_const(400, era), yoe)
        mp = enc.define(base + ".mp",
                        p.div_const(p.add(p.mul_const(5, doy), 2), 153))
        enc.assert_(p.and_(p.le(p.int_const(0), doy),
                           p.le(doy, p.int_const(365))))
        enc.assert_(p.and_(p.le(p.int_const(0), mp), p.le(mp, p.int_const(11))))
        d = p.add(p.sub(doy, p.div_const(p.add(p.mul_const(153, mp), 2), 5)), 1)
        m = p.ite(p.lt(mp, 10), p.add(mp, 3), p.sub(mp, 9))
        y = p.add(ys, p.ite(p.ge(mp, 10), p.int_const(1), p.int_const(0)))
        self._from_delta_memo[id(delta)] = (y, m, d)
        return y, m, d

    def to_delta(self, y: Term, m: Term, d: Term) -> Term:
        p = self.p
        ys = p.sub(y, p.ite(p.le(m, 2), p.int_const(1), p.int_const(0)))
        yrel = p.sub(ys, 2000)
        mp = p.ite(p.ge(m, 3), p.sub(m, 3), p.add(m, 9))
        moff = p.div_const(p.add(p.mul_const(153, mp), 2), 5)
        leaps = p.div_const(yrel, 4)
        if not self.enc.bounds.within_default():
            leaps = p.add(p.sub(leaps, p.div_const(yrel, 100)),
                          p.div_const(yrel, 400))
        return p.add(p.add(p.add(p.mul_const(365, yrel), leaps), moff),
                     p.sub(d, 1))

    def add_period(self, r: EpochRepr, per: Period) -> EpochRepr:
        enc, p = self.enc, self.p
        n = 12 * per.years + per.months
        if n == 0:
            if per.days == 0:
                return r
            return EpochRepr(p.add(r.delta, per.days))
        base = enc.fresh_base()
        fy, fm, fd = self.from_delta(r.delta)
        y = enc.define(base + ".y", fy)
        m = enc.define(base + ".m", fm)
        d = enc.define(base + ".d", fd)
        t = p.add(m, n - 1)
        y2 = enc.define(base + ".my", p.add(y, p.div_const(t, 12)))
        m2 = enc.define(base + ".mm", p.add(p.mod_const(t, 12), 1))
        nb = _nb_days_ym(p, y2, m2)
        d2 = enc.define(base + ".md", p.ite(p.gt(d, nb), nb, d))
        out = enc.define(base + ".delta", self.to_delta(y2, m2, d2))
        if per.days:
            out = p.add(out, per.days)
        return EpochRepr(out)

    def lt_eq(self, a: EpochRepr, b: EpochRepr):
        return self.p.lt(a.delta, b.delta), self.p.eq(a.delta, b.delta)

    def field(self, r: EpochRepr, name: str) -> Term:
        y, m, d = self.from_delta(r.delta)
        return {"year": y, "month": m, "day": d}[name]

    def decode(self, r: EpochRepr, env) -> Date:
        return from_epoch_days(eval_term(r.delta, env))


# --- hybrid --------------------------------------------------------------------------


class _HybridOps(_Ops):
    """Dual triple/offset representation with lazy consistency fixes.

    Flags are concrete Python booleans decided while encoding; fixes emit the
    conversion constraints at most once per representation of a given
    subexpression (the repr object is the memo).
    """

    def __init__(self, enc):
        super().__init__(enc)
        self._epoch = _EpochOps(enc)

    def fresh(self, name: str) -> HybridRepr:
        n = _NaiveOps(self.enc).fresh(name)
        return HybridRepr(n.y, n.m, n.d, None, True, False)

    def const(self, date: Date) -> HybridRepr:
        p = self.p
        return HybridRepr(p.int_const(date.year), p.int_const(date.month),
                          p.int_const(date.day),
                          p.int_const(to_epoch_days(date)), True, True)

    def fix_delta(self, r: HybridRepr) -> None:
        if r.delta_ok:
            return
        base = self.enc.fresh_base()
        r.delta = self.enc.define(base + ".delta",
                                  self._epoch.to_delta(r.y, r.m, r.d))
        r.delta_ok = True

    def fix_ymd(self, r: HybridRepr) -> None:
        if r.ymd_ok:
            return
        enc = self.enc
        base = enc.fresh_base()
        fy, fm, fd = self._epoch.from_delta(r.delta)
        r.y = enc.define(base + ".y", fy)
        r.m = enc.define(base + ".m", fm)
        r.d = enc.define(base + ".d", fd)
        r.ymd_ok = True

    def add_period(self, r: HybridRepr, per: Period) -> HybridRepr:
        enc, p = self.enc, self.p
        n = 12 * per.years + per.months
        if n == 0 and per.days == 0:
            return r
        if n:
            self.fix_ymd(r)
            base = enc.fresh_base()
            t = p.add(r.m, n - 1)
            y = enc.define(base + ".y", p.add(r.y, p.div_const(t, 12)))
            m = enc.define(base + ".m", p.add(p.mod_const(t, 12), 1))
            nb = _nb_days_ym(p, y, m)
            d = enc.define(base + ".d", p.ite(p.gt(r.d, nb), nb, r.d))
            r = HybridRepr(y, m, d, None, True, False)
            if per.days == 0:
                return r
        self.fix_delta(r)
        # day-only step: triple goes stale, offset stays authoritative
        return HybridRepr(r.y, r.m, r.d, p.add(r.delta, per.days), False, True)

    def lt_eq(self, a: HybridRepr, b: HybridRepr):
        p = self.p
        if a.delta_ok and b.delta_ok:
            return p.lt(a.delta, b.delta), p.eq(a.delta, b.delta)
        if a.ymd_ok and b.ymd_ok:
            return self._lex([a.y, a.m, a.d], [b.y, b.m, b.d])
        self.fix_delta(a)
        self.fix_delta(b)
        return p.lt(a.delta, b.delta), p.eq(a.delta, b.delta)

    def field(self, r: HybridRepr, name: str) -> Term:
        self.fix_ymd(r)
        return {"year": r.y, "month": r.m, "day": r.d}[name]

    def decode(self, r: HybridRepr, env) -> Date:
        if r.ymd_ok:
            return Date(eval_term(r.y, env), eval_term(r.m, env),
                        eval_term(r.d, env))
        return from_epoch_days(eval_term(r.delta, env))


# --- alpha-beta and the table variant -----------------------------------------------


class _AlphaBetaOps(_Ops):
    """(months since epoch, zero-based day of month) pairs.

    The plain variant expands days-in-month and the epoch conversions as
    arithmetic over the pair; the table subclass replaces them with lookups.
    """

    _stay_in_month_split = True

    def __init__(self, enc):
        super().__init__(enc)
        self._epoch = _EpochOps(enc)

    def fresh(self, name: str) -> AlphaBetaRepr:
        enc, p = self.enc, self.p
        a = enc.declare(name + ".alpha")
        b = enc.declare(name + ".beta")
        enc.assert_(p.and_(p.le(p.int_const(0), b),
                           p.lt(b, self.nb_days(a))))
        return AlphaBetaRepr(a, b)

    def const(self, date: Date) -> AlphaBetaRepr:
        a, b = to_alpha_beta(date)
        return AlphaBetaRepr(self.p.int_const(a), self.p.int_const(b))

    def nb_days(self, alpha: Term) -> Term:
        p = self.p
        r12 = p.mod_const(alpha, 12)  # 0 = March ... 11 = February
        thirty = p.or_(p.eq(r12, 1), p.eq(r12, 3), p.eq(r12, 6), p.eq(r12, 8))
        feb_year = p.add(p.div_const(alpha, 12), 2001)
        feb = p.ite(_leap_term(p, feb_year), p.int_const(29), p.int_const(28))
        return p.ite(thirty, p.int_const(30),
                     p.ite(p.eq(r12, 11), feb, p.int_const(31)))

    def to_delta(self, alpha: Term, beta: Term) -> Term:
        # the pair is already March-anchored: year = alpha div 12,
        # month index = alpha mod 12, so the offset conversion is direct
        p = self.p
        yrel = p.div_const(alpha, 12)
        mp = p.mod_const(alpha, 12)
        moff = p.div_const(p.add(p.mul_const(153, mp), 2), 5)
        leaps = p.div_const(yrel, 4)
        if not self.enc.bounds.within_default():
            leaps = p.add(p.sub(leaps, p.div_const(yrel, 100)),
                          p.div_const(yrel, 400))
        return p.add(p.add(p.mul_const(365, yrel), leaps), p.add(moff, beta))

    def from_delta(self, delta: Term) -> tuple[Term, Term]:
        # the pair is March-anchored like the offset itself, so unlike the
        # calendar triple no month/year case split is needed at the end
        p = self.p
        if self.enc.bounds.within_default():
            q = p.div_const(delta, EPOCH_CYCLE)
            r = p.mod_const(delta, EPOCH_CYCLE)
            yo = p.div_const(p.sub(r, p.div_const(r, EPOCH_CYCLE - 1)), 365)
            doy = p.sub(r, p.mul_const(365, yo))
            yrel = p.add(p.mul_const(4, q), yo)  # years since 2000-03
        else:
            z = p.add(delta, 730485)
            era = p.div_const(z, 146097)
            doe = p.mod_const(z, 146097)
            yoe = p.div_const(
                p.sub(p.add(p.sub(doe, p.div_const(doe, 1460)),
                            p.div_const(doe, 36524)),
                      p.div_const(doe, 146096)),
                365)
            doy = p.sub(doe, p.sub(p.add(p.mul_const(365, yoe),
                                         p.div_const(yoe, 4)),
                                   p.div_const(yoe, 100)))
            yrel = p.sub(p.add(p.mul_const(400, era), yoe), 2000)
        mp = p.div_const(p.add(p.mul_const(5, doy), 2), 153)
        alpha = p.add(p.mul_const(12, yrel), mp)
        beta = p.sub(doy, p.div_const(p.add(p.mul_const(153, mp), 2), 5))
        return alpha, beta

    def add_period(self, r: AlphaBetaRepr, per: Period) -> AlphaBetaRepr:
        enc, p = self.enc, self.p
        n = 12 * per.years + per.months
        if n == 0 and per.days == 0:
            return r
        alpha, beta = r.alpha, r.beta
        if n:
            base = enc.fresh_base()
            alpha = enc.define(base + ".alpha", p.add(r.alpha, n))
            # round down into the target month; beta is zero-based so the
            # ceiling is nbDays - 1
            beta = enc.define(base + ".beta",
                              p.min_(r.beta, p.sub(self.nb_days(alpha), 1)))
        if per.days == 0:
            return AlphaBetaRepr(alpha, beta)
        base = enc.fresh_base()
        cand = p.add(beta, per.days)
        # to_delta is linear in beta, so it stays exact even when cand over-
        # or underflows the month
        delta = enc.define(base + ".delta", self.to_delta(alpha, cand))
        # redundant but sound: delta equals the result's day offset, and the
        # result is bounds-asserted; stating the range keeps the div/mod case
        # splits below small
        dlb, dub = enc.delta_range()
        enc.assert_(p.and_(p.le(p.int_const(dlb), delta), p.le(delta, dub)))
        ra, rb = self.roundtrip(delta, base)
        if self._stay_in_month_split:
            # worth an ITE only when the roundtrip is division-heavy; the
            # table variant's lookup is cheaper than the extra case split
            ok = p.and_(p.le(p.int_const(0), cand),
                        p.lt(cand, self.nb_days(alpha)))
            ra, rb = p.ite(ok, alpha, ra), p.ite(ok, cand, rb)
        alpha2 = enc.define(base + ".alpha", ra)
        beta2 = enc.define(base + ".beta", rb)
        return AlphaBetaRepr(alpha2, beta2)

    def roundtrip(self, delta: Term, base: str) -> tuple[Term, Term]:
        enc, p = self.enc, self.p
        if not enc.bounds.within_default():
            return self.from_delta(delta)
        # named intermediates with their (implied) ranges stated outright:
        # the solver then case-splits on small integers instead of deriving
        # the ranges from the division semantics each time
        q = enc.define(base + ".q", p.div_const(delta, EPOCH_CYCLE))
        r = enc.define(base + ".r", p.mod_const(delta, EPOCH_CYCLE))
        yo = enc.define(base + ".yo",
                        p.div_const(p.sub(r, p.div_const(r, EPOCH_CYCLE - 1)),
                                    365))
        doy = enc.define(base + ".doy", p.sub(r, p.mul_const(365, yo)))
        mp = enc.define(base + ".mp",
                        p.div_const(p.add(p.mul_const(5, doy), 2), 153))
        enc.assert_(p.and_(p.le(p.int_const(0), yo), p.le(yo, p.int_const(3))))
        enc.assert_(p.and_(p.le(p.int_const(0), doy),
                           p.le(doy, p.int_const(365))))
        enc.assert_(p.and_(p.le(p.int_const(0), mp), p.le(mp, p.int_const(11))))
        alpha = p.add(p.mul_const(12, p.add(p.mul_const(4, q), yo)), mp)
        beta = p.sub(doy, p.div_const(p.add(p.mul_const(153, mp), 2), 5))
        return alpha, beta

    def lt_eq(self, a: AlphaBetaRepr, b: AlphaBetaRepr):
        return self._lex([a.alpha, a.beta], [b.alpha, b.beta])

    def field(self, r: AlphaBetaRepr, name: str) -> Term:
        p = self.p
        if name == "day":
            return p.add(r.beta, 1)
        shifted = p.add(r.alpha, 2)
        if name == "year":
            return p.add(p.div_const(shifted, 12), 2000)
        return p.add(p.mod_const(shifted, 12), 1)

    def decode(self, r: AlphaBetaRepr, env) -> Date:
        return from_alpha_beta(eval_term(r.alpha, env), eval_term(r.beta, env))


class _AlphaBetaTableOps(_AlphaBetaOps):
    _stay_in_month_split = False

    def nb_days(self, alpha: Term) -> Term:
        p = self.p
        return p.select(self.enc.dim_table(), p.mod_const(alpha, 48))

    def to_delta(self, alpha: Term, beta: Term) -> Term:
        p = self.p
        start = p.add(p.select(self.enc.dbm_table(), p.mod_const(alpha, 48)),
                      p.mul_const(EPOCH_CYCLE, p.div_const(alpha, 48)))
        return p.add(start, beta)

    def roundtrip(self, delta: Term, base: str) -> tuple[Term, Term]:
        enc, p = self.enc, self.p
        dbm = enc.dbm_table()
        r = enc.define(base + ".r", p.mod_const(delta, EPOCH_CYCLE))
        i = enc.declare(base + ".i")
        enc.mirror_defs.append(TableIndexDef(i.value, r, DBM48))
        enc.assert_(p.and_(p.le(p.int_const(0), i), p.lt(i, 48)))
        enc.assert_(p.and_(p.le(p.select(dbm, i), r),
                           p.lt(r, p.add(p.select(dbm, i),
                                         p.select(enc.dim_table(), i)))))
        alpha = enc.define(
            base + ".a",
            p.add(i, p.mul_const(48, p.div_const(delta, EPOCH_CYCLE))))
        beta = enc.define(base + ".b", p.sub(r, p.select(dbm, i)))
        # redundant: the pair ranges follow from the table facts, but only
        # after array instantiation; stated directly they prune immediately
        enc.assert_(p.and_(p.le(p.int_const(0), beta),
                           p.le(beta, p.int_const(30))))
        alo, _ = to_alpha_beta(enc.bounds.lb)
        ahi, _ = to_alpha_beta(enc.bounds.ub)
        enc.assert_(p.and_(p.le(p.int_const(alo), alpha),
                           p.le(alpha, p.int_const(ahi))))
        return alpha, beta


_OPS = {
    Strategy.NAIVE: _NaiveOps,
    Strategy.EPOCH: _EpochOps,
    Strategy.HYBRID: _HybridOps,
    Strategy.ALPHA_BETA: _AlphaBetaOps,
    Strategy.ALPHA_BETA_TABLE: _AlphaBetaTableOps,
}


# --- the problem encoder -------------------------------------------------------------


class ProblemEncoder:
    def __init__(self, problem: Problem, strategy: Strategy,
                 bounds: Bounds = DEFAULT_BOUNDS,
                 backend: SolverBackend | None = None,
                 timeout_ms: int = 60000):
        if strategy is Strategy.ALPHA_BETA_TABLE and not bounds.within_default():
            raise EncodingError(
                "alpha-beta-table requires bounds within "
                f"[{DEFAULT_BOUNDS.lb}, {DEFAULT_BOUNDS.ub}], got "
                f"[{bounds.lb}, {bounds.ub}]")
        logic = "QF_ALIA" if strategy is Strategy.ALPHA_BETA_TABLE else "QF_LIA"
        self.problem = problem
        self.strategy = strategy
        self.bounds = bounds
        self.session = SolverSession(backend, logic=logic, timeout_ms=timeout_ms)
        self.pool = self.session.pool
        self.mirror_defs: list = []
        self._counter = 0
        self._tables: dict[str, Term] = {}
        self._ops = _OPS[strategy](self)
        self._reprs: dict = {}
        self._consts: dict[Date, object] = {}

    # -- plumbing used by the ops --
    def declare(self, name: str) -> Term:
        return self.session.var(name, INT)

    def assert_(self, t: Term) -> None:
        self.session.assert_term(t)

    def define(self, name: str, term: Term) -> Term:
        v = self.session.var(name, INT)
        self.session.assert_term(self.pool.eq(v, term))
        self.mirror_defs.append(TermDef(name, term))
        return v

    def fresh_base(self) -> str:
        while True:
            name = f"_e{self._counter}"
            self._counter += 1
            if name not in self.problem.declarations:
                return name

    def delta_range(self) -> tuple[int, int]:
        return to_epoch_days(self.bounds.lb), to_epoch_days(self.bounds.ub)

    def dim_table(self) -> Term:
        return self._table("DIM48", DIM48)

    def dbm_table(self) -> Term:
        return self._table("DBM48", DBM48)

    def _table(self, name: str, values: tuple[int, ...]) -> Term:
        if name not in self._tables:
            self._tables[name] = self.session.table(name, values)
        return self._tables[name]

    # -- encoding --
    def encode(self) -> EncodedInstance:
        t0 = time.perf_counter()
        lowered, ctor_defs = lower(self.problem)
        self.lowered = lowered
        var_terms: dict[str, Term] = {}
        date_vars: dict[str, object] = {}
        for name, sort in lowered.declarations.items():
            if sort is Sort.DATE:
                date_vars[name] = self._ops.fresh(name)
            else:
                var_terms[name] = self.session.var(
                    name, INT if sort is Sort.INT else BOOL)
        self._var_terms = var_terms
        self._date_vars = date_vars
        for c in lowered.constraints:
            self.session.assert_term(self._bool(c))
        # bounds constraints for every distinct date subexpression, in the
        # strategy's own comparison form
        lb, ub = self._const(self.bounds.lb), self._const(self.bounds.ub)
        for r in self._reprs.values():
            self.session.assert_term(self._ops.compare("<=", lb, r))
            self.session.assert_term(self._ops.compare("<=", r, ub))
        encode_ms = (time.perf_counter() - t0) * 1000.0
        return EncodedInstance(
            problem=self.problem, lowered=lowered, ctor_defs=ctor_defs,
            strategy=self.strategy, bounds=self.bounds, session=self.session,
            var_terms=var_terms, date_vars=date_vars, reprs=self._reprs,
            mirror_defs=self.mirror_defs, encode_ms=encode_ms)

    def _const(self, date: Date):
        if date not in self._consts:
            self._consts[date] = self._ops.const(date)
        return self._consts[date]

    def _repr(self, e) -> object:
        """Representation of a date subexpression, shared across occurrences."""
        if e in self._reprs:
            return self._reprs[e]
        if isinstance(e, syntax.Var):
            r = self._date_vars[e.name]
        elif isinstance(e, syntax.DateConst):
            r = self._const(e.value)
        elif isinstance(e, syntax.DateAdd):
            if not isinstance(e.period, syntax.PeriodLit):
                raise EncodingError("period expressions must be folded "
                                    "before encoding")
            r = self._ops.add_period(self._repr(e.date), e.period.value)
        elif isinstance(e, syntax.DateCtor):
            raise EncodingError("date constructors must be desugared "
                                "before encoding")
        elif isinstance(e, syntax.DateSub):
            raise EncodingError("period expressions must be folded "
                                "before encoding")
        else:
            raise EncodingError(f"not a date expression: {type(e).__name__}")
        self._reprs[e] = r
        return r

    def _lit(self, e) -> int | None:
        neg = False
        while isinstance(e, syntax.IntNeg):
            neg = not neg
            e = e.operand
        if isinstance(e, syntax.IntLit):
            return -e.value if neg else e.value
        return None

    def _int(self, e) -> Term:
        p = self.pool
        if isinstance(e, syntax.IntLit):
            return p.int_const(e.value)
        if isinstance(e, syntax.Var):
            return self._var_terms[e.name]
        if isinstance(e, syntax.IntNeg):
            return p.neg(self._int(e.operand))
        if isinstance(e, syntax.IntAdd):
            return p.add(self._int(e.left), self._int(e.right))
        if isinstance(e, syntax.IntSub):
            return p.sub(self._int(e.left), self._int(e.right))
        if isinstance(e, syntax.IntMul):
            k = self._lit(e.left)
            other = e.right
            if k is None:
                k, other = self._lit(e.right), e.left
            if k is None:
                raise EncodingError("multiplication needs a literal operand")
            return p.mul_const(k, self._int(other))
        if isinstance(e, syntax.Field):
            return self._ops.field(self._repr(e.date), e.name)
        raise EncodingError(f"not an integer expression: {type(e).__name__}")

    def _bool(self, e) -> Term:
        p = self.pool
        if isinstance(e, syntax.BoolLit):
            return p.bool_const(e.value)
        if isinstance(e, syntax.Var):
            return self._var_terms[e.name]
        if isinstance(e, syntax.Not):
            return p.not_(self._bool(e.operand))
        if isinstance(e, syntax.And):
            return p.and_(self._bool(e.left), self._bool(e.right))
        if isinstance(e, syntax.Or):
            return p.or_(self._bool(e.left), self._bool(e.right))
        if isinstance(e, syntax.Implies):
            return p.implies(self._bool(e.left), self._bool(e.right))
        if isinstance(e, syntax.BoolCmp):
            l, r = self._bool(e.left), self._bool(e.right)
            return p.eq(l, r) if e.op == "==" else p.neq(l, r)
        if isinstance(e, syntax.DateCmp):
            return self._ops.compare(e.op, self._repr(e.left),
                                     self._repr(e.right))
        if isinstance(e, syntax.Cmp):
            l, r = self._int(e.left), self._int(e.right)
            fn = {"<": p.lt, "<=": p.le, ">": p.gt, ">=": p.ge,
                  "==": p.eq, "!=": p.neq}[e.op]
            return fn(l, r)
        raise EncodingError(f"not a boolean expression: {type(e).__name__}")


def encode(problem: Problem, strategy: Strategy,
           bounds: Bounds = DEFAULT_BOUNDS,
           backend: SolverBackend | None = None,
           timeout_ms: int = 60000) -> EncodedInstance:
    """Lower a problem to an SMT session under one strategy."""
    return ProblemEncoder(problem, strategy, bounds, backend, timeout_ms).encode()


# --- concrete replay of encoder-introduced variables --------------------------------


def extend_env(mirror_defs: Iterable[MirrorDef], env: dict) -> dict:
    """Fill values for encoder-introduced variables into env, in order.

    Works for plain Python ints and for numpy arrays (vectorized sweeps);
    values already present (e.g. from a solver model) are kept.
    """
    vectorized = any(isinstance(v, np.ndarray) for v in env.values())
    memo: dict = {}
    for mdef in mirror_defs:
        if mdef.name in env:
            continue
        if isinstance(mdef, TermDef):
            ev = eval_term_vec if vectorized else eval_term
            env[mdef.name] = ev(mdef.term, env, memo)
        elif vectorized:
            off = eval_term_vec(mdef.offset, env, memo)
            env[mdef.name] = np.searchsorted(
                np.asarray(mdef.dbm), off, side="right") - 1
        else:
            off = eval_term(mdef.offset, env, memo)
            env[mdef.name] = bisect.bisect_right(mdef.dbm, off) - 1
    return env


# --- model decoding ------------------------------------------------------------------


def decode_model(inst: EncodedInstance, raw: Mapping[str, int | bool]) -> dict:
    """Map a raw solver model back to dates/ints/bools of the problem.

    An invalid or out-of-bounds decoded date means the encoding itself is
    broken, so it raises rather than returning a wrong assignment.
    """
    env = extend_env(inst.mirror_defs, dict(raw))
    ops = inst_ops(inst)
    out: dict = {}
    for name, sort in inst.problem.declarations.items():
        if sort is Sort.DATE:
            try:
                date = ops.decode(inst.date_vars[name], env)
            except ValueError as exc:
                raise EncodingError(
                    f"decoded no valid date for {name}: {exc}") from exc
            if not valid(date):
                raise EncodingError(f"decoded invalid date for {name}: "
                                    f"({date.year}, {date.month}, {date.day})")
            if not inst.bounds.contains(date):
                raise EncodingError(
                    f"decoded out-of-bounds date for {name}: {date}")
            out[name] = date
        elif sort is Sort.INT:
            out[name] = int(env.get(name, 0))
        else:
            out[name] = bool(env.get(name, False))
    return out


class _OpsShim:
    """Just enough of the encoder interface for post-hoc decoding."""

    def __init__(self, inst: EncodedInstance):
        self.pool = inst.session.pool
        self.bounds = inst.bounds


def inst_ops(inst: EncodedInstance) -> _Ops:
    """The term-level operations bound to an already-encoded instance."""
    return _OPS[inst.strategy](_OpsShim(inst))
