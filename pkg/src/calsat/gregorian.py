"""Concrete Gregorian calendar arithmetic.

This module is the ground-truth oracle for everything else in the package:
dates are (year, month, day) triples in the proleptic Gregorian calendar with
astronomical year numbering (year 0 exists, negative years allowed), periods
are (years, months, days) integer triples, and the day-level epoch is
2000-03-01 (anchoring on March makes leap days the *last* day of a cycle,
which keeps the conversion arithmetic branch-light).

Conversions between triples and epoch day numbers use exact era-based
arithmetic (400-year eras of 146097 days), valid for all years — not the
4-year-cycle shortcut the symbolic encodings use, so the two routes stay
independently checkable.

All division here is floor division, which for the positive divisors used
coincides with Euclidean div/mod as SMT-LIB defines them.
"""

from __future__ import annotations

import re
from dataclasses import dataclass

LT, EQ, GT = -1, 0, 1

_DAYS_IN_MONTH = (31, 28, 31, 30, 31, 30, 31, 31, 30, 31, 30, 31)

DAYS_PER_ERA = 146097  # 400 Gregorian years
DAYS_PER_CYCLE = 1461  # 4-year leap cycle: 365*4 + 1
_EPOCH_OFFSET = 730485  # era-days from 0000-03-01 to 2000-03-01


@dataclass(frozen=True, order=True, slots=True)
class Date:
    """A calendar date; field order gives lexicographic comparison."""

    year: int
    month: int
    day: int

    def isoformat(self) -> str:
        y = self.year
        ys = f"{y:05d}" if y < 0 else f"{y:04d}"
        return f"{ys}-{self.month:02d}-{self.day:02d}"

    def __str__(self) -> str:
        return self.isoformat()


@dataclass(frozen=True, slots=True)
class Period:
    """A calendar displacement: years, months and days, each any integer."""

    years: int = 0
    months: int = 0
    days: int = 0

    def __str__(self) -> str:
        return f"Period({self.years}, {self.months}, {self.days})"


_ISO_RE = re.compile(r"^(-?\d{4,})-(\d{2})-(\d{2})$")


def parse_iso_date(text: str) -> Date:
    """Parse 'YYYY-MM-DD' (year zero-padded to >= 4 digits, '-' allowed).

    Only the shape is checked here; calendar validity is a separate concern
    (see valid()).
    """
    m = _ISO_RE.match(text.strip())
    if not m:
        raise ValueError(f"not an ISO date: {text!r}")
    return Date(int(m.group(1)), int(m.group(2)), int(m.group(3)))


def is_leap(year: int) -> bool:
    return year % 4 == 0 and (year % 100 != 0 or year % 400 == 0)


def nb_days(year: int, month: int) -> int:
    """Length of a month; month must be in 1..12."""
    if not 1 <= month <= 12:
        raise ValueError(f"month out of range: {month}")
    if month == 2 and is_leap(year):
        return 29
    return _DAYS_IN_MONTH[month - 1]


def valid(d: Date) -> bool:
    return 1 <= d.month <= 12 and 1 <= d.day <= nb_days(d.year, d.month)


def compare(a: Date, b: Date) -> int:
    """Lexicographic (year, month, day) order: LT, EQ or GT."""
    if a == b:
        return EQ
    return LT if (a.year, a.month, a.day) < (b.year, b.month, b.day) else GT


def add_months(d: Date, n: int) -> Date:
    """Shift by n months, clamping the day down to the target month length."""
    t = d.month - 1 + n
    y = d.year + t // 12
    m = t % 12 + 1
    return Date(y, m, min(d.day, nb_days(y, m)))


def to_epoch_days(d: Date) -> int:
    """Days since 2000-03-01 (exact for all years)."""
    y = d.year - (1 if d.month <= 2 else 0)
    era = y // 400
    yoe = y - era * 400  # 0..399
    mp = (d.month + 9) % 12  # March -> 0 ... February -> 11
    doy = (153 * mp + 2) // 5 + d.day - 1
    doe = yoe * 365 + yoe // 4 - yoe // 100 + doy
    return era * DAYS_PER_ERA + doe - _EPOCH_OFFSET


def from_epoch_days(delta: int) -> Date:
    """Inverse of to_epoch_days (exact for all years)."""
    z = delta + _EPOCH_OFFSET
    era = z // DAYS_PER_ERA
    doe = z - era * DAYS_PER_ERA  # 0..146096
    yoe = (doe - doe // 1460 + doe // 36524 - doe // 146096) // 365
    y = yoe + era * 400
    doy = doe - (365 * yoe + yoe // 4 - yoe // 100)
    mp = (5 * doy + 2) // 153
    d = doy - (153 * mp + 2) // 5 + 1
    m = mp + 3 if mp < 10 else mp - 9
    return Date(y + (1 if m <= 2 else 0), m, d)


def add_days(d: Date, n: int) -> Date:
    """Shift by n days via the epoch roundtrip (not day-by-day stepping)."""
    return from_epoch_days(to_epoch_days(d) + n)


def add_period(d: Date, p: Period) -> Date:
    """Months first (with day clamping), then days."""
    return add_days(add_months(d, 12 * p.years + p.months), p.days)


def period_add(p: Period, q: Period) -> Period:
    return Period(p.years + q.years, p.months + q.months, p.days + q.days)


def period_scale(k: int, p: Period) -> Period:
    return Period(k * p.years, k * p.months, k * p.days)


def period_neg(p: Period) -> Period:
    return Period(-p.years, -p.months, -p.days)


# --- month-count representation ------------------------------------------
# alpha = whole months since March 2000, beta = zero-based day of month.


def to_alpha_beta(d: Date) -> tuple[int, int]:
    return 12 * (d.year - 2000) + d.month - 3, d.day - 1


def from_alpha_beta(alpha: int, beta: int) -> Date:
    y = 2000 + (alpha + 2) // 12
    m = (alpha + 2) % 12 + 1
    if not 0 <= beta < nb_days(y, m):
        raise ValueError(f"beta {beta} out of range for ({y}, {m})")
    return Date(y, m, beta + 1)


def build_month_tables() -> tuple[tuple[int, ...], tuple[int, ...]]:
    """(days-in-month, days-before-month) over the 48-month leap cycle.

    Index is alpha mod 48; the cycle starts at March 2000 and totals 1461
    days. Usable only while the months covered follow the plain 4-year leap
    rule (i.e. within the default bounds — 2100 breaks the cycle).
    """
    dim: list[int] = []
    dbm: list[int] = []
    acc = 0
    for i in range(48):
        y = 2000 + (i + 2) // 12
        m = (i + 2) % 12 + 1
        dbm.append(acc)
        dim.append(nb_days(y, m))
        acc += dim[-1]
    assert acc == DAYS_PER_CYCLE
    return tuple(dim), tuple(dbm)


DIM48, DBM48 = build_month_tables()


# --- bounds ----------------------------------------------------------------

DEFAULT_LB = Date(1900, 3, 1)
DEFAULT_UB = Date(2100, 2, 28)


@dataclass(frozen=True, slots=True)
class Bounds:
    """Inclusive date window every date subexpression must stay within."""

    lb: Date = DEFAULT_LB
    ub: Date = DEFAULT_UB

    def __post_init__(self) -> None:
        if not valid(self.lb):
            raise ValueError(f"invalid lower bound {self.lb}")
        if not valid(self.ub):
            raise ValueError(f"invalid upper bound {self.ub}")
        if compare(self.lb, self.ub) == GT:
            raise ValueError(f"empty bounds: {self.lb} > {self.ub}")

    def contains(self, d: Date) -> bool:
        return self.lb <= d <= self.ub

    def within_default(self) -> bool:
        return DEFAULT_LB <= self.lb and self.ub <= DEFAULT_UB

    def size(self) -> int:
        return to_epoch_days(self.ub) - to_epoch_days(self.lb) + 1


DEFAULT_BOUNDS = Bounds()
