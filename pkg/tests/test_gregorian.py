"""Calendar-core tests.

Anchor values below were derived by hand (era arithmetic / day counting) or
cross-checked against the stdlib datetime module before the implementation
existed; they are frozen here, not recomputed from the code under test.
"""

import calendar
import datetime
import random

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from calsat.gregorian import (
    Bounds,
    Date,
    DBM48,
    DEFAULT_BOUNDS,
    DEFAULT_LB,
    DEFAULT_UB,
    DIM48,
    EQ,
    GT,
    LT,
    Period,
    add_days,
    add_months,
    add_period,
    compare,
    from_alpha_beta,
    from_epoch_days,
    is_leap,
    nb_days,
    parse_iso_date,
    period_add,
    period_neg,
    period_scale,
    to_alpha_beta,
    to_epoch_days,
    valid,
)

# 2000-03-01 as a datetime ordinal, for the independent stdlib route
_EPOCH_ORDINAL = datetime.date(2000, 3, 1).toordinal()


# --- leap years and month lengths ------------------------------------------


@pytest.mark.parametrize(
    "year,leap",
    [
        (2000, True),
        (1900, False),
        (2100, False),
        (2004, True),
        (2023, False),
        (0, True),
        (-1, False),
        (-4, True),
        (1600, True),
    ],
)
def test_is_leap_anchors(year, leap):
    assert is_leap(year) is leap


def test_is_leap_matches_stdlib():
    for y in range(1, 3000):
        assert is_leap(y) == calendar.isleap(y)


def test_nb_days_anchors():
    assert nb_days(2023, 2) == 28
    assert nb_days(2024, 2) == 29
    assert nb_days(1900, 2) == 28
    assert nb_days(2000, 2) == 29
    assert nb_days(2023, 1) == 31
    assert nb_days(2023, 4) == 30


def test_nb_days_matches_stdlib():
    for y in (1999, 2000, 2023, 2024, 2100):
        for m in range(1, 13):
            assert nb_days(y, m) == calendar.monthrange(y, m)[1]


def test_nb_days_rejects_bad_month():
    with pytest.raises(ValueError):
        nb_days(2023, 0)
    with pytest.raises(ValueError):
        nb_days(2023, 13)


def test_valid():
    assert valid(Date(2024, 2, 29))
    assert not valid(Date(2023, 2, 29))
    assert not valid(Date(2023, 13, 1))
    assert not valid(Date(2023, 0, 1))
    assert not valid(Date(2023, 4, 31))
    assert not valid(Date(2023, 1, 0))


# --- ordering ----------------------------------------------------------------


def test_compare():
    assert compare(Date(2023, 5, 1), Date(2023, 5, 2)) == LT
    assert compare(Date(2023, 5, 1), Date(2023, 5, 1)) == EQ
    assert compare(Date(2024, 1, 1), Date(2023, 12, 31)) == GT
    # dataclass ordering agrees
    assert Date(1999, 12, 31) < Date(2000, 1, 1)


# --- month shifts ------------------------------------------------------------


@pytest.mark.parametrize(
    "start,n,expected",
    [
        (Date(2023, 1, 31), 1, Date(2023, 2, 28)),  # round-down clamp
        (Date(2024, 1, 31), 1, Date(2024, 2, 29)),
        (Date(2023, 3, 31), -1, Date(2023, 2, 28)),
        (Date(2023, 1, 15), 12, Date(2024, 1, 15)),
        (Date(2023, 1, 15), -13, Date(2021, 12, 15)),
        (Date(2000, 1, 1), 0, Date(2000, 1, 1)),
        (Date(2023, 10, 31), 13, Date(2024, 11, 30)),
    ],
)
def test_add_months(start, n, expected):
    assert add_months(start, n) == expected


# --- epoch conversions -------------------------------------------------------


@pytest.mark.parametrize(
    "date,delta",
    [
        (Date(2000, 3, 1), 0),
        (Date(2000, 3, 2), 1),
        (Date(2000, 2, 29), -1),
        (Date(2004, 3, 1), 1461),  # one full leap cycle
        (Date(1995, 3, 1), -1827),  # negative side: 5*365 + 2 leap days
        (Date(1900, 3, 1), -36525),
        (Date(2100, 2, 28), 36523),
        (Date(2000, 1, 1), -60),
        (Date(1970, 1, 1), -11017),  # Unix epoch
    ],
)
def test_epoch_anchors(date, delta):
    assert to_epoch_days(date) == delta
    assert from_epoch_days(delta) == date


def test_epoch_matches_stdlib_sampled():
    rng = random.Random(7)
    for _ in range(3000):
        o = rng.randrange(1, datetime.date.max.toordinal() + 1)
        sd = datetime.date.fromordinal(o)
        d = Date(sd.year, sd.month, sd.day)
        assert to_epoch_days(d) == o - _EPOCH_ORDINAL
        assert from_epoch_days(o - _EPOCH_ORDINAL) == d


def test_epoch_roundtrip_exhaustive_default_bounds():
    lo = to_epoch_days(DEFAULT_LB)
    hi = to_epoch_days(DEFAULT_UB)
    assert (lo, hi) == (-36525, 36523)
    prev = None
    for delta in range(lo, hi + 1):
        d = from_epoch_days(delta)
        assert valid(d)
        assert to_epoch_days(d) == delta
        if prev is not None:
            assert prev < d
        prev = d


def test_add_days():
    assert add_days(Date(2023, 2, 28), 1) == Date(2023, 3, 1)
    assert add_days(Date(2024, 2, 28), 1) == Date(2024, 2, 29)
    assert add_days(Date(2000, 1, 1), -1) == Date(1999, 12, 31)
    assert add_days(Date(2000, 3, 1), 365) == Date(2001, 3, 1)


# --- period arithmetic -------------------------------------------------------


def test_add_period_examples():
    # leap-day shift: months leg lands on Feb 28 of the non-leap year
    assert add_period(Date(2000, 2, 29), Period(1, 0, 0)) == Date(2001, 2, 28)
    # months first, then days
    assert add_period(Date(2023, 1, 31), Period(0, 1, 1)) == Date(2023, 3, 1)
    assert add_period(Date(2023, 1, 31), Period(0, 0, 32)) == Date(2023, 3, 4)
    assert add_period(Date(2026, 9, 30), Period(0, -18, 0)) == Date(2025, 3, 30)
    assert add_period(Date(2023, 5, 10), Period(0, 0, 0)) == Date(2023, 5, 10)


def test_period_ops():
    assert period_add(Period(1, 2, 3), Period(-1, 0, 4)) == Period(0, 2, 7)
    assert period_scale(3, Period(9, 4, 4)) == Period(27, 12, 12)
    assert period_neg(Period(1, -2, 3)) == Period(-1, 2, -3)


# --- alpha/beta month-count representation ----------------------------------


@pytest.mark.parametrize(
    "date,ab",
    [
        (Date(2000, 3, 1), (0, 0)),
        (Date(2000, 5, 6), (2, 5)),
        (Date(1999, 12, 31), (-3, 30)),
        (Date(2000, 1, 1), (-2, 0)),
        (Date(2001, 2, 28), (11, 27)),
        (Date(1900, 3, 1), (-1200, 0)),
        (Date(2100, 2, 28), (1199, 27)),
    ],
)
def test_alpha_beta_anchors(date, ab):
    assert to_alpha_beta(date) == ab
    assert from_alpha_beta(*ab) == date


def test_from_alpha_beta_rejects_bad_beta():
    with pytest.raises(ValueError):
        from_alpha_beta(11, 28)  # Feb 2001 has 28 days -> beta max 27
    with pytest.raises(ValueError):
        from_alpha_beta(0, -1)


def test_month_tables():
    assert len(DIM48) == 48 and len(DBM48) == 48
    assert DIM48[0] == 31  # March 2000
    assert DIM48[2] == 31  # May 2000
    assert DBM48[2] == 61  # 31 (Mar) + 30 (Apr)
    assert DBM48[0] == 0
    assert DIM48[47] == 29  # Feb 2004, last month of the cycle
    assert sum(DIM48) == 1461
    for i in range(1, 48):
        assert DBM48[i] == DBM48[i - 1] + DIM48[i - 1]


def test_tables_match_oracle_over_cycle():
    # each month of the cycle: table row equals nb_days / cumulative offset
    for i in range(48):
        y = 2000 + (i + 2) // 12
        m = (i + 2) % 12 + 1
        assert DIM48[i] == nb_days(y, m)
        first = Date(y, m, 1)
        assert to_epoch_days(first) == DBM48[i]


# --- bounds ------------------------------------------------------------------


def test_default_bounds():
    assert DEFAULT_LB == Date(1900, 3, 1)
    assert DEFAULT_UB == Date(2100, 2, 28)
    assert DEFAULT_BOUNDS.size() == 73049
    assert DEFAULT_BOUNDS.contains(Date(2000, 2, 29))
    assert not DEFAULT_BOUNDS.contains(Date(2100, 3, 1))
    assert DEFAULT_BOUNDS.within_default()


def test_bounds_validation():
    with pytest.raises(ValueError):
        Bounds(Date(2050, 1, 1), Date(2049, 1, 1))
    with pytest.raises(ValueError):
        Bounds(Date(2023, 2, 29), Date(2049, 1, 1))
    b = Bounds(Date(1800, 1, 1), Date(2200, 1, 1))
    assert not b.within_default()


# --- ISO formatting ----------------------------------------------------------


@pytest.mark.parametrize(
    "date,text",
    [
        (Date(2023, 5, 7), "2023-05-07"),
        (Date(-44, 3, 15), "-0044-03-15"),
        (Date(44, 3, 15), "0044-03-15"),
        (Date(12345, 1, 2), "12345-01-02"),
        (Date(0, 1, 1), "0000-01-01"),
    ],
)
def test_isoformat_roundtrip(date, text):
    assert date.isoformat() == text
    assert parse_iso_date(text) == date


def test_parse_iso_rejects_garbage():
    for bad in ("2023-5-07", "20230507", "2023/05/07", "", "date", "2023-05-07x"):
        with pytest.raises(ValueError):
            parse_iso_date(bad)


# --- properties --------------------------------------------------------------

dates = st.builds(
    lambda y, m, d: Date(y, m, min(d, nb_days(y, m))),
    st.integers(-9999, 9999),
    st.integers(1, 12),
    st.integers(1, 31),
)
periods = st.builds(
    Period, st.integers(-500, 500), st.integers(-600, 600), st.integers(-10000, 10000)
)


@given(dates, periods)
@settings(max_examples=300)
def test_closure(d, p):
    assert valid(add_period(d, p))


@given(dates)
@settings(max_examples=300)
def test_epoch_roundtrip_property(d):
    assert from_epoch_days(to_epoch_days(d)) == d


@given(dates)
@settings(max_examples=300)
def test_alpha_beta_roundtrip_property(d):
    a, b = to_alpha_beta(d)
    assert from_alpha_beta(a, b) == d


@given(dates, st.integers(-400, 400))
@settings(max_examples=300)
def test_add_months_lands_in_target_month(d, n):
    r = add_months(d, n)
    assert valid(r)
    t = d.month - 1 + n
    assert (r.year, r.month) == (d.year + t // 12, t % 12 + 1)
    assert r.day == min(d.day, nb_days(r.year, r.month))


@given(dates, st.integers(-100000, 100000))
@settings(max_examples=300)
def test_add_days_consistent_with_epoch(d, n):
    assert to_epoch_days(add_days(d, n)) == to_epoch_days(d) + n


@given(dates, dates)
@settings(max_examples=300)
def test_compare_matches_epoch_order(a, b):
    lhs = compare(a, b)
    da, db = to_epoch_days(a), to_epoch_days(b)
    assert lhs == (LT if da < db else GT if da > db else EQ)
