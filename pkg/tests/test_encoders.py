"""Encoder tests: the five strategies against the concrete calendar oracle.

Solver-backed cases keep problems small; the broad formula-vs-oracle ground
coverage lives in the vectorized mirror sweep at the bottom.
"""

import random

import numpy as np
import pytest

from calsat.backend import SolverBackend, Status
from calsat.encoders import (
    ALL_STRATEGIES,
    EncodingError,
    ProblemEncoder,
    Strategy,
    decode_model,
    encode,
    extend_env,
)
from calsat.gregorian import (
    DEFAULT_BOUNDS,
    Bounds,
    Date,
    Period,
    add_period,
    from_alpha_beta,
    to_alpha_beta,
    to_epoch_days,
)
from calsat.parser import problem_from_dict
from calsat.syntax import DateAdd
from calsat.terms import eval_term, eval_term_vec


def _problem(constraints, declarations=None):
    return problem_from_dict(
        {"declarations": declarations or {}, "constraints": list(constraints)})


def _check(problem, strategy, backend, bounds=DEFAULT_BOUNDS):
    inst = encode(problem, strategy, bounds=bounds, backend=backend)
    return inst, inst.session.check()


def test_strategy_names():
    for s in ALL_STRATEGIES:
        assert Strategy.from_name(s.value) is s
        assert str(s) == s.value
    with pytest.raises(EncodingError, match="unknown strategy"):
        Strategy.from_name("epoch2")


@pytest.mark.parametrize("strategy", ALL_STRATEGIES, ids=str)
def test_period_arithmetic_examples(strategy, backend):
    # clamp on month add, leap day, backward day step; all oracle-checked
    cases = [
        (Date(2017, 12, 30), Period(2, 2, 1), Date(2020, 3, 1)),
        (Date(2020, 2, 29), Period(1, 1, 0), Date(2021, 3, 29)),
        (Date(2000, 1, 30), Period(0, 1, 0), Date(2000, 2, 29)),
        (Date(2020, 3, 1), Period(0, 0, -1), Date(2020, 2, 29)),
    ]
    texts = []
    for start, per, expected in cases:
        assert add_period(start, per) == expected  # the frozen values are real
        op = "-" if per.days < 0 else "+"
        shown = Period(per.years, per.months, abs(per.days))
        texts.append(
            f"Date({start.year}, {start.month}, {start.day}) {op} "
            f"Period({shown.years}, {shown.months}, {shown.days}) == "
            f"Date({expected.year}, {expected.month}, {expected.day})")
    _, status = _check(_problem(texts), strategy, backend)
    assert status is Status.SAT

    flipped = texts[0].replace("==", "!=")
    _, status = _check(_problem([flipped]), strategy, backend)
    assert status is Status.UNSAT


@pytest.mark.parametrize("strategy", ALL_STRATEGIES, ids=str)
def test_day_steps_cross_boundaries(strategy, backend):
    probe = _problem([
        "Date(2004, 2, 28) + Period(0, 0, 2) == Date(2004, 3, 1)",
        "Date(2001, 3, 1) - Period(0, 0, 1) == Date(2001, 2, 28)",
        "Date(1999, 12, 31) + Period(0, 0, 1) == Date(2000, 1, 1)",
    ])
    _, status = _check(probe, strategy, backend)
    assert status is Status.SAT


@pytest.mark.parametrize(
    "strategy",
    [s for s in ALL_STRATEGIES if s is not Strategy.NAIVE],
    ids=str)
def test_whole_leap_cycle_day_offset(strategy, backend):
    # 1461 days = one whole four-year cycle from the epoch (naive would
    # unroll each day, so it sits this one out)
    assert to_epoch_days(Date(2004, 3, 1)) == 1461
    probe = _problem(
        ["Date(2000, 3, 1) + Period(0, 0, 1461) == Date(2004, 3, 1)"])
    _, status = _check(probe, strategy, backend)
    assert status is Status.SAT


@pytest.mark.parametrize("strategy", ALL_STRATEGIES, ids=str)
def test_month_and_day_order_matters(strategy, backend):
    # +1 month then +1 day lands on 2020-03-01, the other order on
    # 2020-02-29, so asserting equality must be unsatisfiable
    a = add_period(add_period(Date(2020, 1, 30), Period(0, 1, 0)), Period(0, 0, 1))
    b = add_period(add_period(Date(2020, 1, 30), Period(0, 0, 1)), Period(0, 1, 0))
    assert (a, b) == (Date(2020, 3, 1), Date(2020, 2, 29))
    probe = _problem([
        "(Date(2020, 1, 30) + Period(0, 1, 0)) + Period(0, 0, 1) == "
        "(Date(2020, 1, 30) + Period(0, 0, 1)) + Period(0, 1, 0)"])
    _, status = _check(probe, strategy, backend)
    assert status is Status.UNSAT


@pytest.mark.parametrize("strategy", ALL_STRATEGIES, ids=str)
def test_validity_rules_out_feb_30(strategy, backend):
    probe = _problem(["a.month == 2", "a.day == 30"], {"a": "Date"})
    _, status = _check(probe, strategy, backend)
    assert status is Status.UNSAT


@pytest.mark.parametrize("strategy", ALL_STRATEGIES, ids=str)
def test_bounds_constrain_every_date(strategy, backend):
    window = Bounds(Date(2020, 1, 1), Date(2020, 12, 31))
    probe = _problem(["a < Date(2020, 1, 5)"], {"a": "Date"})
    inst, status = _check(probe, strategy, backend, bounds=window)
    assert status is Status.SAT
    got = decode_model(inst, inst.session.model())["a"]
    assert Date(2020, 1, 1) <= got < Date(2020, 1, 5)

    probe = _problem(["a > Date(2020, 12, 31)"], {"a": "Date"})
    _, status = _check(probe, strategy, backend, bounds=window)
    assert status is Status.UNSAT


def test_table_strategy_needs_default_bounds():
    wide = Bounds(Date(1799, 1, 1), Date(2200, 1, 1))
    with pytest.raises(EncodingError, match="alpha-beta-table requires"):
        encode(_problem(["True"], {"a": "Date"}), Strategy.ALPHA_BETA_TABLE,
               bounds=wide)


@pytest.mark.parametrize(
    "strategy",
    [s for s in ALL_STRATEGIES if s is not Strategy.ALPHA_BETA_TABLE],
    ids=str)
def test_wide_bounds_century_rule(strategy, backend):
    # 1900 is not a leap year: the century correction only matters outside
    # the default window, so solve one instance there
    wide = Bounds(Date(1890, 1, 1), Date(2210, 1, 1))
    probe = _problem([
        "Date(1900, 2, 28) + Period(0, 0, 1) == Date(1900, 3, 1)",
        "Date(2200, 2, 28) + Period(0, 0, 1) == Date(2200, 3, 1)",
        "a == Date(1899, 12, 31)",
    ], {"a": "Date"})
    inst, status = _check(probe, strategy, backend, bounds=wide)
    assert status is Status.SAT
    assert decode_model(inst, inst.session.model())["a"] == Date(1899, 12, 31)


def test_epoch_delta_anchors(backend):
    # the window endpoints, straight out of the raw model
    probe = _problem(["a == Date(1900, 3, 1)", "b == Date(2100, 2, 28)"],
                     {"a": "Date", "b": "Date"})
    inst, status = _check(probe, Strategy.EPOCH, backend)
    assert status is Status.SAT
    raw = inst.session.model()
    assert raw["a.delta"] == -36525
    assert raw["b.delta"] == 36523


def test_const_representations():
    prob = _problem(["True"], {"a": "Date"})
    enc = ProblemEncoder(prob, Strategy.ALPHA_BETA)
    r = enc._ops.const(Date(2000, 5, 6))
    assert (r.alpha.value, r.beta.value) == (2, 5)
    assert enc._ops.decode(r, {}) == Date(2000, 5, 6)
    # negative alpha: three months before the epoch, last day of the month
    assert from_alpha_beta(-3, 30) == Date(1999, 12, 31)

    enc = ProblemEncoder(prob, Strategy.EPOCH)
    assert enc._ops.const(Date(2000, 3, 1)).delta.value == 0

    enc = ProblemEncoder(prob, Strategy.HYBRID)
    r = enc._ops.const(Date(2000, 3, 1))
    assert r.ymd_ok and r.delta_ok and r.delta.value == 0


def test_zero_period_is_identity():
    prob = _problem(["True"], {"a": "Date"})
    for strategy in ALL_STRATEGIES:
        enc = ProblemEncoder(prob, strategy)
        r = enc._ops.fresh("a")
        assert enc._ops.add_period(r, Period(0, 0, 0)) is r


def test_hybrid_flag_discipline():
    prob = _problem(["True"], {"a": "Date"})
    enc = ProblemEncoder(prob, Strategy.HYBRID)
    ops = enc._ops

    r = ops.fresh("a")
    assert (r.ymd_ok, r.delta_ok) == (True, False)

    day = ops.add_period(r, Period(0, 0, 3))
    assert (day.ymd_ok, day.delta_ok) == (False, True)
    assert r.delta_ok  # fixing the operand is recorded on the operand

    month = ops.add_period(r, Period(0, 1, 0))
    assert (month.ymd_ok, month.delta_ok) == (True, False)

    # field access on an offset-only repr materializes the triple once
    n_defs = len(enc.mirror_defs)
    ops.field(day, "month")
    assert day.ymd_ok and len(enc.mirror_defs) > n_defs
    n_defs = len(enc.mirror_defs)
    ops.field(day, "year")
    assert len(enc.mirror_defs) == n_defs

    # comparing mixed views falls back to the offset side
    mixed = ops.add_period(month, Period(0, 0, 1))
    ops.compare("<", month, mixed)
    assert month.delta_ok


def test_dumps_are_deterministic():
    source = {
        "declarations": {"a": "Date", "b": "Date", "n": "Int"},
        "constraints": [
            "b == a + Period(1, -2, 10)",
            "a.year + n == 2021",
            "a < b",
        ],
    }
    for strategy in ALL_STRATEGIES:
        dumps = {encode(problem_from_dict(source), strategy).dump()
                 for _ in range(3)}
        assert len(dumps) == 1


def test_decoded_sorts(backend):
    probe = _problem(["n >= 4", "p", "d > Date(1999, 12, 31)"],
                     {"n": "Int", "p": "Bool", "d": "Date"})
    for strategy in ALL_STRATEGIES:
        inst, status = _check(probe, strategy, backend)
        assert status is Status.SAT
        m = decode_model(inst, inst.session.model())
        assert isinstance(m["n"], int) and m["n"] >= 4
        assert m["p"] is True
        assert isinstance(m["d"], Date) and m["d"] > Date(1999, 12, 31)


# --- mirror evaluation: encoder formulas replayed without the solver ------------


MIRROR_PERIODS = [
    Period(0, 0, 7), Period(0, 0, -7), Period(0, 2, 0), Period(-1, 0, 0),
    Period(3, -1, 12), Period(-2, 4, -25), Period(0, 0, 40), Period(0, -11, 1),
]


def _base_env(strategy, name, dates):
    if strategy in (Strategy.NAIVE, Strategy.HYBRID):
        return {
            f"{name}.y": np.array([d.year for d in dates], dtype=np.int64),
            f"{name}.m": np.array([d.month for d in dates], dtype=np.int64),
            f"{name}.d": np.array([d.day for d in dates], dtype=np.int64),
        }
    if strategy is Strategy.EPOCH:
        return {f"{name}.delta": np.array([to_epoch_days(d) for d in dates],
                                          dtype=np.int64)}
    pairs = [to_alpha_beta(d) for d in dates]
    return {
        f"{name}.alpha": np.array([a for a, _ in pairs], dtype=np.int64),
        f"{name}.beta": np.array([b for _, b in pairs], dtype=np.int64),
    }


@pytest.mark.parametrize("strategy", ALL_STRATEGIES, ids=str)
def test_mirror_matches_oracle(strategy):
    rng = random.Random(20240229)
    lo, hi = to_epoch_days(DEFAULT_BOUNDS.lb), to_epoch_days(DEFAULT_BOUNDS.ub)
    from calsat.gregorian import from_epoch_days
    dates = [from_epoch_days(rng.randint(lo, hi)) for _ in range(2000)]

    for per in MIRROR_PERIODS:
        if strategy is Strategy.NAIVE and abs(per.days) > 40:
            continue
        prob = _problem(
            [f"b == a + Period({per.years}, {per.months}, {per.days})"],
            {"a": "Date", "b": "Date"})
        enc = ProblemEncoder(prob, strategy)
        inst = enc.encode()
        add_node = next(e for e in inst.reprs if isinstance(e, DateAdd))
        result = inst.reprs[add_node]
        fields = [enc._ops.field(result, f) for f in ("year", "month", "day")]

        # the replay walks every definition, including ones hanging off b,
        # so b needs base values too (they don't feed the checked fields)
        env = extend_env(inst.mirror_defs,
                         {**_base_env(strategy, "a", dates),
                          **_base_env(strategy, "b", dates)})
        got = [eval_term_vec(t, env) for t in fields]

        expected = [add_period(d, per) for d in dates]
        in_window = np.array([DEFAULT_BOUNDS.contains(e) for e in expected])
        assert in_window.sum() > len(dates) * 9 // 10  # the sweep has teeth
        for vals, pick in zip(got, (lambda e: e.year, lambda e: e.month,
                                    lambda e: e.day)):
            want = np.array([pick(e) for e in expected], dtype=np.int64)
            assert np.array_equal(np.asarray(vals)[in_window], want[in_window])


def test_extend_env_scalar_vector_parity():
    # the table-index mirror and every definition must agree between the
    # bisect (scalar) and searchsorted (vector) paths
    prob = _problem(["b == a + Period(0, 1, 17)"], {"a": "Date", "b": "Date"})
    enc = ProblemEncoder(prob, Strategy.ALPHA_BETA_TABLE)
    inst = enc.encode()

    rng = random.Random(7)
    lo, hi = to_epoch_days(DEFAULT_BOUNDS.lb), to_epoch_days(DEFAULT_BOUNDS.ub)
    from calsat.gregorian import from_epoch_days
    dates = [from_epoch_days(rng.randint(lo, hi)) for _ in range(100)]

    vec_env = extend_env(inst.mirror_defs,
                         _base_env(Strategy.ALPHA_BETA_TABLE, "a", dates))
    for k, date in enumerate(dates):
        alpha, beta = to_alpha_beta(date)
        scalar_env = extend_env(inst.mirror_defs,
                                {"a.alpha": alpha, "a.beta": beta})
        for name, column in vec_env.items():
            if name in ("a.alpha", "a.beta"):
                continue
            assert int(np.asarray(column)[k]) == int(scalar_env[name]), name
