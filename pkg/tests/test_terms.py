import random

import numpy as np
import pytest

from calsat.terms import (
    BOOL,
    INT,
    EvalError,
    TermError,
    TermPool,
    euclid_div,
    euclid_mod,
    eval_term,
    eval_term_vec,
    to_smt,
)

from _termgen import TermGen


@pytest.fixture()
def pool():
    return TermPool()


def test_euclidean_div_mod_convention():
    # remainder always in [0, |n|), matching SMT-LIB div/mod
    cases = [
        (7, 2, 3, 1),
        (-7, 2, -4, 1),
        (7, -2, -3, 1),
        (-7, -2, 4, 1),
        (-1, 12, -1, 11),
        (1460, 1461, 0, 1460),
        (1461, 1461, 1, 0),
        (-1, 1461, -1, 1460),
        (0, 5, 0, 0),
    ]
    for a, n, q, r in cases:
        assert (euclid_div(a, n), euclid_mod(a, n)) == (q, r)
        assert n * euclid_div(a, n) + euclid_mod(a, n) == a


def test_constructor_examples(pool):
    assert eval_term(pool.mod_const(pool.int_const(-1), 12), {}) == 11
    assert eval_term(pool.ite(pool.bool_const(True), 1, 2), {}) == 1
    assert eval_term(pool.div_const(pool.int_const(1460), 1461), {}) == 0
    assert eval_term(pool.div_const(pool.int_const(1461), 1461), {}) == 1


def test_interning(pool):
    x = pool.var("x", INT)
    a = pool.add(x, 1)
    b = pool.add(x, 1)
    assert a is b
    assert pool.add(x, 2) is not a
    assert pool.var("x", INT) is x


def test_sort_checks(pool):
    x = pool.var("x", INT)
    b = pool.var("b", BOOL)
    with pytest.raises(TermError):
        pool.add(x, b)
    with pytest.raises(TermError):
        pool.and_(x, b)
    with pytest.raises(TermError):
        pool.div_const(x, 0)
    with pytest.raises(TermError):
        pool.mod_const(x, 0)
    with pytest.raises(TermError):
        pool.not_(x)
    with pytest.raises(TermError):
        pool.select(x, 0)
    with pytest.raises(TermError):
        pool.var("y", "Real")


def test_smt_rendering(pool):
    x = pool.var("x", INT)
    t = pool.ite(pool.lt(x, pool.int_const(-3)),
                 pool.mul_const(-2, x), pool.mod_const(x, 12))
    assert to_smt(t) == "(ite (< x (- 3)) (* (- 2) x) (mod x 12))"
    assert to_smt(pool.neq(x, 0)) == "(distinct x 0)"
    assert to_smt(pool.implies(pool.bool_const(True), pool.bool_const(False))) \
        == "(=> true false)"
    tab = pool.const_array_from_table("dim", (31, 28))
    assert to_smt(pool.select(tab, pool.int_const(1))) == "(select dim 1)"
    assert to_smt(pool.and_(pool.le(0, x), pool.le(x, 9), pool.neq(x, 5))) \
        == "(and (<= 0 x) (<= x 9) (distinct x 5))"


def test_and_or_degenerate_forms(pool):
    x = pool.var("b", BOOL)
    assert eval_term(pool.and_(), {}) is True
    assert eval_term(pool.or_(), {}) is False
    assert pool.and_(x) is x
    assert pool.or_([x]) is x  # list argument form


def test_eval_errors(pool):
    x = pool.var("x", INT)
    with pytest.raises(EvalError, match="no value"):
        eval_term(x, {})
    tab = pool.const_array_from_table("t", (1, 2, 3))
    bad = pool.select(tab, pool.int_const(3))
    with pytest.raises(EvalError, match="outside table"):
        eval_term(bad, {})


def test_min_helper(pool):
    x = pool.var("x", INT)
    t = pool.min_(x, 10)
    assert eval_term(t, {"x": 3}) == 3
    assert eval_term(t, {"x": 30}) == 10


def test_scalar_and_vector_eval_agree():
    rng = random.Random(20260814)
    pool = TermPool()
    gen = TermGen(pool, rng)
    n_envs = 7
    envs = [gen.assignment() for _ in range(n_envs)]
    vec_env = {
        name: np.array([env[name] for env in envs],
                       dtype=np.int64 if isinstance(envs[0][name], int)
                       and not isinstance(envs[0][name], bool) else bool)
        for name in envs[0]
    }
    for _ in range(500):
        t = gen.term(depth=4)
        vec = eval_term_vec(t, vec_env)
        for j, env in enumerate(envs):
            expected = eval_term(t, env)
            got = vec[j] if vec.ndim else vec[()]
            assert bool(got) == expected if isinstance(expected, bool) \
                else int(got) == expected, to_smt(t)


def test_vector_eval_euclidean_negatives():
    pool = TermPool()
    x = pool.var("x", INT)
    xs = np.arange(-50, 50, dtype=np.int64)
    for n in (12, 1461, -2, -5, 7):
        div = eval_term_vec(pool.div_const(x, n), {"x": xs})
        mod = eval_term_vec(pool.mod_const(x, n), {"x": xs})
        for i, a in enumerate(range(-50, 50)):
            assert div[i] == euclid_div(a, n)
            assert mod[i] == euclid_mod(a, n)
