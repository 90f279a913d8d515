import random

import pytest
from hypothesis import given, settings
from hypothesis import strategies as s

import gen
from depsess import statics as st
from depsess.constraints import (
    BACKEND,
    ConstraintStore,
    Invalid,
    Unsupported,
    Valid,
    entails,
    falsifies,
    oracle_entails,
)
from depsess.constraints import _kernel_py, kernel
from depsess.statics import BOOL, INT

r, r0, n, m = (st.FVar(v) for v in ("r", "r0", "n", "m"))
I = st.IntLit


def C(*a):
    return st.C(*a)


EXAMPLES = [
    (ConstraintStore.of([C("or", st.eq(r, I(0)), st.eq(r, I(1))), C("!=", r, I(1))], {"r": INT}), st.eq(r, I(0)), Valid),
    (ConstraintStore.of([C(">=", n, I(0)), C(">", n, I(0))], {"n": INT}), C(">=", C("-", n, I(1)), I(0)), Valid),
    (ConstraintStore.of([], {"m": INT, "n": INT}), st.eq(m, n), Invalid),
    (ConstraintStore.of([]), st.TRUE, Valid),
    (ConstraintStore.of([]), st.FALSE, Invalid),
]


@pytest.mark.parametrize("store, goal, verdict", EXAMPLES)
def test_examples(store, goal, verdict):
    got = entails(store, goal)
    assert isinstance(got, verdict)
    assert isinstance(oracle_entails(store, goal, 8), verdict)
    if isinstance(got, Invalid) and got.witness:
        assert falsifies(store, goal, got.witness)


def test_countermodel_for_m_eq_n():
    got = entails(ConstraintStore.of([], {"m": INT, "n": INT}), st.eq(m, n))
    assert got.witness["m"] != got.witness["n"]


def test_integrality_matters():
    # 2n = 1 has a rational solution but no integer one
    store = ConstraintStore.of([st.eq(C("*", I(2), n), I(1))], {"n": INT})
    assert isinstance(entails(store, st.FALSE), Valid)
    # 3 <= 2n <= 3 likewise
    store = ConstraintStore.of([C("<=", I(3), C("*", I(2), n)), C("<=", C("*", I(2), n), I(3))], {"n": INT})
    assert isinstance(entails(store, st.FALSE), Valid)


def test_multiple_of_three_gap():
    # 1 <= 3(x - y) <= 2 is satisfiable over the rationals only
    x, y = st.FVar("x"), st.FVar("y")
    hyps = [
        C("<=", I(1), C("-", C("*", I(3), x), C("*", I(3), y))),
        C("<=", C("-", C("*", I(3), x), C("*", I(3), y)), I(2)),
    ]
    store = ConstraintStore.of(hyps, {"x": INT, "y": INT})
    assert isinstance(entails(store, st.FALSE), Valid)


def test_boolean_variables():
    b = st.FVar("b")
    store = ConstraintStore.of([b], {"b": BOOL})
    assert isinstance(entails(store, st.eq(b, st.TRUE)), Valid)
    assert isinstance(entails(ConstraintStore.of([], {"b": BOOL}), b), Invalid)


def test_nonlinear_is_unsupported():
    got = entails(ConstraintStore.of([], {"n": INT}), st.eq(C("*", n, n), I(4)))
    assert isinstance(got, Unsupported)
    assert "nonlinear" in got.reason


def test_backend_selected():
    assert BACKEND in ("cython", "python")


# ---------------------------------------------------------------- properties


@settings(max_examples=150, deadline=None)
@given(s.integers(0, 2**32))
def test_agrees_with_oracle(seed):
    store, goal = gen.stable_entailments(seed, 1)[0]
    a, b = entails(store, goal), oracle_entails(store, goal, 8)
    assert type(a) is type(b)


@settings(max_examples=150, deadline=None)
@given(s.integers(0, 2**32))
def test_countermodels_falsify(seed):
    store, goal = gen.entailment(random.Random(seed))
    got = entails(store, goal)
    if isinstance(got, Invalid):
        assert falsifies(store, goal, got.witness)


@settings(max_examples=100, deadline=None)
@given(s.integers(0, 2**32))
def test_monotone(seed):
    rng = random.Random(seed)
    store, goal = gen.entailment(rng)
    names = [v for v, _ in store.var_sorts]
    if isinstance(entails(store, goal), Valid):
        bigger = ConstraintStore.of(store.assumptions + (gen.prop(rng, names),), store.var_sorts)
        assert isinstance(entails(bigger, goal), Valid)


rows = s.lists(s.tuples(*[s.integers(-6, 6)] * 4), max_size=8)


@settings(max_examples=200, deadline=None)
@given(rows)
def test_tighten_backends_agree(rs):
    assert kernel.tighten(rs) == _kernel_py.tighten(rs)


@settings(max_examples=200, deadline=None)
@given(rows, s.integers(0, 2), s.booleans())
def test_shadow_backends_agree(rs, k, dark):
    assert sorted(kernel.shadow(rs, k, dark)) == sorted(_kernel_py.shadow(rs, k, dark))
