from collections import Counter

import pytest
from hypothesis import given, settings
from hypothesis import strategies as s

from depsess import dynamics as dy
from depsess import statics as st


def test_rho_pair_of_resources():
    assert dy.rho(dy.Pair(dy.Resource("r1"), dy.Resource("r2"))) == Counter({("res", "r1"): 1, ("res", "r2"): 1})


def test_rho_identity_is_empty():
    assert dy.rho(dy.Lam("x", dy.Var("x"))) == Counter()


def test_rho_if_counts_one_branch():
    c = dy.Endpoint(4, 0)
    e = dy.If(dy.Var("b"), dy.Cst("close", (c,)), dy.Cst("wait", (c,)))
    assert dy.rho(e) == Counter({("ch", 4, 0): 1})


def test_subst_examples():
    v = dy.IntV(7)
    assert dy.subst(dy.Var("x"), {"x": dy.Unit()}) == dy.Unit()
    assert dy.subst(dy.Lam("y", dy.Var("x")), {"x": v}) == dy.Lam("y", v)
    assert dy.subst(dy.Lam("x", dy.Var("x")), {"x": v}) == dy.Lam("x", dy.Var("x"))
    assert dy.subst(dy.App(dy.Var("x"), dy.Var("x")), {"x": v}) == dy.App(v, v)


def test_decompose_examples():
    d = dy.decompose(dy.App(dy.Lam("x", dy.Var("x")), dy.Unit()))
    assert isinstance(d, dy.Redex) and d.ctx == ()
    d = dy.decompose(dy.Cst("send", (dy.Endpoint(3, 1), dy.IntV(5))))
    assert isinstance(d, dy.Blocked) and d.focus.name == "send" and d.focus.args[0].chan == 3
    assert isinstance(dy.decompose(dy.Unit()), dy.IsValue)


def test_step_local_examples():
    assert dy.step_local(dy.If(dy.BoolV(True), dy.IntV(1), dy.IntV(2))) == dy.IntV(1)
    ident = dy.Lam("x", dy.Var("x"))
    assert dy.step_local(dy.ForallElim(dy.ForallIntro("a", st.INT, ident), st.IntLit(1))) == ident
    assert dy.step_local(dy.Cst("=", (dy.IntV(5), dy.IntV(5)))) == dy.BoolV(True)
    assert dy.step_local(dy.Unit()) is None
    assert dy.step_local(dy.Cst("recv", (dy.Endpoint(1, 0),))) is None


def test_marker_eliminations():
    v = dy.IntV(3)
    assert dy.step_local(dy.GuardElim(dy.GuardIntro(v))) == v
    assert dy.step_local(dy.LetExists("a", "x", dy.ExistsIntro(v, witness=st.IntLit(3)), dy.Var("x"))) == v
    assert dy.step_local(dy.LetAssert("x", dy.AssertIntro(v), dy.Var("x"))) == v
    assert dy.step_local(dy.LetPair("x", "y", dy.Pair(v, dy.Unit()), dy.Var("x"))) == v


def test_stuck_term():
    with pytest.raises(dy.StuckTerm):
        dy.step_local(dy.If(dy.IntV(1), dy.Unit(), dy.Unit()))


def test_erase_examples():
    ch = dy.Var("ch")
    e = dy.Cst("recv", (dy.Cst("exify", (ch,)),))
    assert dy.erase_proofs(e) == dy.Cst("recv", (ch,))
    v = dy.Lam("x", dy.Var("x"))
    assert dy.erase_proofs(dy.ForallElim(dy.ForallIntro("a", st.INT, v), st.IntLit(0))) == v


# ---------------------------------------------------------------- random closed terms

scalars = s.one_of(s.integers(-3, 3).map(dy.IntV), s.booleans().map(dy.BoolV), s.just(dy.Unit()))

values = s.recursive(
    s.one_of(
        s.integers(-3, 3).map(dy.IntV),
        s.booleans().map(dy.BoolV),
        s.just(dy.Unit()),
        s.integers(1, 3).map(lambda c: dy.Endpoint(c, 0)),
        s.sampled_from(["r1", "r2"]).map(dy.Resource),
    ),
    lambda v: s.tuples(v, v).map(lambda p: dy.Pair(*p)),
    max_leaves=4,
)


def terms():
    return s.recursive(
        values,
        lambda t: s.one_of(
            s.tuples(t, t).map(lambda p: dy.Pair(*p)),
            # projections only of unrestricted pairs, as typing demands
            s.tuples(scalars, scalars).map(lambda p: dy.Fst(dy.Pair(*p))),
            s.tuples(scalars, scalars).map(lambda p: dy.Snd(dy.Pair(*p))),
            # both arms hold the same resources (the side condition of ty-if)
            s.tuples(s.booleans(), t, scalars).map(lambda p: dy.If(dy.BoolV(p[0]), p[1], dy.Pair(p[2], p[1]))),
            s.tuples(t, t).map(lambda p: dy.App(dy.Lam("x", dy.Pair(dy.Var("x"), p[1])), p[0])),
            t.map(lambda e: dy.GuardElim(dy.GuardIntro(e))),
            t.map(lambda e: dy.LetExists("a", "x", dy.ExistsIntro(e, witness=st.IntLit(0)), dy.Var("x"))),
            s.tuples(t, t).map(lambda p: dy.LetPair("x", "y", dy.Pair(*p), dy.Pair(dy.Var("y"), dy.Var("x")))),
            s.tuples(t, values).map(lambda p: dy.Cst("send", (dy.Pair(p[0], dy.Unit()), p[1]))),
            s.tuples(s.integers(-3, 3), s.integers(-3, 3)).map(lambda p: dy.Cst("+", (dy.IntV(p[0]), dy.IntV(p[1])))),
        ),
        max_leaves=10,
    )


@settings(max_examples=300, deadline=None)
@given(terms())
def test_plug_decompose_roundtrip(e):
    d = dy.decompose(e)
    if isinstance(d, dy.IsValue):
        assert d.value == e
    else:
        assert dy.plug(d.ctx, d.focus) == e


@settings(max_examples=300, deadline=None)
@given(terms())
def test_step_local_keeps_resources(e):
    nxt = dy.step_local(e)
    if nxt is not None:
        assert dy.rho(nxt) == dy.rho(e)


@settings(max_examples=300, deadline=None)
@given(terms())
def test_step_is_deterministic(e):
    try:
        a = dy.step_local(e)
        b = dy.step_local(e)
    except dy.StuckTerm:
        return
    assert a == b


@settings(max_examples=300, deadline=None)
@given(terms())
def test_erasure_keeps_resources(e):
    assert dy.rho(dy.erase_proofs(e)) == dy.rho(e)


@settings(max_examples=200, deadline=None)
@given(terms())
def test_erasure_is_idempotent(e):
    once = dy.erase_proofs(e)
    assert dy.erase_proofs(once) == once
