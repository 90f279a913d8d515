import pytest
from hypothesis import given, settings
from hypothesis import strategies as s

import duality
from conftest import checked
from depsess import dynamics as dy
from depsess import statics as st
from depsess.checker import TypingEnv, typecheck, typecheck_pool
from depsess.errors import (
    CannotInferStatics,
    EndpointMultiplicity,
    GuardNotEntailed,
    LinearityViolation,
)
from depsess.statics import INT
from depsess.syntax import print_term

S, C = st.S_ROLE, st.C_ROLE
I = st.IntLit


def chan_env(ty, **extra):
    return TypingEnv(delta={"ch": ty}, **extra)


@pytest.mark.parametrize("cell", list(duality.cells()), ids=lambda c: f"{c[0]}-role{c[1]}")
def test_duality_matrix(cell):
    head, role, dual, wrong, good, bad = cell
    assert good is None, f"{dual} rejected: {good}"
    assert isinstance(bad, GuardNotEntailed), f"{wrong} should fail its guard, got {bad!r}"


def test_recv_instantiates_by_matching():
    ty = st.chan(I(0), st.msg(I(1), st.C("int", I(5)), st.end(I(0))))
    got, used = typecheck(chan_env(ty), None, dy.Cst("recv", (dy.Var("ch"),)))
    assert got == st.C("ltup", st.C("int", I(5)), st.chan(I(0), st.end(I(0))))
    assert used == {"ch"}


def test_unify_gives_forall():
    pi = st.quan(INT, C, st.lam(INT, "n", lambda n: st.msg(C, st.C("int", n), st.end(C))))
    got, _ = typecheck(chan_env(st.chan(C, pi)), None, dy.Cst("unify", (dy.Var("ch"),)))
    assert st.family(got.name) == ("forall", (INT,))
    body = st.instantiate(got.args[0], I(3))
    assert st.beta_normalize(body) == st.chan(C, st.msg(C, st.C("int", I(3)), st.end(C)))


def test_close_needs_own_end():
    with pytest.raises(GuardNotEntailed):
        typecheck(chan_env(st.chan(I(0), st.end(I(1)))), None, dy.Cst("close", (dy.Var("ch"),)))


def test_send_with_symbolic_roles_reports_countermodel():
    r, r0 = st.FVar("r"), st.FVar("r0")
    env = chan_env(
        st.chan(r, st.msg(r0, st.C("int"), st.end(r0))),
        sigma={"r": INT, "r0": INT},
        props=(st.role_prop(r), st.role_prop(r0), st.C("!=", r, r0)),
    )
    with pytest.raises(GuardNotEntailed) as ei:
        typecheck(env, None, dy.Cst("send", (dy.Var("ch"), dy.IntV(1))))
    cm = ei.value.countermodel
    assert cm is not None and cm["r"] != cm["r0"] and {cm["r"], cm["r0"]} <= {0, 1}
    assert "countermodel" in ei.value.render()


def test_linear_identity():
    ty = st.C("-o", st.C("int"), st.C("int"))
    got, used = typecheck(TypingEnv(), None, dy.Lam("x", dy.Var("x")), ty)
    assert got == ty and used == set()


def test_linear_duplication_rejected():
    ty = st.chan(S, st.end(S))
    e = dy.Pair(dy.Var("ch"), dy.Var("ch"))
    with pytest.raises(LinearityViolation) as ei:
        typecheck(chan_env(ty), None, e)
    assert ei.value.rule == "ty-var-l"


def test_unrestricted_duplication_allowed():
    e = dy.Pair(dy.Var("x"), dy.Var("x"))
    got, _ = typecheck(TypingEnv(gamma={"x": st.C("int")}), None, e)
    assert got == st.C("tup", st.C("int"), st.C("int"))


def test_eq_test_consumes_its_endpoint():
    cp = checked("equal")
    fd = cp.program.fun_table()["eq_test"]
    equal = fd.params[0][1]
    got, used = typecheck(chan_env(equal), cp.funs, fd.body, st.UNIT)
    assert got == st.UNIT and used == {"ch"}


SKELETON = """(let ([ch ch])
  (let ([ch ch])
    (let ([(pair x ch) (recv ch)])
      (let ([(pair y ch) (recv ch)])
        (let ([ch (send ch (= x y))])
          (close ch))))))"""


def test_erased_eq_test_is_the_communication_skeleton():
    body = dy.erase_proofs(checked("equal").funs["eq_test"].body)
    assert print_term(body) == SKELETON


def test_cannot_infer_unannotated_lambda():
    with pytest.raises(CannotInferStatics):
        typecheck(TypingEnv(), None, dy.Lam("x", dy.Var("x")))


def test_pool_of_unit():
    assert typecheck_pool({0: dy.Unit()}, lambda c, r: None, set(), st.UNIT) == st.UNIT


def test_pool_endpoint_held_twice():
    ty = st.chan(S, st.end(S))
    threads = {0: dy.Unit(), 1: dy.Cst("close", (dy.Endpoint(3, 0),)), 2: dy.Cst("close", (dy.Endpoint(3, 0),))}
    with pytest.raises(EndpointMultiplicity) as ei:
        typecheck_pool(threads, lambda c, r: ty, {(3, 0), (3, 1)}, st.UNIT)
    assert ei.value.rule == "ty-pool"


def test_pool_endpoint_missing():
    ty = st.chan(S, st.end(S))
    with pytest.raises(EndpointMultiplicity):
        typecheck_pool({0: dy.Cst("close", (dy.Endpoint(3, 0),))}, lambda c, r: ty, {(3, 0), (3, 1)}, st.UNIT)


# ---------------------------------------------------------------- substitution lemma

ops = s.sampled_from(["+", "-"])


def arith(depth=3):
    leaf = s.one_of(s.just(dy.Var("x")), s.integers(-9, 9).map(dy.IntV))
    return s.recursive(leaf, lambda t: s.tuples(ops, t, t).map(lambda a: dy.Cst(a[0], (a[1], a[2]))), max_leaves=6)


def bodies():
    cmp = s.tuples(s.sampled_from(["<", "=", "<="]), arith(), arith()).map(lambda a: dy.Cst(a[0], (a[1], a[2])))
    return s.one_of(
        arith(),
        cmp,
        s.tuples(cmp, arith(), arith()).map(lambda a: dy.If(*a)),
        s.tuples(arith(), arith()).map(lambda a: dy.Pair(*a)),
    )


@settings(max_examples=150, deadline=None)
@given(bodies(), s.integers(-20, 20))
def test_substitution_lemma(e, k):
    v = dy.IntV(k)
    tv, _ = typecheck(TypingEnv(), None, v)
    before, _ = typecheck(TypingEnv(gamma={"x": tv}), None, e)
    after, _ = typecheck(TypingEnv(), None, dy.subst(e, {"x": v}), before)
    assert after == before


@settings(max_examples=60, deadline=None)
@given(s.integers(-20, 20), s.integers(-20, 20))
def test_singleton_arithmetic_is_exact(a, b):
    got, _ = typecheck(TypingEnv(), None, dy.Cst("+", (dy.IntV(a), dy.IntV(b))))
    assert st.static_equal({}, [], got, st.C("int", I(a + b)), st.TYPE)
