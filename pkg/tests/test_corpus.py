import pytest

from conftest import ALL_PROGRAMS, CORPUS, MUTANTS, checked, expected_rejection
from depsess import dynamics as dy
from depsess import statics as st
from depsess.checker import typecheck_pool
from depsess.errors import RuleMismatch, TypeCheckError
from depsess.program import check_program, load
from depsess.runtime import channel_events, run


@pytest.mark.parametrize("name", ALL_PROGRAMS)
def test_corpus_checks(name):
    cp = checked(name)
    assert cp.main_type is not None


@pytest.mark.parametrize("name", MUTANTS)
def test_mutant_rejected_with_intended_rule(name):
    path = CORPUS / "negative" / name
    rule, kind = expected_rejection(path)
    with pytest.raises(TypeCheckError) as ei:
        check_program(load(str(path)))
    assert (ei.value.rule, type(ei.value).__name__) == (rule, kind), ei.value.render()


def test_enough_mutants():
    assert len(MUTANTS) >= 10


def test_if_arms_holding_different_endpoints():
    # the pool-level form of ty-if's side condition: the arms hold different channels
    ty = st.chan(st.S_ROLE, st.end(st.S_ROLE))
    arm = lambda c: dy.Cst("close", (dy.Endpoint(c, 0),))  # noqa: E731
    main = dy.If(dy.BoolV(True), arm(1), arm(2))
    with pytest.raises(RuleMismatch) as ei:
        typecheck_pool({0: main}, lambda c, r: ty, {(1, 0), (2, 0)}, st.UNIT)
    assert ei.value.rule == "ty-if"


@pytest.mark.parametrize("name", ALL_PROGRAMS)
def test_modes_agree(name):
    cp = checked(name)
    f, m = cp.erased()
    ref = run(f, m, seed=1, audit=True)
    assert ref.ok
    for kw in ({"seed": 2}, {"round_robin": True}, {"seed": 3, "buffered": True}):
        out = run(f, m, audit=True, **kw)
        assert out.ok and out.value == ref.value
        assert channel_events(out.events) == channel_events(ref.events)
    typed = run(cp.funs, cp.main, seed=4, typed=True, main_type=cp.main_type, check_each_step=True, audit=True)
    assert typed.ok and channel_events(typed.events) == channel_events(ref.events)
