import pytest
from hypothesis import given, settings
from hypothesis import strategies as s

from depsess import statics as st
from depsess.statics import BOOL, INT, STYPE, TYPE, VTYPE
from depsess.syntax import parse_program, parse_static

S, Cr = st.S_ROLE, st.C_ROLE


def equal_stype():
    return st.quan(
        INT,
        Cr,
        st.lam(
            INT,
            "m",
            lambda m: st.quan(
                INT,
                Cr,
                st.lam(
                    INT,
                    "n",
                    lambda n: st.msg(
                        Cr, st.C("int", m), st.msg(Cr, st.C("int", n), st.msg(S, st.C("bool", st.eq(m, n)), st.end(S)))
                    ),
                ),
            ),
        ),
    )


# ---------------------------------------------------------------- examples


def test_equal_is_an_stype():
    assert st.sort_check({}, None, equal_stype()) == STYPE


def test_unit_is_a_type():
    assert st.sort_check({}, None, st.UNIT) == TYPE


def test_singleton_bool_is_a_type():
    assert st.sort_check({"a": INT}, None, st.C("bool", st.eq(st.FVar("a"), st.IntLit(0)))) == TYPE


def test_chan_is_a_vtype():
    assert st.sort_check({}, None, st.chan(S, st.end(S))) == VTYPE


@pytest.mark.parametrize(
    "term, err",
    [
        (st.FVar("nope"), st.UnboundStaticVar),
        (st.C("end", st.BoolLit(True)), st.SortMismatch),
        (st.C("msg", S, st.UNIT), st.ArityMismatch),
    ],
)
def test_sort_errors(term, err):
    with pytest.raises(err):
        st.sort_check({}, None, term)


def test_beta_step():
    fn = st.lam(INT, "a", lambda a: st.msg(S, st.C("int", a), st.end(S)))
    assert st.beta_normalize(st.App(fn, st.IntLit(3))) == st.msg(S, st.C("int", st.IntLit(3)), st.end(S))


def test_fix_is_not_unrolled():
    f = st.fix(st.lam(STYPE, "a", lambda a: st.msg(S, st.C("int"), a)))
    assert st.beta_normalize(f) == f
    assert st.session_head(f).kind == "fix"


def _array_program():
    return parse_program(
        """
        (defstype (repeat [t : type] [n : int])
          (ite (> n 0) (msg S t (repeat t (- n 1))) (end S)))
        """
    )


def test_repeat_desugars_to_hofix_and_unrolls_to_ite():
    prog = _array_program()
    rep = parse_static("(repeat int 4)", program=prog)
    h = st.session_head(rep)
    assert h.kind == "hofix"
    assert st.beta_normalize(rep) == rep
    un = st.session_head(st.unroll(rep))
    assert un.kind == "ite"
    assert un.payload == st.BoolLit(True)  # 4 > 0 folded
    then = st.session_head(un.parts[0])
    assert then.kind == "msg" and then.payload == st.C("int")
    assert then.parts[0] == parse_static("(repeat int 3)", program=prog)
    assert st.session_head(un.parts[1]).kind == "end"


def test_head_examples():
    assert st.session_head(st.end(S)) == st.SessionHead("end", role=S, term=st.end(S))
    m = st.msg(Cr, st.C("int", st.IntLit(5)), st.end(S))
    h = st.session_head(m)
    assert h.kind == "msg" and h.payload == st.C("int", st.IntLit(5))
    with pytest.raises(st.NotAnStype):
        st.session_head(st.IntLit(3))


def test_static_equal_examples():
    m, n = st.FVar("m"), st.FVar("n")
    sig = {"m": INT, "n": INT}
    assert st.static_equal(sig, [], st.C("int", n), st.C("int", n), TYPE)
    assert st.static_equal(sig, [st.eq(m, n)], st.C("int", m), st.C("int", n), TYPE)
    assert not st.static_equal(sig, [], st.C("int", m), st.C("int", n), TYPE)
    assert st.static_equal(sig, [], st.C("int", n), st.C("int", st.C("+", n, st.IntLit(0))), TYPE)
    p1, p2 = st.end(S), st.end(Cr)
    assert not st.static_equal({}, [], st.ite(st.TRUE, p1, p2), p1, STYPE)


def test_fix_equality_is_alpha():
    a = st.fix(st.lam(STYPE, "a", lambda x: st.msg(S, st.C("int"), x)))
    b = st.fix(st.lam(STYPE, "zzz", lambda x: st.msg(S, st.C("int"), x)))
    assert st.static_equal({}, [], a, b, STYPE)


def test_show_names_binders():
    assert "quan" in st.show(equal_stype())


# ---------------------------------------------------------------- properties

VARS = ["x", "y", "z"]
SIGMA = {v: INT for v in VARS} | {"b": BOOL}


def int_terms():
    leaf = s.one_of(s.integers(-5, 5).map(st.IntLit), s.sampled_from(VARS).map(st.FVar))
    return s.recursive(
        leaf,
        lambda t: s.one_of(
            s.tuples(s.sampled_from(["+", "-"]), t, t).map(lambda a: st.C(*a)),
            t.map(lambda x: st.C("neg", x)),
            # a redex: (λa:int. body) arg
            s.tuples(t, t).map(lambda p: st.App(st.Lam(INT, st.close_term(p[0], "x"), "x"), p[1])),
        ),
        max_leaves=8,
    )


def bool_terms():
    atom = s.tuples(s.sampled_from(["<", "<=", "=", "!="]), int_terms(), int_terms()).map(lambda a: st.C(*a))
    leaf = s.one_of(atom, s.booleans().map(st.BoolLit), s.just(st.FVar("b")))
    return s.recursive(
        leaf,
        lambda t: s.one_of(
            s.tuples(s.sampled_from(["and", "or"]), t, t).map(lambda a: st.C(*a)),
            t.map(lambda x: st.C("not", x)),
        ),
        max_leaves=6,
    )


def stype_terms():
    leaf = s.sampled_from([st.end(S), st.end(Cr)])
    return s.recursive(
        leaf,
        lambda p: s.one_of(
            s.tuples(s.sampled_from([S, Cr]), int_terms(), p).map(lambda a: st.msg(a[0], st.C("int", a[1]), a[2])),
            s.tuples(s.sampled_from([S, Cr]), p, p).map(lambda a: st.branch(*a)),
            s.tuples(bool_terms(), p, p).map(lambda a: st.ite(*a)),
            p.map(lambda body: st.quan(INT, Cr, st.Lam(INT, st.close_term(body, "x"), "x"))),
        ),
        max_leaves=6,
    )


def any_term():
    return s.one_of(
        int_terms().map(lambda t: (t, INT)), bool_terms().map(lambda t: (t, BOOL)), stype_terms().map(lambda t: (t, STYPE))
    )


@settings(max_examples=200, deadline=None)
@given(any_term())
def test_normalize_idempotent_and_sort_preserving(ts):
    t, srt = ts
    assert st.sort_check(SIGMA, None, t) == srt
    n = st.beta_normalize(t)
    assert st.beta_normalize(n) == n
    assert st.sort_check(SIGMA, None, n) == srt


@settings(max_examples=200, deadline=None)
@given(any_term(), int_terms())
def test_substitution_lemma(ts, arg):
    t, srt = ts
    # sort of t[x := arg] equals the sort of t under x:int
    assert st.sort_check(SIGMA, None, st.subst(t, {"x": arg})) == st.sort_check(SIGMA, None, t) == srt


@settings(max_examples=100, deadline=None)
@given(any_term())
def test_close_then_open_is_identity(ts):
    t, _ = ts
    assert st.open_term(st.close_term(t, "x"), st.FVar("x")) == t


@settings(max_examples=60, deadline=None)
@given(stype_terms(), stype_terms(), stype_terms())
def test_static_equal_is_an_equivalence(a, b, c):
    props = [st.C(">=", st.FVar("x"), st.IntLit(0))]

    def eq(u, v):
        return st.static_equal(SIGMA, props, u, v, STYPE)

    assert eq(a, a)
    assert eq(a, b) == eq(b, a)
    if eq(a, b) and eq(b, c):
        assert eq(a, c)


@settings(max_examples=60, deadline=None)
@given(stype_terms())
def test_static_equal_sees_through_arithmetic(p):
    # shifting an index by +0 never changes the type
    shifted = st.subst(p, {"x": st.C("+", st.FVar("x"), st.IntLit(0))})
    assert st.static_equal(SIGMA, [], p, shifted, STYPE)
