"""C-type schemes for the session API, primitives and user functions."""

from __future__ import annotations

from dataclasses import dataclass

from . import statics as st
from .statics import BOOL, INT, STYPE, TYPE, VTYPE, C, FVar, IntLit


@dataclass(frozen=True)
class Scheme:
    """forall svars. guard => (params) -> result, with svars named ``?x``."""

    svars: tuple
    guard: object
    params: tuple
    result: object
    roles: frozenset = frozenset()

    @property
    def sorts(self) -> dict:
        return dict(self.svars)


def _m(name):
    return FVar("?" + name)


R, R0, R1, R2 = _m("r"), _m("r0"), _m("r1"), _m("r2")
PI, P1, P2, TAU, B, F, A, N, I = (_m(x) for x in ("pi", "p1", "p2", "tau", "b", "f", "a", "n", "i"))


def _roles(*rs):
    return st.conj(*(st.role_prop(r) for r in rs))


def _scheme(svars, guard, params, result, roles=()):
    role_names = frozenset(r.name for r in roles)
    g = st.conj(_roles(*roles), guard) if roles else guard
    return Scheme(tuple((v.name, s) for v, s in svars), g, tuple(params), result, role_names)


def _ne(a, b):
    return C("!=", a, b)


SESSION_SCHEMES = {
    "create": _scheme(
        [(R1, INT), (R2, INT), (PI, STYPE)],
        _ne(R1, R2),
        [C("-o", st.chan(R2, PI), st.UNIT)],
        st.chan(R1, PI),
        roles=(R1, R2),
    ),
    "send": _scheme(
        [(R, INT), (R0, INT), (PI, STYPE), (TAU, VTYPE)],
        st.eq(R, R0),
        [st.chan(R, st.msg(R0, TAU, PI)), TAU],
        st.chan(R, PI),
        roles=(R, R0),
    ),
    "recv": _scheme(
        [(R, INT), (R0, INT), (PI, STYPE), (TAU, VTYPE)],
        _ne(R, R0),
        [st.chan(R, st.msg(R0, TAU, PI))],
        C("ltup", TAU, st.chan(R, PI)),
        roles=(R, R0),
    ),
    "close": _scheme([(R, INT), (R0, INT)], st.eq(R, R0), [st.chan(R, st.end(R0))], st.UNIT, roles=(R, R0)),
    "wait": _scheme([(R, INT), (R0, INT)], _ne(R, R0), [st.chan(R, st.end(R0))], st.UNIT, roles=(R, R0)),
    "offer": _scheme(
        [(R, INT), (R0, INT), (P1, STYPE), (P2, STYPE)],
        _ne(R, R0),
        [st.chan(R, st.branch(R0, P1, P2))],
        st.exists(BOOL, st.lam(BOOL, "b", lambda b: C("ltup", C("bool", b), st.chan(R, st.ite(b, P1, P2))))),
        roles=(R, R0),
    ),
    "choose": _scheme(
        [(R, INT), (R0, INT), (P1, STYPE), (P2, STYPE), (B, BOOL)],
        st.eq(R, R0),
        [st.chan(R, st.branch(R0, P1, P2)), C("bool", B)],
        st.chan(R, st.ite(B, P1, P2)),
        roles=(R, R0),
    ),
    "itet": _scheme(
        [(R, INT), (P1, STYPE), (P2, STYPE)], st.TRUE, [st.chan(R, st.ite(st.TRUE, P1, P2))], st.chan(R, P1),
        roles=(R,),
    ),
    "itef": _scheme(
        [(R, INT), (P1, STYPE), (P2, STYPE)], st.TRUE, [st.chan(R, st.ite(st.FALSE, P1, P2))], st.chan(R, P2),
        roles=(R,),
    ),
    "recurse": _scheme(
        [(R, INT), (F, st.Arrow(STYPE, STYPE))],
        st.TRUE,
        [st.chan(R, st.fix(F))],
        st.chan(R, st.App(F, st.fix(F))),
        roles=(R,),
    ),
    "cut": _scheme(
        [(R1, INT), (R2, INT), (PI, STYPE)],
        _ne(R1, R2),
        [st.chan(R1, PI), st.chan(R2, PI)],
        st.UNIT,
        roles=(R1, R2),
    ),
    "thread_create": _scheme([], st.TRUE, [C("-o", st.UNIT, st.UNIT)], st.UNIT),
}


def quantifier_scheme(kind: str, sort) -> Scheme:
    """``unify[σ]`` / ``exify[σ]``."""
    fsort = st.Arrow(sort, STYPE)
    body = st.lam(sort, "s", lambda s: st.chan(R, st.App(F, s)))
    if kind == "unify":
        return _scheme([(R, INT), (R0, INT), (F, fsort)], st.eq(R, R0), [st.chan(R, st.quan(sort, R0, F))],
                       st.forall(sort, body), roles=(R, R0))
    return _scheme([(R, INT), (R0, INT), (F, fsort)], _ne(R, R0), [st.chan(R, st.quan(sort, R0, F))],
                   st.exists(sort, body), roles=(R, R0))


def recurse_ho_scheme(sorts) -> Scheme:
    p = st.arrows(sorts, STYPE)
    args = [_m(f"s{i}") for i in range(len(sorts))]
    rec = st.hofix(sorts, F, *args)
    unrolled = st.App(F, st._hofix_self(sorts, F))
    for a in args:
        unrolled = st.App(unrolled, a)
    return _scheme(
        [(R, INT), (F, st.Arrow(p, p))] + list(zip(args, sorts)),
        st.TRUE,
        [st.chan(R, rec)],
        st.chan(R, unrolled),
        roles=(R,),
    )


def _int(x):
    return C("int", x)


def _bool(x):
    return C("bool", x)


M_, N_ = _m("m"), _m("n")


def _arith(op):
    return _scheme([(M_, INT), (N_, INT)], st.TRUE, [_int(M_), _int(N_)], _int(C(op, M_, N_)))


def _cmp(op):
    return _scheme([(M_, INT), (N_, INT)], st.TRUE, [_int(M_), _int(N_)], _bool(C(op, M_, N_)))


BM, BN = _m("bm"), _m("bn")

PRIM_SCHEMES = {
    "+": _arith("+"),
    "-": _arith("-"),
    "*": _scheme([], st.TRUE, [C("int"), C("int")], C("int")),
    **{op: _cmp(op) for op in ("<", "<=", ">", ">=", "=", "!=")},
    "not": _scheme([(BM, BOOL)], st.TRUE, [_bool(BM)], _bool(C("not", BM))),
    "and": _scheme([(BM, BOOL), (BN, BOOL)], st.TRUE, [_bool(BM), _bool(BN)], _bool(C("and", BM, BN))),
    "or": _scheme([(BM, BOOL), (BN, BOOL)], st.TRUE, [_bool(BM), _bool(BN)], _bool(C("or", BM, BN))),
    "print": _scheme([(A, TYPE)], st.TRUE, [A], st.UNIT),
    "arr_get": _scheme(
        [(A, TYPE), (N, INT), (I, INT)],
        C("and", C("<=", IntLit(0), I), C("<", I, N)),
        [C("arrref", A, N), _int(I)],
        A,
    ),
}


def fun_scheme(svars, guard, params, result) -> Scheme:
    """Scheme of a user function whose statics are named as in its source."""
    ren = {a: FVar("?" + a) for a, _ in svars}
    return Scheme(
        tuple(("?" + a, s) for a, s in svars),
        st.subst(guard, ren),
        tuple(st.subst(t, ren) for _, t in params),
        st.subst(result, ren),
        frozenset(),
    )
