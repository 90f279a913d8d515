"""Dynamic terms, values, resources, evaluation contexts and local reduction."""

from __future__ import annotations

from collections import Counter
from dataclasses import dataclass, field, fields, replace
from typing import Any, Callable, Mapping, Optional

from . import statics as st


@dataclass(frozen=True, slots=True)
class Span:
    line: int
    col: int
    length: int = 1
    file: str = ""

    def __str__(self) -> str:
        return f"{self.line}:{self.col}"


def _span():
    return field(default=None, compare=False, repr=False, kw_only=True)


class Term:
    __slots__ = ()


@dataclass(frozen=True, slots=True)
class Var(Term):
    name: str
    span: Optional[Span] = _span()


@dataclass(frozen=True, slots=True)
class IntV(Term):
    value: int
    span: Optional[Span] = _span()


@dataclass(frozen=True, slots=True)
class BoolV(Term):
    value: bool
    span: Optional[Span] = _span()


@dataclass(frozen=True, slots=True)
class StrV(Term):
    value: str
    span: Optional[Span] = _span()


@dataclass(frozen=True, slots=True)
class Unit(Term):
    span: Optional[Span] = _span()


@dataclass(frozen=True, slots=True)
class ArrV(Term):
    """An immutable array literal; its static length is ``len(items)``."""

    elem: Any  # StaticTerm
    items: tuple
    span: Optional[Span] = _span()


@dataclass(frozen=True, slots=True)
class Resource(Term):
    rid: str
    span: Optional[Span] = _span()


@dataclass(frozen=True, slots=True)
class Endpoint(Term):
    chan: int
    role: int
    span: Optional[Span] = _span()


@dataclass(frozen=True, slots=True)
class Cst(Term):
    """Application of a dynamic constant.

    ``sargs`` are static arguments written in the source; ``inst`` is the full
    instantiation of the constant's static variables filled in by the checker.
    """

    name: str
    args: tuple
    sargs: tuple = ()
    inst: Optional[tuple] = None
    span: Optional[Span] = _span()


@dataclass(frozen=True, slots=True)
class Pair(Term):
    fst: Term
    snd: Term
    span: Optional[Span] = _span()


@dataclass(frozen=True, slots=True)
class LetPair(Term):
    x1: str
    x2: str
    bound: Term
    body: Term
    span: Optional[Span] = _span()


@dataclass(frozen=True, slots=True)
class If(Term):
    cond: Term
    then: Term
    other: Term
    span: Optional[Span] = _span()


@dataclass(frozen=True, slots=True)
class Fst(Term):
    arg: Term
    span: Optional[Span] = _span()


@dataclass(frozen=True, slots=True)
class Snd(Term):
    arg: Term
    span: Optional[Span] = _span()


@dataclass(frozen=True, slots=True)
class Lam(Term):
    x: str
    body: Term
    ann: Any = None  # StaticTerm parameter type, filled by the checker
    span: Optional[Span] = _span()


@dataclass(frozen=True, slots=True)
class App(Term):
    fn: Term
    arg: Term
    span: Optional[Span] = _span()


@dataclass(frozen=True, slots=True)
class GuardIntro(Term):
    arg: Term
    span: Optional[Span] = _span()


@dataclass(frozen=True, slots=True)
class GuardElim(Term):
    arg: Term
    span: Optional[Span] = _span()


@dataclass(frozen=True, slots=True)
class AssertIntro(Term):
    arg: Term
    span: Optional[Span] = _span()


@dataclass(frozen=True, slots=True)
class LetAssert(Term):
    x: str
    bound: Term
    body: Term
    span: Optional[Span] = _span()


@dataclass(frozen=True, slots=True)
class ForallIntro(Term):
    a: str
    sort: Any
    arg: Term
    span: Optional[Span] = _span()


@dataclass(frozen=True, slots=True)
class ForallElim(Term):
    arg: Term
    sarg: Any = None
    span: Optional[Span] = _span()


@dataclass(frozen=True, slots=True)
class ExistsIntro(Term):
    arg: Term
    witness: Any = None
    annot: Any = None
    span: Optional[Span] = _span()


@dataclass(frozen=True, slots=True)
class LetExists(Term):
    a: str
    x: str
    bound: Term
    body: Term
    span: Optional[Span] = _span()


@dataclass(frozen=True, slots=True)
class Ann(Term):
    arg: Term
    ty: Any
    span: Optional[Span] = _span()


# ---------------------------------------------------------------- constants

CHANNEL_OPS = frozenset({"send", "recv", "close", "wait", "offer", "choose", "cut"})
SPAWN_OPS = frozenset({"create", "thread_create"})
PROOF_OPS = frozenset({"unify", "exify", "itet", "itef", "recurse"})
SESSION_OPS = CHANNEL_OPS | SPAWN_OPS | PROOF_OPS

PRIMS = frozenset({"+", "-", "*", "=", "!=", "<", "<=", ">", ">=", "not", "and", "or", "print", "arr_get"})


def is_proof_op(name: str) -> bool:
    return name in PROOF_OPS or name.startswith("recurse_ho") or name.startswith("unify[") or name.startswith(
        "exify["
    )


_ATOMS = (IntV, BoolV, StrV, Unit, Resource, Endpoint, Lam, ArrV)


def is_value(e: Term) -> bool:
    if isinstance(e, _ATOMS):
        return True
    if isinstance(e, Pair):
        return is_value(e.fst) and is_value(e.snd)
    if isinstance(e, (GuardIntro, ForallIntro, AssertIntro, ExistsIntro)):
        return is_value(e.arg)
    return False


# ---------------------------------------------------------------- traversal


def children(e: Term) -> list[tuple[str, Term]]:
    """Immediate dynamic subterms as (slot, term)."""
    if isinstance(e, Cst):
        return [(f"args.{i}", a) for i, a in enumerate(e.args)]
    if isinstance(e, ArrV):
        return [(f"items.{i}", a) for i, a in enumerate(e.items)]
    out = []
    for f in fields(e):
        v = getattr(e, f.name)
        if isinstance(v, Term):
            out.append((f.name, v))
    return out


def set_child(e: Term, slot: str, new: Term) -> Term:
    if "." in slot:
        name, i = slot.split(".")
        seq = list(getattr(e, name))
        seq[int(i)] = new
        return replace(e, **{name: tuple(seq)})
    return replace(e, **{slot: new})


def map_terms(e: Term, fn: Callable[[Term], Optional[Term]]) -> Term:
    """Bottom-up rebuild; ``fn`` may return a replacement or None to keep."""
    kids = children(e)
    if kids:
        changed = e
        for slot, k in kids:
            nk = map_terms(k, fn)
            if nk is not k:
                changed = set_child(changed, slot, nk)
        e = changed
    out = fn(e)
    return e if out is None else out


def walk(e: Term):
    yield e
    for _, k in children(e):
        yield from walk(k)


# ---------------------------------------------------------------- resources


def endpoint_key(ep: Endpoint) -> tuple:
    return ("ch", ep.chan, ep.role)


def rho(e: Term) -> Counter:
    """Multiset of resources and endpoints syntactically held by ``e``."""
    out: Counter = Counter()
    _rho(e, out)
    return out


def _rho(e: Term, out: Counter) -> None:
    if isinstance(e, Resource):
        out[("res", e.rid)] += 1
    elif isinstance(e, Endpoint):
        out[endpoint_key(e)] += 1
    elif isinstance(e, If):
        _rho(e.cond, out)
        _rho(e.then, out)
    else:
        for _, k in children(e):
            _rho(k, out)


# ---------------------------------------------------------------- substitution


def free_vars(e: Term) -> set[str]:
    if isinstance(e, Var):
        return {e.name}
    if isinstance(e, Lam):
        return free_vars(e.body) - {e.x}
    if isinstance(e, LetPair):
        return free_vars(e.bound) | (free_vars(e.body) - {e.x1, e.x2})
    if isinstance(e, (LetAssert, LetExists)):
        return free_vars(e.bound) | (free_vars(e.body) - {e.x})
    out: set[str] = set()
    for _, k in children(e):
        out |= free_vars(k)
    return out


def subst(e: Term, theta: Mapping[str, Term]) -> Term:
    """Simultaneous substitution of closed values for free variables."""
    if not theta:
        return e
    if isinstance(e, Var):
        return theta.get(e.name, e)
    if isinstance(e, Lam):
        inner = {k: v for k, v in theta.items() if k != e.x}
        return replace(e, body=subst(e.body, inner)) if inner else e
    if isinstance(e, LetPair):
        inner = {k: v for k, v in theta.items() if k not in (e.x1, e.x2)}
        return replace(e, bound=subst(e.bound, theta), body=subst(e.body, inner))
    if isinstance(e, (LetAssert, LetExists)):
        inner = {k: v for k, v in theta.items() if k != e.x}
        return replace(e, bound=subst(e.bound, theta), body=subst(e.body, inner))
    kids = children(e)
    if not kids:
        return e
    out = e
    for slot, k in kids:
        nk = subst(k, theta)
        if nk is not k:
            out = set_child(out, slot, nk)
    return out


def _sub_static(x, mapping):
    return st.subst(x, mapping) if x is not None else None


def subst_static(e: Term, mapping: Mapping[str, Any]) -> Term:
    """Substitute static terms for static variables in annotations."""
    if not mapping:
        return e

    def fn(t: Term):
        if isinstance(t, Lam) and t.ann is not None:
            return replace(t, ann=st.subst(t.ann, mapping))
        if isinstance(t, Cst) and (t.sargs or t.inst):
            return replace(
                t,
                sargs=tuple(st.subst(s, mapping) for s in t.sargs),
                inst=tuple(st.subst(s, mapping) for s in t.inst) if t.inst is not None else None,
            )
        if isinstance(t, ForallElim) and t.sarg is not None:
            return replace(t, sarg=st.subst(t.sarg, mapping))
        if isinstance(t, ExistsIntro):
            return replace(t, witness=_sub_static(t.witness, mapping), annot=_sub_static(t.annot, mapping))
        if isinstance(t, Ann):
            return replace(t, ty=st.subst(t.ty, mapping))
        if isinstance(t, ArrV):
            return replace(t, elem=st.subst(t.elem, mapping))
        return None

    inner = dict(mapping)

    def fn_wrap(t):
        r = fn(t)
        return t if r is None else r

    def go2(t: Term) -> Term:
        if isinstance(t, ForallIntro) and t.a in inner:
            saved = inner.pop(t.a)
            try:
                return replace(t, arg=go2(t.arg))
            finally:
                inner[t.a] = saved
        if isinstance(t, LetExists) and t.a in inner:
            b = go2(t.bound)
            saved = inner.pop(t.a)
            try:
                return fn_wrap(replace(t, bound=b, body=go2(t.body)))
            finally:
                inner[t.a] = saved
        out = t
        for slot, k in children(t):
            nk = go2(k)
            if nk is not k:
                out = set_child(out, slot, nk)
        return fn_wrap(out)

    return go2(e)


# ---------------------------------------------------------------- contexts


@dataclass(frozen=True)
class Frame:
    node: Term
    slot: str


EvalContext = tuple  # of Frame, outermost first


def plug(ctx: EvalContext, t: Term) -> Term:
    for fr in reversed(ctx):
        t = set_child(fr.node, fr.slot, t)
    return t


@dataclass(frozen=True)
class IsValue:
    value: Term


@dataclass(frozen=True)
class Redex:
    ctx: EvalContext
    focus: Term


@dataclass(frozen=True)
class Blocked:
    ctx: EvalContext
    focus: Cst | ForallElim


@dataclass(frozen=True)
class StuckAt:
    ctx: EvalContext
    focus: Term


class StuckTerm(Exception):
    pass


def _first_nonvalue(items) -> Optional[int]:
    for i, a in enumerate(items):
        if not is_value(a):
            return i
    return None


def decompose(e: Term) -> IsValue | Redex | Blocked | StuckAt:
    """Split a closed term into an evaluation context and its focus (CBV, left to right)."""
    frames: list[Frame] = []
    while True:
        if is_value(e):
            if not frames:
                return IsValue(e)
            raise AssertionError("decompose descended into a value")
        if isinstance(e, Cst):
            i = _first_nonvalue(e.args)
            if i is not None:
                frames.append(Frame(e, f"args.{i}"))
                e = e.args[i]
                continue
            if e.name in CHANNEL_OPS or e.name in SPAWN_OPS or is_proof_op(e.name):
                return Blocked(tuple(frames), e)
            return Redex(tuple(frames), e)
        if isinstance(e, Pair):
            slot = "fst" if not is_value(e.fst) else "snd"
            frames.append(Frame(e, slot))
            e = getattr(e, slot)
            continue
        if isinstance(e, App):
            if not is_value(e.fn):
                frames.append(Frame(e, "fn"))
                e = e.fn
                continue
            if not is_value(e.arg):
                frames.append(Frame(e, "arg"))
                e = e.arg
                continue
            return Redex(tuple(frames), e)
        if isinstance(e, If):
            if not is_value(e.cond):
                frames.append(Frame(e, "cond"))
                e = e.cond
                continue
            return Redex(tuple(frames), e)
        if isinstance(e, (LetPair, LetAssert, LetExists)):
            if not is_value(e.bound):
                frames.append(Frame(e, "bound"))
                e = e.bound
                continue
            return Redex(tuple(frames), e)
        if isinstance(e, ForallElim):
            if not is_value(e.arg):
                frames.append(Frame(e, "arg"))
                e = e.arg
                continue
            if isinstance(e.arg, Endpoint):
                return Blocked(tuple(frames), e)
            return Redex(tuple(frames), e)
        if isinstance(e, (Fst, Snd, GuardElim, Ann, AssertIntro, ExistsIntro, GuardIntro, ForallIntro)):
            if not is_value(e.arg):
                frames.append(Frame(e, "arg"))
                e = e.arg
                continue
            return Redex(tuple(frames), e)
        if isinstance(e, ArrV):
            i = _first_nonvalue(e.items)
            frames.append(Frame(e, f"items.{i}"))
            e = e.items[i]
            continue
        return StuckAt(tuple(frames), e)


# ---------------------------------------------------------------- local reduction


@dataclass
class FunDef:
    """A top-level function: static params, guard, dynamic params, result, body."""

    name: str
    svars: tuple  # ((name, Sort), ...)
    guard: Any
    params: tuple  # ((name, StaticTerm), ...)
    result: Any
    body: Term
    span: Optional[Span] = None


def _prim(name: str, vals: list[Term]) -> Term:
    def ints():
        if not all(isinstance(v, IntV) for v in vals):
            raise StuckTerm(f"{name} applied to non-integers")
        return [v.value for v in vals]

    if name in ("+", "-", "*"):
        a, b = ints()
        return IntV(a + b if name == "+" else a - b if name == "-" else a * b)
    if name in ("<", "<=", ">", ">="):
        a, b = ints()
        return BoolV({"<": a < b, "<=": a <= b, ">": a > b, ">=": a >= b}[name])
    if name in ("=", "!="):
        if not all(isinstance(v, (IntV, BoolV)) for v in vals):
            raise StuckTerm(f"{name} applied to non-scalars")
        same = vals[0].value == vals[1].value
        return BoolV(same if name == "=" else not same)
    if name in ("and", "or", "not"):
        if not all(isinstance(v, BoolV) for v in vals):
            raise StuckTerm(f"{name} applied to non-booleans")
        bs = [v.value for v in vals]
        return BoolV(bs[0] and bs[1] if name == "and" else bs[0] or bs[1] if name == "or" else not bs[0])
    if name == "print":
        return Unit()
    if name == "arr_get":
        arr, idx = vals
        if not isinstance(arr, ArrV) or not isinstance(idx, IntV) or not 0 <= idx.value < len(arr.items):
            raise StuckTerm("array index out of bounds")
        return arr.items[idx.value]
    raise StuckTerm(f"unknown primitive {name}")


def unfold_call(fd: FunDef, call: Cst) -> Term:
    body = subst(fd.body, {x: v for (x, _), v in zip(fd.params, call.args)})
    if call.inst is not None:
        body = subst_static(body, {a: s for (a, _), s in zip(fd.svars, call.inst)})
    return body


def contract(r: Term, funs: Mapping[str, FunDef] | None = None) -> Term:
    """Reduce a redex in place (no context)."""
    if isinstance(r, App):
        if not isinstance(r.fn, Lam):
            raise StuckTerm("application of a non-function")
        return subst(r.fn.body, {r.fn.x: r.arg})
    if isinstance(r, Fst):
        if not isinstance(r.arg, Pair):
            raise StuckTerm("fst of a non-pair")
        return r.arg.fst
    if isinstance(r, Snd):
        if not isinstance(r.arg, Pair):
            raise StuckTerm("snd of a non-pair")
        return r.arg.snd
    if isinstance(r, LetPair):
        if not isinstance(r.bound, Pair):
            raise StuckTerm("let-pair on a non-pair")
        return subst(r.body, {r.x1: r.bound.fst, r.x2: r.bound.snd})
    if isinstance(r, If):
        if not isinstance(r.cond, BoolV):
            raise StuckTerm("if on a non-boolean")
        return r.then if r.cond.value else r.other
    if isinstance(r, GuardElim):
        if not isinstance(r.arg, GuardIntro):
            raise StuckTerm("guard elimination of a non-guard")
        return r.arg.arg
    if isinstance(r, ForallElim):
        if isinstance(r.arg, ForallIntro):
            body = r.arg.arg
            if r.sarg is not None:
                body = subst_static(body, {r.arg.a: r.sarg})
            return body
        raise StuckTerm("instantiation of a non-polymorphic value")
    if isinstance(r, LetAssert):
        if not isinstance(r.bound, AssertIntro):
            raise StuckTerm("let-assert on a non-assertion")
        return subst(r.body, {r.x: r.bound.arg})
    if isinstance(r, LetExists):
        if not isinstance(r.bound, ExistsIntro):
            raise StuckTerm("let-exists on a non-package")
        body = subst(r.body, {r.x: r.bound.arg})
        if r.bound.witness is not None:
            body = subst_static(body, {r.a: r.bound.witness})
        return body
    if isinstance(r, Ann):
        return r.arg
    if isinstance(r, Cst):
        if funs and r.name in funs:
            return unfold_call(funs[r.name], r)
        return _prim(r.name, list(r.args))
    raise StuckTerm(f"no reduction for {type(r).__name__}")


def step_local(e: Term, funs: Mapping[str, FunDef] | None = None) -> Optional[Term]:
    """One call-by-value step, or None when ``e`` is a value or blocked on the pool."""
    d = decompose(e)
    if isinstance(d, (IsValue, Blocked)):
        return None
    if isinstance(d, StuckAt):
        raise StuckTerm(f"open or malformed term: {type(d.focus).__name__}")
    return plug(d.ctx, contract(d.focus, funs))


# ---------------------------------------------------------------- erasure


def erase_proofs(e: Term) -> Term:
    """Drop proof functions and quantifier/guard/assertion markers."""

    def fn(t: Term):
        if isinstance(t, Cst) and is_proof_op(t.name):
            return t.args[0]
        if isinstance(t, (GuardIntro, GuardElim, AssertIntro, ForallIntro, ForallElim, ExistsIntro, Ann)):
            return t.arg
        if isinstance(t, LetAssert):
            return App(Lam(t.x, t.body, span=t.span), t.bound, span=t.span)
        if isinstance(t, LetExists):
            return App(Lam(t.x, t.body, span=t.span), t.bound, span=t.span)
        if isinstance(t, Lam) and t.ann is not None:
            return replace(t, ann=None)
        if isinstance(t, Cst) and (t.inst is not None or t.sargs):
            # create keeps its role instantiation: the runtime needs it to hand out endpoints
            return replace(t, inst=t.inst[:2] if t.name == "create" and t.inst else None, sargs=())
        if isinstance(t, ArrV):
            return replace(t, elem=None)
        return None

    return map_terms(e, fn)


def erase_fun(fd: FunDef) -> FunDef:
    return replace(fd, body=erase_proofs(fd.body))
