"""Bidirectional linear type checker with index constraints.

Linear variables are threaded through a mutable "available" map: looking a
linear variable up removes it, so each control path must consume it exactly
once.  The checker also elaborates terms: lambda annotations, constant
instantiations and package witnesses are filled in so that the runtime can
re-check pools after every step.
"""

from __future__ import annotations

from dataclasses import dataclass, field, replace
from typing import Any, Callable, Mapping, Optional

from . import dynamics as dy
from . import statics as st
from .constraints import ConstraintStore, Invalid, Unsupported, Valid, entails
from .errors import (
    CannotInferStatics,
    EndpointMultiplicity,
    GuardNotEntailed,
    LinearityViolation,
    RuleMismatch,
    SortError,
    TypeCheckError,
    UnboundVariable,
    UnsupportedConstraint,
)
from .signature import PRIM_SCHEMES, SESSION_SCHEMES, Scheme, fun_scheme, quantifier_scheme, recurse_ho_scheme
from .statics import BOOL, INT, STYPE, TYPE, VTYPE

_MISSING = object()


@dataclass(frozen=True)
class Ctx:
    """Static part of the environment: sorts of static variables and the store."""

    sigma: Mapping[str, st.Sort] = field(default_factory=dict)
    props: tuple = ()

    def with_var(self, name: str, sort: st.Sort) -> "Ctx":
        return Ctx({**self.sigma, name: sort}, self.props)

    def with_prop(self, *ps) -> "Ctx":
        return Ctx(self.sigma, self.props + tuple(p for p in ps if p != st.TRUE))

    def store(self, extra: Mapping[str, st.Sort] | None = None) -> ConstraintStore:
        sorts = dict(self.sigma)
        if extra:
            sorts.update(extra)
        return ConstraintStore.of(self.props, sorts)


@dataclass
class TypingEnv:
    """(Σ; P; Γ; Δ) as a value, for callers that want the whole judgment at once."""

    sigma: dict = field(default_factory=dict)
    props: tuple = ()
    gamma: dict = field(default_factory=dict)
    delta: dict = field(default_factory=dict)


def _head(t) -> tuple[Optional[str], tuple]:
    if isinstance(t, st.Const):
        return t.name, t.args
    return None, ()


def _has_meta(t, metas) -> bool:
    return bool(st.free_vars(t) & metas)


def _fun_name(head: Optional[str]) -> Optional[str]:
    fam = st.family(head) if head else None
    return fam[0] if fam else head


class Checker:
    def __init__(
        self,
        funs: Mapping[str, dy.FunDef] | None = None,
        sig: st.StaticSignature | None = None,
        endpoint_type: Callable[[int, int], Any] | None = None,
        resource_types: Mapping[str, Any] | None = None,
    ) -> None:
        self.sig = sig or st.DEFAULT_SIG
        self.funs = dict(funs or {})
        self.fun_schemes = {
            name: fun_scheme(fd.svars, fd.guard, fd.params, fd.result) for name, fd in self.funs.items()
        }
        self.endpoint_type = endpoint_type
        self.resource_types = dict(resource_types or {})
        self.gamma: dict[str, Any] = {}
        self.delta: dict[str, Any] = {}
        self.used: set[str] = set()

    # ------------------------------------------------------------ helpers

    def sort_of(self, ctx: Ctx, t, span=None) -> st.Sort:
        try:
            return st.sort_check(ctx.sigma, self.sig, t)
        except st.StaticError as e:
            raise SortError("sort", str(e), span) from None

    def is_linear(self, ctx: Ctx, t) -> bool:
        return self.sort_of(ctx, t) == VTYPE

    def entail(self, ctx: Ctx, goal, span, rule: str, what: str, extra=None) -> None:
        v = entails(ctx.store(extra), goal)
        if isinstance(v, Valid):
            return
        if isinstance(v, Unsupported):
            raise UnsupportedConstraint(rule, f"{what}: {v.reason}", span)
        shown = {k: val for k, val in v.witness.items() if not k.startswith("?")}
        raise GuardNotEntailed(rule, f"{what}: cannot prove {st.show(goal)}", span, countermodel=shown)

    def subtype_goal(self, ctx: Ctx, a, b, extra=None) -> Optional[list]:
        """Index equalities under which ``a`` is a subtype of ``b``; None if shapes differ."""
        sorts = dict(ctx.sigma)
        if extra:
            sorts.update(extra)
        out: list = []

        def go(x, y) -> bool:
            x, y = st.beta_normalize(x), st.beta_normalize(y)
            if x == y:
                return True
            hx, ax = _head(x)
            hy, ay = _head(y)
            if hx in ("int", "bool") and hy == hx and len(ax) == 1 and not ay:
                return True
            if hx in ("tup", "ltup") and hy in ("tup", "ltup") and not (hx == "ltup" and hy == "tup"):
                return go(ax[0], ay[0]) and go(ax[1], ay[1])
            if hx in ("->", "-o") and hy in ("->", "-o") and not (hx == "-o" and hy == "->"):
                obl = st.equality_obligations(ax[0], ay[0], VTYPE, sorts, self.sig)
                if obl is None:
                    return False
                out.extend(obl)
                return go(ax[1], ay[1])
            obl = st.equality_obligations(x, y, VTYPE, sorts, self.sig)
            if obl is None:
                return False
            out.extend(obl)
            return True

        if not go(a, b):
            return None
        return [st.eq(x, y) for x, y, _ in out]

    def require_subtype(self, ctx: Ctx, a, b, span, rule="ty-sub", what="") -> None:
        goals = self.subtype_goal(ctx, a, b)
        if goals is None:
            raise RuleMismatch(rule, f"{what}expected {st.show(b)}, found {st.show(a)}", span)
        if goals:
            self.entail(ctx, st.conj(*goals), span, rule, f"{what}{st.show(a)} is not {st.show(b)}")

    # ------------------------------------------------------------ linear context

    def bind(self, ctx: Ctx, x: str, t) -> tuple:
        saved = (self.gamma.pop(x, _MISSING), self.delta.pop(x, _MISSING), x in self.used)
        self.used.discard(x)
        if self.is_linear(ctx, t):
            self.delta[x] = t
        else:
            self.gamma[x] = t
        return saved

    def unbind(self, x: str, saved: tuple, span, rule: str) -> None:
        if x in self.delta:
            t = self.delta[x]
            raise LinearityViolation(rule, f"linear variable {x} : {st.show(t)} is never consumed", span)
        self.gamma.pop(x, None)
        self.used.discard(x)
        g, d, u = saved
        if g is not _MISSING:
            self.gamma[x] = g
        if d is not _MISSING:
            self.delta[x] = d
        if u:
            self.used.add(x)

    def snapshot(self):
        return dict(self.delta), set(self.used)

    def restore(self, snap) -> None:
        self.delta, self.used = dict(snap[0]), set(snap[1])

    # ------------------------------------------------------------ synthesis

    def synth(self, ctx: Ctx, e: dy.Term) -> tuple[dy.Term, Any]:
        t = type(e)
        if t is dy.Var:
            if e.name in self.delta:
                ty = self.delta.pop(e.name)
                self.used.add(e.name)
                return e, ty
            if e.name in self.used:
                raise LinearityViolation("ty-var-l", f"linear variable {e.name} is used more than once", e.span)
            if e.name in self.gamma:
                return e, self.gamma[e.name]
            raise UnboundVariable("ty-var-i", f"unbound variable {e.name}", e.span)
        if t is dy.IntV:
            return e, st.C("int", st.IntLit(e.value))
        if t is dy.BoolV:
            return e, st.C("bool", st.BoolLit(e.value))
        if t is dy.StrV:
            return e, st.C("string")
        if t is dy.Unit:
            return e, st.UNIT
        if t is dy.ArrV:
            if e.elem is None:
                raise CannotInferStatics("ty-cst", "array literal needs an element type", e.span)
            if self.is_linear(ctx, e.elem):
                raise SortError("sort", "array elements must be non-linear", e.span)
            items = tuple(self.check(ctx, x, e.elem) for x in e.items)
            return replace(e, items=items), st.C("arrref", e.elem, st.IntLit(len(items)))
        if t is dy.Resource:
            if e.rid not in self.resource_types:
                raise UnboundVariable("ty-res", f"unknown resource {e.rid}", e.span)
            return e, self.resource_types[e.rid]
        if t is dy.Endpoint:
            if self.endpoint_type is None:
                raise UnboundVariable("ty-res", "endpoint value outside a pool", e.span)
            return e, st.beta_normalize(self.endpoint_type(e.chan, e.role))
        if t is dy.Pair:
            a, ta = self.synth(ctx, e.fst)
            b, tb = self.synth(ctx, e.snd)
            lin = self.is_linear(ctx, ta) or self.is_linear(ctx, tb)
            return replace(e, fst=a, snd=b), st.C("ltup" if lin else "tup", ta, tb)
        if t in (dy.Fst, dy.Snd):
            a, ta = self.synth(ctx, e.arg)
            h, args = _head(st.beta_normalize(ta))
            rule = "ty-fst" if t is dy.Fst else "ty-snd"
            if h != "tup":
                raise RuleMismatch(rule, f"projection needs a non-linear pair, found {st.show(ta)}", e.span)
            return replace(e, arg=a), args[0 if t is dy.Fst else 1]
        if t is dy.LetPair:
            return self._let_pair(ctx, e, None)
        if t is dy.If:
            return self._if(ctx, e, None)
        if t is dy.Lam:
            if e.ann is None:
                raise CannotInferStatics("ty-lam-l", f"cannot infer the type of parameter {e.x}", e.span)
            self.sort_of(ctx, e.ann, e.span)
            before = set(self.delta)
            saved = self.bind(ctx, e.x, e.ann)
            body, tb = self.synth(ctx, e.body)
            self.unbind(e.x, saved, e.span, "ty-lam-l")
            captured = before - set(self.delta)
            arrow = "-o" if captured or dy.rho(body) else "->"
            return replace(e, body=body), st.C(arrow, e.ann, tb)
        if t is dy.App:
            return self._app(ctx, e, None)
        if t is dy.Cst:
            return self.apply_const(ctx, e, None)
        if t is dy.GuardElim:
            a, ta = self.synth(ctx, e.arg)
            h, args = _head(st.beta_normalize(ta))
            if h != "guard":
                raise RuleMismatch("ty-guard-elim", f"expected a guarded type, found {st.show(ta)}", e.span)
            self.entail(ctx, args[0], e.span, "ty-guard-elim", "guard")
            return replace(e, arg=a), args[1]
        if t is dy.GuardIntro:
            raise CannotInferStatics("ty-guard-intr", "guard introduction needs an expected type", e.span)
        if t is dy.AssertIntro:
            raise CannotInferStatics("ty-assert-intr", "assertion introduction needs an expected type", e.span)
        if t is dy.LetAssert:
            return self._let_assert(ctx, e, None)
        if t is dy.ForallIntro:
            if not dy.is_value(e.arg):
                raise RuleMismatch("ty-forall-intr", "quantifier introduction wraps values only", e.span)
            a = self._fresh_static(ctx, e.a)
            arg = dy.subst_static(e.arg, {e.a: st.FVar(a)}) if a != e.a else e.arg
            inner, ti = self.synth(ctx.with_var(a, e.sort), arg)
            return (
                dy.ForallIntro(a, e.sort, inner, span=e.span),
                st.forall(e.sort, st.Lam(e.sort, st.close_term(ti, a), e.a)),
            )
        if t is dy.ForallElim:
            a, ta = self.synth(ctx, e.arg)
            h, args = _head(st.beta_normalize(ta))
            if _fun_name(h) != "forall":
                raise RuleMismatch("ty-forall-elim", f"expected a universal type, found {st.show(ta)}", e.span)
            if e.sarg is None:
                raise CannotInferStatics("ty-forall-elim", "missing static argument", e.span)
            srt = st.family(h)[1][0]
            got = self.sort_of(ctx, e.sarg, e.span)
            if not st.sort_leq(got, srt):
                raise SortError("ty-forall-elim", f"static argument has sort {got}, expected {srt}", e.span)
            return replace(e, arg=a), st.instantiate(args[0], e.sarg)
        if t is dy.ExistsIntro:
            if e.annot is None:
                raise CannotInferStatics("ty-exists-intr", "package needs an expected type", e.span)
            self.sort_of(ctx, e.annot, e.span)
            return self.check(ctx, replace(e, annot=None), e.annot), e.annot
        if t is dy.LetExists:
            return self._let_exists(ctx, e, None)
        if t is dy.Ann:
            self.sort_of(ctx, e.ty, e.span)
            inner = self.check(ctx, e.arg, e.ty)
            return replace(e, arg=inner), e.ty
        raise RuleMismatch("ty-cst", f"cannot type {type(e).__name__}", getattr(e, "span", None))

    # ------------------------------------------------------------ checking

    def check(self, ctx: Ctx, e: dy.Term, ty) -> dy.Term:
        ty = st.beta_normalize(ty)
        t = type(e)
        h, args = _head(ty)
        if t is dy.Lam:
            if h not in ("->", "-o"):
                raise RuleMismatch("ty-lam-l", f"a function cannot have type {st.show(ty)}", e.span)
            dom, cod = args
            if e.ann is not None:
                self.sort_of(ctx, e.ann, e.span)
                self.require_subtype(ctx, dom, e.ann, e.span, "ty-lam-l", "parameter: ")
                self.require_subtype(ctx, e.ann, dom, e.span, "ty-lam-l", "parameter: ")
            before = set(self.delta)
            saved = self.bind(ctx, e.x, dom)
            body = self.check(ctx, e.body, cod)
            rule = "ty-lam-i" if h == "->" else "ty-lam-l"
            self.unbind(e.x, saved, e.span, rule)
            captured = before - set(self.delta)
            if h == "->" and (captured or dy.rho(body)):
                names = ", ".join(sorted(captured)) or "an endpoint"
                raise LinearityViolation(
                    "ty-lam-i", f"a non-linear function may not capture linear {names}", e.span
                )
            return replace(e, body=body, ann=dom)
        if t is dy.GuardIntro and h == "guard":
            return replace(e, arg=self.check(ctx.with_prop(args[0]), e.arg, args[1]))
        if t is dy.AssertIntro and h == "assert":
            self.entail(ctx, args[0], e.span, "ty-assert-intr", "assertion")
            return replace(e, arg=self.check(ctx, e.arg, args[1]))
        if t is dy.ExistsIntro and e.annot is None and _fun_name(h) == "exists":
            srt = st.family(h)[1][0]
            if e.witness is None:
                raise CannotInferStatics("ty-exists-intr", "package needs an explicit witness", e.span)
            got = self.sort_of(ctx, e.witness, e.span)
            if not st.sort_leq(got, srt):
                raise SortError("ty-exists-intr", f"witness has sort {got}, expected {srt}", e.span)
            inner = self.check(ctx, e.arg, st.instantiate(args[0], e.witness))
            return replace(e, arg=inner, annot=ty)
        if t is dy.ForallIntro and _fun_name(h) == "forall" and st.family(h)[1][0] == e.sort:
            if not dy.is_value(e.arg):
                raise RuleMismatch("ty-forall-intr", "quantifier introduction wraps values only", e.span)
            a = self._fresh_static(ctx, e.a)
            arg = dy.subst_static(e.arg, {e.a: st.FVar(a)}) if a != e.a else e.arg
            inner = self.check(ctx.with_var(a, e.sort), arg, st.instantiate(args[0], st.FVar(a)))
            return dy.ForallIntro(a, e.sort, inner, span=e.span)
        if t is dy.If:
            return self._if(ctx, e, ty)[0]
        if t is dy.LetPair:
            return self._let_pair(ctx, e, ty)[0]
        if t is dy.LetAssert:
            return self._let_assert(ctx, e, ty)[0]
        if t is dy.LetExists:
            return self._let_exists(ctx, e, ty)[0]
        if t is dy.App and isinstance(e.fn, dy.Lam):
            return self._app(ctx, e, ty)[0]
        if t is dy.Cst:
            out, got = self.apply_const(ctx, e, ty)
            self.require_subtype(ctx, got, ty, e.span, "ty-sub")
            return out
        out, got = self.synth(ctx, e)
        self.require_subtype(ctx, got, ty, getattr(e, "span", None), "ty-sub")
        return out

    # ------------------------------------------------------------ rules with bodies

    def _body(self, ctx: Ctx, body, expected):
        if expected is None:
            return self.synth(ctx, body)
        return self.check(ctx, body, expected), expected

    def _let_pair(self, ctx, e: dy.LetPair, expected):
        b, tb = self.synth(ctx, e.bound)
        h, args = _head(st.beta_normalize(tb))
        if h not in ("tup", "ltup"):
            raise RuleMismatch("ty-tup-elim", f"expected a pair, found {st.show(tb)}", e.span)
        s1 = self.bind(ctx, e.x1, args[0])
        s2 = self.bind(ctx, e.x2, args[1])
        body, ty = self._body(ctx, e.body, expected)
        self.unbind(e.x2, s2, e.span, "ty-tup-elim")
        self.unbind(e.x1, s1, e.span, "ty-tup-elim")
        return replace(e, bound=b, body=body), ty

    def _let_assert(self, ctx, e: dy.LetAssert, expected):
        b, tb = self.synth(ctx, e.bound)
        h, args = _head(st.beta_normalize(tb))
        if h != "assert":
            raise RuleMismatch("ty-assert-elim", f"expected an asserting type, found {st.show(tb)}", e.span)
        inner = ctx.with_prop(args[0])
        saved = self.bind(inner, e.x, args[1])
        body, ty = self._body(inner, e.body, expected)
        self.unbind(e.x, saved, e.span, "ty-assert-elim")
        return replace(e, bound=b, body=body), ty

    def _fresh_static(self, ctx: Ctx, a: str) -> str:
        return a if a not in ctx.sigma else st.fresh_name(a)

    def _let_exists(self, ctx, e: dy.LetExists, expected):
        b, tb = self.synth(ctx, e.bound)
        h, args = _head(st.beta_normalize(tb))
        if _fun_name(h) != "exists":
            raise RuleMismatch("ty-exists-elim", f"expected an existential type, found {st.show(tb)}", e.span)
        srt = st.family(h)[1][0]
        a = self._fresh_static(ctx, e.a)
        body_in = dy.subst_static(e.body, {e.a: st.FVar(a)}) if a != e.a else e.body
        inner = ctx.with_var(a, srt)
        saved = self.bind(inner, e.x, st.instantiate(args[0], st.FVar(a)))
        body, ty = self._body(inner, body_in, expected)
        self.unbind(e.x, saved, e.span, "ty-exists-elim")
        if expected is None and a in st.free_vars(ty):
            raise RuleMismatch(
                "ty-exists-elim", f"static variable {st.display_name(a)} escapes its scope in {st.show(ty)}", e.span
            )
        return dy.LetExists(a, e.x, b, body, span=e.span), ty

    def _if(self, ctx, e: dy.If, expected):
        c, tc = self.synth(ctx, e.cond)
        h, args = _head(st.beta_normalize(tc))
        if h != "bool":
            raise RuleMismatch("ty-if", f"condition must be a boolean, found {st.show(tc)}", e.span)
        ct, cf = ctx, ctx
        if args:
            ct = ctx.with_prop(args[0])
            cf = ctx.with_prop(st.C("not", args[0]))
        snap = self.snapshot()
        then, t1 = self._body(ct, e.then, expected)
        after_then = self.snapshot()
        self.restore(snap)
        other, t2 = self._body(cf, e.other, expected)
        if set(self.delta) != set(after_then[0]):
            diff = sorted(set(self.delta) ^ set(after_then[0]))
            raise LinearityViolation(
                "ty-if", f"branches consume different linear variables: {', '.join(diff)}", e.span
            )
        if dy.rho(then) != dy.rho(other):
            raise RuleMismatch("ty-if", "branches hold different resources", e.span)
        self.used |= after_then[1]
        ty = expected
        if expected is None:
            ty = self._join(ctx, t1, t2, e.span)
        return replace(e, cond=c, then=then, other=other), ty

    def _join(self, ctx, t1, t2, span):
        if self.subtype_goal(ctx, t1, t2) == []:
            return t2
        if self.subtype_goal(ctx, t2, t1) == []:
            return t1
        w1, w2 = _widen(t1), _widen(t2)
        if self.subtype_goal(ctx, w1, w2) == []:
            return w2
        raise RuleMismatch("ty-if", f"branches have different types {st.show(t1)} and {st.show(t2)}", span)

    def _app(self, ctx, e: dy.App, expected):
        if isinstance(e.fn, dy.Lam):
            lam = e.fn
            if lam.ann is None:
                a, ta = self.synth(ctx, e.arg)
            else:
                self.sort_of(ctx, lam.ann, lam.span)
                a, ta = self.check(ctx, e.arg, lam.ann), lam.ann
            saved = self.bind(ctx, lam.x, ta)
            body, ty = self._body(ctx, lam.body, expected)
            self.unbind(lam.x, saved, lam.span or e.span, "ty-lam-l")
            return replace(e, fn=replace(lam, body=body, ann=ta), arg=a), ty
        f, tf = self.synth(ctx, e.fn)
        h, args = _head(st.beta_normalize(tf))
        if h not in ("->", "-o"):
            raise RuleMismatch("ty-app-l", f"applying a non-function of type {st.show(tf)}", e.span)
        a = self.check(ctx, e.arg, args[0])
        return replace(e, fn=f, arg=a), args[1]

    # ------------------------------------------------------------ constants

    def scheme_for(self, ctx: Ctx, e: dy.Cst, first_type=None) -> Scheme:
        name = e.name
        if name in self.fun_schemes:
            return self.fun_schemes[name]
        if name in ("unify", "exify", "recurse") and first_type is not None:
            h, args = _head(st.beta_normalize(first_type))
            if h == "chan":
                inner, _ = _head(args[1])
                fam = st.family(inner) if inner else None
                if name in ("unify", "exify"):
                    if fam and fam[0] == "quan":
                        return quantifier_scheme(name, fam[1][0])
                    return quantifier_scheme(name, INT)
                if fam and fam[0] == "hofix":
                    return recurse_ho_scheme(fam[1])
            if name in ("unify", "exify"):
                return quantifier_scheme(name, INT)
            return SESSION_SCHEMES["recurse"]
        if name in SESSION_SCHEMES:
            return SESSION_SCHEMES[name]
        if name in PRIM_SCHEMES:
            return PRIM_SCHEMES[name]
        raise UnboundVariable("ty-cst", f"unknown constant {name}", e.span)

    def apply_const(self, ctx: Ctx, e: dy.Cst, expected) -> tuple[dy.Cst, Any]:
        elab = list(e.args)
        first = None
        if e.name in ("unify", "exify", "recurse") and e.args:
            elab[0], first = self.synth(ctx, e.args[0])
        scheme = self.scheme_for(ctx, e, first)
        if len(e.args) != len(scheme.params):
            raise RuleMismatch(
                "ty-cst", f"{e.name} expects {len(scheme.params)} argument(s), got {len(e.args)}", e.span
            )
        m = _Matcher(self, ctx, scheme, e)
        if e.sargs:
            if len(e.sargs) > len(scheme.svars):
                raise RuleMismatch("ty-cst", f"too many static arguments for {e.name}", e.span)
            for (v, srt), s in zip(scheme.svars, e.sargs):
                got = self.sort_of(ctx, s, e.span)
                if not st.sort_leq(got, srt):
                    raise SortError("ty-cst", f"static argument {st.show(s)} has sort {got}, expected {srt}", e.span)
                m.binds[v] = s
        deferred = []
        for i, (a, p) in enumerate(zip(e.args, scheme.params)):
            if i == 0 and first is not None:
                m.match(p, first, a.span)
                continue
            if _needs_expected(a):
                deferred.append(i)
                continue
            elab[i], ta = self.synth(ctx, a)
            m.match(p, ta, getattr(a, "span", None))
        if expected is not None:
            m.soft_match(scheme.result, expected)
        m.resolve_roles()
        for i in deferred:
            elab[i] = self.check(ctx, e.args[i], m.instantiate(scheme.params[i]))
        m.finish()
        result = m.result()
        inst = tuple(m.instantiate(st.FVar(v)) for v, _ in scheme.svars)
        return replace(e, args=tuple(elab), inst=inst), result

    # ------------------------------------------------------------ programs

    def check_fun(self, fd: dy.FunDef) -> dy.FunDef:
        ctx = Ctx(dict(fd.svars), (fd.guard,) if fd.guard != st.TRUE else ())
        for _, t in fd.params:
            self.sort_of(ctx, t, fd.span)
        self.sort_of(ctx, fd.result, fd.span)
        self.gamma, self.delta, self.used = {}, {}, set()
        saved = [(x, self.bind(ctx, x, t)) for x, t in fd.params]
        body = self.check(ctx, fd.body, fd.result)
        for x, s in reversed(saved):
            self.unbind(x, s, fd.span, "ty-lam-l")
        return replace(fd, body=body)

    def check_closed(self, e: dy.Term, expected=None, ctx: Ctx | None = None) -> tuple[dy.Term, Any]:
        ctx = ctx or Ctx()
        self.gamma, self.delta, self.used = {}, {}, set()
        if expected is None:
            return self.synth(ctx, e)
        return self.check(ctx, e, expected), expected


def _widen(t):
    t = st.beta_normalize(t)
    h, args = _head(t)
    if h in ("int", "bool") and args:
        return st.C(h)
    if h in ("tup", "ltup"):
        return st.C(h, _widen(args[0]), _widen(args[1]))
    return t


def _needs_expected(a: dy.Term) -> bool:
    if isinstance(a, dy.Lam) and a.ann is None:
        return True
    if isinstance(a, (dy.GuardIntro, dy.AssertIntro)):
        return True
    if isinstance(a, dy.ExistsIntro) and a.annot is None:
        return True
    return False


class _Matcher:
    """First-order matching of scheme parameters against argument types."""

    def __init__(self, checker: Checker, ctx: Ctx, scheme: Scheme, e: dy.Cst) -> None:
        self.ch = checker
        self.ctx = ctx
        self.scheme = scheme
        self.e = e
        self.sorts = scheme.sorts
        self.metas = frozenset(self.sorts)
        self.binds: dict[str, Any] = {}
        self.obls: list = []  # (actual, pattern, sort, span)
        self.opened: dict[str, st.Sort] = {}

    def _sorts(self, local):
        out = dict(self.ctx.sigma)
        out.update(self.opened)
        out.update(local)
        return out

    def match(self, pat, act, span) -> None:
        self._m(st.beta_normalize(pat), st.beta_normalize(act), VTYPE, span, {}, hard=True)

    def soft_match(self, pat, act) -> None:
        try:
            self._m(st.beta_normalize(pat), st.beta_normalize(act), VTYPE, None, {}, hard=False)
        except TypeCheckError:
            pass

    def _fail(self, pat, act, span, hard):
        if not hard:
            raise RuleMismatch("ty-cst", "soft", span)
        shown = st.show(st.subst(pat, {k: v for k, v in self.binds.items()}))
        raise RuleMismatch(
            "ty-cst", f"{self.e.name}: expected an argument of type {_clean(shown)}, found {st.show(act)}", span
        )

    def _m(self, p, a, sort, span, local, hard) -> None:
        if isinstance(p, st.FVar) and p.name in self.metas:
            if p.name not in self.binds:
                if st.free_vars(a) & set(local):
                    self._fail(p, a, span, hard)
                self.binds[p.name] = a
            elif hard:
                self.obls.append((a, p, sort, span))
            return
        if not _has_meta(p, self.metas) or sort in (INT, BOOL):
            if hard:
                if local and st.free_vars(p) & set(local):
                    # compare under the binder right away
                    goals = self._local_goal(p, a, sort, local)
                    if goals is None:
                        self._fail(p, a, span, hard)
                    self.obls.append(("goal", goals, local, span))
                else:
                    self.obls.append((a, p, sort, span))
            return
        if isinstance(p, st.Lam) and isinstance(a, st.Lam):
            if p.sort != a.sort:
                self._fail(p, a, span, hard)
            v = st.fresh_name(p.hint)
            cod = sort.cod if isinstance(sort, st.Arrow) else STYPE
            self._m(
                st.beta_normalize(st.open_term(p.body, st.FVar(v))),
                st.beta_normalize(st.open_term(a.body, st.FVar(v))),
                cod,
                span,
                {**local, v: p.sort},
                hard,
            )
            return
        hp, ap = _head(p)
        ha, aa = _head(a)
        if hp is None or ha is None:
            self._fail(p, a, span, hard)
        if hp == ha and len(ap) == len(aa):
            for x, y, s in zip(ap, aa, self._arg_sorts(p, local)):
                self._m(x, y, s, span, local, hard)
            return
        if (hp, ha) in (("-o", "->"), ("ltup", "tup")) and len(ap) == len(aa):
            for x, y in zip(ap, aa):
                self._m(x, y, VTYPE, span, local, hard)
            return
        if hp in ("int", "bool") and ha == hp and len(ap) == 1 and not aa:
            meta = ap[0]
            if (
                self.e.name not in self.ch.funs
                and isinstance(meta, st.FVar)
                and meta.name in self.metas
                and meta.name not in self.binds
            ):
                v = st.fresh_name(meta.name.lstrip("?"))
                self.opened[v] = INT if hp == "int" else BOOL
                self.binds[meta.name] = st.FVar(v)
                return
        self._fail(p, a, span, hard)

    def _arg_sorts(self, p: st.Const, local) -> list:
        entries = [cs for cs in self.ch.sig.lookup(p.name) if len(cs.args) == len(p.args)]
        if p.name in ("int", "bool") and len(p.args) == 1:
            return [INT if p.name == "int" else BOOL]
        if len(entries) == 1:
            out = []
            for s in entries[0].args:
                if isinstance(s, st.Base) and s.name.endswith("*"):
                    out.append(VTYPE)
                elif isinstance(s, st.Arrow) and isinstance(s.cod, st.Base) and s.cod.name.endswith("*"):
                    out.append(st.Arrow(s.dom, VTYPE))
                else:
                    out.append(s)
            return out
        return [VTYPE] * len(p.args)

    def _local_goal(self, p, a, sort, local):
        sorts = self._sorts(local)
        if sort in (INT, BOOL):
            return [st.eq(a, p)]
        obl = st.equality_obligations(a, p, sort, sorts, self.ch.sig)
        if obl is None:
            return None
        return [st.eq(x, y) for x, y, _ in obl]

    def resolve_roles(self) -> None:
        guard = self.scheme.guard
        pending = [r for r in self.sorts if r in self.scheme.roles and r not in self.binds]
        for r in pending:
            cands = [st.IntLit(0), st.IntLit(1)]
            for b in list(self.binds.values()):
                cands.append(st.C("-", st.IntLit(1), b))
            for cand in cands:
                trial = dict(self.binds)
                trial[r] = cand
                g = st.subst(guard, trial)
                if st.free_vars(g) & self.metas:
                    continue
                if isinstance(entails(self.ctx.store(self.opened), g), Valid):
                    self.binds[r] = st.beta_normalize(cand)
                    break

    def instantiate(self, t):
        missing = (st.free_vars(t) & self.metas) - set(self.binds)
        if missing:
            names = ", ".join(sorted(m.lstrip("?") for m in missing))
            raise CannotInferStatics(
                "ty-cst", f"cannot infer static argument(s) {names} of {self.e.name}; give them explicitly", self.e.span
            )
        return st.beta_normalize(st.subst(t, self.binds))

    def finish(self) -> None:
        for v, _ in self.scheme.svars:
            self.instantiate(st.FVar(v))
        goals = []
        for item in self.obls:
            if item[0] == "goal":
                _, gs, local, span = item
                goals.extend(st.subst(g, self.binds) for g in gs)
                self.opened.update(local)
                continue
            a, p, sort, span = item
            pi = self.instantiate(p)
            if sort in (INT, BOOL):
                goals.append(st.eq(a, pi))
                continue
            if sort != VTYPE:
                sorts = self._sorts({})
                obl = st.equality_obligations(a, pi, sort, sorts, self.ch.sig)
                if obl is None:
                    raise RuleMismatch(
                        "ty-cst", f"{self.e.name}: expected {st.show(pi)}, found {st.show(a)}", span
                    )
                self.opened.update({k: v for k, v in sorts.items() if k not in self.ctx.sigma})
                goals.extend(st.eq(x, y) for x, y, _ in obl)
                continue
            gs = self.ch.subtype_goal(self.ctx, a, pi, self.opened)
            if gs is None:
                raise RuleMismatch(
                    "ty-cst", f"{self.e.name}: expected an argument of type {st.show(pi)}, found {st.show(a)}", span
                )
            goals.extend(gs)
        if goals:
            self.ch.entail(
                self.ctx,
                st.conj(*goals),
                self.e.span,
                "ty-cst",
                f"{self.e.name}: argument types do not match",
                extra=self.opened,
            )
        guard = self.instantiate(self.scheme.guard)
        if guard != st.TRUE:
            self.ch.entail(self.ctx, guard, self.e.span, "ty-cst", f"guard of {self.e.name}", extra=self.opened)

    def result(self):
        res = self.instantiate(self.scheme.result)
        if self.opened:
            res = _forget(res, set(self.opened))
            if st.free_vars(res) & set(self.opened):
                raise CannotInferStatics(
                    "ty-cst", f"result of {self.e.name} depends on an unindexed argument", self.e.span
                )
        return res


def _forget(t, names: set):
    h, args = _head(t)
    if h in ("int", "bool") and args and st.free_vars(args[0]) & names:
        return st.C(h)
    if h in ("tup", "ltup", "->", "-o"):
        return st.C(h, *(_forget(a, names) for a in args))
    return t


def _clean(s: str) -> str:
    return s.replace("?", "")


# ---------------------------------------------------------------- pools


def typecheck_pool(
    threads: Mapping[int, dy.Term],
    endpoint_type: Callable[[int, int], Any],
    live: set,
    main_type,
    funs: Mapping[str, dy.FunDef] | None = None,
    sigma: Mapping[str, st.Sort] | None = None,
    props: tuple = (),
    sig: st.StaticSignature | None = None,
):
    """Main thread at ``main_type``, every other thread at unit, endpoints used once."""
    ch = Checker(funs, sig, endpoint_type)
    ctx = Ctx(dict(sigma or {}), tuple(props))
    seen: dict = {}
    for t in sorted(threads):
        term = threads[t]
        for key, n in dy.rho(term).items():
            seen[key] = seen.get(key, 0) + n
        ch.check_closed(term, main_type if t == 0 else st.UNIT, ctx)
    keys = {("ch", c, r) for c, r in live}
    for key, n in seen.items():
        if key[0] == "ch" and (n != 1 or key not in keys):
            raise EndpointMultiplicity("ty-pool", f"endpoint {key[1]}.{key[2]} occurs {n} time(s)")
    missing = keys - set(seen)
    if missing:
        c, r = sorted(missing)[0][1:]
        raise EndpointMultiplicity("ty-pool", f"live endpoint {c}.{r} is held by no thread")
    return main_type


def typecheck(env: TypingEnv, funs: Mapping[str, dy.FunDef] | None, e: dy.Term, expected=None):
    """Judgment form: returns (type, consumed linear variables)."""
    ch = Checker(funs)
    ch.gamma = dict(env.gamma)
    ch.delta = dict(env.delta)
    ch.used = set()
    ctx = Ctx(dict(env.sigma), tuple(env.props))
    if expected is None:
        _, ty = ch.synth(ctx, e)
    else:
        ch.check(ctx, e, expected)
        ty = expected
    return ty, set(ch.used)


erase_proofs = dy.erase_proofs
