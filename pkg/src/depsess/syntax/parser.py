"""Surface syntax to statics/dynamics ASTs.

Static terms::

    3 true S C n unit int string (int n) (bool b) (arrref a n)
    (tup a b) (ltup a b) (-> a b) (-o a b) (guard P t) (assert P t) (chan r p)
    (end r) (msg r t p) (branch r p q) (ite b p q)
    (quan r [n : int] p) (fix [p : stype] body) (hofix F args...)
    (forall [a : sort] t) (exists [a : sort] t) (lam [a : sort] s) (f s...)

Dynamic terms::

    3 "s" true () x (let ([x e] [x : t e] [_ e] [(pair x y) e]
    [(exists a x) e] [(assert x) e]) body) (begin e...) (if c a b)
    (pair a b) (fst e) (snd e) (lam x e) (lam [x : t] e) (app f a)
    (inst e s...) (tlam [a : sort] v) (pack s e) (the t e)
    (guard-intro e) (guard-elim e) (assert-intro e) (array t e...)
    (op {s...} e...)
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Optional

from .. import dynamics as dy
from .. import statics as st
from ..statics import BOOL, INT, STYPE, TYPE, VTYPE
from .reader import Atom, ParseError, SList, read_all

SORT_NAMES = {"int": INT, "bool": BOOL, "type": TYPE, "vtype": VTYPE, "stype": STYPE}
ROLE_NAMES = {"S": st.S_ROLE, "C": st.C_ROLE}
BUILTIN_OPS = dy.SESSION_OPS | dy.PRIMS
_STATIC_ALIASES = {"void": "unit"}
_ETA = "eta"


@dataclass(frozen=True)
class StypeDef:
    name: str
    params: tuple  # ((name, Sort), ...)
    template: object  # static term over FVar("$param")


@dataclass
class Program:
    externs: list = field(default_factory=list)  # (name, CSort)
    stypes: list = field(default_factory=list)  # StypeDef
    funs: list = field(default_factory=list)  # FunDef
    main: Optional[dy.Term] = None
    main_type: object = None
    sig: st.StaticSignature = field(default_factory=st.StaticSignature)

    def fun_table(self) -> dict:
        return {f.name: f for f in self.funs}

    def same_as(self, other: "Program") -> bool:
        """Structural equality ignoring source spans."""
        key = lambda p: (  # noqa: E731
            p.externs,
            p.stypes,
            [(f.name, f.svars, f.guard, f.params, f.result, f.body) for f in p.funs],
            p.main,
            p.main_type,
        )
        return key(self) == key(other)


def _placeholder(name: str) -> str:
    return "$" + name


class _Parser:
    def __init__(self, prog: Program) -> None:
        self.prog = prog
        self.macros: dict[str, StypeDef] = {}
        self.fun_arity: dict[str, int] = {}
        self.recursive: Optional[StypeDef] = None

    # ------------------------------------------------------------ helpers

    @staticmethod
    def err(msg: str, node) -> ParseError:
        return ParseError(msg, getattr(node, "span", None))

    @staticmethod
    def sym(node) -> Optional[str]:
        if isinstance(node, Atom) and not node.string:
            return node.text
        return None

    def head(self, node) -> Optional[str]:
        if isinstance(node, SList) and node.kind == "(" and node.items:
            return self.sym(node.items[0])
        return None

    def binder(self, node, what: str = "binder") -> tuple[str, object]:
        """``[name : sort-or-type]``, returning the name and the raw second half."""
        if not (isinstance(node, SList) and node.kind == "[" and len(node.items) >= 3):
            raise self.err(f"expected [name : ...] {what}", node)
        name = self.sym(node.items[0])
        if name is None or self.sym(node.items[1]) != ":":
            raise self.err(f"malformed {what}", node)
        return name, node.items[2:]

    def sort(self, node) -> st.Sort:
        s = self.sym(node)
        if s in SORT_NAMES:
            return SORT_NAMES[s]
        if s in ("role", "nat"):
            return INT
        if isinstance(node, SList) and self.head(node) == "->" and len(node.items) >= 3:
            parts = [self.sort(x) for x in node.items[1:]]
            return st.arrows(parts[:-1], parts[-1])
        raise self.err(f"unknown sort {s or '(...)'}", node)

    # ------------------------------------------------------------ statics

    def static(self, node, scope: frozenset):
        if isinstance(node, Atom):
            if node.string:
                raise self.err("string literal in a static term", node)
            t = node.text
            if t.lstrip("-").isdigit():
                return st.IntLit(int(t))
            if t in ("true", "false"):
                return st.BoolLit(t == "true")
            if t in ROLE_NAMES:
                return ROLE_NAMES[t]
            if t in scope:
                return st.FVar(_placeholder(t) if self.recursive and t in self._params else t)
            t = _STATIC_ALIASES.get(t, t)
            if t in self.macros and not self.macros[t].params:
                return self.macros[t].template
            if self.recursive is not None and t == self.recursive.name and not self.recursive.params:
                return st.C("$rec")
            if t in self.prog.sig:
                return st.C(t)
            raise self.err(f"unknown static name {t}", node)
        if not isinstance(node, SList) or node.kind != "(" or not node.items:
            raise self.err("malformed static term", node)
        h = self.sym(node.items[0])
        args = node.items[1:]
        if h in ("quan", "forall", "exists", "lam", "fix"):
            return self._static_binder(h, node, args, scope)
        if h == "hofix":
            if not args:
                raise self.err("hofix needs a body", node)
            fn = self.static(args[0], scope)
            if not (isinstance(fn, st.Lam) and isinstance(fn.sort, st.Arrow)):
                raise self.err("hofix body must be (lam [p : (-> ... stype)] ...)", args[0])
            sorts, s = [], fn.sort
            while isinstance(s, st.Arrow):
                sorts.append(s.dom)
                s = s.cod
            return st.hofix(sorts, fn, *(self.static(a, scope) for a in args[1:]))
        if h is not None and self.recursive is not None and h == self.recursive.name:
            return st.C("$rec", *(self.static(a, scope) for a in args))
        if h is not None and h in self.macros and h not in scope:
            d = self.macros[h]
            if len(args) != len(d.params):
                raise self.err(f"{h} expects {len(d.params)} argument(s)", node)
            vals = [self.static(a, scope) for a in args]
            return st.subst(d.template, {_placeholder(p): v for (p, _), v in zip(d.params, vals)})
        if h is not None and h not in scope:
            name = _STATIC_ALIASES.get(h, h)
            if name in ("and", "or") and len(args) > 2:
                vals = [self.static(a, scope) for a in args]
                out = vals[0]
                for v in vals[1:]:
                    out = st.C(name, out, v)
                return out
            if name == "-" and len(args) == 1:
                return st.C("neg", self.static(args[0], scope))
            if name in self.prog.sig:
                return st.C(name, *(self.static(a, scope) for a in args))
            raise self.err(f"unknown static constructor {h}", node)
        out = self.static(node.items[0], scope)
        for a in args:
            out = st.App(out, self.static(a, scope))
        return out

    def _static_binder(self, h, node, args, scope):
        if h == "quan":
            if len(args) != 3:
                raise self.err("quan expects a role, a binder and a body", node)
            role = self.static(args[0], scope)
            bnode, body = args[1], args[2]
        else:
            if len(args) != 2:
                raise self.err(f"{h} expects a binder and a body", node)
            role, bnode, body = None, args[0], args[1]
        name, rest = self.binder(bnode)
        if len(rest) != 1:
            raise self.err("binder sort missing", bnode)
        srt = self.sort(rest[0])
        if h == "fix" and srt != STYPE:
            raise self.err("fix binds a variable of sort stype", bnode)
        saved = self._params
        inner = self._shadow(name, scope)
        try:
            b = self.static(body, inner)
        finally:
            self._params = saved
        fn = st.Lam(srt, st.close_term(b, name), name)
        if h == "quan":
            return st.quan(srt, role, fn)
        if h == "forall":
            return st.forall(srt, fn)
        if h == "exists":
            return st.exists(srt, fn)
        if h == "fix":
            return st.fix(fn)
        return fn

    _params: frozenset = frozenset()

    def _shadow(self, name, scope):
        if self.recursive is not None and name in self._params:
            # a binder inside a definition hides the parameter of the same name
            self._params = self._params - {name}
        return scope | {name}

    # ------------------------------------------------------------ stype definitions

    def defstype(self, node) -> StypeDef:
        items = node.items
        if len(items) != 3:
            raise self.err("(defstype (name [p : sort] ...) body)", node)
        sig = items[1]
        if isinstance(sig, SList) and sig.kind == "(":
            name = self.sym(sig.items[0]) if sig.items else None
            params = []
            for b in sig.items[1:]:
                p, rest = self.binder(b, "parameter")
                params.append((p, self.sort(rest[0])))
        else:
            name, params = self.sym(sig), []
        if name is None:
            raise self.err("stype name expected", sig)
        if name in self.macros or name in self.prog.sig:
            raise self.err(f"{name} is already defined", sig)
        d = StypeDef(name, tuple(params), None)
        self.recursive = d
        self._params = frozenset(p for p, _ in params)
        try:
            body = self.static(items[2], frozenset(p for p, _ in params))
        finally:
            self.recursive = None
            self._params = frozenset()
        template = _desugar_recursion(name, tuple(params), body, node, self)
        d = StypeDef(name, tuple(params), template)
        self.macros[name] = d
        return d

    # ------------------------------------------------------------ dynamics

    def dyn(self, node, scope: frozenset, sscope: frozenset) -> dy.Term:
        sp = getattr(node, "span", None)
        if isinstance(node, Atom):
            if node.string:
                return dy.StrV(node.text, span=sp)
            t = node.text
            if t.lstrip("-").isdigit():
                return dy.IntV(int(t), span=sp)
            if t in ("true", "false"):
                return dy.BoolV(t == "true", span=sp)
            if t in scope:
                return dy.Var(t, span=sp)
            if t in self.fun_arity:
                if self.fun_arity[t] != 1:
                    raise self.err(f"function {t} takes {self.fun_arity[t]} arguments; wrap it in a lambda", node)
                return dy.Lam(_ETA, dy.Cst(t, (dy.Var(_ETA, span=sp),), span=sp), span=sp)
            return dy.Var(t, span=sp)
        if not isinstance(node, SList):
            raise self.err("malformed term", node)
        if node.kind != "(":
            raise self.err("unexpected bracket in a term", node)
        if not node.items:
            return dy.Unit(span=sp)
        h = self.sym(node.items[0])
        args = node.items[1:]
        D = lambda n, sc=scope, ss=sscope: self.dyn(n, sc, ss)  # noqa: E731

        def arity(k):
            if len(args) != k:
                raise self.err(f"{h} expects {k} argument(s)", node)

        if h == "let":
            if len(args) != 2 or not isinstance(args[0], SList) or args[0].kind != "(":
                raise self.err("(let ([x e] ...) body)", node)
            return self._let(list(args[0].items), args[1], scope, sscope)
        if h == "begin":
            if not args:
                return dy.Unit(span=sp)
            out = D(args[-1])
            for a in reversed(args[:-1]):
                out = dy.App(dy.Lam("_", out, span=a.span), D(a), span=a.span)
            return out
        if h == "if":
            arity(3)
            return dy.If(D(args[0]), D(args[1]), D(args[2]), span=sp)
        if h == "pair":
            arity(2)
            return dy.Pair(D(args[0]), D(args[1]), span=sp)
        if h in ("fst", "snd"):
            arity(1)
            return (dy.Fst if h == "fst" else dy.Snd)(D(args[0]), span=sp)
        if h == "lam":
            arity(2)
            if isinstance(args[0], SList):
                x, rest = self.binder(args[0], "parameter")
                ann = self.static(rest[0], sscope)
            else:
                x, ann = self.sym(args[0]), None
                if x is None:
                    raise self.err("lambda parameter expected", args[0])
            return dy.Lam(x, D(args[1], scope | {x}), ann=ann, span=sp)
        if h == "app":
            arity(2)
            return dy.App(D(args[0]), D(args[1]), span=sp)
        if h == "inst":
            if len(args) < 2:
                raise self.err("(inst e s ...)", node)
            out = D(args[0])
            for s in args[1:]:
                out = dy.ForallElim(out, self.static(s, sscope), span=sp)
            return out
        if h == "tlam":
            arity(2)
            a, rest = self.binder(args[0])
            return dy.ForallIntro(a, self.sort(rest[0]), D(args[1], scope, sscope | {a}), span=sp)
        if h == "pack":
            arity(2)
            return dy.ExistsIntro(D(args[1]), witness=self.static(args[0], sscope), span=sp)
        if h == "the":
            arity(2)
            return dy.Ann(D(args[1]), self.static(args[0], sscope), span=sp)
        if h in ("guard-intro", "guard-elim", "assert-intro"):
            arity(1)
            cls = {"guard-intro": dy.GuardIntro, "guard-elim": dy.GuardElim, "assert-intro": dy.AssertIntro}[h]
            return cls(D(args[0]), span=sp)
        if h == "array":
            if not args:
                raise self.err("(array type e ...)", node)
            return dy.ArrV(self.static(args[0], sscope), tuple(D(a) for a in args[1:]), span=sp)
        if h is not None and h not in scope and (h in BUILTIN_OPS or h in self.fun_arity):
            sargs: tuple = ()
            if args and isinstance(args[0], SList) and args[0].kind == "{":
                sargs = tuple(self.static(s, sscope) for s in args[0].items)
                args = args[1:]
            return dy.Cst(h, tuple(D(a) for a in args), sargs=sargs, span=sp)
        out = D(node.items[0])
        if not args:
            raise self.err("empty application", node)
        for a in args:
            out = dy.App(out, D(a), span=sp)
        return out

    def _let(self, binders, body, scope, sscope) -> dy.Term:
        if not binders:
            return self.dyn(body, scope, sscope)
        b = binders[0]
        if not (isinstance(b, SList) and b.kind == "["):
            raise self.err("let binder must be [pattern e]", b)
        sp = b.span
        items = b.items
        pat = items[0] if items else None
        if pat is not None and len(items) == 4 and self.sym(items[1]) == ":":
            x = self.sym(pat)
            ann = self.static(items[2], sscope)
            bound = self.dyn(items[3], scope, sscope)
            inner = self._let(binders[1:], body, scope | {x}, sscope)
            return dy.App(dy.Lam(x, inner, ann=ann, span=sp), bound, span=sp)
        if len(items) != 2:
            raise self.err("let binder must be [pattern e]", b)
        bound = self.dyn(items[1], scope, sscope)
        x = self.sym(pat)
        if x is not None:
            inner = self._let(binders[1:], body, scope | {x}, sscope)
            return dy.App(dy.Lam(x, inner, span=sp), bound, span=sp)
        ph = self.head(pat)
        names = [self.sym(p) for p in pat.items[1:]] if isinstance(pat, SList) else []
        if None in names:
            raise self.err("pattern variables must be names", pat)
        if ph == "pair" and len(names) == 2:
            inner = self._let(binders[1:], body, scope | set(names), sscope)
            return dy.LetPair(names[0], names[1], bound, inner, span=sp)
        if ph == "exists" and len(names) == 2:
            a, x = names
            inner = self._let(binders[1:], body, scope | {x}, sscope | {a})
            return dy.LetExists(a, x, bound, inner, span=sp)
        if ph == "assert" and len(names) == 1:
            inner = self._let(binders[1:], body, scope | {names[0]}, sscope)
            return dy.LetAssert(names[0], bound, inner, span=sp)
        raise self.err("unknown let pattern", pat)

    # ------------------------------------------------------------ top level

    def defun(self, node) -> dy.FunDef:
        items = node.items
        if len(items) != 4 or not isinstance(items[1], SList) or not items[1].items:
            raise self.err("(defun (f {a : sort} [x : type] ...) type body)", node)
        head = items[1].items
        name = self.sym(head[0])
        svars, guards, params = [], [], []
        sscope: frozenset = frozenset()
        for part in head[1:]:
            if isinstance(part, SList) and part.kind == "{":
                a, rest = self.binder(SList("[", part.items, part.span), "static parameter")
                srt_node = rest[0]
                srt = self.sort(srt_node)
                svars.append((a, srt))
                sscope = sscope | {a}
                kind = self.sym(srt_node)
                if kind == "role":
                    guards.append(st.role_prop(st.FVar(a)))
                elif kind == "nat":
                    guards.append(st.C(">=", st.FVar(a), st.IntLit(0)))
                if len(rest) > 1:
                    if self.sym(rest[1]) != "|" or len(rest) != 3:
                        raise self.err("expected {a : sort | proposition}", part)
                    guards.append(self.static(rest[2], sscope))
            else:
                x, rest = self.binder(part, "parameter")
                if len(rest) != 1:
                    raise self.err("parameter type missing", part)
                params.append((x, self.static(rest[0], sscope)))
        result = self.static(items[2], sscope)
        body = self.dyn(items[3], frozenset(x for x, _ in params), sscope)
        return dy.FunDef(name, tuple(svars), st.conj(*guards), tuple(params), result, body, span=node.span)

    def program(self, forms) -> Program:
        for f in forms:
            if self.head(f) == "defun" and len(f.items) > 1 and isinstance(f.items[1], SList):
                hd = f.items[1].items
                n = self.sym(hd[0]) if hd else None
                if n is None:
                    raise self.err("function name expected", f)
                if n in self.fun_arity or n in BUILTIN_OPS:
                    raise self.err(f"function {n} is already defined", f)
                self.fun_arity[n] = sum(1 for p in hd[1:] if isinstance(p, SList) and p.kind == "[")
        for f in forms:
            h = self.head(f)
            if h == "extern-type":
                if len(f.items) != 4 or not isinstance(f.items[2], SList):
                    raise self.err("(extern-type name (sort ...) sort)", f)
                name = self.sym(f.items[1])
                cs = st.CSort(tuple(self.sort(s) for s in f.items[2].items), self.sort(f.items[3]))
                try:
                    self.prog.sig.declare(name, cs)
                except st.StaticError as e:
                    raise self.err(str(e), f) from None
                self.prog.externs.append((name, cs))
            elif h == "defstype":
                self.prog.stypes.append(self.defstype(f))
            elif h == "defun":
                self.prog.funs.append(self.defun(f))
            elif h == "main":
                if self.prog.main is not None:
                    raise self.err("duplicate main", f)
                if len(f.items) == 3:
                    self.prog.main_type = self.static(f.items[1], frozenset())
                    self.prog.main = self.dyn(f.items[2], frozenset(), frozenset())
                elif len(f.items) == 2:
                    self.prog.main = self.dyn(f.items[1], frozenset(), frozenset())
                else:
                    raise self.err("(main [type] body)", f)
            else:
                raise self.err(f"unknown top-level form {h}", f)
        return self.prog


def _desugar_recursion(name, params, body, node, parser):
    calls = []

    def collect(t):
        if isinstance(t, st.Const):
            if t.name == "$rec":
                calls.append(t)
            for a in t.args:
                collect(a)
        elif isinstance(t, st.Lam):
            collect(t.body)
        elif isinstance(t, st.App):
            collect(t.fn)
            collect(t.arg)

    collect(body)
    if not calls:
        return body
    for c in calls:
        if len(c.args) != len(params):
            raise parser.err(f"{name} expects {len(params)} argument(s)", node)
    changing = [
        i for i, (p, _) in enumerate(params) if any(c.args[i] != st.FVar(_placeholder(p)) for c in calls)
    ]
    self_name = st.fresh_name(name)
    xs = {i: st.fresh_name(params[i][0]) for i in changing}

    def rewrite(t):
        if isinstance(t, st.Const):
            if t.name == "$rec":
                out = st.FVar(self_name)
                for i in changing:
                    out = st.App(out, rewrite(t.args[i]))
                return out
            return st.Const(t.name, tuple(rewrite(a) for a in t.args))
        if isinstance(t, st.Lam):
            return st.Lam(t.sort, rewrite(t.body), t.hint)
        if isinstance(t, st.App):
            return st.App(rewrite(t.fn), rewrite(t.arg))
        if isinstance(t, st.FVar):
            for i in changing:
                if t.name == _placeholder(params[i][0]):
                    return st.FVar(xs[i])
        return t

    inner = rewrite(body)
    if not changing:
        return st.fix(st.Lam(STYPE, st.close_term(inner, self_name), name[:1] or "p"))
    sorts = [params[i][1] for i in changing]
    for i in reversed(changing):
        inner = st.Lam(params[i][1], st.close_term(inner, xs[i]), params[i][0])
    fn = st.Lam(st.arrows(sorts, STYPE), st.close_term(inner, self_name), name[:1] or "p")
    return st.hofix(sorts, fn, *(st.FVar(_placeholder(params[i][0])) for i in changing))


def parse_program(text: str, file: str = "") -> Program:
    return _Parser(Program()).program(read_all(text, file))


def parse_static(text: str, scope=(), program: Program | None = None):
    forms = read_all(text)
    if len(forms) != 1:
        raise ParseError("expected one static term")
    p = _Parser(program or Program())
    if program is not None:
        p.macros = {d.name: d for d in program.stypes}
    return p.static(forms[0], frozenset(scope))


def parse_term(text: str, program: Program | None = None, scope=(), sscope=()) -> dy.Term:
    forms = read_all(text)
    if len(forms) != 1:
        raise ParseError("expected one term")
    p = _Parser(program or Program())
    if program is not None:
        p.macros = {d.name: d for d in program.stypes}
        p.fun_arity = {f.name: len(f.params) for f in program.funs}
    return p.dyn(forms[0], frozenset(scope), frozenset(sscope))
