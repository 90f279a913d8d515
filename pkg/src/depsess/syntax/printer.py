"""Source printer; ``parse_program(print_program(p))`` rebuilds ``p``."""

from __future__ import annotations

import json

from .. import dynamics as dy
from .. import statics as st
from .parser import Program, StypeDef, _placeholder


def _sort(s: st.Sort) -> str:
    return str(s)


def _static(t, names=()) -> str:
    return st.show(t, names)


def print_term(e: dy.Term, indent: int = 0) -> str:
    return _Printer().term(e, indent)


class _Printer:
    def term(self, e: dy.Term, ind: int = 0) -> str:
        t = type(e)
        pad = "\n" + " " * (ind + 2)
        if t is dy.Var:
            return e.name
        if t is dy.IntV:
            return str(e.value)
        if t is dy.BoolV:
            return "true" if e.value else "false"
        if t is dy.StrV:
            return json.dumps(e.value)
        if t is dy.Unit:
            return "()"
        if t is dy.ArrV:
            return "(array " + " ".join([_static(e.elem)] + [self.term(x, ind) for x in e.items]) + ")"
        if t is dy.Pair:
            return f"(pair {self.term(e.fst, ind)} {self.term(e.snd, ind)})"
        if t in (dy.Fst, dy.Snd):
            return f"({'fst' if t is dy.Fst else 'snd'} {self.term(e.arg, ind)})"
        if t is dy.If:
            return (
                f"(if {self.term(e.cond, ind)}{pad}{self.term(e.then, ind + 2)}"
                f"{pad}{self.term(e.other, ind + 2)})"
            )
        if t is dy.Lam:
            x = e.x if e.ann is None else f"[{e.x} : {_static(e.ann)}]"
            return f"(lam {x}{pad}{self.term(e.body, ind + 2)})"
        if t is dy.App:
            if isinstance(e.fn, dy.Lam):
                lam = e.fn
                b = f"[{lam.x} {self.term(e.arg, ind + 6)}]"
                if lam.ann is not None:
                    b = f"[{lam.x} : {_static(lam.ann)} {self.term(e.arg, ind + 6)}]"
                return f"(let ({b}){pad}{self.term(lam.body, ind + 2)})"
            return f"(app {self.term(e.fn, ind)} {self.term(e.arg, ind)})"
        if t is dy.LetPair:
            b = f"[(pair {e.x1} {e.x2}) {self.term(e.bound, ind + 6)}]"
            return f"(let ({b}){pad}{self.term(e.body, ind + 2)})"
        if t is dy.LetExists:
            b = f"[(exists {e.a} {e.x}) {self.term(e.bound, ind + 6)}]"
            return f"(let ({b}){pad}{self.term(e.body, ind + 2)})"
        if t is dy.LetAssert:
            b = f"[(assert {e.x}) {self.term(e.bound, ind + 6)}]"
            return f"(let ({b}){pad}{self.term(e.body, ind + 2)})"
        if t is dy.Cst:
            parts = [e.name]
            if e.sargs:
                parts.append("{" + " ".join(_static(s) for s in e.sargs) + "}")
            parts += [self.term(a, ind) for a in e.args]
            return "(" + " ".join(parts) + ")"
        if t is dy.ForallElim:
            return f"(inst {self.term(e.arg, ind)} {_static(e.sarg)})"
        if t is dy.ForallIntro:
            return f"(tlam [{e.a} : {_sort(e.sort)}] {self.term(e.arg, ind)})"
        if t is dy.ExistsIntro:
            inner = f"(pack {_static(e.witness)} {self.term(e.arg, ind)})"
            return inner if e.annot is None else f"(the {_static(e.annot)} {inner})"
        if t is dy.Ann:
            return f"(the {_static(e.ty)} {self.term(e.arg, ind)})"
        if t in (dy.GuardIntro, dy.GuardElim, dy.AssertIntro):
            name = {dy.GuardIntro: "guard-intro", dy.GuardElim: "guard-elim", dy.AssertIntro: "assert-intro"}[t]
            return f"({name} {self.term(e.arg, ind)})"
        if t is dy.Endpoint:
            raise ValueError("endpoints have no source syntax")
        if t is dy.Resource:
            raise ValueError("resources have no source syntax")
        raise ValueError(f"cannot print {t.__name__}")


def _stype_def(d: StypeDef) -> str:
    # placeholders print as the parameter names
    ren = {_placeholder(p): st.FVar(p) for p, _ in d.params}
    body = _static(st.subst(d.template, ren))
    if not d.params:
        return f"(defstype {d.name} {body})"
    ps = " ".join(f"[{p} : {_sort(s)}]" for p, s in d.params)
    return f"(defstype ({d.name} {ps})\n  {body})"


def _fun(f: dy.FunDef) -> str:
    parts = [f.name]
    for i, (a, s) in enumerate(f.svars):
        if i == len(f.svars) - 1 and f.guard != st.TRUE:
            parts.append(f"{{{a} : {_sort(s)} | {_static(f.guard)}}}")
        else:
            parts.append(f"{{{a} : {_sort(s)}}}")
    parts += [f"[{x} : {_static(t)}]" for x, t in f.params]
    return f"(defun ({' '.join(parts)}) {_static(f.result)}\n  {print_term(f.body, 2)})"


def print_program(p: Program) -> str:
    out = []
    for name, cs in p.externs:
        out.append(f"(extern-type {name} ({' '.join(_sort(s) for s in cs.args)}) {_sort(cs.result)})")
    out += [_stype_def(d) for d in p.stypes]
    out += [_fun(f) for f in p.funs]
    if p.main is not None:
        ty = f"{_static(p.main_type)} " if p.main_type is not None else ""
        out.append(f"(main {ty}\n  {print_term(p.main, 2)})")
    return "\n\n".join(out) + "\n"
