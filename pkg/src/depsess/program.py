"""Whole-program checking: functions at their declared types, then main."""

from __future__ import annotations

from dataclasses import dataclass, replace

from . import dynamics as dy
from .checker import Checker
from .syntax.parser import Program, parse_program


@dataclass
class CheckedProgram:
    program: Program
    funs: dict  # name -> elaborated FunDef
    main: dy.Term
    main_type: object

    def erased(self) -> tuple[dict, dy.Term]:
        return {n: dy.erase_fun(f) for n, f in self.funs.items()}, dy.erase_proofs(self.main)


def check_program(prog: Program) -> CheckedProgram:
    """Raise a TypeCheckError on the first rejected definition."""
    table = prog.fun_table()
    ch = Checker(table, prog.sig)
    funs = {}
    for f in prog.funs:
        funs[f.name] = ch.check_fun(f)
    main = prog.main if prog.main is not None else dy.Unit()
    ch = Checker(funs, prog.sig)
    elab, ty = ch.check_closed(main, prog.main_type)
    return CheckedProgram(prog, funs, elab, ty)


def load(path: str) -> Program:
    with open(path, encoding="utf-8") as fh:
        return parse_program(fh.read(), file=str(path))
