"""Command-line driver: check, run, explore, trace.

Exit codes: 0 ok, 1 parse or type error, 2 deadlock or stuck pool,
3 inconclusive (step or state budget exhausted).
"""

from __future__ import annotations

import argparse
import json
import sys
from typing import Sequence

from . import dynamics as dy
from .errors import TypeCheckError
from .program import CheckedProgram, check_program, load
from .runtime import (
    DEFAULT_EXPLORE_BUDGET,
    DEFAULT_MAX_STEPS,
    AuditFailure,
    PoolTypeError,
    explore,
    run,
)
from .runtime.pool import summarize
from .syntax import ParseError

EXIT_OK, EXIT_TYPE, EXIT_RUNTIME, EXIT_INCONCLUSIVE = 0, 1, 2, 3


def show_value(v: dy.Term) -> str:
    s = summarize(v)
    return _fmt(s)


def _fmt(s) -> str:
    if isinstance(s, bool):
        return "true" if s else "false"
    if isinstance(s, list):
        return "(" + ", ".join(_fmt(x) for x in s) + ")"
    if isinstance(s, str) and not s.startswith(("(", "<", "ep(")):
        return json.dumps(s)
    return str(s)


def _load_checked(path: str) -> CheckedProgram | int:
    try:
        return check_program(load(path))
    except OSError as e:
        print(f"error: cannot read {path}: {e.strerror}", file=sys.stderr)
        return EXIT_TYPE
    except (ParseError, TypeCheckError) as e:
        print(e.render(), file=sys.stderr)
        return EXIT_TYPE


def cmd_check(args) -> int:
    cp = _load_checked(args.file)
    if isinstance(cp, int):
        return cp
    print(f"ok: {len(cp.funs)} function(s), main : {_show_static(cp.main_type)}")
    return EXIT_OK


def _show_static(t) -> str:
    from .statics import show

    return show(t) if t is not None else "?"


def _execute(args, on_step=None):
    cp = _load_checked(args.file)
    if isinstance(cp, int):
        return cp, None
    typed = args.typed
    funs, main = (cp.funs, cp.main) if typed else cp.erased()
    try:
        out = run(
            funs,
            main,
            seed=args.seed,
            round_robin=args.round_robin,
            buffered=args.buffered,
            max_steps=args.max_steps,
            typed=typed,
            main_type=cp.main_type,
            check_each_step=typed,
            audit=True,
            on_step=on_step,
            sig=cp.program.sig,
        )
    except PoolTypeError as e:
        print(f"{e}\n{e.err.render()}", file=sys.stderr)
        return EXIT_RUNTIME, None
    except AuditFailure as e:
        print(f"audit failed: {e}", file=sys.stderr)
        return EXIT_RUNTIME, None
    return None, out


def _report(out) -> int:
    for v in out.output:
        print(f"print: {_fmt(v)}")
    if out.kind == "Terminated":
        print(f"main: {show_value(out.value)}")
        print(f"terminated after {out.steps} steps")
        return EXIT_OK
    print(f"{out.kind} after {out.steps} steps", file=sys.stderr)
    if out.report:
        print(out.report, file=sys.stderr)
    return EXIT_INCONCLUSIVE if out.kind == "DepthExceeded" else EXIT_RUNTIME


def cmd_run(args) -> int:
    sink = open(args.trace, "w", encoding="utf-8") if args.trace else None
    try:
        on_step = (lambda rec: sink.write(json.dumps(rec) + "\n")) if sink else None
        code, out = _execute(args, on_step)
    finally:
        if sink:
            sink.close()
    return code if out is None else _report(out)


def cmd_trace(args) -> int:
    code, out = _execute(args, lambda rec: print(json.dumps(rec)))
    if out is None:
        return code
    if out.kind != "Terminated":
        print(f"{out.kind}: {out.report}", file=sys.stderr)
        return EXIT_INCONCLUSIVE if out.kind == "DepthExceeded" else EXIT_RUNTIME
    return EXIT_OK


def cmd_explore(args) -> int:
    cp = _load_checked(args.file)
    if isinstance(cp, int):
        return cp
    funs, main = cp.erased()
    res = explore(
        funs, main, budget=args.budget, depth=args.depth, buffered=args.buffered, reduce=not args.no_reduce
    )
    print(f"{res.kind}: {res.states} states in {res.elapsed:.2f}s")
    if res.kind == "DeadlockFound":
        print("schedule: " + " ".join(res.trace), file=sys.stderr)
        print(res.report, file=sys.stderr)
        return EXIT_RUNTIME
    return EXIT_OK if res.kind == "AllPathsProgress" else EXIT_INCONCLUSIVE


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="depsess", description="Dependent session types: check, run and explore .sess programs.")
    sub = ap.add_subparsers(dest="cmd", required=True)

    p = sub.add_parser("check", help="type-check a program")
    p.add_argument("file")
    p.set_defaults(fn=cmd_check)

    for name, fn, hlp in (("run", cmd_run, "run one schedule"), ("trace", cmd_trace, "run and print JSON trace records")):
        p = sub.add_parser(name, help=hlp)
        p.add_argument("file")
        sched = p.add_mutually_exclusive_group()
        sched.add_argument("--seed", type=int, default=1)
        sched.add_argument("--round-robin", action="store_true")
        p.add_argument("--buffered", action="store_true", help="asynchronous sends into order-preserving queues")
        p.add_argument("--max-steps", type=int, default=DEFAULT_MAX_STEPS)
        p.add_argument("--typed", action="store_true", help="keep proof markers and re-typecheck the pool after each step")
        if name == "run":
            p.add_argument("--trace", metavar="OUT", help="write JSON trace records to OUT")
        p.set_defaults(fn=fn)

    p = sub.add_parser("explore", help="search all interleavings for deadlocks")
    p.add_argument("file")
    p.add_argument("--depth", type=int, default=DEFAULT_MAX_STEPS, help="maximum schedule length")
    p.add_argument("--budget", type=int, default=DEFAULT_EXPLORE_BUDGET, help="maximum distinct states")
    p.add_argument("--buffered", action="store_true")
    p.add_argument("--no-reduce", action="store_true", help="expand every interleaving of local steps too")
    p.set_defaults(fn=cmd_explore)
    return ap


def main(argv: Sequence[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    return args.fn(args)


if __name__ == "__main__":
    sys.exit(main())
