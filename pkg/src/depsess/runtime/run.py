"""Schedulers, the run loop and the bounded state-space explorer."""

from __future__ import annotations

import random
import time
from dataclasses import dataclass, field
from typing import Callable, Mapping, Optional

from .. import dynamics as dy
from .. import statics as st
from ..errors import TypeCheckError
from .pool import (
    LOCAL_RULES,
    Engine,
    Event,
    IllegalStep,
    Pool,
    Step,
    TypedModeError,
    _scan,
    _steps_from_scan,
    audit_resources,
    canonical_key,
    summarize,
)

DEFAULT_MAX_STEPS = 100_000
DEFAULT_EXPLORE_BUDGET = 10_000


@dataclass
class Outcome:
    kind: str  # Terminated | Deadlock | Stuck | DepthExceeded
    value: Optional[dy.Term] = None
    steps: int = 0
    report: str = ""
    events: list = field(default_factory=list)
    pool: Optional[Pool] = None
    typechecks: int = 0
    audits: int = 0

    @property
    def output(self) -> tuple:
        return self.pool.output if self.pool else ()

    @property
    def ok(self) -> bool:
        return self.kind == "Terminated"


class AuditFailure(Exception):
    pass


class PoolTypeError(Exception):
    def __init__(self, step: int, err: TypeCheckError) -> None:
        super().__init__(f"pool ill-typed after step {step}: {err}")
        self.step, self.err = step, err


def trace_record(n: int, step: Step, pool: Pool, events: list[Event]) -> dict:
    rec = {"step": n, "rule": step.rule, "threads": [pool.labels.get(t, str(t)) for t in step.threads]}
    if events:
        rec["channel"] = events[0].channel
        rec["payload"] = events[0].value if len(events) == 1 else [e.value for e in events]
    return rec


def _deadlock_report(pool: Pool) -> str:
    sc = _scan(pool)
    lines = []
    for tid, why in sc.stuck:
        lines.append(f"thread {pool.labels[tid]} stuck: {why}")
    for tid in sorted(sc.blocked):
        lines.append(f"thread {pool.labels[tid]} blocked on {sc.blocked[tid]}")
    if not lines:
        lines.append("main thread is blocked")
    return "\n".join(lines)


def _pool_check(pool: Pool, checked_main_type, funs, sig) -> None:
    from ..checker import typecheck_pool

    in_queues = set()
    for q in pool.queues.values():
        for _, v in q:
            in_queues |= {(k[1], k[2]) for k in dy.rho(v) if k[0] == "ch"}
    live = {(c, r) for c in pool.live for r in (0, 1)} - in_queues
    typecheck_pool(
        pool.threads,
        pool.endpoint_type,
        live,
        checked_main_type,
        funs,
        dict(pool.skolems),
        pool.facts,
        sig,
    )


def run(
    funs: Mapping[str, dy.FunDef],
    main: dy.Term,
    *,
    seed: int | None = 0,
    round_robin: bool = False,
    buffered: bool = False,
    max_steps: int = DEFAULT_MAX_STEPS,
    typed: bool = False,
    main_type=None,
    check_each_step: bool = False,
    audit: bool = False,
    on_step: Callable[[dict], None] | None = None,
    sig: st.StaticSignature | None = None,
) -> Outcome:
    """Run one schedule to completion.

    ``check_each_step`` re-typechecks the whole pool after every step (typed
    mode only) and raises PoolTypeError on the first failure; ``audit`` checks
    endpoint ownership after every step and raises AuditFailure.
    """
    if check_each_step and not typed:
        raise ValueError("pool typechecking needs the typed mode")
    engine = Engine(funs, sig)
    pool = Pool.initial(main, typed=typed)
    rng = random.Random(seed)
    events: list[Event] = []
    rr = 0
    checks = audits = 0
    for n in range(max_steps + 1):
        if pool.is_terminal():
            if pool.live:
                raise AuditFailure(f"terminated with live channels {sorted(pool.live.values())}")
            return Outcome("Terminated", pool.threads[0], n, events=events, pool=pool, typechecks=checks, audits=audits)
        if n == max_steps:
            break
        sc = _scan(pool)
        steps = _steps_from_scan(pool, sc, buffered)
        if not steps:
            kind = "Stuck" if sc.stuck else "Deadlock"
            return Outcome(kind, None, n, _deadlock_report(pool), events, pool, checks, audits)
        if round_robin:
            # the thread after the one served last, in id order
            tids = sorted({s.threads[0] for s in steps})
            pick = next((t for t in tids if t >= rr), tids[0])
            step = next(s for s in steps if s.threads[0] == pick)
            rr = pick + 1
        else:
            step = steps[rng.randrange(len(steps))]
        try:
            pool, evs = engine.apply(pool, step)
        except (IllegalStep, TypedModeError) as e:
            return Outcome("Stuck", None, n, str(e), events, pool, checks, audits)
        events.extend(evs)
        if on_step is not None:
            on_step(trace_record(n + 1, step, pool, evs))
        if check_each_step:
            try:
                _pool_check(pool, main_type, engine.funs, engine.sig)
            except TypeCheckError as e:
                raise PoolTypeError(n + 1, e) from e
            checks += 1
        if audit:
            ok, why = audit_resources(pool)
            if not ok:
                raise AuditFailure(f"after step {n + 1} ({step.rule}): {why}")
            audits += 1
    return Outcome("DepthExceeded", None, max_steps, f"no result after {max_steps} steps", events, pool, checks, audits)


def channel_events(events: list[Event]) -> dict:
    """Per-channel sequences of (direction, value); the unit compared across modes."""
    out: dict = {}
    for e in events:
        out.setdefault(e.channel, []).append((e.direction, e.kind, e.value))
    return out


# ---------------------------------------------------------------- explore


@dataclass
class ExploreResult:
    kind: str  # AllPathsProgress | DeadlockFound | Inconclusive
    states: int
    trace: list = field(default_factory=list)
    report: str = ""
    elapsed: float = 0.0


def explore(
    funs: Mapping[str, dy.FunDef],
    main: dy.Term,
    *,
    budget: int = DEFAULT_EXPLORE_BUDGET,
    depth: int = DEFAULT_MAX_STEPS,
    buffered: bool = False,
    reduce: bool = True,
    sig: st.StaticSignature | None = None,
) -> ExploreResult:
    """Depth-first search over interleavings.

    With ``reduce`` a state with an enabled thread-local step expands only that
    step: local steps touch one thread and no channel, so they commute with
    everything else and cannot be disabled by other threads.
    """
    t0 = time.monotonic()
    engine = Engine(funs, sig)
    start = Pool.initial(main)
    seen = {canonical_key(start)}
    stack: list[tuple[Pool, list]] = [(start, [])]
    truncated = False
    while stack:
        pool, path = stack.pop()
        if pool.is_terminal():
            continue
        steps = _steps_from_scan(pool, _scan(pool), buffered)
        if not steps:
            return ExploreResult("DeadlockFound", len(seen), path, _deadlock_report(pool), time.monotonic() - t0)
        if len(path) >= depth:
            truncated = True
            continue
        if reduce:
            local = [s for s in steps if s.rule in LOCAL_RULES]
            if local:
                steps = local[:1]
        for step in reversed(steps):
            try:
                nxt, _ = engine.apply(pool, step)
            except IllegalStep as e:
                return ExploreResult("DeadlockFound", len(seen), path + [step.rule], str(e), time.monotonic() - t0)
            key = canonical_key(nxt)
            if key in seen:
                continue
            if len(seen) >= budget:
                truncated = True
                continue
            seen.add(key)
            stack.append((nxt, path + [f"{step.rule}@{','.join(pool.labels[t] for t in step.threads)}"]))
    kind = "Inconclusive" if truncated else "AllPathsProgress"
    return ExploreResult(kind, len(seen), [], "", time.monotonic() - t0)
