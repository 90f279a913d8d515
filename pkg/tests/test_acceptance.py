"""Acceptance criteria, one PASS/FAIL line each.

The lines are collected in ``LINES`` and printed in the terminal summary
(see conftest.py); running this file directly prints them as well.
"""

import time

import pytest

import duality
import gen
from conftest import CORPUS, MUTANTS, PROGRAMS, checked, expected_rejection
from depsess.constraints import entails, oracle_entails
from depsess.errors import TypeCheckError
from depsess.program import check_program, load
from depsess.runtime import channel_events, explore, run

LINES: list[str] = []

SEEDS = range(1, 101)
TYPED_SEEDS = range(1, 26)
RUN_LIMIT_S = 5.0
EXPLORE_LIMIT_S = 60.0
EXPLORE_STATES = 10_000
TYPED_STEPS_MIN = 10_000
ENTAILMENTS = 500


def report(n: int, ok: bool, detail: str):
    LINES.append(f"{'PASS' if ok else 'FAIL'} criterion {n}: {detail}")
    assert ok, detail


def test_1_corpus_terminates():
    bad, slowest = [], 0.0
    for name in PROGRAMS:
        f, m = checked(name).erased()
        for seed in SEEDS:
            t0 = time.perf_counter()
            out = run(f, m, seed=seed)
            dt = time.perf_counter() - t0
            slowest = max(slowest, dt)
            if out.kind != "Terminated" or dt >= RUN_LIMIT_S:
                bad.append((name, seed, out.kind, round(dt, 2)))
    report(1, not bad, f"{len(PROGRAMS)} programs x {len(SEEDS)} seeds Terminated, slowest run {slowest:.3f}s; failures {bad[:5]}")


def test_2_pool_retypechecks():
    steps = checks = 0
    failures = []
    for name in PROGRAMS:
        cp = checked(name)
        for seed in TYPED_SEEDS:
            try:
                out = run(cp.funs, cp.main, seed=seed, typed=True, main_type=cp.main_type, check_each_step=True)
            except TypeCheckError as e:
                failures.append((name, seed, str(e)))
                continue
            steps += out.steps
            checks += out.typechecks
            if not out.ok:
                failures.append((name, seed, out.kind))
    ok = not failures and checks >= TYPED_STEPS_MIN
    report(2, ok, f"{checks} pool typechecks over {steps} typed steps, {len(failures)} failures")


def test_3_explore_all_paths():
    rows, ok = [], True
    for name in PROGRAMS:
        f, m = checked(name).erased()
        res = explore(f, m, budget=EXPLORE_STATES)
        good = res.kind == "AllPathsProgress" and res.states <= EXPLORE_STATES and res.elapsed < EXPLORE_LIMIT_S
        ok &= good
        rows.append(f"{name}={res.kind}/{res.states}/{res.elapsed:.1f}s")
    report(3, ok, ", ".join(rows))


def test_4_audit_every_step():
    bad, audits = [], 0
    for name in PROGRAMS:
        f, m = checked(name).erased()
        for seed in range(1, 21):
            for buffered in (False, True):
                out = run(f, m, seed=seed, buffered=buffered, audit=True)
                audits += out.audits
                if not out.ok or out.audits < out.steps or out.pool.live:
                    bad.append((name, seed, buffered))
    report(4, not bad, f"{audits} audits ok, no live channels at Terminated; failures {bad[:5]}")


def test_5_duality_matrix():
    cells = list(duality.cells())
    good = sum(duality.cell_ok(c) for c in cells)
    report(5, good == 12 and len(cells) == 12, f"{good}/{len(cells)} cells")


def test_6_negative_mutants():
    hits, misses = 0, []
    for name in MUTANTS:
        path = CORPUS / "negative" / name
        want = expected_rejection(path)
        try:
            check_program(load(str(path)))
            misses.append((name, "accepted"))
        except TypeCheckError as e:
            got = (e.rule, type(e).__name__)
            if got == want:
                hits += 1
            else:
                misses.append((name, got))
    report(6, hits >= 10 and not misses, f"{hits}/{len(MUTANTS)} mutants rejected by the intended rule; misses {misses}")


def test_7_entails_matches_oracle():
    cases = gen.stable_entailments(7, ENTAILMENTS)
    agree = sum(type(entails(s, g)) is type(oracle_entails(s, g, 8)) for s, g in cases)
    report(7, agree == len(cases), f"{agree}/{len(cases)} random linear entailments agree with the bound-8 oracle")


def test_8_erasure_and_buffering_preserve_events():
    bad = []
    for name in PROGRAMS:
        cp = checked(name)
        f, m = cp.erased()
        for seed in range(1, 11):
            ref = channel_events(run(f, m, seed=seed).events)
            typed = run(cp.funs, cp.main, seed=seed, typed=True, main_type=cp.main_type)
            buf = run(f, m, seed=seed, buffered=True)
            if channel_events(typed.events) != ref:
                bad.append((name, seed, "materialized"))
            if channel_events(buf.events) != ref:
                bad.append((name, seed, "buffered"))
    report(8, not bad, f"per-channel events equal (erased vs materialized, sync vs buffered); mismatches {bad[:5]}")


def _dequeue_tags(name):
    """(server-side tags, client dequeue requests) on the client's channel."""
    f, m = checked(name).erased()
    evs = channel_events(run(f, m, seed=1).events)["0.1"]
    tags = sum(1 for d, k, _ in evs if d == 0 and k == "branch")
    deqs = sum(1 for d, k, v in evs if d == 1 and k == "branch" and v is False)
    return tags, deqs


def test_9_queue_sends_no_tags():
    plain, _ = _dequeue_tags("queue")
    tagged, deqs = _dequeue_tags("queue_branch")
    ok = plain == 0 and deqs > 0 and tagged == deqs
    report(9, ok, f"server-side tags: queue={plain}, queue_branch={tagged} over {deqs} dequeues")


if __name__ == "__main__":
    import sys

    sys.exit(pytest.main([__file__, "-q", "-p", "no:cacheprovider"]))
