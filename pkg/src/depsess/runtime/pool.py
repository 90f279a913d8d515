"""Thread pools, channel tables and the pool reduction rules.

Two execution modes share the same rules:

* erased: proof functions and markers were removed before execution;
* typed: the elaborated program runs as is, proof functions retype their
  endpoint in the channel table and the pool can be re-typechecked after
  every step.

Thread and channel ids come from counters, but every thread and channel also
carries a lineage label (who created it, and as its creator's how-many-th
spawn).  Labels do not depend on the interleaving, so they name channels in
event logs and canonical explorer states.
"""

from __future__ import annotations

from dataclasses import dataclass, field, replace
from typing import Any, Mapping, Optional

from .. import dynamics as dy
from .. import statics as st
from ..statics import BOOL, INT, STYPE


class IllegalStep(Exception):
    pass


class TypedModeError(Exception):
    """The channel table cannot follow a step (a checker or runtime bug)."""


# ---------------------------------------------------------------- state


@dataclass
class Pool:
    threads: dict  # tid -> Term
    labels: dict  # tid -> lineage label
    spawns: dict  # tid -> number of threads/channels this thread created
    live: dict  # channel id -> label
    retired: set = field(default_factory=set)
    next_thread: int = 1
    next_chan: int = 1
    typed: bool = False
    types: dict = field(default_factory=dict)  # (chan, role) -> static type of that endpoint
    facts: tuple = ()
    skolems: dict = field(default_factory=dict)  # name -> Sort
    queues: dict = field(default_factory=dict)  # (chan, from_role) -> tuple of (kind, value)
    output: tuple = ()  # values passed to print, in order

    @classmethod
    def initial(cls, main: dy.Term, typed: bool = False) -> "Pool":
        return cls({0: main}, {0: "0"}, {0: 0}, {}, typed=typed)

    def copy(self) -> "Pool":
        return Pool(
            dict(self.threads),
            dict(self.labels),
            dict(self.spawns),
            dict(self.live),
            set(self.retired),
            self.next_thread,
            self.next_chan,
            self.typed,
            dict(self.types),
            self.facts,
            dict(self.skolems),
            dict(self.queues),
            self.output,
        )

    def is_terminal(self) -> bool:
        return set(self.threads) == {0} and dy.is_value(self.threads[0])

    def endpoint_type(self, chan: int, role: int):
        try:
            return self.types[(chan, role)]
        except KeyError:
            raise TypedModeError(f"no type recorded for endpoint {chan}.{role}") from None


@dataclass(frozen=True)
class Step:
    rule: str
    threads: tuple  # participating thread ids, initiator first
    channel: Optional[int] = None
    detail: tuple = ()  # rule-specific data


@dataclass(frozen=True)
class Event:
    """One message crossing one channel: (channel label, sending role, value summary)."""

    channel: str
    direction: int
    kind: str  # msg | branch | end
    value: Any


LOCAL_RULES = frozenset({"pr0", "pr1", "pr2", "pr-create", "pr-proof"})


# ---------------------------------------------------------------- summaries


def summarize(v: dy.Term, pool: Pool | None = None):
    """A schedule-independent description of a value, for events and traces."""
    while isinstance(v, (dy.GuardIntro, dy.ForallIntro, dy.AssertIntro, dy.ExistsIntro, dy.Ann)):
        v = v.arg
    if isinstance(v, (dy.IntV, dy.BoolV, dy.StrV)):
        return v.value
    if isinstance(v, dy.Unit):
        return "()"
    if isinstance(v, dy.Pair):
        return [summarize(v.fst, pool), summarize(v.snd, pool)]
    if isinstance(v, dy.Endpoint):
        label = pool.live.get(v.chan, v.chan) if pool else v.chan
        return f"ep({label}/{v.role})"
    if isinstance(v, dy.Lam):
        return "<fun>"
    if isinstance(v, dy.ArrV):
        return [summarize(x, pool) for x in v.items]
    return f"<{type(v).__name__}>"


# ---------------------------------------------------------------- enumeration


@dataclass
class _Scan:
    local: list = field(default_factory=list)
    ops: dict = field(default_factory=dict)  # (chan, role) -> (tid, ctx, Cst)
    cuts: dict = field(default_factory=dict)  # (chan, role) -> (tid, (chan', role'))
    stuck: list = field(default_factory=list)
    blocked: dict = field(default_factory=dict)  # tid -> description


_ACTIVE = {"send": "recv", "choose": "offer", "close": "wait"}
_RULE = {"send": "msg", "choose": "branch", "close": "end"}


def _scan(pool: Pool) -> _Scan:
    sc = _Scan()
    for tid in sorted(pool.threads):
        e = pool.threads[tid]
        try:
            d = dy.decompose(e)
        except AssertionError:
            sc.stuck.append((tid, "malformed term"))
            continue
        if isinstance(d, dy.IsValue):
            if tid != 0:
                sc.local.append(Step("pr2", (tid,)))
            continue
        if isinstance(d, dy.Redex):
            sc.local.append(Step("pr0", (tid,)))
            continue
        if isinstance(d, dy.StuckAt):
            sc.stuck.append((tid, f"no rule for {type(d.focus).__name__}"))
            continue
        f = d.focus
        if isinstance(f, dy.ForallElim) or dy.is_proof_op(f.name):
            sc.local.append(Step("pr-proof", (tid,)))
            continue
        if f.name == "create":
            sc.local.append(Step("pr-create", (tid,)))
            continue
        if f.name == "thread_create":
            sc.local.append(Step("pr1", (tid,)))
            continue
        eps = [a for a in f.args if isinstance(a, dy.Endpoint)]
        if not eps or not isinstance(f.args[0], dy.Endpoint):
            sc.stuck.append((tid, f"{f.name} applied to a non-endpoint"))
            continue
        if f.name == "cut":
            a, b = f.args
            if not isinstance(b, dy.Endpoint) or a.chan == b.chan:
                sc.stuck.append((tid, "cut needs endpoints of two different channels"))
                continue
            sc.cuts[(a.chan, a.role)] = (tid, (b.chan, b.role))
            sc.cuts[(b.chan, b.role)] = (tid, (a.chan, a.role))
            sc.blocked[tid] = f"cut({_ep(pool, a)}, {_ep(pool, b)}) forwarding"
            continue
        ep = f.args[0]
        sc.ops[(ep.chan, ep.role)] = (tid, f)
        sc.blocked[tid] = f"{f.name}({_ep(pool, ep)}) awaiting {_dual_desc(f.name)}"
    return sc


def _ep(pool, ep):
    return f"{pool.live.get(ep.chan, '?' + str(ep.chan))}/{ep.role}"


def _dual_desc(name):
    return {
        "send": "recv",
        "recv": "send",
        "close": "wait",
        "wait": "close",
        "choose": "offer",
        "offer": "choose",
    }.get(name, "a partner")


def _follow(sc: _Scan, chan: int, role: int):
    """From endpoint (chan, role), walk to the thread holding the far end.

    Returns (mediators, (chan', role'), op entry or None) where mediators is
    a list of (tid, entry endpoint, exit endpoint).
    """
    mediators = []
    seen = set()
    key = (chan, 1 - role)
    while key in sc.cuts:
        if key in seen:
            return mediators, key, None
        seen.add(key)
        tid, other = sc.cuts[key]
        mediators.append((tid, key, other))
        key = (other[0], 1 - other[1])
    return mediators, key, sc.ops.get(key)


def enabled_steps(pool: Pool, buffered: bool = False) -> list[Step]:
    sc = _scan(pool)
    return _steps_from_scan(pool, sc, buffered)


def _steps_from_scan(pool: Pool, sc: _Scan, buffered: bool) -> list[Step]:
    out = list(sc.local)
    if buffered:
        return out + _buffered_steps(pool, sc)
    for (chan, role), (tid, f) in sorted(sc.ops.items()):
        if f.name not in _ACTIVE:
            continue
        mediators, far, entry = _follow(sc, chan, role)
        if entry is None or entry[1].name != _ACTIVE[f.name]:
            continue
        t2 = entry[0]
        kind = _RULE[f.name]
        mids = tuple(m[0] for m in mediators)
        rule = f"pr-cut-{kind}" if mediators else f"pr-{kind}"
        out.append(Step(rule, (tid,) + mids + (t2,), chan, (tuple(mediators), far)))
    return out


def _buffered_steps(pool: Pool, sc: _Scan) -> list[Step]:
    out = []
    for (chan, role), (tid, f) in sorted(sc.ops.items()):
        if f.name in ("send", "choose"):
            out.append(Step(f"buf-{f.name}", (tid,), chan, ((chan, role),)))
        elif f.name in ("recv", "offer"):
            q = pool.queues.get((chan, 1 - role), ())
            want = "msg" if f.name == "recv" else "branch"
            if q and q[0][0] == want:
                out.append(Step(f"buf-{f.name}", (tid,), chan, ((chan, role),)))
        elif f.name == "close":
            mediators, far, entry = _follow(sc, chan, role)
            if entry is None or entry[1].name != "wait":
                continue
            chans = [chan] + [m[2][0] for m in mediators]
            if any(pool.queues.get((c, r)) for c in chans for r in (0, 1)):
                continue  # close waits for every queue on the path to drain
            mids = tuple(m[0] for m in mediators)
            rule = "pr-cut-end" if mediators else "pr-end"
            out.append(Step(rule, (tid,) + mids + (entry[0],), chan, (tuple(mediators), far)))
    # mediators forward one queued item from one side to the other
    done = set()
    for (chan, role), (tid, other) in sorted(sc.cuts.items()):
        if (tid, chan, role) in done:
            continue
        done.add((tid, chan, role))
        q = pool.queues.get((chan, 1 - role), ())
        if q:
            out.append(Step("buf-fwd", (tid,), chan, ((chan, role), other)))
    return out


# ---------------------------------------------------------------- application


class Engine:
    """Applies steps to pools; holds the function table and mode flags."""

    def __init__(self, funs: Mapping[str, dy.FunDef], sig: st.StaticSignature | None = None) -> None:
        self.funs = dict(funs)
        self.sig = sig or st.DEFAULT_SIG

    # -------------------------------------------------------- helpers

    def _focus(self, pool: Pool, tid: int):
        d = dy.decompose(pool.threads[tid])
        if not isinstance(d, (dy.Blocked, dy.Redex)):
            raise IllegalStep(f"thread {tid} has nothing to reduce")
        return d.ctx, d.focus

    def _spawn(self, pool: Pool, parent: int, term: dy.Term) -> tuple[int, str]:
        k = pool.spawns[parent] = pool.spawns[parent] + 1
        label = f"{pool.labels[parent]}.{k}"
        tid = pool.next_thread
        pool.next_thread += 1
        pool.threads[tid] = term
        pool.labels[tid] = label
        pool.spawns[tid] = 0
        return tid, label

    def _retire(self, pool: Pool, chan: int) -> None:
        pool.live.pop(chan, None)
        pool.retired.add(chan)
        for r in (0, 1):
            pool.types.pop((chan, r), None)
            pool.queues.pop((chan, r), None)

    # -------------------------------------------------------- dispatch

    def apply(self, pool: Pool, step: Step) -> tuple[Pool, list[Event]]:
        """Return the successor pool and the channel events of this step."""
        p = pool.copy()
        events: list[Event] = []
        rule = step.rule
        if rule == "pr0":
            self._pr0(p, step.threads[0])
        elif rule == "pr-proof":
            self._proof(p, step.threads[0])
        elif rule == "pr1":
            tid = step.threads[0]
            ctx, f = self._focus(p, tid)
            p.threads[tid] = dy.plug(ctx, dy.Unit())
            self._spawn(p, tid, dy.App(f.args[0], dy.Unit()))
        elif rule == "pr2":
            tid = step.threads[0]
            if tid == 0:
                raise IllegalStep("the main thread is never removed")
            del p.threads[tid]
            del p.labels[tid]
            del p.spawns[tid]
        elif rule == "pr-create":
            self._create(p, step.threads[0])
        elif rule in ("pr-msg", "pr-cut-msg", "pr-branch", "pr-cut-branch", "pr-end", "pr-cut-end"):
            events = self._sync(p, step)
        elif rule.startswith("buf-"):
            events = self._buffered(p, step)
        else:
            raise IllegalStep(f"unknown rule {rule}")
        return p, events

    # -------------------------------------------------------- local steps

    def _pr0(self, p: Pool, tid: int) -> None:
        ctx, f = self._focus(p, tid)
        try:
            out = dy.contract(f, self.funs)
        except dy.StuckTerm as e:
            raise IllegalStep(str(e)) from None
        if isinstance(f, dy.Cst):
            if f.name == "print":
                p.output = p.output + (summarize(f.args[0], p),)
            elif p.typed and f.name in self.funs:
                self._call_facts(p, self.funs[f.name], f)
        p.threads[tid] = dy.plug(ctx, out)

    def _call_facts(self, p: Pool, fd: dy.FunDef, call: dy.Cst) -> None:
        # literal arguments pin the indices of singleton parameter types
        if call.inst is None:
            return
        ren = {a: s for (a, _), s in zip(fd.svars, call.inst)}
        new = []
        for (_, ty), v in zip(fd.params, call.args):
            ty = st.beta_normalize(st.subst(ty, ren))
            if isinstance(ty, st.Const) and ty.name in ("int", "bool") and len(ty.args) == 1:
                idx = ty.args[0]
                if isinstance(v, (dy.IntV, dy.BoolV)) and not isinstance(idx, (st.IntLit, st.BoolLit)):
                    if st.free_vars(idx) <= set(p.skolems):
                        new.append(st.eq(idx, st.lit(v.value)))
        if new:
            p.facts = p.facts + tuple(new)

    def _create(self, p: Pool, tid: int) -> None:
        ctx, f = self._focus(p, tid)
        r1, r2 = 1, 0
        if f.inst:
            a, b = (st.beta_normalize(x) for x in f.inst[:2])
            if isinstance(a, st.IntLit) and isinstance(b, st.IntLit):
                r1, r2 = a.value, b.value
            elif p.typed:
                raise TypedModeError("create with non-literal roles")
        chan = p.next_chan
        p.next_chan += 1
        p.threads[tid] = dy.plug(ctx, dy.Endpoint(chan, r1))
        _, label = self._spawn(p, tid, dy.App(f.args[0], dy.Endpoint(chan, r2)))
        p.live[chan] = label
        if p.typed:
            if not f.inst or len(f.inst) < 3:
                raise TypedModeError("create without an elaborated session type")
            pi = f.inst[2]
            p.types[(chan, r1)] = st.chan(st.IntLit(r1), pi)
            p.types[(chan, r2)] = st.chan(st.IntLit(r2), pi)

    def _proof(self, p: Pool, tid: int) -> None:
        ctx, f = self._focus(p, tid)
        if isinstance(f, dy.ForallElim):
            ep = f.arg
            ty = st.beta_normalize(p.endpoint_type(ep.chan, ep.role))
            fam = st.family(ty.name) if isinstance(ty, st.Const) else None
            if not fam or fam[0] != "forall":
                raise TypedModeError(f"instantiating a non-universal endpoint type {st.show(ty)}")
            p.types[(ep.chan, ep.role)] = st.instantiate(ty.args[0], f.sarg)
            p.threads[tid] = dy.plug(ctx, ep)
            return
        ep = f.args[0]
        if not p.typed:
            p.threads[tid] = dy.plug(ctx, ep)
            return
        key = (ep.chan, ep.role)
        ty = st.beta_normalize(p.endpoint_type(*key))
        if not (isinstance(ty, st.Const) and ty.name == "chan"):
            raise TypedModeError(f"{f.name} on endpoint of type {st.show(ty)}")
        r, pi = ty.args
        h = st.session_head(pi)
        name = f.name
        if name in ("itet", "itef"):
            if h.kind != "ite":
                raise TypedModeError(f"{name} on {st.show(pi)}")
            p.types[key] = st.chan(r, h.parts[0] if name == "itet" else h.parts[1])
            out: dy.Term = ep
        elif name == "recurse" or name.startswith("recurse_ho"):
            p.types[key] = st.chan(r, st.unroll(pi))
            out = ep
        elif name in ("unify", "exify"):
            if h.kind != "quan":
                raise TypedModeError(f"{name} on {st.show(pi)}")
            fn = h.parts[0]
            srt = h.sort
            body = st.lam(srt, "s", lambda s: st.chan(r, st.App(fn, s)))
            if name == "unify":
                p.types[key] = st.forall(srt, body)
                out = ep
            else:
                a = st.fresh_name("sk")
                p.skolems[a] = srt
                p.types[key] = st.instantiate(body, st.FVar(a))
                out = dy.ExistsIntro(ep, witness=st.FVar(a), annot=st.exists(srt, body))
        else:
            raise TypedModeError(f"unknown proof function {name}")
        p.threads[tid] = dy.plug(ctx, out)

    # -------------------------------------------------------- channel rules

    def _advance(self, p: Pool, ep: tuple, kind: str, tag: bool | None = None):
        """Consume the head action of an endpoint type; returns the old head."""
        if not p.typed:
            return None
        ty = st.beta_normalize(p.endpoint_type(*ep))
        r, pi = ty.args
        h = self._head(p, pi)
        if h.kind != kind:
            raise TypedModeError(f"endpoint {ep} has {st.show(pi)}, expected a {kind} head")
        if kind == "msg":
            p.types[ep] = st.chan(r, h.parts[0])
        elif kind == "branch":
            p.types[ep] = st.chan(r, st.ite(st.BoolLit(tag), *h.parts))
        return h

    def _head(self, p: Pool, pi):
        """Head after unrolling recursion and deciding conditionals from the facts.

        Only endpoints held by cut mediators ever need this: every other
        endpoint was retyped by its owner's proof functions.
        """
        from ..constraints import ConstraintStore, Valid, entails

        for _ in range(64):
            h = st.session_head(pi)
            if h.kind in ("fix", "hofix"):
                pi = st.unroll(pi)
                continue
            if h.kind == "ite":
                store = ConstraintStore.of(p.facts, p.skolems)
                if isinstance(entails(store, h.payload), Valid):
                    pi = h.parts[0]
                    continue
                if isinstance(entails(store, st.C("not", h.payload)), Valid):
                    pi = h.parts[1]
                    continue
                raise TypedModeError(f"cannot decide {st.show(h.payload)} for a forwarded endpoint")
            return h
        raise TypedModeError("session type does not reach an action")

    def _align(self, p: Pool, a, b) -> None:
        """Record index facts and bind stype skolems so two views of one action agree."""
        facts: list = []
        binds: dict = {}
        stype_sk = {n for n, s in p.skolems.items() if s == STYPE}
        index_sk = {n for n, s in p.skolems.items() if s in (INT, BOOL)}

        def index_like(t) -> bool:
            if isinstance(t, (st.IntLit, st.BoolLit)):
                return True
            if isinstance(t, st.FVar):
                return t.name in index_sk
            return isinstance(t, st.Const) and t.name in st.INDEX_OPS

        def go(x, y, local):
            x, y = st.beta_normalize(x), st.beta_normalize(y)
            if x == y:
                return
            for u, v in ((x, y), (y, x)):
                if isinstance(u, st.FVar) and u.name in stype_sk and u.name not in binds:
                    if not (st.free_vars(v) & local):
                        binds[u.name] = v
                    return
            if index_like(x) and index_like(y):
                if not ((st.free_vars(x) | st.free_vars(y)) & local):
                    facts.append(st.eq(x, y))
                return
            if isinstance(x, st.Const) and isinstance(y, st.Const):
                if x.name == y.name and len(x.args) == len(y.args):
                    for u, v in zip(x.args, y.args):
                        go(u, v, local)
                return
            if isinstance(x, st.Lam) and isinstance(y, st.Lam):
                v = st.fresh_name("x")
                go(st.open_term(x.body, st.FVar(v)), st.open_term(y.body, st.FVar(v)), local | {v})
                return
            if isinstance(x, st.App) and isinstance(y, st.App):
                go(x.fn, y.fn, local)
                go(x.arg, y.arg, local)

        go(a, b, frozenset())
        if binds:
            self._bind_skolems(p, binds)
        if facts:
            p.facts = p.facts + tuple(st.subst(f, binds) for f in facts)

    def _bind_skolems(self, p: Pool, binds: dict) -> None:
        for n in binds:
            p.skolems.pop(n, None)
        p.threads = {t: dy.subst_static(e, binds) for t, e in p.threads.items()}
        p.types = {k: st.beta_normalize(st.subst(v, binds)) for k, v in p.types.items()}
        p.facts = tuple(st.subst(f, binds) for f in p.facts)
        p.queues = {k: tuple((kd, dy.subst_static(v, binds)) for kd, v in q) for k, q in p.queues.items()}

    def _payload_view(self, p: Pool, ep):
        ty = st.beta_normalize(p.endpoint_type(*ep))
        return self._head(p, ty.args[1]).term

    def _sync(self, p: Pool, step: Step) -> list[Event]:
        t1, t2 = step.threads[0], step.threads[-1]
        mediators, far = step.detail
        ctx1, f1 = self._focus(p, t1)
        ctx2, f2 = self._focus(p, t2)
        ep1 = f1.args[0]
        ep2 = f2.args[0]
        if (ep2.chan, ep2.role) != far:
            raise IllegalStep("partner endpoint changed")
        src = (ep1.chan, ep1.role)
        # every hop: (sending endpoint, receiving endpoint)
        hops = []
        cur = src
        for _, entry, exit_ in mediators:
            hops.append((cur, entry))
            cur = exit_
        hops.append((cur, far))
        kind = _RULE[f1.name]
        events = []
        if p.typed and kind != "end":
            for s, r in hops:
                self._align(p, self._payload_view(p, s), self._payload_view(p, r))
            ctx1, f1 = self._focus(p, t1)
            ctx2, f2 = self._focus(p, t2)
        if kind == "msg":
            v = f1.args[1]
            for s, r in hops:
                self._advance(p, s, "msg")
                self._advance(p, r, "msg")
                events.append(Event(p.live[s[0]], s[1], "msg", summarize(v, p)))
            p.threads[t1] = dy.plug(ctx1, ep1)
            p.threads[t2] = dy.plug(ctx2, dy.Pair(v, ep2))
        elif kind == "branch":
            b = f1.args[1]
            if not isinstance(b, dy.BoolV):
                raise IllegalStep("choose needs a boolean tag")
            for s, r in hops:
                self._advance(p, s, "branch", b.value)
                self._advance(p, r, "branch", b.value)
                events.append(Event(p.live[s[0]], s[1], "branch", b.value))
            p.threads[t1] = dy.plug(ctx1, ep1)
            p.threads[t2] = dy.plug(ctx2, self._offer_result(p, b.value, ep2))
        else:
            for s, r in hops:
                if p.typed:
                    self._advance(p, s, "end")
                    self._advance(p, r, "end")
                events.append(Event(p.live[s[0]], s[1], "end", None))
            p.threads[t1] = dy.plug(ctx1, dy.Unit())
            p.threads[t2] = dy.plug(ctx2, dy.Unit())
            for tid, _, _ in mediators:
                mctx, _ = self._focus(p, tid)
                p.threads[tid] = dy.plug(mctx, dy.Unit())
            for s, _ in hops:
                self._retire(p, s[0])
        return events

    def _offer_result(self, p: Pool, tag: bool, ep: dy.Endpoint) -> dy.Term:
        pair = dy.Pair(dy.BoolV(tag), ep)
        if not p.typed:
            return pair
        ty = st.beta_normalize(p.endpoint_type(ep.chan, ep.role))
        r, pi = ty.args
        h = st.session_head(pi)
        if h.kind != "ite":
            raise TypedModeError("offer result must be a conditional session")
        p1, p2 = h.parts
        annot = st.exists(
            BOOL, st.lam(BOOL, "b", lambda b: st.C("ltup", st.C("bool", b), st.chan(r, st.ite(b, p1, p2))))
        )
        return dy.ExistsIntro(pair, witness=st.BoolLit(tag), annot=annot)

    # -------------------------------------------------------- buffered mode

    def _buffered(self, p: Pool, step: Step) -> list[Event]:
        rule = step.rule
        tid = step.threads[0]
        if rule == "buf-fwd":
            (chan, role), (oc, orole) = step.detail
            q = p.queues[(chan, 1 - role)]
            item, rest = q[0], q[1:]
            p.queues[(chan, 1 - role)] = rest
            if p.typed:
                kind = item[0]
                tag = item[1].value if kind == "branch" else None
                self._advance(p, (chan, role), kind, tag)
                self._advance(p, (oc, orole), kind, tag)
            p.queues[(oc, orole)] = p.queues.get((oc, orole), ()) + (item,)
            return [Event(p.live[oc], orole, item[0], summarize(item[1], p) if item[0] == "msg" else item[1].value)]
        ctx, f = self._focus(p, tid)
        ep = f.args[0]
        key = (ep.chan, ep.role)
        if rule in ("buf-send", "buf-choose"):
            kind = "msg" if rule == "buf-send" else "branch"
            v = f.args[1]
            if p.typed:
                self._advance(p, key, kind, v.value if kind == "branch" else None)
            p.queues[key] = p.queues.get(key, ()) + ((kind, v),)
            p.threads[tid] = dy.plug(ctx, ep)
            return [Event(p.live[ep.chan], ep.role, kind, summarize(v, p) if kind == "msg" else v.value)]
        qk = (ep.chan, 1 - ep.role)
        (kind, v), rest = p.queues[qk][0], p.queues[qk][1:]
        p.queues[qk] = rest
        if rule == "buf-recv":
            if p.typed:
                self._advance(p, key, "msg")
            p.threads[tid] = dy.plug(ctx, dy.Pair(v, ep))
        else:
            if p.typed:
                self._advance(p, key, "branch", v.value)
            p.threads[tid] = dy.plug(ctx, self._offer_result(p, v.value, ep))
        return []


# ---------------------------------------------------------------- audit


def audit_resources(pool: Pool) -> tuple[bool, str]:
    """Each live endpoint held exactly once, both roles present, no retired endpoint anywhere."""
    from collections import Counter

    held: Counter = Counter()
    for e in pool.threads.values():
        held.update(dy.rho(e))
    for q in pool.queues.values():
        for _, v in q:
            held.update(dy.rho(v))
    for key, n in held.items():
        if key[0] != "ch":
            continue
        chan, role = key[1], key[2]
        if chan not in pool.live:
            return False, f"endpoint {chan}.{role} of a closed or unknown channel is still held"
        if n != 1:
            return False, f"endpoint {pool.live[chan]}/{role} is held {n} times"
    for chan, label in pool.live.items():
        for role in (0, 1):
            if held.get(("ch", chan, role), 0) != 1:
                return False, f"endpoint {label}/{role} of a live channel is not held"
    return True, "ok"


def canonical_key(pool: Pool):
    """Pool identity up to renaming of thread and channel ids."""
    ranks = {c: i for i, c in enumerate(sorted(pool.live, key=lambda c: pool.live[c]))}

    def relabel(t):
        if isinstance(t, dy.Endpoint):
            return dy.Endpoint(ranks.get(t.chan, -1), t.role)
        return None

    threads = tuple(sorted((pool.labels[t], dy.map_terms(e, relabel)) for t, e in pool.threads.items()))
    queues = tuple(
        sorted(
            (pool.live[c], r, tuple((k, dy.map_terms(v, relabel)) for k, v in q))
            for (c, r), q in pool.queues.items()
            if q
        )
    )
    return threads, queues
