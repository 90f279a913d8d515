"""Static terms: sorts, index terms, types and session types as one algebra.

Bound variables are de Bruijn indices (``Var``); free variables are named
(``FVar``).  Binders are only ever crossed by opening with a fresh name, so
substitution never captures.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from functools import lru_cache
from typing import Callable, Iterable, Mapping, Union


# ---------------------------------------------------------------- sorts


@dataclass(frozen=True, slots=True)
class Base:
    name: str

    def __str__(self) -> str:
        return self.name


@dataclass(frozen=True, slots=True)
class Arrow:
    dom: "Sort"
    cod: "Sort"

    def __str__(self) -> str:
        return f"(-> {self.dom} {self.cod})"


Sort = Union[Base, Arrow]

INT = Base("int")
BOOL = Base("bool")
TYPE = Base("type")
VTYPE = Base("vtype")
STYPE = Base("stype")
BASE_SORTS = {s.name: s for s in (INT, BOOL, TYPE, VTYPE, STYPE)}

# placeholders used only inside c-sorts
_T = Base("T*")  # type or vtype
_X = Base("X*")  # int or bool


def arrows(doms: Iterable[Sort], cod: Sort) -> Sort:
    out = cod
    for d in reversed(list(doms)):
        out = Arrow(d, out)
    return out


def sort_leq(a: Sort, b: Sort) -> bool:
    return a == b or (a == TYPE and b == VTYPE)


# ---------------------------------------------------------------- terms


@dataclass(frozen=True, slots=True)
class Var:
    index: int


@dataclass(frozen=True, slots=True)
class FVar:
    name: str


@dataclass(frozen=True, slots=True)
class IntLit:
    value: int


@dataclass(frozen=True, slots=True)
class BoolLit:
    value: bool


@dataclass(frozen=True, slots=True)
class Const:
    name: str
    args: tuple = ()


@dataclass(frozen=True, slots=True)
class Lam:
    sort: Sort
    body: "StaticTerm"
    hint: str = field(default="a", compare=False)


@dataclass(frozen=True, slots=True)
class App:
    fn: "StaticTerm"
    arg: "StaticTerm"


StaticTerm = Union[Var, FVar, IntLit, BoolLit, Const, Lam, App]

TRUE = BoolLit(True)
FALSE = BoolLit(False)
S_ROLE = IntLit(0)
C_ROLE = IntLit(1)


class StaticError(Exception):
    """Ill-sorted or otherwise malformed static term."""


class UnboundStaticVar(StaticError):
    pass


class SortMismatch(StaticError):
    def __init__(self, expected, found, term=None):
        self.expected, self.found, self.term = expected, found, term
        where = f" in {show(term)}" if term is not None else ""
        super().__init__(f"expected sort {expected}, found {found}{where}")


class ArityMismatch(StaticError):
    pass


class NotAnStype(StaticError):
    pass


_fresh = itertools.count(1)


def fresh_name(hint: str = "a") -> str:
    base = hint.split("%")[0] or "a"
    return f"{base}%{next(_fresh)}"


# ---------------------------------------------------------------- builders


def C(name: str, *args: StaticTerm) -> Const:
    return Const(name, tuple(args))


def lit(v: int | bool) -> StaticTerm:
    return BoolLit(v) if isinstance(v, bool) else IntLit(v)


def lam(sort: Sort, hint: str, build: Callable[[StaticTerm], StaticTerm]) -> Lam:
    x = fresh_name(hint)
    return Lam(sort, close_term(build(FVar(x)), x), hint)


def eq(a, b):
    return C("=", a, b)


def conj(*ps: StaticTerm) -> StaticTerm:
    ps = [p for p in ps if p != TRUE]
    if not ps:
        return TRUE
    out = ps[0]
    for p in ps[1:]:
        out = C("and", out, p)
    return out


def role_prop(r: StaticTerm) -> StaticTerm:
    return C("or", eq(r, S_ROLE), eq(r, C_ROLE))


UNIT = C("unit")


def chan(r, pi):
    return C("chan", r, pi)


def end(r):
    return C("end", r)


def msg(r, tau, pi):
    return C("msg", r, tau, pi)


def branch(r, p1, p2):
    return C("branch", r, p1, p2)


def ite(b, p1, p2):
    return C("ite", b, p1, p2)


def quan(sort: Sort, r, fn):
    return C(f"quan[{sort}]", r, fn)


def fix(fn):
    return C("fix", fn)


def hofix(sorts, fn, *args):
    return C(f"hofix[{','.join(map(str, sorts))}]", fn, *args)


def forall(sort: Sort, fn):
    return C(f"forall[{sort}]", fn)


def exists(sort: Sort, fn):
    return C(f"exists[{sort}]", fn)


def family(name: str) -> tuple[str, tuple[Sort, ...]] | None:
    """Split ``quan[int]`` into ``("quan", (INT,))``."""
    if not name.endswith("]") or "[" not in name:
        return None
    head, _, inner = name[:-1].partition("[")
    try:
        sorts = tuple(BASE_SORTS[s] for s in inner.split(",")) if inner else ()
    except KeyError:
        return None
    return head, sorts


# ---------------------------------------------------------------- signature


@dataclass(frozen=True)
class CSort:
    args: tuple
    result: Sort


def _cs(args, result):
    return CSort(tuple(args), result)


_BUILTINS: dict[str, list[CSort]] = {
    "unit": [_cs([], TYPE)],
    "int": [_cs([], TYPE), _cs([INT], TYPE)],
    "bool": [_cs([], TYPE), _cs([BOOL], TYPE)],
    "string": [_cs([], TYPE)],
    "arrref": [_cs([TYPE, INT], TYPE)],
    "tup": [_cs([TYPE, TYPE], TYPE)],
    "ltup": [_cs([VTYPE, VTYPE], VTYPE)],
    "->": [_cs([VTYPE, VTYPE], TYPE)],
    "-o": [_cs([VTYPE, VTYPE], VTYPE)],
    "guard": [_cs([BOOL, _T], _T)],
    "assert": [_cs([BOOL, _T], _T)],
    "<=ty": [_cs([_T, _T], BOOL)],
    "chan": [_cs([INT, STYPE], VTYPE)],
    "end": [_cs([INT], STYPE)],
    "msg": [_cs([INT, VTYPE, STYPE], STYPE)],
    "branch": [_cs([INT, STYPE, STYPE], STYPE)],
    "ite": [_cs([BOOL, STYPE, STYPE], STYPE)],
    "fix": [_cs([Arrow(STYPE, STYPE)], STYPE)],
    "+": [_cs([INT, INT], INT)],
    "-": [_cs([INT, INT], INT)],
    "*": [_cs([INT, INT], INT)],
    "neg": [_cs([INT], INT)],
    "<": [_cs([INT, INT], BOOL)],
    "<=": [_cs([INT, INT], BOOL)],
    ">": [_cs([INT, INT], BOOL)],
    ">=": [_cs([INT, INT], BOOL)],
    "=": [_cs([_X, _X], BOOL)],
    "!=": [_cs([_X, _X], BOOL)],
    "and": [_cs([BOOL, BOOL], BOOL)],
    "or": [_cs([BOOL, BOOL], BOOL)],
    "=>": [_cs([BOOL, BOOL], BOOL)],
    "not": [_cs([BOOL], BOOL)],
}

QUANT_SORTS = (INT, BOOL, STYPE)
INDEX_OPS = frozenset("+ - * neg < <= > >= = != and or => not".split())


def _family_csorts(head: str, sorts: tuple[Sort, ...]) -> list[CSort] | None:
    if head == "quan" and len(sorts) == 1 and sorts[0] in QUANT_SORTS:
        return [_cs([INT, Arrow(sorts[0], STYPE)], STYPE)]
    if head in ("forall", "exists") and len(sorts) == 1:
        return [_cs([Arrow(sorts[0], _T)], _T)]
    if head == "hofix" and sorts:
        p = arrows(sorts, STYPE)
        return [_cs([Arrow(p, p), *sorts], STYPE)]
    return None


class StaticSignature:
    """Static constants and their c-sorts; sort-indexed families are built on demand."""

    def __init__(self) -> None:
        self._user: dict[str, list[CSort]] = {}

    def declare(self, name: str, csort: CSort) -> None:
        if name in _BUILTINS or family(name) is not None:
            raise StaticError(f"cannot redeclare built-in static constant {name}")
        self._user.setdefault(name, []).append(csort)

    def lookup(self, name: str) -> list[CSort]:
        if name in _BUILTINS:
            return _BUILTINS[name]
        if name in self._user:
            return self._user[name]
        fam = family(name)
        if fam is not None:
            got = _family_csorts(*fam)
            if got is not None:
                return got
        raise StaticError(f"unknown static constant {name}")

    def __contains__(self, name: str) -> bool:
        try:
            self.lookup(name)
        except StaticError:
            return False
        return True

    def user_constants(self) -> dict[str, list[CSort]]:
        return dict(self._user)


DEFAULT_SIG = StaticSignature()


# ---------------------------------------------------------------- sorting


def _match_sort(expected: Sort, found: Sort, binds: dict) -> bool:
    if expected == _T:
        if found not in (TYPE, VTYPE):
            return False
        binds[_T] = VTYPE if VTYPE in (found, binds.get(_T)) else TYPE
        return True
    if expected == _X:
        if found not in (INT, BOOL) or binds.get(_X, found) != found:
            return False
        binds[_X] = found
        return True
    if isinstance(expected, Arrow):
        return (
            isinstance(found, Arrow)
            and expected.dom == found.dom
            and _match_sort(expected.cod, found.cod, binds)
        )
    return sort_leq(found, expected)


def _subst_sort(s: Sort, binds: dict) -> Sort:
    if isinstance(s, Arrow):
        return Arrow(_subst_sort(s.dom, binds), _subst_sort(s.cod, binds))
    return binds.get(s, s)


def sort_check(
    sigma: Mapping[str, Sort],
    sig: StaticSignature | None,
    s: StaticTerm,
    bound: tuple[Sort, ...] = (),
) -> Sort:
    """Return the sort of ``s`` or raise a :class:`StaticError`."""
    sig = sig or DEFAULT_SIG
    if isinstance(s, IntLit):
        return INT
    if isinstance(s, BoolLit):
        return BOOL
    if isinstance(s, Var):
        if s.index >= len(bound):
            raise UnboundStaticVar(f"dangling bound index {s.index}")
        return bound[-1 - s.index]
    if isinstance(s, FVar):
        if s.name not in sigma:
            raise UnboundStaticVar(f"unbound static variable {display_name(s.name)}")
        return sigma[s.name]
    if isinstance(s, Lam):
        return Arrow(s.sort, sort_check(sigma, sig, s.body, bound + (s.sort,)))
    if isinstance(s, App):
        fs = sort_check(sigma, sig, s.fn, bound)
        if not isinstance(fs, Arrow):
            raise SortMismatch("an arrow sort", fs, s)
        a = sort_check(sigma, sig, s.arg, bound)
        if not sort_leq(a, fs.dom):
            raise SortMismatch(fs.dom, a, s.arg)
        return fs.cod
    if isinstance(s, Const):
        entries = sig.lookup(s.name)
        found = [sort_check(sigma, sig, a, bound) for a in s.args]
        candidates = [cs for cs in entries if len(cs.args) == len(s.args)]
        if not candidates:
            arities = sorted({len(cs.args) for cs in entries})
            raise ArityMismatch(
                f"{s.name} expects {' or '.join(map(str, arities))} argument(s), got {len(s.args)}"
            )
        first_err = None
        for cs in candidates:
            binds: dict = {}
            for exp, got, arg in zip(cs.args, found, s.args):
                if not _match_sort(exp, got, binds):
                    first_err = first_err or SortMismatch(_subst_sort(exp, {_T: TYPE, _X: INT}), got, arg)
                    break
            else:
                res = _subst_sort(cs.result, binds)
                if res == _T:
                    res = TYPE
                return res
        raise first_err
    raise StaticError(f"not a static term: {s!r}")


# ---------------------------------------------------------------- binding ops


def open_term(t: StaticTerm, arg: StaticTerm, depth: int = 0) -> StaticTerm:
    """Instantiate bound index ``depth`` with the locally closed term ``arg``."""
    if isinstance(t, Var):
        if t.index == depth:
            return arg
        return Var(t.index - 1) if t.index > depth else t
    if isinstance(t, Const):
        return Const(t.name, tuple(open_term(a, arg, depth) for a in t.args)) if t.args else t
    if isinstance(t, Lam):
        return Lam(t.sort, open_term(t.body, arg, depth + 1), t.hint)
    if isinstance(t, App):
        return App(open_term(t.fn, arg, depth), open_term(t.arg, arg, depth))
    return t


def close_term(t: StaticTerm, name: str, depth: int = 0) -> StaticTerm:
    """Abstract the free variable ``name`` as bound index ``depth``."""
    if isinstance(t, FVar):
        return Var(depth) if t.name == name else t
    if isinstance(t, Const):
        return Const(t.name, tuple(close_term(a, name, depth) for a in t.args)) if t.args else t
    if isinstance(t, Lam):
        return Lam(t.sort, close_term(t.body, name, depth + 1), t.hint)
    if isinstance(t, App):
        return App(close_term(t.fn, name, depth), close_term(t.arg, name, depth))
    return t


def subst(t: StaticTerm, mapping: Mapping[str, StaticTerm]) -> StaticTerm:
    """Replace free variables; replacements must be locally closed."""
    if not mapping:
        return t
    if isinstance(t, FVar):
        return mapping.get(t.name, t)
    if isinstance(t, Const):
        return Const(t.name, tuple(subst(a, mapping) for a in t.args)) if t.args else t
    if isinstance(t, Lam):
        return Lam(t.sort, subst(t.body, mapping), t.hint)
    if isinstance(t, App):
        return App(subst(t.fn, mapping), subst(t.arg, mapping))
    return t


def free_vars(t: StaticTerm, acc: set | None = None) -> set[str]:
    acc = set() if acc is None else acc
    if isinstance(t, FVar):
        acc.add(t.name)
    elif isinstance(t, Const):
        for a in t.args:
            free_vars(a, acc)
    elif isinstance(t, Lam):
        free_vars(t.body, acc)
    elif isinstance(t, App):
        free_vars(t.fn, acc)
        free_vars(t.arg, acc)
    return acc


def instantiate(fn: StaticTerm, *args: StaticTerm) -> StaticTerm:
    out = fn
    for a in args:
        out = App(out, a)
    return beta_normalize(out)


# ---------------------------------------------------------------- normalization


def _fold(name: str, args: tuple) -> StaticTerm | None:
    if all(isinstance(a, IntLit) for a in args):
        vals = [a.value for a in args]
        if name == "+":
            return IntLit(vals[0] + vals[1])
        if name == "-":
            return IntLit(vals[0] - vals[1])
        if name == "*":
            return IntLit(vals[0] * vals[1])
        if name == "neg":
            return IntLit(-vals[0])
        ops = {
            "<": lambda x, y: x < y,
            "<=": lambda x, y: x <= y,
            ">": lambda x, y: x > y,
            ">=": lambda x, y: x >= y,
            "=": lambda x, y: x == y,
            "!=": lambda x, y: x != y,
        }
        if name in ops and len(vals) == 2:
            return BoolLit(ops[name](*vals))
    if args and all(isinstance(a, BoolLit) for a in args):
        vals = [a.value for a in args]
        table = {
            "and": lambda: vals[0] and vals[1],
            "or": lambda: vals[0] or vals[1],
            "=>": lambda: (not vals[0]) or vals[1],
            "not": lambda: not vals[0],
            "=": lambda: vals[0] == vals[1],
            "!=": lambda: vals[0] != vals[1],
        }
        if name in table:
            return BoolLit(table[name]())
    return None


@lru_cache(maxsize=1 << 16)
def beta_normalize(s: StaticTerm) -> StaticTerm:
    """Beta-normal form with literal arithmetic folded; fix/hofix are never unrolled."""
    if isinstance(s, App):
        fn = beta_normalize(s.fn)
        arg = beta_normalize(s.arg)
        if isinstance(fn, Lam):
            return beta_normalize(open_term(fn.body, arg))
        return App(fn, arg)
    if isinstance(s, Lam):
        x = fresh_name(s.hint)
        body = beta_normalize(open_term(s.body, FVar(x)))
        return Lam(s.sort, close_term(body, x), s.hint)
    if isinstance(s, Const) and s.args:
        args = tuple(beta_normalize(a) for a in s.args)
        if s.name in INDEX_OPS:
            folded = _fold(s.name, args)
            if folded is not None:
                return folded
        return Const(s.name, args)
    return s


# ---------------------------------------------------------------- session heads


@dataclass(frozen=True)
class SessionHead:
    kind: str  # end msg branch ite quan fix hofix neutral
    role: StaticTerm | None = None
    payload: StaticTerm | None = None
    parts: tuple = ()
    sort: Sort | None = None
    term: StaticTerm | None = None


def session_head(s: StaticTerm) -> SessionHead:
    n = beta_normalize(s)
    if isinstance(n, Const):
        a = n.args
        if n.name == "end" and len(a) == 1:
            return SessionHead("end", role=a[0], term=n)
        if n.name == "msg":
            return SessionHead("msg", role=a[0], payload=a[1], parts=(a[2],), term=n)
        if n.name == "branch":
            return SessionHead("branch", role=a[0], parts=(a[1], a[2]), term=n)
        if n.name == "ite":
            return SessionHead("ite", payload=a[0], parts=(a[1], a[2]), term=n)
        if n.name == "fix":
            return SessionHead("fix", parts=(a[0],), term=n)
        fam = family(n.name)
        if fam and fam[0] == "quan":
            return SessionHead("quan", role=a[0], parts=(a[1],), sort=fam[1][0], term=n)
        if fam and fam[0] == "hofix":
            return SessionHead("hofix", parts=a, term=n)
        raise NotAnStype(f"{show(n)} is not a session type")
    if isinstance(n, (FVar, App)):
        return SessionHead("neutral", term=n)
    raise NotAnStype(f"{show(n)} is not a session type")


def unroll(s: StaticTerm) -> StaticTerm:
    """One unfolding of a fix/hofix head (what ``recurse`` does to a channel type)."""
    h = session_head(s)
    if h.kind == "fix":
        return beta_normalize(App(h.parts[0], h.term))
    if h.kind == "hofix":
        fn, args = h.parts[0], h.parts[1:]
        sorts = family(h.term.name)[1]
        me = _hofix_self(sorts, fn)
        return instantiate(App(fn, me), *args)
    raise NotAnStype(f"{show(s)} is not a recursive session type")


def _hofix_self(sorts, fn) -> StaticTerm:
    # λx1..xn. hofix(fn, x1..xn)
    names = [fresh_name("x") for _ in sorts]
    body = hofix(sorts, fn, *(FVar(n) for n in names))
    for n, srt in zip(reversed(names), reversed(sorts)):
        body = Lam(srt, close_term(body, n), "x")
    return body


# ---------------------------------------------------------------- equality


def _arg_sorts(sig: StaticSignature, c: Const, sorts: Mapping[str, Sort]) -> list[Sort]:
    entries = [cs for cs in sig.lookup(c.name) if len(cs.args) == len(c.args)]
    if len(entries) == 1:
        cs = entries[0]
    else:
        cs = None
        for cand in entries:
            try:
                ok = all(
                    _match_sort(e, sort_check(sorts, sig, a), {}) for e, a in zip(cand.args, c.args)
                )
            except StaticError:
                ok = False
            if ok:
                cs = cand
                break
        cs = cs or entries[0]
    out = []
    for e, a in zip(cs.args, c.args):
        if e in (_T, _X) or (isinstance(e, Arrow) and _T in (e.cod,)):
            out.append(sort_check(sorts, sig, a))
        else:
            out.append(e)
    return out


def equality_obligations(
    a: StaticTerm,
    b: StaticTerm,
    sort: Sort,
    sorts: dict[str, Sort],
    sig: StaticSignature | None = None,
) -> list[tuple[StaticTerm, StaticTerm, Sort]] | None:
    """Structural descent: index pairs that must be equal, or None on a head mismatch.

    ``sorts`` is extended with the names used to open binders.
    """
    sig = sig or DEFAULT_SIG
    out: list = []

    def go(x, y, srt) -> bool:
        if x == y:
            return True
        if srt in (INT, BOOL):
            out.append((x, y, srt))
            return True
        if isinstance(x, Lam) and isinstance(y, Lam):
            if x.sort != y.sort or not isinstance(srt, Arrow):
                return False
            v = fresh_name(x.hint)
            sorts[v] = x.sort
            return go(
                beta_normalize(open_term(x.body, FVar(v))),
                beta_normalize(open_term(y.body, FVar(v))),
                srt.cod,
            )
        if isinstance(x, Const) and isinstance(y, Const):
            if x.name != y.name or len(x.args) != len(y.args):
                return False
            return all(go(p, q, s) for p, q, s in zip(x.args, y.args, _arg_sorts(sig, x, sorts)))
        if isinstance(x, App) and isinstance(y, App):
            try:
                fs = sort_check(sorts, sig, x.fn)
            except StaticError:
                return False
            if not isinstance(fs, Arrow):
                return False
            return go(x.fn, y.fn, fs) and go(x.arg, y.arg, fs.dom)
        return False

    if not go(beta_normalize(a), beta_normalize(b), sort):
        return None
    return out


def static_equal(
    sigma: Mapping[str, Sort],
    props: Iterable[StaticTerm],
    s1: StaticTerm,
    s2: StaticTerm,
    sort: Sort,
    sig: StaticSignature | None = None,
) -> bool:
    """Equality modulo the constraint store; index subterms go to the solver."""
    from .constraints import ConstraintStore, Valid, entails

    sorts = dict(sigma)
    for s in (s1, s2):
        found = sort_check(sorts, sig, s)
        if not sort_leq(found, sort) and not (sort == TYPE and found == VTYPE):
            raise SortMismatch(sort, found, s)
    obligations = equality_obligations(s1, s2, sort, sorts, sig)
    if obligations is None:
        return False
    if not obligations:
        return True
    store = ConstraintStore.of(props, sorts)
    goal = conj(*(eq(x, y) for x, y, _ in obligations))
    return isinstance(entails(store, goal), Valid)


# ---------------------------------------------------------------- printing


def display_name(name: str) -> str:
    return name.replace("%", "")


def show_sort(s: Sort) -> str:
    return str(s)


def show(t: StaticTerm, names: tuple[str, ...] = ()) -> str:
    """Render a static term in the surface s-expression syntax."""
    avoid = frozenset(display_name(v) for v in free_vars(t))
    return _show(t, names, avoid)


def _show(t: StaticTerm, names: tuple[str, ...], avoid: frozenset) -> str:
    show = lambda x, ns: _show(x, ns, avoid)  # noqa: E731
    _pick = lambda h, ns: _pick_name(h, ns, avoid)  # noqa: E731
    if isinstance(t, IntLit):
        return str(t.value)
    if isinstance(t, BoolLit):
        return "true" if t.value else "false"
    if isinstance(t, FVar):
        return display_name(t.name)
    if isinstance(t, Var):
        return names[-1 - t.index] if t.index < len(names) else f"#{t.index}"
    if isinstance(t, Lam):
        n = _pick(t.hint, names)
        return f"(lam [{n} : {show_sort(t.sort)}] {show(t.body, names + (n,))})"
    if isinstance(t, App):
        head, args = t, []
        while isinstance(head, App):
            args.append(head.arg)
            head = head.fn
        parts = [show(head, names)] + [show(a, names) for a in reversed(args)]
        return "(" + " ".join(parts) + ")"
    if isinstance(t, Const):
        fam = family(t.name)
        if fam and fam[0] in ("quan", "forall", "exists") and isinstance(t.args[-1], Lam):
            body = t.args[-1]
            n = _pick(body.hint, names)
            inner = show(body.body, names + (n,))
            pre = f"{show(t.args[0], names)} " if fam[0] == "quan" else ""
            return f"({fam[0]} {pre}[{n} : {fam[1][0]}] {inner})"
        if t.name == "fix" and isinstance(t.args[0], Lam):
            body = t.args[0]
            n = _pick(body.hint, names)
            return f"(fix [{n} : stype] {show(body.body, names + (n,))})"
        head = "hofix" if fam and fam[0] == "hofix" else t.name
        if not t.args:
            return head
        return "(" + " ".join([head] + [show(a, names) for a in t.args]) + ")"
    return repr(t)


def _pick_name(hint: str, names: tuple[str, ...], avoid=frozenset()) -> str:
    base = display_name(hint) or "a"
    n, i = base, 1
    while n in names or n in avoid:
        i += 1
        n = f"{base}{i}"
    return n
