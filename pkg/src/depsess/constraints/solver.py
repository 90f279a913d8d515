"""Entailment over linear integer and boolean propositions.

``entails`` negates the goal, puts assumptions plus negated goal in negation
normal form, splits disjunctions lazily and hands each conjunction of linear
atoms to the Omega solver.  Booleans are 0/1 integers.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from functools import lru_cache
from typing import Iterable, Mapping

from .. import statics as st
from . import omega


@dataclass(frozen=True)
class Valid:
    def __bool__(self) -> bool:
        return True


@dataclass(frozen=True)
class Invalid:
    witness: Mapping[str, int | bool] = field(default_factory=dict)

    def __bool__(self) -> bool:
        return False


@dataclass(frozen=True)
class Unsupported:
    reason: str

    def __bool__(self) -> bool:
        return False


Verdict = Valid | Invalid | Unsupported


class NonLinear(Exception):
    pass


@dataclass(frozen=True)
class ConstraintStore:
    assumptions: tuple = ()
    var_sorts: tuple = ()  # ((name, Sort), ...) in declaration order

    @classmethod
    def of(cls, assumptions: Iterable = (), var_sorts: Mapping | Iterable = ()) -> "ConstraintStore":
        items = var_sorts.items() if isinstance(var_sorts, Mapping) else var_sorts
        vs = tuple((n, s) for n, s in items if s in (st.INT, st.BOOL))
        return cls(tuple(assumptions), vs)

    def extend(self, *props, **sorts) -> "ConstraintStore":
        return ConstraintStore(self.assumptions + props, self.var_sorts + tuple(sorts.items()))

    @property
    def sorts(self) -> dict:
        return dict(self.var_sorts)


# ---------------------------------------------------------------- translation

# Formulas in NNF: ("ge", lin) lin >= 0 | ("eq", lin) | ("ne", lin) | ("and", [...]) | ("or", [...])
# | ("true",) | ("false",).  lin is (const, {var: coef}).

_TRUE = ("true",)
_FALSE = ("false",)


def _lin(t, sorts):
    if isinstance(t, st.IntLit):
        return t.value, {}
    if isinstance(t, st.FVar):
        if sorts.get(t.name, st.INT) != st.INT:
            raise NonLinear(f"{st.display_name(t.name)} is not an integer")
        return 0, {t.name: 1}
    if isinstance(t, st.Const):
        n, a = t.name, t.args
        if n in ("+", "-") and len(a) == 2:
            c1, m1 = _lin(a[0], sorts)
            c2, m2 = _lin(a[1], sorts)
            s = 1 if n == "+" else -1
            out = dict(m1)
            for v, k in m2.items():
                out[v] = out.get(v, 0) + s * k
            return c1 + s * c2, out
        if n == "neg" and len(a) == 1:
            c, m = _lin(a[0], sorts)
            return -c, {v: -k for v, k in m.items()}
        if n == "*" and len(a) == 2:
            c1, m1 = _lin(a[0], sorts)
            c2, m2 = _lin(a[1], sorts)
            if m1 and m2:
                raise NonLinear(f"nonlinear product {st.show(t)}")
            if m1:
                return c1 * c2, {v: k * c2 for v, k in m1.items()}
            return c1 * c2, {v: k * c1 for v, k in m2.items()}
    raise NonLinear(f"not a linear integer term: {st.show(t)}")


def _sub(x, y):
    c1, m1 = x
    c2, m2 = y
    out = dict(m1)
    for v, k in m2.items():
        out[v] = out.get(v, 0) - k
    return c1 - c2, out


_CMP = {
    # name: (positive form, negated form) as functions of (a, b) lins
    "<": (lambda a, b: ("ge", _add_c(_sub(b, a), -1)), lambda a, b: ("ge", _sub(a, b))),
    "<=": (lambda a, b: ("ge", _sub(b, a)), lambda a, b: ("ge", _add_c(_sub(a, b), -1))),
    ">": (lambda a, b: ("ge", _add_c(_sub(a, b), -1)), lambda a, b: ("ge", _sub(b, a))),
    ">=": (lambda a, b: ("ge", _sub(a, b)), lambda a, b: ("ge", _add_c(_sub(b, a), -1))),
}


def _add_c(x, k):
    return x[0] + k, x[1]


def _is_bool_term(t, sorts) -> bool:
    if isinstance(t, st.BoolLit):
        return True
    if isinstance(t, st.IntLit):
        return False
    if isinstance(t, st.FVar):
        return sorts.get(t.name, st.INT) == st.BOOL
    if isinstance(t, st.Const):
        return t.name in ("<", "<=", ">", ">=", "=", "!=", "and", "or", "=>", "not")
    return False


def _nnf(t, pos: bool, sorts):
    if isinstance(t, st.BoolLit):
        return _TRUE if t.value == pos else _FALSE
    if isinstance(t, st.FVar):
        if sorts.get(t.name) != st.BOOL:
            raise NonLinear(f"{st.display_name(t.name)} is not a boolean")
        v = {t.name: 1}
        return ("ge", (-1, v)) if pos else ("ge", (0, {t.name: -1}))
    if isinstance(t, st.Const):
        n, a = t.name, t.args
        if n == "not":
            return _nnf(a[0], not pos, sorts)
        if n in ("and", "or"):
            kind = n if pos else ("or" if n == "and" else "and")
            return (kind, [_nnf(a[0], pos, sorts), _nnf(a[1], pos, sorts)])
        if n == "=>":
            return _nnf(st.C("or", st.C("not", a[0]), a[1]), pos, sorts)
        if n in _CMP:
            x, y = _lin(a[0], sorts), _lin(a[1], sorts)
            return _CMP[n][0 if pos else 1](x, y)
        if n in ("=", "!="):
            want_eq = (n == "=") == pos
            if _is_bool_term(a[0], sorts) or _is_bool_term(a[1], sorts):
                p, q = a
                if want_eq:  # (p and q) or (not p and not q)
                    return ("or", [("and", [_nnf(p, True, sorts), _nnf(q, True, sorts)]),
                                   ("and", [_nnf(p, False, sorts), _nnf(q, False, sorts)])])
                return ("or", [("and", [_nnf(p, True, sorts), _nnf(q, False, sorts)]),
                               ("and", [_nnf(p, False, sorts), _nnf(q, True, sorts)])])
            d = _sub(_lin(a[0], sorts), _lin(a[1], sorts))
            return ("eq", d) if want_eq else ("ne", d)
    raise NonLinear(f"not a supported proposition: {st.show(t)}")


def _infer_sorts(terms, sorts: dict) -> None:
    """Give every free variable a sort, defaulting by position."""

    def go(t, want):
        if isinstance(t, st.FVar):
            sorts.setdefault(t.name, want)
        elif isinstance(t, st.Const):
            n = t.name
            if n in ("and", "or", "=>", "not"):
                for x in t.args:
                    go(x, st.BOOL)
            elif n in ("=", "!="):
                w = st.BOOL if any(_is_bool_term(x, sorts) for x in t.args) else st.INT
                for x in t.args:
                    go(x, w)
            else:
                for x in t.args:
                    go(x, st.INT)

    for t in terms:
        go(t, st.BOOL)


# ---------------------------------------------------------------- search


def _conjunctions(formulas):
    """Lazily enumerate atom lists of the DNF of the conjunction of ``formulas``."""

    def go(pending, atoms):
        while pending:
            f, pending = pending[0], pending[1:]
            tag = f[0]
            if tag == "true":
                continue
            if tag == "false":
                return
            if tag == "and":
                pending = list(f[1]) + pending
                continue
            if tag == "or":
                for child in f[1]:
                    yield from go([child] + pending, atoms)
                return
            if tag == "ne":
                c, m = f[1]
                neg = (-c, {v: -k for v, k in m.items()})
                yield from go([("ge", _add_c(neg, -1))] + pending, atoms)
                yield from go([("ge", _add_c((c, m), -1))] + pending, atoms)
                return
            atoms = atoms + [f]
        yield atoms

    yield from go(list(formulas), [])


def _rows(atoms, index):
    n = len(index)
    eqs, ineqs = [], []
    for tag, (c, m) in atoms:
        row = [c] + [0] * n
        for v, k in m.items():
            row[index[v] + 1] += k
        (eqs if tag == "eq" else ineqs).append(tuple(row))
    return eqs, ineqs


def _decide(assumptions, goal, var_sorts) -> Verdict:
    sorts = dict(var_sorts)
    _infer_sorts(list(assumptions) + [goal], sorts)
    names = list(sorts)
    index = {v: i for i, v in enumerate(names)}
    try:
        formulas = [_nnf(p, True, sorts) for p in assumptions] + [_nnf(goal, False, sorts)]
    except NonLinear as e:
        return Unsupported(str(e))
    n = len(names)
    domain = []
    for v in names:
        if sorts[v] == st.BOOL:
            i = index[v]
            lo = [0] * (n + 1)
            lo[i + 1] = 1
            hi = [1] + [0] * n
            hi[i + 1] = -1
            domain += [tuple(lo), tuple(hi)]
    for atoms in _conjunctions(formulas):
        eqs, ineqs = _rows(atoms, index)
        model = omega.solve(eqs, ineqs + domain, n)
        if model is not None:
            witness = {}
            for v in names:
                val = model[index[v]]
                witness[v] = bool(val) if sorts[v] == st.BOOL else val
            return Invalid(witness)
    return Valid()


@lru_cache(maxsize=1 << 15)
def _entails_cached(assumptions, goal, var_sorts) -> Verdict:
    return _decide(assumptions, goal, var_sorts)


def entails(store: ConstraintStore, goal) -> Verdict:
    """Decide whether the store's assumptions imply ``goal`` for all assignments."""
    goal = st.beta_normalize(goal)
    if goal == st.TRUE:
        return Valid()
    assumptions = tuple(st.beta_normalize(p) for p in store.assumptions)
    return _entails_cached(assumptions, goal, store.var_sorts)


# ---------------------------------------------------------------- oracle and evaluation


def evaluate(t, env: Mapping[str, int | bool]):
    """Direct evaluation of a proposition or integer term."""
    if isinstance(t, (st.IntLit, st.BoolLit)):
        return t.value
    if isinstance(t, st.FVar):
        return env[t.name]
    if isinstance(t, st.Const):
        a = [evaluate(x, env) for x in t.args]
        n = t.name
        if n == "+":
            return a[0] + a[1]
        if n == "-":
            return a[0] - a[1]
        if n == "*":
            return a[0] * a[1]
        if n == "neg":
            return -a[0]
        if n == "<":
            return a[0] < a[1]
        if n == "<=":
            return a[0] <= a[1]
        if n == ">":
            return a[0] > a[1]
        if n == ">=":
            return a[0] >= a[1]
        if n == "=":
            return a[0] == a[1]
        if n == "!=":
            return a[0] != a[1]
        if n == "and":
            return a[0] and a[1]
        if n == "or":
            return a[0] or a[1]
        if n == "=>":
            return (not a[0]) or a[1]
        if n == "not":
            return not a[0]
    raise ValueError(f"cannot evaluate {st.show(t)}")


def oracle_entails(store: ConstraintStore, goal, bound: int = 8) -> Verdict:
    """Brute force over every assignment with integers in [-bound, bound]."""
    sorts = dict(store.var_sorts)
    _infer_sorts(list(store.assumptions) + [goal], sorts)
    names = list(sorts)
    ranges = [(False, True) if sorts[v] == st.BOOL else range(-bound, bound + 1) for v in names]
    for values in itertools.product(*ranges):
        env = dict(zip(names, values))
        if all(evaluate(p, env) for p in store.assumptions) and not evaluate(goal, env):
            return Invalid(env)
    return Valid()


def falsifies(store: ConstraintStore, goal, witness: Mapping) -> bool:
    """True when ``witness`` satisfies every assumption and violates ``goal``."""
    return all(evaluate(p, witness) for p in store.assumptions) and not evaluate(goal, witness)
