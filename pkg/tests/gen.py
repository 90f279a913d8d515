"""Random linear entailments: at most three variables, coefficients and constants in [-4, 4]."""

import random

from depsess import statics as st
from depsess.constraints import ConstraintStore
from depsess.statics import BOOL, INT

VARS = ("x", "y", "z")
OPS = ("<", "<=", "=", "!=", ">", ">=")


def lin_term(rng: random.Random, names) -> st.StaticTerm:
    t = st.IntLit(rng.randint(-4, 4))
    for v in names:
        a = rng.randint(-4, 4)
        if a:
            t = st.C("+", t, st.C("*", st.IntLit(a), st.FVar(v)))
    return t


def atom(rng: random.Random, names) -> st.StaticTerm:
    return st.C(rng.choice(OPS), lin_term(rng, names), st.IntLit(0))


def prop(rng: random.Random, names, depth: int = 1) -> st.StaticTerm:
    r = rng.random()
    if depth == 0 or r < 0.6:
        return atom(rng, names)
    if r < 0.75:
        return st.C("not", prop(rng, names, depth - 1))
    return st.C(rng.choice(("and", "or")), prop(rng, names, depth - 1), prop(rng, names, depth - 1))


def entailment(rng: random.Random):
    names = VARS[: rng.randint(1, 3)]
    hyps = [prop(rng, names) for _ in range(rng.randint(0, 3))]
    goal = prop(rng, names)
    return ConstraintStore.of(hyps, {v: INT for v in names}), goal


def entailments(seed: int, n: int):
    rng = random.Random(seed)
    return [entailment(rng) for _ in range(n)]


def _grid_eval(t, env):
    import numpy as np

    if isinstance(t, (st.IntLit, st.BoolLit)):
        return t.value
    if isinstance(t, st.FVar):
        return env[t.name]
    a = [_grid_eval(x, env) for x in t.args]
    ops = {
        "+": lambda: a[0] + a[1],
        "-": lambda: a[0] - a[1],
        "*": lambda: a[0] * a[1],
        "neg": lambda: -a[0],
        "<": lambda: a[0] < a[1],
        "<=": lambda: a[0] <= a[1],
        ">": lambda: a[0] > a[1],
        ">=": lambda: a[0] >= a[1],
        "=": lambda: a[0] == a[1],
        "!=": lambda: a[0] != a[1],
        "and": lambda: np.logical_and(a[0], a[1]),
        "or": lambda: np.logical_or(a[0], a[1]),
        "not": lambda: np.logical_not(a[0]),
    }
    return ops[t.name]()


def valid_on_grid(store, goal, bound: int) -> bool:
    """Validity over the box [-bound, bound]^n, evaluated on a numpy grid."""
    import numpy as np

    names = [n for n, _ in store.var_sorts]
    axes = np.meshgrid(*[np.arange(-bound, bound + 1)] * len(names), indexing="ij")
    env = dict(zip(names, axes))
    ok = np.ones(axes[0].shape, dtype=bool)
    for h in store.assumptions:
        ok &= np.asarray(_grid_eval(h, env), dtype=bool)
    return bool(np.all(~ok | np.asarray(_grid_eval(goal, env), dtype=bool)))


def bound_insensitive(store, goal, small: int = 8, large: int = 32) -> bool:
    return valid_on_grid(store, goal, small) == valid_on_grid(store, goal, large)


def stable_entailments(seed: int, n: int):
    """n random entailments whose validity does not change between bound 8 and bound 32."""
    rng = random.Random(seed)
    out = []
    while len(out) < n:
        e = entailment(rng)
        if bound_insensitive(*e):
            out.append(e)
    return out
