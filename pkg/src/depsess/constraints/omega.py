"""Integer satisfiability of linear conjunctions by Omega-test elimination.

Equalities are eliminated first (unit coefficients by substitution, others
with the symmetric-modulo trick).  Inequalities go through exact shadows when
one side has unit coefficients; otherwise real shadow, dark shadow, then
splinters.  A satisfying model is rebuilt by back-substitution, choosing the
value closest to zero for each eliminated variable.
"""

from __future__ import annotations

from math import gcd

from . import kernel

Row = tuple


def _row_gcd(r: Row) -> int:
    g = 0
    for a in r[1:]:
        g = gcd(g, a)
    return g


def _mod_hat(a: int, m: int) -> int:
    # a - m * floor(a/m + 1/2)
    return a - m * ((2 * a + m) // (2 * m))


def _substitute(row: Row, k: int, expr: Row) -> Row:
    """Replace x_k by ``expr`` (a row read as c + sum a_j x_j) inside ``row``."""
    coef = row[k + 1]
    if coef == 0:
        return row
    out = [x + coef * e for x, e in zip(row, expr)]
    out[k + 1] = 0
    return tuple(out)


def _extend(row: Row) -> Row:
    return row + (0,)


def _eval(expr: Row, model: list[int]) -> int:
    return expr[0] + sum(a * v for a, v in zip(expr[1:], model))


def _choose(k: int, rows: list[Row], model: list[int]) -> int:
    lo = None
    hi = None
    j = k + 1
    for r in rows:
        a = r[j]
        if a == 0:
            continue
        rest = r[0] + sum(c * v for i, (c, v) in enumerate(zip(r[1:], model)) if i != k)
        if a > 0:  # a*x >= -rest
            b = -((rest) // a)  # ceil(-rest / a)
            lo = b if lo is None else max(lo, b)
        else:  # -a*x <= rest  -> x <= floor(rest / -a)
            b = rest // (-a)
            hi = b if hi is None else min(hi, b)
    if lo is not None and lo > 0:
        return lo
    if hi is not None and hi < 0:
        return hi
    return 0


def _pick_var(rows: list[Row], n: int) -> tuple[int, str]:
    """Choose an elimination variable, preferring one-sided, then exact, then latest."""
    best = None
    for k in range(n - 1, -1, -1):
        j = k + 1
        lo = [r[j] for r in rows if r[j] > 0]
        up = [-r[j] for r in rows if r[j] < 0]
        if not lo and not up:
            continue
        if not lo or not up:
            return k, "onesided"
        exact = all(a == 1 for a in lo) or all(a == 1 for a in up)
        cost = len(lo) * len(up)
        key = (0 if exact else 1, cost)
        if best is None or key < best[0]:
            best = (key, k, "exact" if exact else "inexact")
    assert best is not None
    return best[1], best[2]


def solve(eqs: list[Row], ineqs: list[Row], n: int) -> list[int] | None:
    """Return an integer model of the system or None when unsatisfiable."""
    return _solve(list(eqs), list(ineqs), n)


def _solve(eqs: list[Row], ineqs: list[Row], n: int) -> list[int] | None:
    norm = []
    for r in eqs:
        g = _row_gcd(r)
        if g == 0:
            if r[0] != 0:
                return None
            continue
        if r[0] % g:
            return None
        if g != 1:
            r = tuple(x // g for x in r)
        norm.append(r)
    if norm:
        return _eliminate_equality(norm, ineqs, n)

    res = kernel.tighten(ineqs)
    if res is None:
        return None
    rows, implied = res
    if implied:
        return _solve(implied, rows, n)
    if not rows:
        return [0] * n

    k, how = _pick_var(rows, n)
    j = k + 1
    if how in ("onesided", "exact"):
        if how == "onesided":
            rest = [r for r in rows if r[j] == 0]
        else:
            rest = kernel.shadow(rows, k, False)
        model = _solve([], rest, n)
        if model is None:
            return None
        model[k] = _choose(k, rows, model)
        return model

    if _solve([], kernel.shadow(rows, k, False), n) is None:
        return None
    model = _solve([], kernel.shadow(rows, k, True), n)
    if model is not None:
        model[k] = _choose(k, rows, model)
        return model
    amax = max(-r[j] for r in rows if r[j] < 0)
    for lo in (r for r in rows if r[j] > 0):
        b = lo[j]
        for s in range((amax * b - amax - b) // amax + 1):
            # b*x = -(c + rest) + s, i.e. lo - s == 0
            splinter = (lo[0] - s,) + lo[1:]
            model = _solve([splinter], rows, n)
            if model is not None:
                return model
    return None


def _eliminate_equality(eqs: list[Row], ineqs: list[Row], n: int) -> list[int] | None:
    _, i, k = min((abs(r[k + 1]), i, k) for i, r in enumerate(eqs) for k in range(n) if r[k + 1])
    r = eqs[i]
    a = r[k + 1]
    if abs(a) == 1:
        expr = tuple(-x * a for x in r)
        expr = expr[: k + 1] + (0,) + expr[k + 2 :]
        others = eqs[:i] + eqs[i + 1 :]
        model = _solve(
            [_substitute(e, k, expr) for e in others],
            [_substitute(q, k, expr) for q in ineqs],
            n,
        )
        if model is None:
            return None
        model[k] = _eval(expr, model)
        return model

    m = abs(a) + 1
    sign = 1 if a > 0 else -1
    # x_k = sign * (-m*sigma + sum_{j != k} mh(a_j) x_j + mh(c)), sigma fresh at index n
    expr = [sign * _mod_hat(r[0], m)]
    for jj in range(n):
        expr.append(0 if jj == k else sign * _mod_hat(r[jj + 1], m))
    expr.append(-sign * m)
    expr = tuple(expr)
    new_eqs = [_substitute(_extend(e), k, expr) for e in eqs]
    new_ineqs = [_substitute(_extend(q), k, expr) for q in ineqs]
    model = _solve(new_eqs, new_ineqs, n + 1)
    if model is None:
        return None
    model[k] = _eval(expr, model)
    return model[:n]
