"""Row kernels for integer elimination, pure Python.

A row ``(c, a1, ..., an)`` stands for ``c + a1*x1 + ... + an*xn >= 0``.
"""

from __future__ import annotations

from math import gcd


def tighten(rows):
    """Normalize rows by their gcd, keep the tightest constant per direction.

    Returns ``None`` when a contradiction is found, otherwise ``(rows, eqs)``
    where ``eqs`` are equalities implied by opposite pairs.
    """
    best: dict = {}
    for r in rows:
        g = 0
        for a in r[1:]:
            g = gcd(g, a)
        if g == 0:
            if r[0] < 0:
                return None
            continue
        if g != 1:
            r = (r[0] // g,) + tuple(a // g for a in r[1:])
        key = r[1:]
        c = best.get(key)
        if c is None or r[0] < c:
            best[key] = r[0]
    out = []
    eqs = []
    paired = set()
    for key, c in best.items():
        neg = tuple(-a for a in key)
        d = best.get(neg)
        if d is not None:
            if c + d < 0:
                return None
            if c + d == 0:
                if neg not in paired:
                    paired.add(key)
                    eqs.append((c,) + key)
                continue
        out.append((c,) + key)
    return out, eqs


def shadow(rows, k, dark):
    """Eliminate variable ``k``: real shadow, or dark shadow when ``dark``."""
    j = k + 1
    lowers = [r for r in rows if r[j] > 0]
    uppers = [r for r in rows if r[j] < 0]
    out = [r for r in rows if r[j] == 0]
    for lo in lowers:
        b = lo[j]
        for up in uppers:
            a = -up[j]
            row = tuple(a * x + b * y for x, y in zip(lo, up))
            if dark:
                row = (row[0] - (a - 1) * (b - 1),) + row[1:]
            out.append(row)
    return out
