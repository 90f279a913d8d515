# cython: language_level=3, boundscheck=False, wraparound=False, overflowcheck=True
"""Compiled row kernels; same contract as ``_kernel_py``.

Arithmetic is on ``long long`` with overflow checks, so callers can fall back
to the arbitrary-precision version on OverflowError.
"""

from libc.stdlib cimport free, malloc


cdef long long _gcd(long long a, long long b) nogil:
    if a < 0:
        a = -a
    if b < 0:
        b = -b
    while b:
        a, b = b, a % b
    return a


cdef long long _floordiv(long long a, long long b) nogil:
    cdef long long q = a // b
    return q


cdef long long* _load(list rows, Py_ssize_t w) except NULL:
    cdef Py_ssize_t n = len(rows), i, c
    cdef long long* buf = <long long*> malloc((n * w + 1) * sizeof(long long))
    if buf == NULL:
        raise MemoryError()
    try:
        for i in range(n):
            r = rows[i]
            for c in range(w):
                buf[i * w + c] = r[c]
    except BaseException:
        free(buf)
        raise
    return buf


def tighten(list rows):
    cdef Py_ssize_t n = len(rows), w, i, c
    cdef long long g, c0
    cdef long long* buf
    if n == 0:
        return [], []
    w = len(rows[0])
    buf = _load(rows, w)
    best = {}
    try:
        for i in range(n):
            g = 0
            for c in range(1, w):
                g = _gcd(g, buf[i * w + c])
            if g == 0:
                if buf[i * w] < 0:
                    return None
                continue
            if g != 1:
                for c in range(w):
                    buf[i * w + c] = _floordiv(buf[i * w + c], g)
            key = tuple([buf[i * w + c] for c in range(1, w)])
            c0 = buf[i * w]
            old = best.get(key)
            if old is None or c0 < old:
                best[key] = c0
    finally:
        free(buf)
    out = []
    eqs = []
    paired = set()
    for key, cv in best.items():
        neg = tuple([-a for a in key])
        d = best.get(neg)
        if d is not None:
            if cv + d < 0:
                return None
            if cv + d == 0:
                if neg not in paired:
                    paired.add(key)
                    eqs.append((cv,) + key)
                continue
        out.append((cv,) + key)
    return out, eqs


def shadow(list rows, Py_ssize_t k, bint dark):
    cdef Py_ssize_t n = len(rows), w, i, p, q, c, j = k + 1
    cdef long long a, b, v
    cdef long long* buf
    if n == 0:
        return []
    w = len(rows[0])
    buf = _load(rows, w)
    out = []
    try:
        lows = []
        ups = []
        for i in range(n):
            v = buf[i * w + j]
            if v > 0:
                lows.append(i)
            elif v < 0:
                ups.append(i)
            else:
                out.append(rows[i])
        for p in lows:
            b = buf[p * w + j]
            for q in ups:
                a = -buf[q * w + j]
                row = [0] * w
                for c in range(w):
                    row[c] = a * buf[p * w + c] + b * buf[q * w + c]
                if dark:
                    row[0] = <long long> row[0] - (a - 1) * (b - 1)
                out.append(tuple(row))
    finally:
        free(buf)
    return out
