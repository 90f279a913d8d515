"""S-expression reader with source spans.

Three bracket kinds are kept apart: ``( )`` lists, ``[ ]`` binders and
``{ }`` static arguments / static binders.
"""

from __future__ import annotations

import re
from dataclasses import dataclass, field

from ..dynamics import Span


class ParseError(Exception):
    def __init__(self, msg: str, span: Span | None = None) -> None:
        self.msg, self.span = msg, span
        where = f"{span.line}:{span.col}: " if span else ""
        super().__init__(f"{where}{msg}")

    def render(self) -> str:
        where = f" at {self.span.line}:{self.span.col}" if self.span else ""
        return f"error[parse]{where} — {self.msg}"


@dataclass(frozen=True)
class Atom:
    text: str
    span: Span = field(compare=False)
    string: bool = False


@dataclass(frozen=True)
class SList:
    kind: str  # "(", "[", "{"
    items: tuple
    span: Span = field(compare=False)


_CLOSE = {"(": ")", "[": "]", "{": "}"}
_TOKEN = re.compile(
    r"""
    (?P<ws>\s+|;[^\n]*)
  | (?P<open>[(\[{])
  | (?P<close>[)\]}])
  | (?P<str>"(?:[^"\\]|\\.)*")
  | (?P<bar>\|)
  | (?P<atom>[^\s()\[\]{}";|]+)
    """,
    re.VERBOSE,
)
_ESC = {"n": "\n", "t": "\t", '"': '"', "\\": "\\"}


def _unescape(body: str) -> str:
    return re.sub(r"\\(.)", lambda m: _ESC.get(m.group(1), m.group(1)), body)


def read_all(text: str, file: str = "") -> list:
    """Parse every top-level form."""
    line_starts = [0] + [m.end() for m in re.finditer("\n", text)]

    def span_at(pos: int, length: int) -> Span:
        lo, hi = 0, len(line_starts) - 1
        while lo < hi:
            mid = (lo + hi + 1) // 2
            if line_starts[mid] <= pos:
                lo = mid
            else:
                hi = mid - 1
        return Span(lo + 1, pos - line_starts[lo] + 1, length, file)

    stack: list[tuple[str, list, int]] = []
    top: list = []
    pos = 0
    while pos < len(text):
        m = _TOKEN.match(text, pos)
        if m is None:
            raise ParseError(f"unexpected character {text[pos]!r}", span_at(pos, 1))
        kind = m.lastgroup
        tok = m.group()
        start = pos
        pos = m.end()
        if kind == "ws":
            continue
        if kind == "open":
            stack.append((tok, [], start))
            continue
        if kind == "close":
            if not stack:
                raise ParseError(f"unbalanced {tok!r}", span_at(start, 1))
            opener, items, at = stack.pop()
            if _CLOSE[opener] != tok:
                raise ParseError(f"{opener!r} closed by {tok!r}", span_at(start, 1))
            node = SList(opener, tuple(items), span_at(at, pos - at))
        elif kind == "str":
            node = Atom(_unescape(tok[1:-1]), span_at(start, len(tok)), string=True)
        else:
            node = Atom(tok, span_at(start, len(tok)))
        (stack[-1][1] if stack else top).append(node)
    if stack:
        opener, _, at = stack[-1]
        raise ParseError(f"unclosed {opener!r}", span_at(at, 1))
    return top
