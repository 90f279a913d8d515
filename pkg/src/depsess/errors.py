"""Type errors carrying the name of the rule that failed."""

from __future__ import annotations

from typing import Any, Mapping, Optional

from .statics import display_name


class TypeCheckError(Exception):
    kind = "type error"

    def __init__(
        self,
        rule: str,
        detail: str,
        span: Any = None,
        countermodel: Optional[Mapping[str, Any]] = None,
    ) -> None:
        super().__init__(detail)
        self.rule = rule
        self.detail = detail
        self.span = span
        self.countermodel = dict(countermodel) if countermodel is not None else None

    def render(self) -> str:
        where = f" at {self.span.line}:{self.span.col}" if self.span is not None else ""
        out = f"error[{self.rule}]{where} — {self.detail}"
        if self.countermodel is not None:
            cm = ", ".join(f"{display_name(k)}={_fmt(v)}" for k, v in self.countermodel.items())
            out += f" (countermodel: {cm or 'any assignment'})"
        return out

    def __str__(self) -> str:
        return self.render()


def _fmt(v: Any) -> str:
    if isinstance(v, bool):
        return "true" if v else "false"
    return str(v)


class LinearityViolation(TypeCheckError):
    kind = "linearity"


class GuardNotEntailed(TypeCheckError):
    kind = "guard"


class SortError(TypeCheckError):
    kind = "sort"


class RuleMismatch(TypeCheckError):
    kind = "mismatch"


class UnsupportedConstraint(TypeCheckError):
    kind = "unsupported"


class CannotInferStatics(TypeCheckError):
    kind = "inference"


class UnboundVariable(TypeCheckError):
    kind = "unbound"


class EndpointMultiplicity(TypeCheckError):
    kind = "multiplicity"
