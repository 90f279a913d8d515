"""The 6x2 duality matrix: every session head, both endpoint roles, both API constants."""

from depsess import dynamics as dy
from depsess import statics as st
from depsess.checker import TypingEnv, typecheck
from depsess.errors import GuardNotEntailed, TypeCheckError
from depsess.statics import BOOL, INT, STYPE

S, C = st.S_ROLE, st.C_ROLE
OWNER = S


def _quan(sort):
    return st.quan(sort, OWNER, st.lam(sort, "a", lambda a: st.end(OWNER)))


# head -> (session type owned by S, constant for the owner, constant for the other side)
HEADS = {
    "end": (st.end(OWNER), "close", "wait"),
    "msg": (st.msg(OWNER, st.C("int"), st.end(OWNER)), "send", "recv"),
    "branch": (st.branch(OWNER, st.end(OWNER), st.end(OWNER)), "choose", "offer"),
    "quan[int]": (_quan(INT), "unify", "exify"),
    "quan[bool]": (_quan(BOOL), "unify", "exify"),
    "quan[stype]": (_quan(STYPE), "unify", "exify"),
}

_EXTRA = {"send": (dy.IntV(5),), "choose": (dy.BoolV(True),)}


def attempt(head: str, role: int, const: str):
    """Type ``const`` applied to an endpoint of the given role; returns None or the error."""
    pi = HEADS[head][0]
    env = TypingEnv(delta={"ch": st.chan(st.IntLit(role), pi)})
    e = dy.Cst(const, (dy.Var("ch"),) + _EXTRA.get(const, ()))
    try:
        typecheck(env, None, e)
    except TypeCheckError as err:
        return err
    return None


def cells():
    """Yield (head, role, dual, other, dual_error, other_error)."""
    for head, (_, own, other) in HEADS.items():
        for role in (0, 1):
            dual, wrong = (own, other) if role == OWNER.value else (other, own)
            yield head, role, dual, wrong, attempt(head, role, dual), attempt(head, role, wrong)


def cell_ok(cell) -> bool:
    _, _, _, _, good, bad = cell
    return good is None and isinstance(bad, GuardNotEntailed)
