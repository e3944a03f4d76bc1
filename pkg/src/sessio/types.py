"""Session types with optional priority annotations.

One representation serves all three disciplines: AP and ACP ignore the
``pri`` fields, APCP requires them (or fills them with fresh variables).
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable, Optional, Union


class Unannotated(Exception):
    pass


# -- priorities -------------------------------------------------------------

@dataclass(frozen=True, order=True)
class Const:
    n: int

    def __str__(self):
        return str(self.n)


@dataclass(frozen=True, order=True)
class Var:
    name: str

    def __str__(self):
        return self.name


@dataclass(frozen=True)
class Omega:
    def __str__(self):
        return "ω"


OMEGA = Omega()
Priority = Union[Const, Var, Omega]


@dataclass(frozen=True)
class PriorityMin:
    """Lazy minimum of a set of priorities; empty means omega."""

    members: frozenset

    def __str__(self):
        if not self.members:
            return "ω"
        items = sorted(self.members, key=str)
        return items[0].__str__() if len(items) == 1 else "min(" + ", ".join(map(str, items)) + ")"

    def simplified(self) -> Priority | "PriorityMin":
        finite = {m for m in self.members if not isinstance(m, Omega)}
        if not finite:
            return OMEGA
        consts = [m for m in finite if isinstance(m, Const)]
        vars_ = {m for m in finite if isinstance(m, Var)}
        if not vars_:
            return min(consts)
        keep = vars_ | ({min(consts)} if consts else set())
        if len(keep) == 1:
            return next(iter(keep))
        return PriorityMin(frozenset(keep))


# -- types ------------------------------------------------------------------

@dataclass(frozen=True)
class Tensor:
    payload: "SessionType"
    cont: "SessionType"
    pri: Optional[Priority] = None


@dataclass(frozen=True)
class ParT:
    payload: "SessionType"
    cont: "SessionType"
    pri: Optional[Priority] = None


@dataclass(frozen=True)
class Plus:
    branches: tuple  # tuple[tuple[str, SessionType], ...], label-sorted
    pri: Optional[Priority] = None

    def __post_init__(self):
        _check_branches(self)


@dataclass(frozen=True)
class With:
    branches: tuple
    pri: Optional[Priority] = None

    def __post_init__(self):
        _check_branches(self)


@dataclass(frozen=True)
class Closed:
    pass


END = Closed()


@dataclass(frozen=True)
class Atom:
    """An opaque type ``A`` (or its dual), used to state results for arbitrary types."""

    name: str
    negated: bool = False


SessionType = Union[Tensor, ParT, Plus, With, Closed, Atom]


def _check_branches(t):
    if not t.branches:
        raise ValueError("choice type needs at least one label")
    labels = [l for l, _ in t.branches]
    if len(set(labels)) != len(labels):
        raise ValueError("duplicate labels in choice type")
    if labels != sorted(labels):
        object.__setattr__(t, "branches", tuple(sorted(t.branches, key=lambda b: b[0])))


def branch_map(t: Plus | With) -> dict:
    return dict(t.branches)


def dual(a: SessionType) -> SessionType:
    match a:
        case Tensor(p, c, pri):
            return ParT(dual(p), dual(c), pri)
        case ParT(p, c, pri):
            return Tensor(dual(p), dual(c), pri)
        case Plus(bs, pri):
            return With(tuple((l, dual(b)) for l, b in bs), pri)
        case With(bs, pri):
            return Plus(tuple((l, dual(b)) for l, b in bs), pri)
        case Closed():
            return a
        case Atom(name, neg):
            return Atom(name, not neg)
    raise TypeError(f"not a session type: {a!r}")


def priority_of(a: SessionType) -> Priority:
    if isinstance(a, Closed):
        return OMEGA
    if isinstance(a, Atom) or a.pri is None:
        raise Unannotated(f"connective without priority in {show_type(a)}")
    return a.pri


def priority_of_context(entries: Iterable[SessionType]) -> Priority | PriorityMin:
    """Least priority over a context's types (omega for the empty context)."""
    return PriorityMin(frozenset(priority_of(t) for t in entries)).simplified()


def erase(a: SessionType) -> SessionType:
    """Drop every priority annotation."""
    match a:
        case Tensor(p, c, _):
            return Tensor(erase(p), erase(c))
        case ParT(p, c, _):
            return ParT(erase(p), erase(c))
        case Plus(bs, _):
            return Plus(tuple((l, erase(b)) for l, b in bs))
        case With(bs, _):
            return With(tuple((l, erase(b)) for l, b in bs))
    return a


def map_priorities(a: SessionType, f) -> SessionType:
    """Rebuild ``a`` with each connective's priority replaced by ``f(pri)``."""
    match a:
        case Tensor(p, c, pri):
            return Tensor(map_priorities(p, f), map_priorities(c, f), f(pri))
        case ParT(p, c, pri):
            return ParT(map_priorities(p, f), map_priorities(c, f), f(pri))
        case Plus(bs, pri):
            return Plus(tuple((l, map_priorities(b, f)) for l, b in bs), f(pri))
        case With(bs, pri):
            return With(tuple((l, map_priorities(b, f)) for l, b in bs), f(pri))
    return a


def same_shape(a: SessionType, b: SessionType) -> bool:
    """Structural equality ignoring priorities."""
    return erase(a) == erase(b)


def depth(a: SessionType) -> int:
    match a:
        case Tensor(p, c, _) | ParT(p, c, _):
            return 1 + max(depth(p), depth(c))
        case Plus(bs, _) | With(bs, _):
            return 1 + max(depth(b) for _, b in bs)
    return 0


# -- printing ---------------------------------------------------------------

def _pri(pri) -> str:
    return "" if pri is None else f"[{pri}]"


def show_type(a: SessionType) -> str:
    """Render in the textual type grammar; ``*`` and ``%`` associate right."""
    match a:
        case Closed():
            return "end"
        case Atom(name, neg):
            return f"~[[{name}]]" if neg else f"[[{name}]]"
        case Tensor(p, c, pri):
            return f"{_show_left(p)} *{_pri(pri)} {show_type(c)}"
        case ParT(p, c, pri):
            return f"{_show_left(p)} %{_pri(pri)} {show_type(c)}"
        case Plus(bs, pri):
            return "+" + _pri(pri) + "{" + ", ".join(f"{l}: {show_type(b)}" for l, b in bs) + "}"
        case With(bs, pri):
            return "&" + _pri(pri) + "{" + ", ".join(f"{l}: {show_type(b)}" for l, b in bs) + "}"
    raise TypeError(f"not a session type: {a!r}")


def _show_left(a):
    s = show_type(a)
    return f"({s})" if isinstance(a, (Tensor, ParT)) else s
