"""Types and terms of the functional language, with call-by-name term reduction.

Terms use explicit substitutions ``M⦃N/x⦄`` in place of meta-level
substitution.  ``step_term`` performs one deterministic step, tagged
``"red"`` for a reduction and ``"cong"`` for a step that only moves an
explicit substitution.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from itertools import count
from typing import Optional, Union

from sessio.process import fresh

Name = str
Label = str


# -- types -------------------------------------------------------------------

@dataclass(frozen=True)
class TUnit:
    pass


@dataclass(frozen=True)
class TPair:
    left: "FunType"
    right: "FunType"


@dataclass(frozen=True)
class TFun:
    dom: "FunType"
    cod: "FunType"


@dataclass(frozen=True)
class TName:
    """An opaque type, used to state results for arbitrary types."""

    name: str


@dataclass(frozen=True)
class TMeta:
    """An inference variable ranging over all types."""

    id: int


@dataclass(frozen=True)
class SSend:
    payload: "FunType"
    cont: "FunType"


@dataclass(frozen=True)
class SRecv:
    payload: "FunType"
    cont: "FunType"


@dataclass(frozen=True)
class SSel:
    branches: tuple  # ((label, session type), ...), label-sorted


@dataclass(frozen=True)
class SBra:
    branches: tuple


@dataclass(frozen=True)
class SEnd:
    pass


@dataclass(frozen=True)
class SMeta:
    """An inference variable ranging over session types, possibly dualized."""

    id: int
    neg: bool = False


UNIT = TUnit()
SEND_END = SEnd()
FunType = Union[TUnit, TPair, TFun, TName, TMeta, SSend, SRecv, SSel, SBra, SEnd, SMeta]
SESSION_TYPES = (SSend, SRecv, SSel, SBra, SEnd, SMeta)


def choice(cls, branches) -> SSel | SBra:
    items = dict(branches)
    return cls(tuple(sorted(items.items())))


def dual_s(s: FunType) -> FunType:
    match s:
        case SSend(t, c):
            return SRecv(t, dual_s(c))
        case SRecv(t, c):
            return SSend(t, dual_s(c))
        case SSel(bs):
            return SBra(tuple((l, dual_s(b)) for l, b in bs))
        case SBra(bs):
            return SSel(tuple((l, dual_s(b)) for l, b in bs))
        case SEnd():
            return s
        case SMeta(i, neg):
            return SMeta(i, not neg)
    raise TypeError(f"not a session type: {show_fun_type(s)}")


def is_session(t: FunType) -> bool:
    return isinstance(t, SESSION_TYPES)


def show_fun_type(t: FunType) -> str:
    match t:
        case TUnit():
            return "1"
        case TPair(a, b):
            return f"{_ty_atom(a, TPair)} × {_ty_atom(b, TPair)}"
        case TFun(a, b):
            return f"{_ty_atom(a)} ⊸ {_ty_atom(b, TFun)}"
        case TName(n):
            return n
        case TMeta(i):
            return f"?{i}"
        case SSend(a, c):
            return f"!{_ty_atom(a)}.{_ty_atom(c)}"
        case SRecv(a, c):
            return f"?{_ty_atom(a)}.{_ty_atom(c)}"
        case SSel(bs):
            return "⊕{" + ", ".join(f"{l}: {show_fun_type(b)}" for l, b in bs) + "}"
        case SBra(bs):
            return "&{" + ", ".join(f"{l}: {show_fun_type(b)}" for l, b in bs) + "}"
        case SEnd():
            return "end"
        case SMeta(i, neg):
            return f"~s{i}" if neg else f"s{i}"
    raise TypeError(f"not a type: {t!r}")


def _ty_atom(t, same=None) -> str:
    s = show_fun_type(t)
    if isinstance(t, (TPair, TFun)) and type(t) is not same:
        return f"({s})"
    return s


# -- terms -------------------------------------------------------------------

@dataclass(frozen=True)
class Var:
    name: Name


@dataclass(frozen=True)
class Abs:
    x: Name
    body: "Term"
    ann: Optional[FunType] = field(default=None, compare=False)


@dataclass(frozen=True)
class App:
    fn: "Term"
    arg: "Term"


@dataclass(frozen=True)
class ExplSub:
    """``body⦃arg/x⦄``: ``x`` is bound in ``body``."""

    body: "Term"
    x: Name
    arg: "Term"


@dataclass(frozen=True)
class Pair:
    left: "Term"
    right: "Term"


@dataclass(frozen=True)
class LetPair:
    x: Name
    y: Name
    scrut: "Term"
    body: "Term"


@dataclass(frozen=True)
class UnitVal:
    pass


@dataclass(frozen=True)
class New:
    """Channel creation; ``ann`` is the type of the first endpoint."""

    ann: Optional[FunType] = field(default=None, compare=False)


@dataclass(frozen=True)
class Spawn:
    child: "Term"
    cont: "Term"


@dataclass(frozen=True)
class SendTm:
    payload: "Term"
    chan: "Term"


@dataclass(frozen=True)
class RecvTm:
    chan: "Term"


@dataclass(frozen=True)
class SelectTm:
    label: Label
    chan: "Term"


@dataclass(frozen=True)
class CaseTm:
    """Branching; each branch is a function receiving the continuation channel."""

    chan: "Term"
    branches: tuple  # ((label, term), ...), label-sorted

    def __post_init__(self):
        labels = [l for l, _ in self.branches]
        if not labels or len(set(labels)) != len(labels):
            raise ValueError("case needs distinct labels")
        if labels != sorted(labels):
            object.__setattr__(self, "branches", tuple(sorted(self.branches)))

    def branch(self, label):
        return dict(self.branches).get(label)


@dataclass(frozen=True)
class CloseTm:
    chan: "Term"
    cont: "Term"


UNIT_VAL = UnitVal()
Term = Union[Var, Abs, App, ExplSub, Pair, LetPair, UnitVal, New, Spawn, SendTm, RecvTm, SelectTm, CaseTm, CloseTm]


# -- generic traversal ---------------------------------------------------------

def _binders(t) -> tuple:
    match t:
        case Abs(x) | ExplSub(x=x):
            return (x,)
        case LetPair(x, y):
            return (x, y)
    return ()


def _kids(t) -> list:
    """Immediate subterms, each paired with whether the binders of ``t`` scope over it."""
    match t:
        case Abs(_, body):
            return [(body, True)]
        case App(f, a):
            return [(f, False), (a, False)]
        case ExplSub(b, _, n):
            return [(b, True), (n, False)]
        case Pair(l, r):
            return [(l, False), (r, False)]
        case LetPair(_, _, s, b):
            return [(s, False), (b, True)]
        case Spawn(c, k) | CloseTm(c, k):
            return [(c, False), (k, False)]
        case SendTm(p, c):
            return [(p, False), (c, False)]
        case RecvTm(c) | SelectTm(_, c):
            return [(c, False)]
        case CaseTm(c, bs):
            return [(c, False)] + [(b, False) for _, b in bs]
    return []


def _rebuild(t, kids: list, binders: tuple = None):
    binders = _binders(t) if binders is None else binders
    match t:
        case Abs(_, _, ann):
            return Abs(binders[0], kids[0], ann)
        case App():
            return App(*kids)
        case ExplSub():
            return ExplSub(kids[0], binders[0], kids[1])
        case Pair():
            return Pair(*kids)
        case LetPair():
            return LetPair(binders[0], binders[1], kids[0], kids[1])
        case Spawn():
            return Spawn(*kids)
        case CloseTm():
            return CloseTm(*kids)
        case SendTm():
            return SendTm(*kids)
        case RecvTm():
            return RecvTm(kids[0])
        case SelectTm(label):
            return SelectTm(label, kids[0])
        case CaseTm(_, bs):
            return CaseTm(kids[0], tuple((l, k) for (l, _), k in zip(bs, kids[1:])))
    return t


def free_vars(t: Term) -> frozenset:
    if isinstance(t, Var):
        return frozenset({t.name})
    bound = set(_binders(t))
    out = set()
    for k, scoped in _kids(t):
        out |= free_vars(k) - bound if scoped else free_vars(k)
    return frozenset(out)


def all_vars(t: Term) -> set:
    out = set(_binders(t))
    if isinstance(t, Var):
        out.add(t.name)
    for k, _ in _kids(t):
        out |= all_vars(k)
    return out


def rename(t: Term, sub: dict) -> Term:
    """Capture-avoiding renaming of free variables."""
    if not sub:
        return t
    if isinstance(t, Var):
        return Var(sub.get(t.name, t.name))
    binders = _binders(t)
    if not binders:
        return _rebuild(t, [rename(k, sub) for k, _ in _kids(t)])
    inner = {a: b for a, b in sub.items() if a not in binders}
    targets = set(inner.values())
    avoid = targets | all_vars(t) | set(sub)
    new_binders = []
    for b in binders:
        if b in targets:
            nb = fresh(b, avoid)
            avoid.add(nb)
            inner[b] = nb
            new_binders.append(nb)
        else:
            new_binders.append(b)
    kids = [rename(k, inner if scoped else sub) for k, scoped in _kids(t)]
    return _rebuild(t, kids, tuple(new_binders))


def _freshen(t: Term, avoid: set) -> Term:
    """Rename the binders of ``t`` away from ``avoid``."""
    binders = _binders(t)
    clash = [b for b in binders if b in avoid]
    if not clash:
        return t
    taken = set(avoid) | all_vars(t)
    ren = {}
    for b in clash:
        ren[b] = fresh(b, taken)
        taken.add(ren[b])
    kids = [rename(k, ren) if scoped else k for k, scoped in _kids(t)]
    return _rebuild(t, kids, tuple(ren.get(b, b) for b in binders))


# -- reduction -----------------------------------------------------------------

def push_subst(body: Term, x: Name, arg: Term) -> Term:
    """Move ``⦃arg/x⦄`` one level into ``body``, or drop it if ``x`` is unused."""
    if x not in free_vars(body):
        return body
    body = _freshen(body, free_vars(arg) | {x})
    kids = [ExplSub(k, x, arg) if x in free_vars(k) else k for k, _ in _kids(body)]
    return _rebuild(body, kids)


def step_term(m: Term) -> tuple | None:
    """One call-by-name step ``(kind, term)``, or ``None`` if ``m`` is a value or blocked."""
    match m:
        case App(Abs(x, body), n):
            return "red", ExplSub(body, x, n)
        case App(f, a):
            r = step_term(f)
            return r and (r[0], App(r[1], a))
        case ExplSub(Var(y), x, n) if y == x:
            return "red", n
        case ExplSub(body, x, n):
            r = step_term(body)
            if r is not None:
                return r[0], ExplSub(r[1], x, n)
            return "cong", push_subst(body, x, n)
        case LetPair(x, y, Pair(l, r), body):
            avoid = free_vars(l) | free_vars(r)
            t = _freshen(LetPair(x, y, Pair(l, r), body), avoid)
            return "red", ExplSub(ExplSub(t.body, t.x, l), t.y, r)
        case LetPair(x, y, s, body):
            r = step_term(s)
            return r and (r[0], LetPair(x, y, r[1], body))
        case SendTm(p, c):
            r = step_term(c)
            return r and (r[0], SendTm(p, r[1]))
        case RecvTm(c) | SelectTm(_, c) | CaseTm(c) | CloseTm(c):
            r = step_term(c)
            return r and (r[0], _rebuild(m, [r[1]] + [k for k, _ in _kids(m)[1:]]))
    return None


def reduce_term(m: Term, max_steps: int = 10_000) -> list:
    """The call-by-name trace ``[(kind, term), ...]`` from ``m``."""
    out = []
    for _ in range(max_steps):
        r = step_term(m)
        if r is None:
            break
        out.append(r)
        m = r[1]
    return out


# -- printing ------------------------------------------------------------------

def show_term(t: Term) -> str:
    match t:
        case Var(x):
            return x
        case Abs(x, body):
            return f"λ{x}.{show_term(body)}"
        case App(f, a):
            head = show_term(f) if isinstance(f, (Var, App, Pair, UnitVal, New)) else f"({show_term(f)})"
            return f"{head} {_atom(a)}"
        case ExplSub(body, x, n):
            return f"{_atom(body)}⦃{show_term(n)}/{x}⦄"
        case Pair(l, r):
            return f"({show_term(l)}, {show_term(r)})"
        case LetPair(x, y, s, b):
            return f"let ({x}, {y}) = {show_term(s)} in {show_term(b)}"
        case UnitVal():
            return "()"
        case New():
            return "new"
        case Spawn(c, k):
            return f"spawn {_atom(c)}; {show_term(k)}"
        case SendTm(p, c):
            return f"send {_atom(p)} {_atom(c)}"
        case RecvTm(c):
            return f"recv {_atom(c)}"
        case SelectTm(l, c):
            return f"select {l} {_atom(c)}"
        case CaseTm(c, bs):
            return f"case {_atom(c)} {{" + ", ".join(f"{l}: {show_term(b)}" for l, b in bs) + "}"
        case CloseTm(c, k):
            return f"close {_atom(c)}; {show_term(k)}"
    raise TypeError(f"not a term: {t!r}")


def _atom(t) -> str:
    s = show_term(t)
    return s if isinstance(t, (Var, Pair, UnitVal, New)) else f"({s})"


def alpha_equal(a: Term, b: Term) -> bool:
    return _canon(a, {}, count()) == _canon(b, {}, count())


def _canon(t, env, counter):
    if isinstance(t, Var):
        return Var(env.get(t.name, t.name))
    binders = _binders(t)
    inner = dict(env)
    new = []
    for b in binders:
        inner[b] = f"%{next(counter)}"
        new.append(inner[b])
    kids = [_canon(k, inner if scoped else env, counter) for k, scoped in _kids(t)]
    out = _rebuild(t, kids, tuple(new))
    return Abs(out.x, out.body) if isinstance(out, Abs) else out
