"""Asynchronous session processes: syntax, free names, substitution, alpha-renaming.

Names are plain strings.  Names produced by renaming carry a ``#k`` suffix
on top of their source spelling, so ``origin`` can always recover what the
user wrote.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable, Mapping, Optional, Union

from sessio.types import SessionType, dual

Name = str
Label = str


@dataclass(frozen=True)
class Send:
    subj: Name
    msg: Name
    cont: Name


@dataclass(frozen=True)
class Recv:
    subj: Name
    msg: Name
    cont: Name
    body: "Process"


@dataclass(frozen=True)
class Sel:
    subj: Name
    cont: Name
    label: Label


@dataclass(frozen=True)
class Bra:
    subj: Name
    cont: Name
    branches: tuple  # tuple[tuple[Label, Process], ...], label-sorted

    def __post_init__(self):
        if not self.branches:
            raise ValueError("branch construct needs at least one label")
        labels = [l for l, _ in self.branches]
        if len(set(labels)) != len(labels):
            raise ValueError(f"duplicate labels in branch on {self.subj}")
        if labels != sorted(labels):
            object.__setattr__(self, "branches", tuple(sorted(self.branches, key=lambda b: b[0])))

    def branch(self, label: Label) -> Optional["Process"]:
        for l, p in self.branches:
            if l == label:
                return p
        return None


@dataclass(frozen=True)
class Par:
    left: "Process"
    right: "Process"


@dataclass(frozen=True)
class Res:
    x: Name
    y: Name
    body: "Process"
    ann: Optional[SessionType] = None  # type of x; y gets the dual


@dataclass(frozen=True)
class Inact:
    pass


@dataclass(frozen=True)
class Fwd:
    x: Name
    y: Name


Process = Union[Send, Recv, Sel, Bra, Par, Res, Inact, Fwd]

INACT = Inact()


def origin(name: Name) -> str:
    return name.split("#", 1)[0]


def fresh(base: Name, avoid) -> Name:
    stem = origin(base) or "n"
    k = 1
    while f"{stem}#{k}" in avoid:
        k += 1
    return f"{stem}#{k}"


def par_all(procs: Iterable[Process]) -> Process:
    """Right-nested parallel composition; the empty composition is ``0``."""
    procs = list(procs)
    if not procs:
        return INACT
    result = procs[-1]
    for p in reversed(procs[:-1]):
        result = Par(p, result)
    return result


def free_names(p: Process) -> frozenset:
    match p:
        case Send(x, a, b):
            return frozenset((x, a, b))
        case Sel(x, b, _):
            return frozenset((x, b))
        case Fwd(x, y):
            return frozenset((x, y))
        case Inact():
            return frozenset()
        case Recv(x, y, z, body):
            return (free_names(body) - {y, z}) | {x}
        case Bra(x, z, branches):
            fn = frozenset({x})
            for _, q in branches:
                fn |= free_names(q) - {z}
            return fn
        case Par(l, r):
            return free_names(l) | free_names(r)
        case Res(x, y, body, _):
            return free_names(body) - {x, y}
    raise TypeError(f"not a process: {p!r}")


def all_names(p: Process) -> set:
    """Every name occurring in ``p``, free or bound."""
    out: set = set()

    def go(q):
        match q:
            case Send(x, a, b):
                out.update((x, a, b))
            case Sel(x, b, _):
                out.update((x, b))
            case Fwd(x, y):
                out.update((x, y))
            case Inact():
                pass
            case Recv(x, y, z, body):
                out.update((x, y, z))
                go(body)
            case Bra(x, z, branches):
                out.update((x, z))
                for _, b in branches:
                    go(b)
            case Par(l, r):
                go(l)
                go(r)
            case Res(x, y, body, _):
                out.update((x, y))
                go(body)

    go(p)
    return out


def substitute(p: Process, replacements: Mapping[Name, Name]) -> Process:
    """Simultaneous capture-avoiding substitution of free names."""
    sub = {k: v for k, v in replacements.items() if k != v}
    if not sub:
        return p
    avoid = all_names(p) | set(sub) | set(sub.values())
    return _subst(p, sub, avoid)


def _binder(name, body_fn, sub, avoid):
    """Resolve one binder: drop shadowed keys, rename if it would capture."""
    sub = {k: v for k, v in sub.items() if k != name}
    live = {v for k, v in sub.items() if k in body_fn}
    if name in live:
        new = fresh(name, avoid)
        avoid.add(new)
        sub[name] = new
        return new, sub
    return name, sub


def _subst(p, sub, avoid):
    if not sub:
        return p
    s = lambda n: sub.get(n, n)
    match p:
        case Send(x, a, b):
            return Send(s(x), s(a), s(b))
        case Sel(x, b, l):
            return Sel(s(x), s(b), l)
        case Fwd(x, y):
            return Fwd(s(x), s(y))
        case Inact():
            return p
        case Recv(x, y, z, body):
            fn = free_names(body)
            y2, sub2 = _binder(y, fn, sub, avoid)
            z2, sub2 = _binder(z, fn, sub2, avoid)
            return Recv(s(x), y2, z2, _subst(body, sub2, avoid))
        case Bra(x, z, branches):
            fn = frozenset().union(*(free_names(b) for _, b in branches))
            z2, sub2 = _binder(z, fn, sub, avoid)
            return Bra(s(x), z2, tuple((l, _subst(b, sub2, avoid)) for l, b in branches))
        case Par(l, r):
            return Par(_subst(l, sub, avoid), _subst(r, sub, avoid))
        case Res(x, y, body, ann):
            fn = free_names(body)
            x2, sub2 = _binder(x, fn, sub, avoid)
            y2, sub2 = _binder(y, fn, sub2, avoid)
            return Res(x2, y2, _subst(body, sub2, avoid), ann)
    raise TypeError(f"not a process: {p!r}")


def rename_bound(p: Process, gen) -> Process:
    """Rename every binder in traversal order using ``gen(old) -> new``.

    The caller guarantees the generated names are globally fresh.
    """

    def go(q, env):
        r = lambda n: env.get(n, n)
        match q:
            case Send(x, a, b):
                return Send(r(x), r(a), r(b))
            case Sel(x, b, l):
                return Sel(r(x), r(b), l)
            case Fwd(x, y):
                return Fwd(r(x), r(y))
            case Inact():
                return q
            case Recv(x, y, z, body):
                y2, z2 = gen(y), gen(z)
                return Recv(r(x), y2, z2, go(body, {**env, y: y2, z: z2}))
            case Bra(x, z, branches):
                z2 = gen(z)
                env2 = {**env, z: z2}
                return Bra(r(x), z2, tuple((l, go(b, env2)) for l, b in branches))
            case Par(left, right):
                return Par(go(left, env), go(right, env))
            case Res(x, y, body, ann):
                x2, y2 = gen(x), gen(y)
                return Res(x2, y2, go(body, {**env, x: x2, y: y2}), ann)
        raise TypeError(f"not a process: {q!r}")

    return go(p, {})


def alpha_canonical(p: Process) -> Process:
    """Canonical representative up to alpha: binders become ``_0, _1, ...``."""
    fn = free_names(p)
    counter = [0]

    def gen(_old):
        while f"_{counter[0]}" in fn:
            counter[0] += 1
        name = f"_{counter[0]}"
        counter[0] += 1
        return name

    return rename_bound(p, gen)


def alpha_equivalent(p: Process, q: Process) -> bool:
    return strip_annotations(alpha_canonical(p)) == strip_annotations(alpha_canonical(q))


def strip_annotations(p: Process) -> Process:
    match p:
        case Recv(x, y, z, body):
            return Recv(x, y, z, strip_annotations(body))
        case Bra(x, z, branches):
            return Bra(x, z, tuple((l, strip_annotations(b)) for l, b in branches))
        case Par(l, r):
            return Par(strip_annotations(l), strip_annotations(r))
        case Res(x, y, body, _):
            return Res(x, y, strip_annotations(body))
    return p


def swap_res(r: Res) -> Res:
    """``new (x:A y) P`` as ``new (y:dual A x) P``."""
    return Res(r.y, r.x, r.body, dual(r.ann) if r.ann is not None else None)


def constructor_counts(p: Process) -> dict:
    counts: dict = {}

    def go(q):
        counts[type(q).__name__] = counts.get(type(q).__name__, 0) + 1
        match q:
            case Recv(body=body) | Res(body=body):
                go(body)
            case Bra(branches=branches):
                for _, b in branches:
                    go(b)
            case Par(l, r):
                go(l)
                go(r)

    go(p)
    return counts


# -- printing ---------------------------------------------------------------

def show(p: Process, annotations: bool = True) -> str:
    """Render in the textual process grammar (re-parseable)."""
    from sessio.types import show_type

    match p:
        case Send(x, a, b):
            return f"send {x}[{a},{b}]"
        case Sel(x, b, l):
            return f"sel {x}[{b}] < {l}"
        case Fwd(x, y):
            return f"fwd [{x}<>{y}]"
        case Inact():
            return "0"
        case Recv(x, y, z, body):
            return f"recv {x}({y},{z}). {show(body, annotations)}"
        case Bra(x, z, branches):
            inner = ", ".join(f"{l}: {show(b, annotations)}" for l, b in branches)
            return f"bra {x}({z}) > {{ {inner} }}"
        case Par():
            parts = []

            def flat(q):
                if isinstance(q, Par):
                    flat(q.left)
                    flat(q.right)
                else:
                    parts.append(q)

            flat(p)
            return "(" + " | ".join(show(q, annotations) for q in parts) + ")"
        case Res(x, y, body, ann):
            if annotations and ann is not None:
                return f"new ({x}:{show_type(ann)} {y}) {show(body, annotations)}"
            return f"new ({x} {y}) {show(body, annotations)}"
    raise TypeError(f"not a process: {p!r}")
