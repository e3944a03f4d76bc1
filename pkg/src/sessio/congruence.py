"""Structural congruence: normal forms for the full relation and the cut-only variant.

A process is brought into prenex form ``new (x1 y1) ... new (xn yn) (P1 | ... | Pm)``
where each ``Pi`` is a prefix or forwarder whose continuation is normalized
recursively.  Parallel components are sorted and bound names renamed so that
congruent processes print identically.
"""

from __future__ import annotations

from dataclasses import dataclass, field

from sessio.process import (
    INACT,
    Bra,
    Fwd,
    Inact,
    Par,
    Process,
    Recv,
    Res,
    Sel,
    Send,
    all_names,
    alpha_canonical,
    fresh,
    free_names,
    par_all,
    rename_bound,
    show,
)
from sessio.types import END, dual, show_type


@dataclass(frozen=True)
class CanonicalForm:
    residual: Process
    zero: bool
    key: str = field(compare=True)

    def __str__(self):
        return self.key


# -- helpers ----------------------------------------------------------------

def _apart(p: Process) -> Process:
    """Rename every binder to a globally unique name."""
    avoid = set(all_names(p))

    def gen(old):
        new = fresh(old, avoid)
        avoid.add(new)
        return new

    return rename_bound(p, gen)


def _flatten(p, restrictions, atoms, keep_units, inner):
    match p:
        case Par(l, r):
            _flatten(l, restrictions, atoms, keep_units, inner)
            _flatten(r, restrictions, atoms, keep_units, inner)
        case Res(x, y, body, ann):
            restrictions.append((x, y, ann))
            _flatten(body, restrictions, atoms, keep_units, inner)
        case Inact():
            if keep_units:
                atoms.append(p)
        case Recv(x, y, z, body):
            atoms.append(Recv(x, y, z, inner(body)))
        case Bra(x, z, branches):
            atoms.append(Bra(x, z, tuple((l, inner(b)) for l, b in branches)))
        case _:
            atoms.append(p)


class _Canon:
    """Canonical labelling of a prenex tree.

    Every bound name is numbered by first occurrence.  At each parallel
    cluster the components are emitted in the order giving the least
    printed sequence; ties are kept and explored side by side, and branches
    that agree on what remains and on the numbering of the names still in
    play are merged.  The result depends only on the congruence class.
    """

    def __init__(self, bound, free):
        self.bound, self.free = bound, free

    def name(self, k: int) -> str:
        s = f"_{k}"
        while s in self.free:
            s += "'"
        return s

    def _use(self, n, naming, counter):
        if n not in self.bound:
            return n, naming, counter
        if n not in naming:
            naming = {**naming, n: counter}
            counter += 1
        return self.name(naming[n]), naming, counter

    def run(self, p, naming, counter) -> list:
        """All least renderings of ``p`` as ``(process, naming, counter)``."""
        match p:
            case Inact():
                return [(p, naming, counter)]
            case Send(x, a, b):
                x2, naming, counter = self._use(x, naming, counter)
                a2, naming, counter = self._use(a, naming, counter)
                b2, naming, counter = self._use(b, naming, counter)
                return [(Send(x2, a2, b2), naming, counter)]
            case Sel(x, b, l):
                x2, naming, counter = self._use(x, naming, counter)
                b2, naming, counter = self._use(b, naming, counter)
                return [(Sel(x2, b2, l), naming, counter)]
            case Fwd(x, y):
                outs = []
                for u, v in ((x, y), (y, x)):
                    u2, nm, c = self._use(u, naming, counter)
                    v2, nm, c = self._use(v, nm, c)
                    outs.append((Fwd(u2, v2), nm, c))
                return _least(outs)
            case Recv(x, y, z, body):
                x2, naming, counter = self._use(x, naming, counter)
                y2, naming, counter = self._use(y, naming, counter)
                z2, naming, counter = self._use(z, naming, counter)
                return [(Recv(x2, y2, z2, b), nm, c) for b, nm, c in self.run(body, naming, counter)]
            case Bra(x, z, branches):
                x2, naming, counter = self._use(x, naming, counter)
                z2, naming, counter = self._use(z, naming, counter)
                frontier = [((), naming, counter)]
                for label, b in branches:
                    outs = [(done + ((label, q),), nm, c)
                            for done, nm0, c0 in frontier
                            for q, nm, c in self.run(b, nm0, c0)]
                    frontier = _least(outs, key=lambda item: "\x00".join(show(q, annotations=False) for _, q in item[0]))
                return _least([(Bra(x2, z2, done), nm, c) for done, nm, c in frontier])
            case Par() | Res():
                return self.cluster(p, naming, counter)
        raise TypeError(f"not a process: {p!r}")

    def cluster(self, p, naming, counter) -> list:
        restrictions: list = []
        atoms: list = []
        _flatten(p, restrictions, atoms, True, lambda b: b)
        fns = [free_names(a) for a in atoms]
        everything = frozenset(range(len(atoms)))
        frontier = [((), (), naming, counter)]  # chosen indices, rendered atoms, naming, counter
        for _ in atoms:
            best, merged = None, {}
            for chosen, done, nm0, c0 in frontier:
                rest0 = everything - set(chosen)
                for i in sorted(rest0):
                    for q, nm, c in self.run(atoms[i], nm0, c0):
                        key = show(q, annotations=False)
                        if best is not None and key > best:
                            continue
                        if best is None or key < best:
                            best, merged = key, {}
                        rest = rest0 - {i}
                        live = tuple(sorted((nm[n], n) for j in rest for n in fns[j] if n in nm))
                        merged.setdefault((rest, live, c, _pairing(restrictions, nm)),
                                          (chosen + (i,), done + (q,), nm, c))
            frontier = list(merged.values())

        outs = []
        for _, done, nm, c in frontier:
            header = []
            pending = sorted(restrictions, key=lambda r: (min(nm.get(r[0], 1 << 30), nm.get(r[1], 1 << 30)),
                                                          "" if r[2] is None else show_type(r[2])))
            for x, y, ann in pending:
                for n in (x, y):
                    if n not in nm:
                        nm = {**nm, n: c}
                        c += 1
                if nm[y] < nm[x]:
                    x, y, ann = y, x, (dual(ann) if ann is not None else None)
                header.append((nm[x], self.name(nm[x]), self.name(nm[y]), ann))
            body = par_all(done)
            for _, x2, y2, ann in sorted(header, reverse=True):
                body = Res(x2, y2, body, ann)
            outs.append((body, nm, c))
        return _least(outs, key=lambda item: show(item[0]))


def _pairing(restrictions, nm) -> tuple:
    """How numbered names are tied to restrictions; paths differing here must not be merged."""
    out = []
    for x, y, ann in restrictions:
        if x not in nm and y not in nm:
            continue
        if y in nm and (x not in nm or nm[y] < nm[x]):
            x, y, ann = y, x, (dual(ann) if ann is not None else None)
        typ = "" if ann is None else show_type(ann)
        out.append((nm[x], nm[y] if y in nm else -1, "" if y in nm else y, typ))
    return tuple(sorted(out))


def _least(outs, key=None):
    """Keep the entries whose rendering is least, dropping duplicates."""
    key = key or (lambda item: show(item[0], annotations=False))
    best = min(key(o) for o in outs)
    seen, kept = set(), []
    for o in outs:
        if key(o) != best:
            continue
        tag = (tuple(sorted(o[-2].items())), o[-1])
        if tag not in seen:
            seen.add(tag)
            kept.append(o)
    return kept


def _canonicalize(p: Process) -> Process:
    """Canonical spelling of a tree that is already in prenex form at every level."""
    free = free_names(p)
    bound = all_names(p) - free
    return _Canon(bound, free).run(p, {}, 0)[0][0]


def _prenex_parts(p: Process, keep_units: bool, inner):
    restrictions: list = []
    atoms: list = []
    _flatten(p, restrictions, atoms, keep_units, inner)
    return restrictions, atoms


# -- full structural congruence --------------------------------------------

def _simplify(restrictions, atoms):
    changed = True
    while changed:
        changed = False
        fns = [free_names(a) for a in atoms]
        used = set().union(*fns) if fns else set()
        for r in list(restrictions):
            x, y, _ = r
            if x not in used and y not in used:
                restrictions.remove(r)
                changed = True
        if changed:
            continue
        for i, a in enumerate(atoms):
            if not isinstance(a, Fwd):
                continue
            for r in restrictions:
                x, y, _ = r
                if {a.x, a.y} == {x, y} and x != y:
                    others = set().union(*(fns[:i] + fns[i + 1:])) if len(fns) > 1 else set()
                    if x not in others and y not in others:
                        restrictions.remove(r)
                        del atoms[i]
                        changed = True
                        break
            if changed:
                break
    return restrictions, atoms


def _prenex_tree(p: Process) -> Process:
    restrictions, atoms = _prenex_parts(p, keep_units=False, inner=_prenex_tree)
    restrictions, atoms = _simplify(restrictions, atoms)
    body = par_all(atoms)
    for x, y, ann in reversed(restrictions):
        body = Res(x, y, body, ann)
    return body


def normalize(p: Process) -> CanonicalForm:
    residual = _canonicalize(_prenex_tree(_apart(p)))
    return CanonicalForm(residual, isinstance(residual, Inact), show(residual, annotations=False))


def congruent(p: Process, q: Process) -> bool:
    return normalize(p).key == normalize(q).key


def scope_extrude(p: Process) -> Process:
    """Prenex form: every restriction pulled to the top, nothing else simplified."""
    restrictions, atoms = _prenex_parts(_apart(p), keep_units=True, inner=lambda b: b)
    body = par_all(atoms)
    for x, y, ann in reversed(restrictions):
        body = Res(x, y, body, ann)
    return body


# -- cut-only congruence ----------------------------------------------------

def is_cut_shape(p: Process) -> bool:
    """Every restriction sits directly over a parallel composition and vice versa."""
    match p:
        case Res(_, _, Par(l, r), _):
            return is_cut_shape(l) and is_cut_shape(r)
        case Res() | Par():
            return False
        case Recv(body=body):
            return is_cut_shape(body)
        case Bra(branches=branches):
            return all(is_cut_shape(b) for _, b in branches)
    return True


def _acp_tree(p: Process) -> Process:
    restrictions, atoms = _prenex_parts(p, keep_units=True, inner=_acp_tree)
    body = par_all(atoms)
    for x, y, ann in reversed(restrictions):
        body = Res(x, y, body, ann)
    return body


def acp_key(p: Process) -> str:
    if not is_cut_shape(p):
        return show(alpha_canonical(p), annotations=False)
    return show(_canonicalize(_acp_tree(_apart(p))), annotations=False)


def congruent_acp(p: Process, q: Process) -> bool:
    """Congruence generated by alpha, forwarder symmetry and cut symmetry/associativity.

    Two cut-shaped processes are related exactly when they cut together the
    same components along the same channels, which is what the flattened
    canonical form compares.
    """
    return acp_key(p) == acp_key(q)


def to_cut_shape(p: Process) -> Process | None:
    """Rebuild a prenex process as a tree of cuts, or ``None`` if it is not a forest.

    Disconnected components are joined by cuts on fresh closed channels, which
    type as weakened ``end`` endpoints on both sides.
    """
    restrictions, atoms = _prenex_parts(_apart(p), keep_units=False, inner=_cut_inner)
    restrictions = [r for r in restrictions
                    if any(n in free_names(a) for a in atoms for n in r[:2])]
    avoid = set(all_names(p))
    for a in atoms:
        avoid |= all_names(a)
    if not atoms:
        return INACT

    owner = {}
    for i, a in enumerate(atoms):
        for n in free_names(a):
            owner.setdefault(n, []).append(i)

    nodes = list(atoms)
    adj: dict = {i: [] for i in range(len(nodes))}
    for eid, (x, y, ann) in enumerate(restrictions):
        ox, oy = owner.get(x, []), owner.get(y, [])
        if len(ox) > 1 or len(oy) > 1:
            return None
        if not ox:
            nodes.append(INACT)
            ox = [len(nodes) - 1]
            adj[ox[0]] = []
        if not oy:
            nodes.append(INACT)
            oy = [len(nodes) - 1]
            adj[oy[0]] = []
        i, j = ox[0], oy[0]
        if i == j:
            return None
        adj[i].append((j, x, y, ann, eid))
        adj[j].append((i, y, x, dual(ann) if ann is not None else None, eid))

    seen: set = set()

    def build(node, via):
        seen.add(node)
        proc = nodes[node]
        for nb, mine, theirs, ann, eid in adj[node]:
            if eid == via:
                continue
            if nb in seen:
                raise _Cycle
            proc = Res(mine, theirs, Par(proc, build(nb, eid)), ann)
        return proc

    trees = []
    try:
        for start in range(len(nodes)):
            if start not in seen:
                trees.append(build(start, None))
    except _Cycle:
        return None

    result = trees[0]
    for t in trees[1:]:
        a = fresh("k", avoid)
        avoid.add(a)
        b = fresh("k", avoid)
        avoid.add(b)
        result = Res(a, b, Par(result, t), END)
    return result


class _Cycle(Exception):
    pass


def _cut_inner(p: Process) -> Process:
    shaped = to_cut_shape(p)
    return p if shaped is None else shaped
