"""Reduction of processes: redex search on normal forms, traces and state exploration."""

from __future__ import annotations

import random
from collections import deque
from dataclasses import dataclass, field

from sessio.congruence import CanonicalForm, normalize
from sessio.process import Bra, Fwd, Inact, Par, Process, Recv, Res, Sel, Send, free_names, par_all, show, substitute

DEFAULT_MAX_STATES = 100_000
DEFAULT_MAX_STEPS = 10_000


class RedexStale(Exception):
    """The redex does not occur in the given process."""


@dataclass(frozen=True)
class Redex:
    kind: str  # "send-recv" | "sel-bra" | "fwd"
    location: tuple  # indices of the participating components of the normal form
    pair: tuple  # the restriction (x, y) being consumed

    def __str__(self):
        return f"{self.kind} on ({self.pair[0]},{self.pair[1]})"


@dataclass
class Trace:
    initial: Process
    steps: list = field(default_factory=list)  # [(Redex, Process)]
    terminal: CanonicalForm | None = None

    def render(self) -> str:
        lines = [f"init: {show(self.initial)}"]
        for n, (r, q) in enumerate(self.steps, 1):
            lines.append(f"step {n}: {r}")
            lines.append(f"  {show(q)}")
        lines.append(f"terminal: {self.terminal.key}" + ("  (≡ 0)" if self.terminal.zero else ""))
        return "\n".join(lines)

    def to_json(self) -> dict:
        return {
            "initial": show(self.initial),
            "steps": [
                {"step": n, "kind": r.kind, "pair": list(r.pair), "state": show(q)}
                for n, (r, q) in enumerate(self.steps, 1)
            ],
            "terminal": self.terminal.key,
            "zero": self.terminal.zero,
        }


@dataclass
class ExplorationReport:
    states_visited: int
    terminals: set
    deadlocked: set
    truncated: bool
    transitions: int = 0

    @property
    def deadlock_free(self) -> bool:
        return not self.deadlocked and not self.truncated

    def to_json(self) -> dict:
        return {
            "states": self.states_visited,
            "transitions": self.transitions,
            "terminals": sorted(t.key for t in self.terminals),
            "deadlocked": sorted(t.key for t in self.deadlocked),
            "truncated": self.truncated,
        }


def _split(nf: Process):
    restrictions = []
    while isinstance(nf, Res):
        restrictions.append((nf.x, nf.y, nf.ann))
        nf = nf.body
    atoms = []

    def flat(q):
        if isinstance(q, Par):
            flat(q.left)
            flat(q.right)
        else:
            atoms.append(q)

    flat(nf)
    return restrictions, [a for a in atoms if not isinstance(a, Inact)]


def _redexes_of(restrictions, atoms) -> list:
    fns = [free_names(a) for a in atoms]
    owners = {}
    for i, fn in enumerate(fns):
        for n in fn:
            owners.setdefault(n, []).append(i)
    found = []
    for x, y, _ in restrictions:
        ox, oy = owners.get(x, []), owners.get(y, [])
        if len(ox) == 1 and len(oy) == 1 and ox != oy:
            i, j = ox[0], oy[0]
            for (a, b, u, v) in ((i, j, x, y), (j, i, y, x)):
                pa, pb = atoms[a], atoms[b]
                if isinstance(pa, Send) and pa.subj == u and isinstance(pb, Recv) and pb.subj == v:
                    found.append(Redex("send-recv", (a, b), (x, y)))
                if (isinstance(pa, Sel) and pa.subj == u and isinstance(pb, Bra) and pb.subj == v
                        and pb.branch(pa.label) is not None):
                    found.append(Redex("sel-bra", (a, b), (x, y)))
        # forwarder on one end of the channel, other end anywhere (or nowhere)
        for u, v, ou, ov in ((x, y, ox, oy), (y, x, oy, ox)):
            if len(ou) != 1 or len(ov) > 1:
                continue
            f = atoms[ou[0]]
            if isinstance(f, Fwd) and u in (f.x, f.y):
                other = f.y if f.x == u else f.x
                if other != v and other != u:
                    found.append(Redex("fwd", (ou[0],), (x, y)))
    found.sort(key=lambda r: (r.location, r.kind, r.pair))
    return found


def find_redexes(p: Process) -> list:
    restrictions, atoms = _split(normalize(p).residual)
    return _redexes_of(restrictions, atoms)


def _rebuild(restrictions, atoms) -> Process:
    body = par_all(atoms)
    fn = free_names(body)
    for x, y, ann in reversed(restrictions):
        if x in fn or y in fn:
            body = Res(x, y, body, ann)
    return body


def step(p: Process, r: Redex) -> Process:
    restrictions, atoms = _split(normalize(p).residual)
    if r not in _redexes_of(restrictions, atoms):
        raise RedexStale(str(r))
    x, y = r.pair
    rest_res = [t for t in restrictions if (t[0], t[1]) != (x, y)]
    kept = [a for k, a in enumerate(atoms) if k not in r.location]
    if r.kind == "send-recv":
        snd, rcv = atoms[r.location[0]], atoms[r.location[1]]
        cont = substitute(rcv.body, {rcv.msg: snd.msg, rcv.cont: snd.cont})
        result = _rebuild(rest_res + [t for t in restrictions if (t[0], t[1]) == (x, y)], kept + [cont])
    elif r.kind == "sel-bra":
        sel, bra = atoms[r.location[0]], atoms[r.location[1]]
        cont = substitute(bra.branch(sel.label), {bra.cont: sel.cont})
        result = _rebuild(rest_res + [t for t in restrictions if (t[0], t[1]) == (x, y)], kept + [cont])
    else:
        f = atoms[r.location[0]]
        u = x if x in (f.x, f.y) else y
        v = y if u == x else x
        z = f.y if f.x == u else f.x
        result = _rebuild(rest_res, [substitute(a, {v: z}) for a in kept])
    return normalize(result).residual


def successors(p: Process) -> list:
    return [(r, step(p, r)) for r in find_redexes(p)]


def run(p: Process, max_steps: int = DEFAULT_MAX_STEPS, strategy: str = "first", seed: int | None = None) -> Trace:
    if max_steps < 0:
        raise ValueError("max_steps must be non-negative")
    rng = random.Random(seed)
    trace = Trace(initial=p)
    current = normalize(p).residual
    for _ in range(max_steps):
        redexes = find_redexes(current)
        if not redexes:
            break
        r = redexes[0] if strategy == "first" else rng.choice(redexes)
        current = step(current, r)
        trace.steps.append((r, current))
    trace.terminal = normalize(current)
    return trace


def explore(p: Process, max_states: int = DEFAULT_MAX_STATES) -> ExplorationReport:
    """Breadth-first search of the reduction graph modulo structural congruence."""
    if max_states < 1:
        raise ValueError("max_states must be at least 1")
    root = normalize(p)
    seen = {root.key: root}
    queue = deque([root])
    terminals, truncated, transitions = set(), False, 0
    while queue:
        cf = queue.popleft()
        restrictions, atoms = _split(cf.residual)
        redexes = _redexes_of(restrictions, atoms)
        if not redexes:
            terminals.add(cf)
            continue
        for r in redexes:
            nxt = normalize(step(cf.residual, r))
            transitions += 1
            if nxt.key in seen:
                continue
            if len(seen) >= max_states:
                truncated = True
                continue
            seen[nxt.key] = nxt
            queue.append(nxt)
    deadlocked = {t for t in terminals if not t.zero}
    return ExplorationReport(len(seen), terminals, deadlocked, truncated, transitions)


def state_graph(p: Process, max_states: int = DEFAULT_MAX_STATES):
    """Reachable normal forms keyed by canonical key: ``(forms, edges, truncated)``."""
    root = normalize(p)
    forms = {root.key: root}
    edges = {}
    queue = deque([root])
    truncated = False
    while queue:
        cf = queue.popleft()
        restrictions, atoms = _split(cf.residual)
        edges[cf.key] = []
        for r in _redexes_of(restrictions, atoms):
            nxt = normalize(step(cf.residual, r))
            if nxt.key not in forms:
                if len(forms) >= max_states:
                    truncated = True
                    continue
                forms[nxt.key] = nxt
                queue.append(nxt)
            edges[cf.key].append(nxt.key)
    return forms, edges, truncated
