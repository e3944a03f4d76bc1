"""Configurations: threads running terms, connected by buffered channels.

A configuration is kept flat: a list of threads (at most one main thread
``♦``, the rest children ``◇``) and a list of channels.  Each channel
records both endpoint names, the current session type of each endpoint
(``None`` once closed) and one FIFO queue per direction.  Sending and
selecting enqueue and hand back the same endpoint at its advanced type;
receiving and branching dequeue.
"""

from __future__ import annotations

import random
from collections import Counter, deque
from dataclasses import dataclass, field, replace

from sessio.lastn.terms import (
    Abs, App, CaseTm, CloseTm, LetPair, New, Pair, RecvTm, SBra, SEnd, SRecv, SSel, SSend, SelectTm,
    SendTm, Spawn, TUnit, UnitVal, Var, all_vars, dual_s, rename, show_fun_type, show_term, step_term,
)
from sessio.lastn.typing import LastTypeError, check_linear, elaborate, infer_program, usage

DEFAULT_MAX_STATES = 100_000


@dataclass(frozen=True)
class Thread:
    main: bool
    term: object

    def __str__(self):
        return ("♦" if self.main else "◇") + _paren(self.term)


@dataclass(frozen=True)
class QLabel:
    """A selected label in transit."""

    label: str


@dataclass(frozen=True)
class Channel:
    x: str
    y: str
    sx: object  # current type of x, None once closed
    sy: object
    qxy: tuple = ()  # sent by x, not yet received by y
    qyx: tuple = ()

    def side(self, name):
        """``(own type, incoming queue, outgoing queue)`` for endpoint ``name``."""
        if name == self.x:
            return self.sx, self.qyx, self.qxy
        return self.sy, self.qxy, self.qyx

    def update(self, name, typ, incoming, outgoing) -> "Channel":
        if name == self.x:
            return replace(self, sx=typ, qyx=incoming, qxy=outgoing)
        return replace(self, sy=typ, qxy=incoming, qyx=outgoing)

    def __str__(self):
        def q(items):
            return "[" + ", ".join(i.label if isinstance(i, QLabel) else show_term(i) for i in items) + "]"

        def t(s):
            return "closed" if s is None else show_fun_type(s)
        return f"({self.x}:{t(self.sx)}, {self.y}:{t(self.sy)}) {q(self.qxy)} {q(self.qyx)}"


@dataclass(frozen=True)
class Configuration:
    threads: tuple
    channels: tuple = ()

    def __str__(self):
        body = " ∥ ".join(map(str, self.threads)) or "∅"
        if not self.channels:
            return body
        return "ν " + "; ".join(map(str, self.channels)) + " . " + body

    def channel_of(self, name):
        for k, ch in enumerate(self.channels):
            if name in (ch.x, ch.y):
                return k, ch
        return None, None


def _paren(t) -> str:
    s = show_term(t)
    return s if isinstance(t, (Var, UnitVal, Pair)) else f"({s})"


def program(term) -> Configuration:
    """The initial configuration of a closed program: a single main thread."""
    return Configuration((Thread(True, term),))


def is_value(m) -> bool:
    match m:
        case UnitVal() | Abs():
            return True
        case Pair(a, b):
            return is_value(a) and is_value(b)
    return False


def is_final(c: Configuration) -> bool:
    """Only a main thread holding a value remains; at type 1 this is ``♦ ()``."""
    return not c.channels and all(t.main and is_value(t.term) for t in c.threads)


# -- evaluation contexts -----------------------------------------------------------

def focus(m):
    """Split ``m`` into ``(redex, plug)`` for a configuration-level redex, or ``None``."""
    match m:
        case New() | Spawn():
            return m, lambda t: t
        case SendTm(_, Var()) | RecvTm(Var()) | SelectTm(_, Var()) | CaseTm(Var()) | CloseTm(Var()):
            return m, lambda t: t
        case App(f, a):
            r = focus(f)
            return r and (r[0], lambda t: App(r[1](t), a))
        case LetPair(x, y, s, b):
            r = focus(s)
            return r and (r[0], lambda t: LetPair(x, y, r[1](t), b))
        case SendTm(p, c):
            r = focus(c)
            return r and (r[0], lambda t: SendTm(p, r[1](t)))
        case RecvTm(c):
            r = focus(c)
            return r and (r[0], lambda t: RecvTm(r[1](t)))
        case SelectTm(l, c):
            r = focus(c)
            return r and (r[0], lambda t: SelectTm(l, r[1](t)))
        case CaseTm(c, bs):
            r = focus(c)
            return r and (r[0], lambda t: CaseTm(r[1](t), bs))
        case CloseTm(c, k):
            r = focus(c)
            return r and (r[0], lambda t: CloseTm(r[1](t), k))
    return None


# -- reduction -------------------------------------------------------------------------

def config_names(c: Configuration) -> set:
    """Every variable and endpoint name occurring in ``c``."""
    out = set()
    for t in c.threads:
        out |= all_vars(t.term)
    for ch in c.channels:
        out |= {ch.x, ch.y}
        for item in ch.qxy + ch.qyx:
            if not isinstance(item, QLabel):
                out |= all_vars(item)
    return out


def _fresh_pair(c: Configuration):
    taken = config_names(c)
    k = 1
    while f"c{k}" in taken or f"d{k}" in taken:
        k += 1
    return f"c{k}", f"d{k}"


def _gc(threads, channels) -> Configuration:
    threads = tuple(t for t in threads if t.main or t.term != UnitVal())
    channels = tuple(ch for ch in channels if ch.sx is not None or ch.sy is not None)
    return Configuration(threads, channels)


def _with_thread(c, i, term, extra=(), channels=None) -> Configuration:
    threads = list(c.threads)
    threads[i] = Thread(threads[i].main, term)
    threads.extend(extra)
    return _gc(threads, c.channels if channels is None else channels)


def _set_channel(c, k, ch) -> tuple:
    chans = list(c.channels)
    chans[k] = ch
    return tuple(chans)


def _comm(c: Configuration, i: int, redex, plug):
    match redex:
        case New(s):
            x, y = _fresh_pair(c)
            ch = Channel(x, y, s, dual_s(s))
            return "new", _with_thread(c, i, plug(Pair(Var(x), Var(y))), channels=c.channels + (ch,))
        case Spawn(child, cont):
            return "spawn", _with_thread(c, i, plug(cont), extra=(Thread(False, child),))
    name = redex.chan.name
    k, ch = c.channel_of(name)
    if ch is None:
        return None
    typ, incoming, outgoing = ch.side(name)
    match redex, typ:
        case SendTm(payload), SSend(_, cont):
            ch = ch.update(name, cont, incoming, outgoing + (payload,))
            return "send", _with_thread(c, i, plug(Var(name)), channels=_set_channel(c, k, ch))
        case SelectTm(label), SSel(bs):
            ch = ch.update(name, dict(bs)[label], incoming, outgoing + (QLabel(label),))
            return "select", _with_thread(c, i, plug(Var(name)), channels=_set_channel(c, k, ch))
        case RecvTm(), SRecv(_, cont) if incoming and not isinstance(incoming[0], QLabel):
            ch = ch.update(name, cont, incoming[1:], outgoing)
            return "recv", _with_thread(c, i, plug(Pair(incoming[0], Var(name))), channels=_set_channel(c, k, ch))
        case CaseTm(_, bs), SBra(ts) if incoming and isinstance(incoming[0], QLabel):
            label = incoming[0].label
            ch = ch.update(name, dict(ts)[label], incoming[1:], outgoing)
            return "case", _with_thread(c, i, plug(App(dict(bs)[label], Var(name))), channels=_set_channel(c, k, ch))
        case CloseTm(_, cont), SEnd():
            ch = ch.update(name, None, incoming, outgoing)
            return "close", _with_thread(c, i, plug(cont), channels=_set_channel(c, k, ch))
    return None


def step_config(c: Configuration) -> list:
    """All one-step successors ``(label, configuration)``; labels name the thread and the rule."""
    out = []
    for i, th in enumerate(c.threads):
        r = step_term(th.term)
        if r is not None:
            out.append((f"{i}:{r[0]}", _with_thread(c, i, r[1])))
            continue
        f = focus(th.term)
        if f is None:
            continue
        r = _comm(c, i, *f)
        if r is not None:
            out.append((f"{i}:{r[0]}", r[1]))
    return out


def canonical(c: Configuration) -> Configuration:
    """Rename endpoints by order of first occurrence, for duplicate detection."""
    order = []
    for ch in c.channels:
        order.extend([ch.x, ch.y])
    seen = {}
    for th in c.threads:
        for n in _occurrences(th.term):
            if n in order and n not in seen:
                seen[n] = None
    ranked = list(seen) + [n for n in order if n not in seen]
    # endpoints are renamed in two passes so new names never collide with old ones
    tmp = {n: f"%{k}" for k, n in enumerate(ranked)}
    final = {f"%{k}": f"e{k}" for k in range(len(ranked))}
    return _rename_config(_rename_config(c, tmp), final)


def _occurrences(m) -> list:
    if isinstance(m, Var):
        return [m.name]
    from sessio.lastn.terms import _kids
    out = []
    for k, _ in _kids(m):
        out.extend(_occurrences(k))
    return out


def _rename_config(c: Configuration, sub: dict) -> Configuration:
    def item(i):
        return i if isinstance(i, QLabel) else rename(i, sub)
    threads = tuple(Thread(t.main, rename(t.term, sub)) for t in c.threads)
    chans = tuple(
        Channel(sub.get(ch.x, ch.x), sub.get(ch.y, ch.y), ch.sx, ch.sy,
                tuple(map(item, ch.qxy)), tuple(map(item, ch.qyx)))
        for ch in sorted(c.channels, key=lambda ch: min(sub.get(ch.x, ch.x), sub.get(ch.y, ch.y)))
    )
    return Configuration(threads, chans)


@dataclass
class ConfigReport:
    states: int
    finals: list = field(default_factory=list)
    stuck: list = field(default_factory=list)
    truncated: bool = False
    graph: dict = field(default_factory=dict)  # configuration -> successor configurations

    @property
    def deadlock_free(self) -> bool:
        return not self.stuck and not self.truncated

    def to_json(self) -> dict:
        return {"states": self.states, "finals": len(self.finals), "stuck": [str(s) for s in self.stuck],
                "truncated": self.truncated}


def explore_config(c: Configuration, max_states: int = DEFAULT_MAX_STATES) -> ConfigReport:
    """Breadth-first search of reachable configurations, up to endpoint renaming."""
    root = canonical(c)
    graph = {root: []}
    queue = deque([root])
    report = ConfigReport(0)
    while queue:
        cur = queue.popleft()
        succ = [canonical(d) for _, d in step_config(cur)]
        if not succ:
            (report.finals if is_final(cur) else report.stuck).append(cur)
        for d in succ:
            if d not in graph:
                if len(graph) >= max_states:
                    report.truncated = True
                    continue
                graph[d] = []
                queue.append(d)
            graph[cur].append(d)
    report.states, report.graph = len(graph), graph
    return report


def run_config(c: Configuration, max_steps: int = 10_000, strategy: str = "first",
               seed: int | None = None) -> list:
    """The trace ``[(label, configuration), ...]`` taking the first or a seeded random step."""
    rng = random.Random(seed)
    trace = []
    for _ in range(max_steps):
        succ = step_config(c)
        if not succ:
            break
        pick = succ[0] if strategy == "first" else rng.choice(succ)
        trace.append(pick)
        c = pick[1]
    return trace


# -- typing ------------------------------------------------------------------------------

@dataclass
class ConfigVerdict:
    ok: bool
    main: bool = False
    type: object = None
    error: str | None = None


def endpoint_types(c: Configuration) -> dict:
    env = {}
    for ch in c.channels:
        if ch.sx is not None:
            env[ch.x] = ch.sx
        if ch.sy is not None:
            env[ch.y] = ch.sy
    return env


def _peel(s, items, env, what):
    """Consume ``items`` (in arrival order) from the receiving type ``s``."""
    for it in items:
        match s, it:
            case SBra(bs), QLabel(label) if label in dict(bs):
                s = dict(bs)[label]
            case SRecv(t, cont), _ if not isinstance(it, QLabel):
                elaborate(it, env, t)
                s = cont
            case _:
                raise LastTypeError(f"queue of {what} does not match its type")
    return s


def typecheck_config(c: Configuration, g: dict | None = None) -> ConfigVerdict:
    """Check ``g ⊢ c``; every variable of ``g`` and every live endpoint is used exactly once."""
    env = {**(g or {}), **endpoint_types(c)}
    try:
        uses = Counter()
        mains = [t for t in c.threads if t.main]
        if len(mains) > 1:
            raise LastTypeError("more than one main thread")
        result = None
        for th in c.threads:
            m, t = elaborate(th.term, env, None if th.main else TUnit())
            uses += usage(m)
            if th.main:
                result = t
        for ch in c.channels:
            for it in ch.qxy + ch.qyx:
                if not isinstance(it, QLabel):
                    uses += usage(it)
            if ch.qxy and ch.qyx:
                raise LastTypeError(f"both queues of ({ch.x} {ch.y}) are non-empty")
            # the receiving side, with in-flight messages consumed, must be dual to the sender
            if ch.qxy or ch.sx is None:
                recv_side, recv_q, sender = ch.sy, ch.qxy, ch.sx
            else:
                recv_side, recv_q, sender = ch.sx, ch.qyx, ch.sy
            if recv_side is None:
                if recv_q or sender not in (None, SEnd()):
                    raise LastTypeError(f"closed endpoint of ({ch.x} {ch.y}) has pending traffic")
                continue
            rest = _peel(recv_side, recv_q, env, f"({ch.x} {ch.y})")
            expected = SEnd() if sender is None else dual_s(sender)
            if rest != expected:
                raise LastTypeError(f"endpoints of ({ch.x} {ch.y}) are not dual")
        check_linear(uses, list(env))
    except LastTypeError as e:
        return ConfigVerdict(False, error=str(e))
    return ConfigVerdict(True, bool(mains), result if mains else TUnit())


def load_program(term) -> tuple:
    """Elaborate a closed program; returns ``(configuration, type)``."""
    m, t = infer_program(term)
    return program(m), t
