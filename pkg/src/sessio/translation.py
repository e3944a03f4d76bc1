"""Translation of functional configurations into annotated processes.

A term ``M`` of type ``T`` becomes a process providing ``T`` on a result
name ``z``; a variable of type ``T`` is a name of type ``⟦T⟧ᶜ = •⊗dual⟦T⟧``
that requests its value.  Wherever a suspended term is expected and the
term is already a variable, the variable's name is passed on directly.

Each channel becomes a pair of buffer servers, one per endpoint, joined by a
link.  Messages in transit are particles on that link.  Every restriction
carries the type of its first name, so the output checks directly.
"""

from __future__ import annotations

from collections import deque
from dataclasses import dataclass
from itertools import count

from sessio.congruence import normalize
from sessio.lastn.config import (
    Configuration, QLabel, config_names, endpoint_types, explore_config, typecheck_config,
)
from sessio.lastn.terms import (
    Abs, App, CaseTm, CloseTm, ExplSub, LetPair, New, Pair, RecvTm, SBra, SEnd, SRecv, SSel, SSend,
    SelectTm, SendTm, Spawn, TFun, TName, TPair, TUnit, UnitVal, Var, all_vars, dual_s, show_fun_type,
)
from sessio.lastn.typing import type_of
from sessio.reduction import state_graph
from sessio.process import INACT, Bra, Par, Recv, Res, Sel, Send, par_all, substitute
from sessio.types import END, Atom, ParT, Plus, Tensor, With, dual


# -- types -------------------------------------------------------------------------

def trans_type(t):
    """``⟦T⟧``: the type provided by a process computing a value of type ``T``."""
    match t:
        case TUnit():
            return END
        case TPair(a, b):
            return Tensor(dual(trans_ctx_type(a)), dual(trans_ctx_type(b)))
        case TFun(a, b):
            return ParT(trans_ctx_type(a), trans_type(b))
        case TName(n):
            return Atom(n)
        case SSend(a, s):
            return Tensor(END, ParT(trans_ctx_type(a), dual(trans_ctx_type(s))))
        case SRecv(a, s):
            return Tensor(dual(trans_ctx_type(a)), dual(trans_ctx_type(s)))
        case SSel(bs):
            return Tensor(END, With(tuple((l, dual(trans_ctx_type(s))) for l, s in bs)))
        case SBra(bs):
            return Plus(tuple((l, dual(trans_ctx_type(s))) for l, s in bs))
        case SEnd():
            return Tensor(END, END)
    raise TypeError(f"cannot translate type {show_fun_type(t)}")


def trans_ctx_type(t):
    """``⟦T⟧ᶜ``: the type of a name standing for a variable of type ``T``."""
    return Tensor(END, dual(trans_type(t)))


def link_type(s):
    """Type of the link seen from the buffer server of an endpoint of type ``s``."""
    match s:
        case SSend(a, cont):
            return Tensor(dual(trans_ctx_type(a)), link_type(cont))
        case SRecv(a, cont):
            return ParT(trans_ctx_type(a), link_type(cont))
        case SSel(bs):
            return Plus(tuple((l, link_type(b)) for l, b in bs))
        case SBra(bs):
            return With(tuple((l, link_type(b)) for l, b in bs))
        case SEnd():
            return END
    raise TypeError(f"not a session type: {show_fun_type(s)}")


# -- terms ---------------------------------------------------------------------------

@dataclass
class TransResult:
    process: object
    context: dict  # name -> annotated AP type
    result_name: str
    result_type: object  # the functional type, or None for a configuration without main thread


def _res(pairs, body):
    """Wrap ``body`` in restrictions ``[(x, y, type of x), ...]``, outermost first."""
    for x, y, ann in reversed(pairs):
        body = Res(x, y, body, ann)
    return body


class _Translator:
    def __init__(self, avoid):
        self.avoid = set(avoid)
        self.ids = count(1)

    def fresh(self, base):
        while True:
            n = f"{base}#{next(self.ids)}"
            if n not in self.avoid:
                self.avoid.add(n)
                return n

    def var(self, x, z):
        e, e2 = self.fresh("e"), self.fresh("e")
        return Res(e, e2, Send(x, e, z), END)

    def thunk(self, m, env):
        """A name standing for ``m``, with the server and restriction that provide it."""
        if isinstance(m, Var):
            return m.name, [], []
        a, ab, u, r = (self.fresh(s) for s in "aaur")
        server = Recv(ab, u, r, self.term(m, r, env))
        return a, [server], [(a, ab, trans_ctx_type(type_of(m, env)))]

    def cut(self, m, env, t, body_fn):
        """``ν(c c̄)(⟦m⟧_c | body_fn(c̄))``."""
        c, cb = self.fresh("c"), self.fresh("c")
        return Res(c, cb, Par(self.term(m, c, env), body_fn(cb)), trans_type(t))

    def term(self, m, z, env):
        match m:
            case Var(x):
                return self.var(x, z)
            case Abs(x, body, ann):
                r = self.fresh("r")
                return Recv(z, x, r, self.term(body, r, {**env, x: ann}))
            case App(f, a):
                tf = type_of(f, env)
                fz, fb = self.fresh("f"), self.fresh("f")
                name, servers, res = self.thunk(a, env)
                inner = _res(res, par_all([Send(fb, name, z)] + servers))
                return Res(fz, fb, Par(self.term(f, fz, env), inner), trans_type(tf))
            case ExplSub(body, x, n):
                tn = type_of(n, env)
                if isinstance(n, Var):
                    return substitute(self.term(body, z, {**env, x: tn}), {x: n.name})
                xb, u, r = self.fresh("x"), self.fresh("u"), self.fresh("r")
                server = Recv(xb, u, r, self.term(n, r, env))
                return Res(x, xb, Par(self.term(body, z, {**env, x: tn}), server), trans_ctx_type(tn))
            case Pair(l, r):
                a, sa, ra = self.thunk(l, env)
                b, sb, rb = self.thunk(r, env)
                return _res(ra + rb, par_all([Send(z, a, b)] + sa + sb))
            case LetPair(x, y, s, body):
                ts = type_of(s, env)
                p, pb = self.fresh("p"), self.fresh("p")
                inner = Recv(pb, x, y, self.term(body, z, {**env, x: ts.left, y: ts.right}))
                return Res(p, pb, Par(self.term(s, p, env), inner), trans_type(ts))
            case UnitVal():
                return INACT
            case New(s):
                x, y = self.fresh("x"), self.fresh("y")
                buffer, pairs = self.channel(x, y, s, dual_s(s), (), (), env)
                return _res(pairs, Par(Send(z, x, y), buffer))
            case Spawn(child, cont):
                u, u2 = self.fresh("u"), self.fresh("u")
                return Par(Res(u, u2, self.term(child, u, env), END), self.term(cont, z, env))
            case SendTm(p, c):
                tc = type_of(c, env)

                def after(cb):
                    t, k, b, bb = (self.fresh(s) for s in "tkbb")
                    name, servers, res = self.thunk(p, env)
                    body = par_all([Send(k, name, b)] + servers + [self.var(bb, z)])
                    return Recv(cb, t, k, _res(res + [(b, bb, dual(trans_ctx_type(tc.cont)))], body))
                return self.cut(c, env, tc, after)
            case RecvTm(c):
                return self.term(c, z, env)
            case SelectTm(label, c):
                tc = type_of(c, env)
                cont = dict(tc.branches)[label]

                def after(cb):
                    t, k, b, bb = (self.fresh(s) for s in "tkbb")
                    body = Par(Sel(k, b, label), self.var(bb, z))
                    return Recv(cb, t, k, Res(b, bb, body, dual(trans_ctx_type(cont))))
                return self.cut(c, env, tc, after)
            case CaseTm(c, bs):
                tc = type_of(c, env)
                conts = dict(tc.branches)

                def after(cb):
                    b = self.fresh("b")
                    return Bra(cb, b, tuple(
                        (l, self.term(App(n, Var(b)), z, {**env, b: conts[l]})) for l, n in bs))
                return self.cut(c, env, tc, after)
            case CloseTm(c, k):
                def after(cb):
                    u, v = self.fresh("u"), self.fresh("v")
                    return Recv(cb, u, v, self.term(k, z, env))
                return self.cut(c, env, SEnd(), after)
        raise TypeError(f"cannot translate {m!r}")

    # -- buffers -------------------------------------------------------------------

    def side(self, s, e, m):
        """The server for an endpoint of type ``s`` listening on ``e``, linked through ``m``."""
        if s is None:
            return INACT
        u, r = self.fresh("u"), self.fresh("r")
        match s:
            case SSend(a, cont):
                t, t2, k, kb, p, e2, m2, n = (self.fresh(c) for c in ("t", "t", "k", "k", "p", "s", "m", "n"))
                forward = Res(m2, n, Par(Send(m, p, n), self.side(cont, e2, m2)), link_type(cont))
                ask = Par(Send(r, t, k), Recv(kb, p, e2, forward))
                body = Res(t, t2, Res(k, kb, ask, Tensor(dual(trans_ctx_type(a)), trans_ctx_type(cont))), END)
            case SRecv(_, cont):
                # wait for a message first, so a pending request stays visible
                p, n, b, e2 = (self.fresh(c) for c in "pnbs")
                deliver = Res(b, e2, Par(Send(r, p, b), self.side(cont, e2, n)), trans_ctx_type(cont))
                return Recv(m, p, n, Recv(e, u, r, deliver))
            case SSel(bs):
                t, t2, k, kb, e2 = (self.fresh(c) for c in ("t", "t", "k", "k", "s"))
                arms = []
                for label, cont in bs:
                    m2, n = self.fresh("m"), self.fresh("n")
                    arms.append((label, Res(m2, n, Par(Sel(m, n, label), self.side(cont, e2, m2)), link_type(cont))))
                ask = Par(Send(r, t, k), Bra(kb, e2, tuple(arms)))
                ann = Plus(tuple((l, trans_ctx_type(b)) for l, b in bs))
                body = Res(t, t2, Res(k, kb, ask, ann), END)
            case SBra(bs):
                n = self.fresh("n")
                arms = []
                for label, cont in bs:
                    b, e2 = self.fresh("b"), self.fresh("s")
                    deliver = Res(b, e2, Par(Sel(r, b, label), self.side(cont, e2, n)), trans_ctx_type(cont))
                    arms.append((label, Recv(e, u, r, deliver)))
                return Bra(m, n, tuple(arms))
            case SEnd():
                t, t2, k, k2 = (self.fresh(c) for c in "ttkk")
                body = Res(t, t2, Res(k, k2, Send(r, t, k), END), END)
            case _:
                raise TypeError(f"not a session type: {show_fun_type(s)}")
        return Recv(e, u, r, body)

    def chain(self, m, items, recv_type, sender_type, e, env):
        """Particles for ``items`` in transit on link ``m``, then the sender's server."""
        if not items:
            return self.side(sender_type, e, m)
        item, rest = items[0], items[1:]
        m2, n = self.fresh("m"), self.fresh("n")
        if isinstance(item, QLabel):
            after = dict(recv_type.branches)[item.label]
            head, servers, res = Sel(m, n, item.label), [], []
        else:
            after = recv_type.cont
            name, servers, res = self.thunk(item, env)
            head = Send(m, name, n)
        tail = self.chain(m2, rest, after, sender_type, e, env)
        body = par_all([head] + servers + [tail])
        return _res(res + [(m2, n, link_type(dual_s(after)))], body)

    def channel(self, x, y, sx, sy, qxy, qyx, env):
        """Buffer servers for the endpoints ``x`` and ``y``, with the restrictions binding them."""
        ex, ey, m, mb = self.fresh("s"), self.fresh("s"), self.fresh("m"), self.fresh("m")
        if qyx:
            x, y, sx, sy, qxy, ex, ey = y, x, sy, sx, qyx, ey, ex
        pairs = []
        if sx is not None:
            pairs.append((x, ex, trans_ctx_type(sx)))
        if sy is not None:
            pairs.append((y, ey, trans_ctx_type(sy)))
        # x sends the in-transit items; y's server consumes them first
        body = Par(self.side(sy, ey, mb), self.chain(m, qxy, sy, sx, ex, env))
        if sy is not None:
            pairs.append((mb, m, link_type(sy)))
        elif sx is not None:
            pairs.append((m, mb, link_type(sx) if not qxy else END))
        return body, pairs


def _result_name(z, taken):
    k = 0
    name = z
    while name in taken:
        k += 1
        name = f"{z}{k}"
    return name


def trans_term(m, env: dict | None = None, z: str = "z") -> TransResult:
    """``⟦M⟧_z`` for an elaborated term under ``env``."""
    env = env or {}
    taken = all_vars(m) | set(env)
    z = _result_name(z, taken)
    tr = _Translator(taken | {z})
    t = type_of(m, env)
    ctx = {x: trans_ctx_type(tx) for x, tx in env.items()}
    ctx[z] = trans_type(t)
    return TransResult(tr.term(m, z, env), ctx, z, t)


def trans_config(c: Configuration, g: dict | None = None, z: str = "z") -> TransResult:
    """``⟦C⟧_z`` for a configuration well typed under ``g``."""
    g = g or {}
    verdict = typecheck_config(c, g)
    if not verdict.ok:
        raise TypeError(f"ill-typed configuration: {verdict.error}")
    avoid = config_names(c) | set(g)
    z = _result_name(z, avoid)
    tr = _Translator(avoid | {z})
    env = {**g, **endpoint_types(c)}
    procs = []
    for th in c.threads:
        if th.main:
            procs.append(tr.term(th.term, z, env))
        else:
            u, u2 = tr.fresh("u"), tr.fresh("u")
            procs.append(Res(u, u2, tr.term(th.term, u, env), END))
    pairs = []
    for ch in c.channels:
        buffer, ps = tr.channel(ch.x, ch.y, ch.sx, ch.sy, ch.qxy, ch.qyx, env)
        procs.append(buffer)
        pairs.extend(ps)
    ctx = {x: trans_ctx_type(t) for x, t in g.items()}
    if verdict.main:
        ctx[z] = trans_type(verdict.type)
    return TransResult(_res(pairs, par_all(procs)), ctx, z, verdict.type if verdict.main else None)


# -- operational soundness -------------------------------------------------------------

@dataclass
class SoundnessReport:
    source_states: int
    target_states: int
    unreflected: list  # process states from which no translated source state is reachable
    truncated: bool

    @property
    def sound(self) -> bool:
        return not self.unreflected and not self.truncated


def check_soundness(c: Configuration, max_states: int = 20_000) -> SoundnessReport:
    """Every process reachable from ``⟦C⟧`` can reach ``⟦D⟧`` for some ``D`` reachable from ``C``."""
    source = explore_config(c, max_states)
    taken = set()
    for d in source.graph:
        taken |= config_names(d)
    z = _result_name("z", taken)
    targets = {normalize(trans_config(d, z=z).process).key for d in source.graph}
    forms, edges, truncated = state_graph(trans_config(c, z=z).process, max_states)
    good = set(k for k in forms if k in targets)
    preds = {k: [] for k in forms}
    for k, outs in edges.items():
        for o in outs:
            preds[o].append(k)
    queue = deque(good)
    while queue:
        k = queue.popleft()
        for q in preds[k]:
            if q not in good:
                good.add(q)
                queue.append(q)
    bad = [forms[k].residual for k in forms if k not in good]
    return SoundnessReport(source.states, len(forms), bad, truncated or source.truncated)
