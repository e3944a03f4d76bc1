"""Type inference by unification, followed by a linearity check.

Session inference variables may occur dualized, so ``new`` needs no
annotation.  ``select`` constraints wait until the channel type is known;
a choice type that is never determined becomes the single-label selection.
Unresolved variables default to ``1`` and ``end``.
"""

from __future__ import annotations

from collections import Counter
from itertools import count

from sessio.lastn.terms import (
    Abs, App, CaseTm, CloseTm, ExplSub, LetPair, New, Pair, RecvTm, SBra, SEnd, SMeta, SRecv, SSel,
    SSend, SelectTm, SendTm, Spawn, TFun, TMeta, TPair, TUnit, UnitVal, Var,
    _binders, _kids, _rebuild, dual_s, is_session, show_fun_type, show_term,
)


class LastTypeError(Exception):
    """An ill-typed or non-linear term."""


class Inference:
    def __init__(self):
        self.ids = count()
        self.bound: dict = {}
        self.deferred: list = []

    def meta(self):
        return TMeta(next(self.ids))

    def smeta(self):
        return SMeta(next(self.ids))

    # -- unification -------------------------------------------------------

    def walk(self, t):
        while True:
            match t:
                case TMeta(i) if i in self.bound:
                    t = self.bound[i]
                case SMeta(i, neg) if i in self.bound:
                    t = dual_s(self.bound[i]) if neg else self.bound[i]
                case _:
                    return t

    def resolve(self, t):
        t = self.walk(t)
        match t:
            case TPair(a, b):
                return TPair(self.resolve(a), self.resolve(b))
            case TFun(a, b):
                return TFun(self.resolve(a), self.resolve(b))
            case SSend(a, b):
                return SSend(self.resolve(a), self.resolve(b))
            case SRecv(a, b):
                return SRecv(self.resolve(a), self.resolve(b))
            case SSel(bs):
                return SSel(tuple((l, self.resolve(b)) for l, b in bs))
            case SBra(bs):
                return SBra(tuple((l, self.resolve(b)) for l, b in bs))
        return t

    def _occurs(self, i, t) -> bool:
        t = self.walk(t)
        match t:
            case TMeta(j) | SMeta(j):
                return i == j
            case TPair(a, b) | TFun(a, b) | SSend(a, b) | SRecv(a, b):
                return self._occurs(i, a) or self._occurs(i, b)
            case SSel(bs) | SBra(bs):
                return any(self._occurs(i, b) for _, b in bs)
        return False

    def _bind(self, i, t, what):
        if self._occurs(i, t):
            raise LastTypeError(f"infinite type in {what}")
        self.bound[i] = t

    def unify(self, a, b, what: str):
        a, b = self.walk(a), self.walk(b)
        if a == b:
            return
        match a, b:
            case TMeta(i), _:
                self._bind(i, b, what)
            case _, TMeta():
                self.unify(b, a, what)
            case SMeta(i, neg), _ if is_session(b):
                self._bind(i, dual_s(b) if neg else b, what)
            case _, SMeta():
                self.unify(b, a, what)
            case (TPair(p, q), TPair(r, s)) | (TFun(p, q), TFun(r, s)) | \
                 (SSend(p, q), SSend(r, s)) | (SRecv(p, q), SRecv(r, s)):
                self.unify(p, r, what)
                self.unify(q, s, what)
            case (SSel(bs), SSel(cs)) | (SBra(bs), SBra(cs)) if [l for l, _ in bs] == [l for l, _ in cs]:
                for (_, u), (_, v) in zip(bs, cs):
                    self.unify(u, v, what)
            case _:
                raise LastTypeError(
                    f"type mismatch in {what}: {show_fun_type(self.resolve(a))} vs {show_fun_type(self.resolve(b))}")

    # -- inference -----------------------------------------------------------

    def infer(self, m, env: dict):
        what = show_term(m)
        match m:
            case Var(x):
                if x not in env:
                    raise LastTypeError(f"unbound variable {x}")
                return m, env[x]
            case Abs(x, body, ann):
                tx = ann if ann is not None else self.meta()
                body, tb = self.infer(body, {**env, x: tx})
                return Abs(x, body, tx), TFun(tx, tb)
            case App(f, a):
                f, tf = self.infer(f, env)
                a, ta = self.infer(a, env)
                r = self.meta()
                self.unify(tf, TFun(ta, r), what)
                return App(f, a), r
            case ExplSub(body, x, n):
                n, tn = self.infer(n, env)
                body, tb = self.infer(body, {**env, x: tn})
                return ExplSub(body, x, n), tb
            case Pair(l, r):
                l, tl = self.infer(l, env)
                r, tr = self.infer(r, env)
                return Pair(l, r), TPair(tl, tr)
            case LetPair(x, y, s, body):
                s, ts = self.infer(s, env)
                tx, ty = self.meta(), self.meta()
                self.unify(ts, TPair(tx, ty), what)
                body, tb = self.infer(body, {**env, x: tx, y: ty})
                return LetPair(x, y, s, body), tb
            case UnitVal():
                return m, TUnit()
            case New(ann):
                s = ann if ann is not None else self.smeta()
                if not is_session(s):
                    raise LastTypeError(f"new needs a session type, not {show_fun_type(s)}")
                return New(s), TPair(s, dual_s(s))
            case Spawn(c, k):
                c, tc = self.infer(c, env)
                self.unify(tc, TUnit(), what)
                k, tk = self.infer(k, env)
                return Spawn(c, k), tk
            case SendTm(p, c):
                p, tp = self.infer(p, env)
                c, tc = self.infer(c, env)
                s = self.smeta()
                self.unify(tc, SSend(tp, s), what)
                return SendTm(p, c), s
            case RecvTm(c):
                c, tc = self.infer(c, env)
                t, s = self.meta(), self.smeta()
                self.unify(tc, SRecv(t, s), what)
                return RecvTm(c), TPair(t, s)
            case SelectTm(label, c):
                c, tc = self.infer(c, env)
                s = self.smeta()
                self.deferred.append((tc, label, s, what))
                return SelectTm(label, c), s
            case CaseTm(c, bs):
                c, tc = self.infer(c, env)
                result = self.meta()
                conts, out = [], []
                for label, b in bs:
                    b, tb = self.infer(b, env)
                    s = self.smeta()
                    self.unify(tb, TFun(s, result), what)
                    conts.append((label, s))
                    out.append((label, b))
                self.unify(tc, SBra(tuple(conts)), what)
                return CaseTm(c, tuple(out)), result
            case CloseTm(c, k):
                c, tc = self.infer(c, env)
                self.unify(tc, SEnd(), what)
                k, tk = self.infer(k, env)
                return CloseTm(c, k), tk
        raise LastTypeError(f"not a term: {m!r}")

    def settle(self):
        """Discharge deferred selections, then default what remains open."""
        progress = True
        while self.deferred and progress:
            progress = False
            for entry in list(self.deferred):
                tc, label, s, what = entry
                t = self.walk(tc)
                if isinstance(t, (TMeta, SMeta)):
                    continue
                if not isinstance(t, SSel):
                    raise LastTypeError(f"select on a non-selection type in {what}: {show_fun_type(self.resolve(t))}")
                branch = dict(t.branches).get(label)
                if branch is None:
                    raise LastTypeError(f"label {label} not offered in {what}")
                self.unify(s, branch, what)
                self.deferred.remove(entry)
                progress = True
            if not progress and self.deferred:
                tc, label, s, what = self.deferred[0]
                self.unify(tc, SSel(((label, s),)), what)
                progress = True

    def finish(self, t):
        """Resolve ``t`` fully, defaulting open variables."""
        t = self.resolve(t)
        match t:
            case TMeta(i):
                self.bound[i] = TUnit()
                return TUnit()
            case SMeta(i, _):
                self.bound[i] = SEnd()
                return SEnd()
            case TPair(a, b):
                return TPair(self.finish(a), self.finish(b))
            case TFun(a, b):
                return TFun(self.finish(a), self.finish(b))
            case SSend(a, b):
                return SSend(self.finish(a), self.finish(b))
            case SRecv(a, b):
                return SRecv(self.finish(a), self.finish(b))
            case SSel(bs):
                return SSel(tuple((l, self.finish(b)) for l, b in bs))
            case SBra(bs):
                return SBra(tuple((l, self.finish(b)) for l, b in bs))
        return t

    def zonk(self, m):
        match m:
            case Abs(x, body, ann):
                return Abs(x, self.zonk(body), self.finish(ann))
            case New(ann):
                return New(self.finish(ann))
        if not _kids(m):
            return m
        return _rebuild(m, [self.zonk(k) for k, _ in _kids(m)])


# -- linearity -------------------------------------------------------------------

def usage(m) -> Counter:
    """Free-variable occurrence counts; fails if a bound variable is not used exactly once."""
    if isinstance(m, Var):
        return Counter({m.name: 1})
    if isinstance(m, CaseTm):
        out = usage(m.chan)
        branch_uses = [usage(b) for _, b in m.branches]
        if any(u != branch_uses[0] for u in branch_uses):
            raise LastTypeError(f"case branches use different variables in {show_term(m)}")
        return out + branch_uses[0]
    out = Counter()
    binders = _binders(m)
    for k, scoped in _kids(m):
        u = usage(k)
        if scoped:
            for b in binders:
                if u.get(b, 0) != 1:
                    raise LastTypeError(f"variable {b} used {u.get(b, 0)} times in {show_term(m)}")
                u.pop(b, None)
        out += u
    return out


def check_linear(uses: Counter, names) -> None:
    for n in names:
        if uses.get(n, 0) != 1:
            raise LastTypeError(f"variable {n} used {uses.get(n, 0)} times")
    extra = set(uses) - set(names)
    if extra:
        raise LastTypeError(f"unbound variables {', '.join(sorted(extra))}")


def elaborate(m, env: dict, expected=None):
    """Elaborate ``m`` under ``env`` without checking linearity."""
    inf = Inference()
    m, t = inf.infer(m, env)
    if expected is not None:
        inf.unify(t, expected, show_term(m))
    inf.settle()
    for ty in env.values():
        inf.finish(ty)
    t = inf.finish(t)
    return inf.zonk(m), t


def infer_term(m, env: dict | None = None, expected=None):
    """Elaborate ``m`` under ``env``; returns the annotated term and its type."""
    env = env or {}
    m, t = elaborate(m, env, expected)
    check_linear(usage(m), list(env))
    return m, t


def type_of(m, env: dict):
    """The type of an elaborated subterm, without the linearity check."""
    return elaborate(m, env)[1]


def infer_program(m):
    """Elaborate a closed program; returns the annotated term and its type."""
    return infer_term(m, {})
