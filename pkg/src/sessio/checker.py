"""Type checking for AP and its cut-based restriction ACP.

Checking is driven by free names: a process is checked against exactly the
context entries for its free names, and any other entry must be closed
(``end``) and is weakened away.  Parallel composition splits the context by
free names, so no search is needed.
"""

from __future__ import annotations

from dataclasses import dataclass, field

from sessio.process import Bra, Fwd, Inact, Par, Process, Recv, Res, Sel, Send, free_names
from sessio.types import Closed, ParT, Plus, Tensor, With, branch_map, dual, erase, show_type


class CheckError(Exception):
    """A rejected typing rule; carries the rule name and the subterm path."""

    rule = "error"

    def __init__(self, rule: str, path: str, message: str):
        super().__init__(f"{rule} at {path}: {message}")
        self.rule, self.path, self.message = rule, path, message


class MissingAnnotation(CheckError):
    pass


class NotCutShape(CheckError):
    pass


@dataclass(frozen=True)
class Failure:
    rule: str
    path: str
    message: str


@dataclass
class CheckVerdict:
    accepted: bool
    discipline: str
    residual_context: dict = field(default_factory=dict)
    failure: Failure | None = None

    def render(self) -> str:
        if self.accepted:
            return f"ACCEPT {self.discipline}"
        f = self.failure
        return f"REJECT {self.discipline}: {f.rule} at {f.path} ({f.message})"

    def to_json(self) -> dict:
        out = {
            "accepted": self.accepted,
            "discipline": self.discipline,
            "residual_context": {n: show_type(t) for n, t in sorted(self.residual_context.items())},
        }
        if self.failure is not None:
            out["failure"] = {"rule": self.failure.rule, "path": self.failure.path,
                              "message": self.failure.message}
        return out


def _path(path: tuple) -> str:
    return "/" + "/".join(path)


class Checker:
    """Syntax-directed checker for AP; subclasses adjust the cut and priority rules."""

    discipline = "AP"

    # -- hooks ---------------------------------------------------------------

    def equal(self, a, b) -> bool:
        return erase(a) == erase(b)

    def annotation(self, ann):
        return ann

    def output(self, subj_type, objects, path):
        """Side condition of an output on ``subj_type`` with the given object types."""

    def input(self, subj_type, others, path):
        """Side condition of an input on ``subj_type`` with the remaining context."""

    # -- driver --------------------------------------------------------------

    def verdict(self, p: Process, ctx: dict) -> CheckVerdict:
        try:
            self.check(p, dict(ctx), ())
        except CheckError as e:
            return CheckVerdict(False, self.discipline, {}, Failure(e.rule, e.path, e.message))
        residual = {n: t for n, t in ctx.items() if n not in free_names(p)}
        return CheckVerdict(True, self.discipline, residual)

    def fail(self, rule, path, message):
        raise CheckError(rule, _path(path), message)

    def restrict(self, p, ctx, path) -> dict:
        """Weaken closed entries not used by ``p``; every free name must be assigned."""
        fn = free_names(p)
        for n, t in ctx.items():
            if n not in fn and not isinstance(t, Closed):
                self.fail("typ-end", path, f"{n}:{show_type(t)} is unused but not closed")
        for n in sorted(fn):
            if n not in ctx:
                self.fail("unassigned", path, f"free name {n} has no type")
        return {n: t for n, t in ctx.items() if n in fn}

    def expect_equal(self, rule, path, name, actual, expected):
        if not self.equal(actual, expected):
            self.fail(rule, path, f"{name}:{show_type(actual)} should be {show_type(expected)}")

    def check(self, p: Process, ctx: dict, path: tuple):
        ctx = self.restrict(p, ctx, path)
        match p:
            case Inact():
                return
            case Send(x, a, b):
                if len({x, a, b}) < 3:
                    self.fail("typ-send", path, "subject, message and continuation must be distinct")
                t = ctx[x]
                if not isinstance(t, Tensor):
                    self.fail("typ-send", path, f"{x}:{show_type(t)} is not a tensor")
                self.expect_equal("typ-send", path, a, ctx[a], dual(t.payload))
                self.expect_equal("typ-send", path, b, ctx[b], dual(t.cont))
                self.output(t, [t.payload, t.cont], path)
            case Sel(x, b, label):
                if x == b:
                    self.fail("typ-sel", path, "subject and continuation must be distinct")
                t = ctx[x]
                if not isinstance(t, Plus):
                    self.fail("typ-sel", path, f"{x}:{show_type(t)} is not a selection type")
                bm = branch_map(t)
                if label not in bm:
                    self.fail("typ-sel", path, f"label {label} not offered by {show_type(t)}")
                self.expect_equal("typ-sel", path, b, ctx[b], dual(bm[label]))
                self.output(t, [bm[label]], path)
            case Recv(x, y, z, body):
                t = ctx[x]
                if not isinstance(t, ParT):
                    self.fail("typ-recv", path, f"{x}:{show_type(t)} is not a par type")
                if y == z:
                    self.fail("typ-recv", path, "binders must be distinct")
                rest = {n: u for n, u in ctx.items() if n != x}
                self.input(t, list(rest.values()), path)
                self.check(body, {**rest, y: t.payload, z: t.cont}, path + (f"recv {x}",))
            case Bra(x, z, branches):
                t = ctx[x]
                if not isinstance(t, With):
                    self.fail("typ-bra", path, f"{x}:{show_type(t)} is not a branching type")
                bm = branch_map(t)
                if set(bm) != {l for l, _ in branches}:
                    self.fail("typ-bra", path, f"branch labels differ from {show_type(t)}")
                rest = {n: u for n, u in ctx.items() if n != x}
                self.input(t, list(rest.values()), path)
                for label, q in branches:
                    self.check(q, {**rest, z: bm[label]}, path + (f"bra {x}.{label}",))
            case Fwd(x, y):
                if x == y:
                    self.fail("typ-fwd", path, "forwarder endpoints must differ")
                self.expect_equal("typ-fwd", path, x, ctx[x], dual(ctx[y]))
            case Par(left, right):
                self.check_par(left, right, ctx, path)
            case Res(x, y, body, ann):
                self.check_res(p, x, y, body, ann, ctx, path)
            case _:
                raise TypeError(f"not a process: {p!r}")

    def check_par(self, left, right, ctx, path):
        shared = free_names(left) & free_names(right)
        if shared:
            self.fail("typ-par", path, f"components share {', '.join(sorted(shared))}")
        fl = free_names(left)
        self.check(left, {n: t for n, t in ctx.items() if n in fl}, path + ("par.0",))
        self.check(right, {n: t for n, t in ctx.items() if n not in fl}, path + ("par.1",))

    def bind(self, x, y, ann, path):
        if ann is None:
            raise MissingAnnotation("MissingAnnotation", _path(path), f"restriction on ({x} {y}) has no type")
        if x == y:
            self.fail("typ-res", path, "restricted endpoints must differ")
        ann = self.annotation(ann)
        return ann, dual(ann)

    def check_res(self, p, x, y, body, ann, ctx, path):
        a, b = self.bind(x, y, ann, path)
        inner = {n: t for n, t in ctx.items() if n not in (x, y)}
        self.check(body, {**inner, x: a, y: b}, path + (f"new {x} {y}",))


class CutChecker(Checker):
    """ACP: restriction and parallel composition only occur together, as a cut."""

    discipline = "ACP"

    def verdict(self, p: Process, ctx: dict) -> CheckVerdict:
        bad = _first_non_cut(p, ())
        if bad is not None:
            e = NotCutShape("NotCutShape", _path(bad), "parallel composition and restriction must form a cut")
            return CheckVerdict(False, self.discipline, {}, Failure(e.rule, e.path, e.message))
        return super().verdict(p, ctx)

    def check_par(self, left, right, ctx, path):
        raise NotCutShape("NotCutShape", _path(path), "parallel composition outside a cut")

    def check_res(self, p, x, y, body, ann, ctx, path):
        a, b = self.bind(x, y, ann, path)
        if not isinstance(body, Par):
            raise NotCutShape("NotCutShape", _path(path), "restriction without parallel composition")
        left, right = body.left, body.right
        fl, fr = free_names(left), free_names(right)
        if x in fr or y in fl:
            # the symmetric reading of the same cut
            x, y, a, b = y, x, b, a
        if x in fr or y in fl:
            self.fail("typ-cut", path, f"both components use the channel ({x} {y})")
        inner = {n: t for n, t in ctx.items() if n not in (x, y)}
        shared = (fl & fr) - {x, y}
        if shared:
            self.fail("typ-cut", path, f"components share {', '.join(sorted(shared))}")
        self.check(left, {**{n: t for n, t in inner.items() if n in fl}, x: a}, path + ("cut.0",))
        self.check(right, {**{n: t for n, t in inner.items() if n not in fl}, y: b}, path + ("cut.1",))


def _first_non_cut(p: Process, path: tuple):
    match p:
        case Res(x, y, Par(l, r), _):
            return _first_non_cut(l, path + (f"new {x} {y}", "cut.0")) or _first_non_cut(r, path + (f"new {x} {y}", "cut.1"))
        case Res() | Par():
            return path
        case Recv(x, body=body):
            return _first_non_cut(body, path + (f"recv {x}",))
        case Bra(x, branches=branches):
            for label, q in branches:
                bad = _first_non_cut(q, path + (f"bra {x}.{label}",))
                if bad is not None:
                    return bad
    return None


def check_ap(p: Process, ctx: dict | None = None) -> CheckVerdict:
    return Checker().verdict(p, ctx or {})


def check_acp(p: Process, ctx: dict | None = None) -> CheckVerdict:
    return CutChecker().verdict(p, ctx or {})
