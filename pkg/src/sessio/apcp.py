"""Priority-based checking: constraint generation over the AP traversal and a solver.

Every connective receives a priority, either written by the user or a fresh
variable.  Outputs require their objects to have larger priorities, inputs
require the rest of the context to have larger priorities, and duality
equates priorities.  The resulting strict inequalities are solved over the
naturals extended with a top element.
"""

from __future__ import annotations

from collections import deque
from dataclasses import dataclass, field
from itertools import count

from sessio.checker import Checker, CheckVerdict, Failure
from sessio.process import Bra, Par, Process, Recv, Res, show
from sessio.types import (
    Const, Omega, OMEGA, ParT, Plus, Tensor, Var, With, erase, map_priorities, priority_of, show_type,
)


@dataclass(frozen=True)
class Lt:
    lhs: object
    rhs: object
    origin: str = field(default="", compare=False)

    def __str__(self):
        return f"{self.lhs} < {self.rhs}"


@dataclass(frozen=True)
class Eq:
    lhs: object
    rhs: object
    origin: str = field(default="", compare=False)

    def __str__(self):
        return f"{self.lhs} = {self.rhs}"


@dataclass(frozen=True)
class LtMin:
    lhs: object
    rhs: frozenset
    origin: str = field(default="", compare=False)

    def expand(self) -> list:
        return [Lt(self.lhs, r, self.origin) for r in sorted(self.rhs, key=str)]

    def __str__(self):
        return f"{self.lhs} < min({', '.join(sorted(map(str, self.rhs)))})"


@dataclass
class PrioritySolution:
    assignment: dict | None = None  # Var name -> natural
    witness: tuple | None = None  # constraints forming a violated cycle or chain

    @property
    def feasible(self) -> bool:
        return self.witness is None

    def value(self, pri) -> int | Omega:
        match pri:
            case Const(n):
                return n
            case Var(name):
                return self.assignment[name]
        return OMEGA


@dataclass
class APCPResult:
    verdict: CheckVerdict
    constraints: list
    solution: PrioritySolution | None
    context: dict  # the input context with every connective annotated
    process: Process  # the input process with every restriction annotated

    @property
    def accepted(self) -> bool:
        return self.verdict.accepted

    def _solved(self, t):
        if self.solution is None or not self.solution.feasible:
            return t
        return map_priorities(t, lambda p: Const(self.solution.value(p)))

    def annotated_context(self) -> dict:
        """The context with solved priorities substituted in."""
        return {n: self._solved(t) for n, t in self.context.items()}

    def annotated_process(self) -> Process:
        def go(p):
            match p:
                case Res(x, y, body, ann):
                    return Res(x, y, go(body), None if ann is None else self._solved(ann))
                case Recv(x, y, z, body):
                    return Recv(x, y, z, go(body))
                case Bra(x, z, branches):
                    return Bra(x, z, tuple((l, go(b)) for l, b in branches))
                case Par(left, right):
                    return Par(go(left), go(right))
            return p

        return go(self.process)


def _type_vars(t, out: set):
    match t:
        case Tensor(a, b, pri) | ParT(a, b, pri):
            if isinstance(pri, Var):
                out.add(pri.name)
            _type_vars(a, out)
            _type_vars(b, out)
        case Plus(bs, pri) | With(bs, pri):
            if isinstance(pri, Var):
                out.add(pri.name)
            for _, b in bs:
                _type_vars(b, out)


def _process_vars(p: Process, out: set):
    match p:
        case Res(_, _, body, ann):
            if ann is not None:
                _type_vars(ann, out)
            _process_vars(body, out)
        case Recv(body=body):
            _process_vars(body, out)
        case Bra(branches=branches):
            for _, b in branches:
                _process_vars(b, out)
        case Par(left, right):
            _process_vars(left, out)
            _process_vars(right, out)


class PriorityChecker(Checker):
    discipline = "APCP"

    def __init__(self, taken: set):
        self.constraints: list = []
        self._names = (f"p{k}" for k in count(1) if f"p{k}" not in taken)

    def fill(self, t):
        return map_priorities(t, lambda p: Var(next(self._names)) if p is None else p)

    def fill_process(self, p: Process) -> Process:
        match p:
            case Res(x, y, body, ann):
                return Res(x, y, self.fill_process(body), None if ann is None else self.fill(ann))
            case Recv(x, y, z, body):
                return Recv(x, y, z, self.fill_process(body))
            case Bra(x, z, branches):
                return Bra(x, z, tuple((l, self.fill_process(b)) for l, b in branches))
            case Par(left, right):
                return Par(self.fill_process(left), self.fill_process(right))
        return p

    def equal(self, a, b) -> bool:
        if erase(a) != erase(b):
            return False
        self._unify(a, b)
        return True

    def _unify(self, a, b):
        match a, b:
            case (Tensor(p, c, x), Tensor(q, d, y)) | (ParT(p, c, x), ParT(q, d, y)):
                self._eq(x, y)
                self._unify(p, q)
                self._unify(c, d)
            case (Plus(bs, x), Plus(cs, y)) | (With(bs, x), With(cs, y)):
                self._eq(x, y)
                for (_, u), (_, v) in zip(bs, cs):
                    self._unify(u, v)

    def _eq(self, x, y):
        if x != y:
            self.constraints.append(Eq(x, y, "duality"))

    def output(self, subj_type, objects, path):
        rule = "typ-send" if isinstance(subj_type, Tensor) else "typ-sel"
        for o in objects:
            self.constraints.append(Lt(subj_type.pri, priority_of(o), f"{rule} at /{'/'.join(path)}"))

    def input(self, subj_type, others, path):
        rule = "typ-recv" if isinstance(subj_type, ParT) else "typ-bra"
        rhs = frozenset(priority_of(o) for o in others)
        self.constraints.extend(LtMin(subj_type.pri, rhs, f"{rule} at /{'/'.join(path)}").expand())


# -- solver ----------------------------------------------------------------

class _UnionFind:
    def __init__(self):
        self.parent: dict = {}

    def find(self, x):
        self.parent.setdefault(x, x)
        while self.parent[x] != x:
            self.parent[x] = self.parent[self.parent[x]]
            x = self.parent[x]
        return x

    def union(self, a, b):
        ra, rb = self.find(a), self.find(b)
        if ra != rb:
            # keep constants as representatives
            if isinstance(rb, Const) and not isinstance(ra, Const):
                ra, rb = rb, ra
            self.parent[rb] = ra


def _expand(cs) -> list:
    out = []
    for c in cs:
        out.extend(c.expand() if isinstance(c, LtMin) else [c])
    return out


def solve(constraints) -> PrioritySolution:
    """Find a least-depth assignment of naturals to priority variables, or a witness."""
    cs = sorted(set(_expand(constraints)), key=lambda c: (type(c).__name__, str(c)))
    uf = _UnionFind()
    for c in cs:
        for side in (c.lhs, c.rhs):
            if not isinstance(side, Omega):
                uf.find(side)
    for c in cs:
        if isinstance(c, Eq):
            if isinstance(c.lhs, Omega) or isinstance(c.rhs, Omega):
                if c.lhs != c.rhs:
                    raise AssertionError(f"priority variable equated with omega: {c}")
                continue
            uf.union(c.lhs, c.rhs)
    # two distinct constants in one class
    for c in cs:
        if isinstance(c, Eq) and not isinstance(c.lhs, Omega):
            ra = uf.find(c.lhs)
            for side in (c.lhs, c.rhs):
                if isinstance(side, Const) and side != ra and isinstance(ra, Const):
                    return PrioritySolution(witness=(c,))

    edges: dict = {}
    for c in cs:
        if not isinstance(c, Lt):
            continue
        if isinstance(c.rhs, Omega):
            continue
        if isinstance(c.lhs, Omega):
            return PrioritySolution(witness=(c,))
        a, b = uf.find(c.lhs), uf.find(c.rhs)
        edges.setdefault(a, {}).setdefault(b, c)
    nodes = sorted({uf.find(x) for x in uf.parent}, key=lambda n: (isinstance(n, Var), str(n)))
    consts = sorted((n for n in nodes if isinstance(n, Const)), key=lambda n: n.n)
    for lo, hi in zip(consts, consts[1:]):
        edges.setdefault(lo, {}).setdefault(hi, Lt(lo, hi, "order of constants"))

    cycle = _shortest_cycle(nodes, edges)
    if cycle is not None:
        return PrioritySolution(witness=tuple(cycle))

    order = _topological(nodes, edges)
    value: dict = {}
    reason: dict = {}
    preds: dict = {n: [] for n in nodes}
    for a, outs in edges.items():
        for b, c in outs.items():
            preds[b].append((a, c))
    for n in order:
        low, why = 0, None
        for a, c in preds[n]:
            if value[a] + 1 > low:
                low, why = value[a] + 1, (a, c)
        if isinstance(n, Const):
            if low > n.n:
                return PrioritySolution(witness=tuple(_chain(n, why, reason)))
            low = n.n
        value[n], reason[n] = low, why
    assignment = {x.name: value[uf.find(x)] for x in uf.parent if isinstance(x, Var)}
    return PrioritySolution(assignment=dict(sorted(assignment.items())))


def _chain(node, why, reason) -> list:
    out = []
    while why is not None:
        a, c = why
        out.append(c)
        why = reason.get(a)
    return list(reversed(out))


def _topological(nodes, edges) -> list:
    indeg = {n: 0 for n in nodes}
    for outs in edges.values():
        for b in outs:
            indeg[b] += 1
    queue = deque(n for n in nodes if indeg[n] == 0)
    order = []
    while queue:
        n = queue.popleft()
        order.append(n)
        for b in edges.get(n, {}):
            indeg[b] -= 1
            if indeg[b] == 0:
                queue.append(b)
    return order


def _shortest_cycle(nodes, edges):
    best = None
    for start in nodes:
        # breadth-first search for the shortest path back to ``start``
        parent = {start: None}
        queue = deque([start])
        found = None
        while queue and found is None:
            n = queue.popleft()
            for b, c in edges.get(n, {}).items():
                if b == start:
                    found = (n, c)
                    break
                if b not in parent:
                    parent[b] = (n, c)
                    queue.append(b)
        if found is None:
            continue
        path = [found[1]]
        n = found[0]
        while parent[n] is not None:
            prev, c = parent[n]
            path.append(c)
            n = prev
        path.reverse()
        if best is None or len(path) < len(best):
            best = path
    return best


# -- entry points ----------------------------------------------------------

def _prepare(p: Process, ctx: dict):
    taken: set = set()
    _process_vars(p, taken)
    for t in ctx.values():
        _type_vars(t, taken)
    checker = PriorityChecker(taken)
    filled = {n: checker.fill(t) for n, t in ctx.items()}
    return checker, filled, checker.fill_process(p)


def generate_constraints(p: Process, ctx: dict | None = None):
    """Constraints of the priority rules together with the structural verdict."""
    checker, filled, q = _prepare(p, ctx or {})
    verdict = checker.verdict(q, filled)
    return checker.constraints, verdict


def check_apcp(p: Process, ctx: dict | None = None) -> APCPResult:
    checker, filled, q = _prepare(p, ctx or {})
    verdict = checker.verdict(q, filled)
    if not verdict.accepted:
        return APCPResult(verdict, checker.constraints, None, filled, q)
    solution = solve(checker.constraints)
    if not solution.feasible:
        cycle = ", ".join(map(str, solution.witness))
        verdict = CheckVerdict(False, "APCP", {}, Failure("priority", "/", f"cyclic dependency: {cycle}"))
    return APCPResult(verdict, checker.constraints, solution, filled, q)


def render_constraints(constraints) -> str:
    return "\n".join(str(c) for c in _expand(constraints))


def render_priorities(result: APCPResult) -> str:
    """Solved context entries, then the process with solved restriction types."""
    lines = [f"{n} : {show_type(t)}" for n, t in sorted(result.annotated_context().items())]
    lines.append(show(result.annotated_process()))
    return "\n".join(lines)
