"""Recursive-descent parsers for processes, session types and typing contexts."""

from __future__ import annotations

import re
from dataclasses import dataclass

from sessio.process import Bra, Fwd, INACT, Recv, Res, Sel, Send, par_all
from sessio.types import END, Atom, Const, ParT, Plus, Tensor, Var, With


class ParseError(Exception):
    def __init__(self, msg, line=0, col=0):
        super().__init__(f"{line}:{col}: {msg}" if line else msg)
        self.line, self.col = line, col


@dataclass
class Token:
    kind: str  # "id", "num", "sym", "eof"
    text: str
    line: int
    col: int


_TOKEN = re.compile(
    r"""
    (?P<ws>[ \t\r]+)
  | (?P<nl>\n)
  | (?P<comment>--[^\n]*)
  | (?P<num>\d+(?![A-Za-z_'#]))
  | (?P<id>[A-Za-z_][A-Za-z0-9_'#]*)
  | (?P<sym><>|[()\[\]{},:.|<>*%+&;=\\•⊗⅋⊕λ⊸×!?~])
    """,
    re.VERBOSE,
)


def tokenize(text: str) -> list[Token]:
    out, pos, line, col0 = [], 0, 1, 0
    while pos < len(text):
        m = _TOKEN.match(text, pos)
        if not m:
            raise ParseError(f"unexpected character {text[pos]!r}", line, pos - col0 + 1)
        kind = m.lastgroup
        if kind == "nl":
            line, col0 = line + 1, m.end()
        elif kind not in ("ws", "comment"):
            out.append(Token(kind, m.group(), line, pos - col0 + 1))
        pos = m.end()
    out.append(Token("eof", "", line, pos - col0 + 1))
    return out


class TokenStream:
    keywords: frozenset = frozenset()

    def __init__(self, text: str):
        self.toks = self.tokenize(text)
        self.i = 0
        self.wild = 0

    @property
    def peek(self) -> Token:
        return self.toks[self.i]

    def peek_at(self, k: int) -> Token:
        return self.toks[min(self.i + k, len(self.toks) - 1)]

    def next(self) -> Token:
        t = self.toks[self.i]
        self.i += 1
        return t

    def at(self, text: str) -> bool:
        t = self.peek
        return t.kind in ("sym", "id") and t.text == text

    def accept(self, text: str) -> bool:
        if self.at(text):
            self.i += 1
            return True
        return False

    def expect(self, text: str) -> Token:
        if not self.at(text):
            self.fail(f"expected {text!r}")
        return self.next()

    def ident(self) -> str:
        t = self.peek
        if t.kind != "id" or t.text in self.keywords:
            self.fail("expected a name")
        self.i += 1
        if t.text == "_":
            self.wild += 1
            return f"_#w{self.wild}"
        return t.text

    def fail(self, msg):
        t = self.peek
        found = t.text or "end of input"
        raise ParseError(f"{msg}, found {found!r}", t.line, t.col)

    def done(self):
        if self.peek.kind != "eof":
            self.fail("trailing input")


KEYWORDS = frozenset({"send", "recv", "sel", "bra", "new", "fwd", "end"})
TokenStream.keywords = KEYWORDS
TokenStream.tokenize = staticmethod(tokenize)


# -- session types ----------------------------------------------------------

def _priority(ts: TokenStream):
    if ts.peek_at(1).text == "[" or not ts.accept("["):
        return None
    t = ts.next()
    if t.kind == "num":
        pri = Const(int(t.text))
    elif t.kind == "id":
        pri = Var(t.text)
    else:
        ts.i -= 1
        ts.fail("expected a priority")
    ts.expect("]")
    return pri


def parse_type_from(ts: TokenStream):
    left = _type_atom(ts)
    if ts.at("*") or ts.at("⊗"):
        ts.next()
        pri = _priority(ts)
        return Tensor(left, parse_type_from(ts), pri)
    if ts.at("%") or ts.at("⅋"):
        ts.next()
        pri = _priority(ts)
        return ParT(left, parse_type_from(ts), pri)
    return left


def _type_atom(ts: TokenStream):
    if ts.accept("end") or ts.accept("•"):
        return END
    if ts.accept("("):
        t = parse_type_from(ts)
        ts.expect(")")
        return t
    if ts.at("~") or (ts.at("[") and ts.peek_at(1).text == "["):
        negated = ts.accept("~")
        ts.expect("[")
        ts.expect("[")
        name = ts.ident()
        ts.expect("]")
        ts.expect("]")
        return Atom(name, negated)
    if ts.at("+") or ts.at("&") or ts.at("⊕"):
        ctor = With if ts.next().text == "&" else Plus
        pri = _priority(ts)
        ts.expect("{")
        branches = []
        while True:
            label = ts.ident()
            ts.expect(":")
            branches.append((label, parse_type_from(ts)))
            if not ts.accept(","):
                break
        ts.expect("}")
        try:
            return ctor(tuple(branches), pri)
        except ValueError as e:
            ts.fail(str(e))
    ts.fail("expected a session type")


def parse_type(text: str):
    ts = TokenStream(text)
    t = parse_type_from(ts)
    ts.done()
    return t


def parse_context(text: str) -> dict:
    """``name : Type`` entries separated by commas or newlines."""
    ts = TokenStream(text)
    ctx = {}
    while ts.peek.kind != "eof":
        name = ts.ident()
        ts.expect(":")
        if name in ctx:
            ts.fail(f"duplicate context entry for {name}")
        ctx[name] = parse_type_from(ts)
        ts.accept(",")
    return ctx


# -- processes --------------------------------------------------------------

def parse_process_from(ts: TokenStream):
    parts = [_proc(ts)]
    while ts.accept("|"):
        parts.append(_proc(ts))
    return par_all(parts)


def _proc(ts: TokenStream):
    t = ts.peek
    if t.kind == "num" and t.text == "0":
        ts.next()
        return INACT
    if ts.accept("("):
        p = parse_process_from(ts)
        ts.expect(")")
        return p
    if ts.accept("send"):
        x = ts.ident()
        ts.expect("[")
        a = ts.ident()
        ts.expect(",")
        b = ts.ident()
        ts.expect("]")
        return Send(x, a, b)
    if ts.accept("recv"):
        x = ts.ident()
        ts.expect("(")
        y = ts.ident()
        ts.expect(",")
        z = ts.ident()
        ts.expect(")")
        ts.expect(".")
        return Recv(x, y, z, _proc(ts))
    if ts.accept("sel"):
        x = ts.ident()
        ts.expect("[")
        b = ts.ident()
        ts.expect("]")
        ts.expect("<")
        return Sel(x, b, ts.ident())
    if ts.accept("bra"):
        x = ts.ident()
        ts.expect("(")
        z = ts.ident()
        ts.expect(")")
        ts.expect(">")
        ts.expect("{")
        branches = []
        while True:
            label = ts.ident()
            ts.expect(":")
            branches.append((label, parse_process_from(ts)))
            if not ts.accept(","):
                break
        ts.expect("}")
        try:
            return Bra(x, z, tuple(branches))
        except ValueError as e:
            ts.fail(str(e))
    if ts.accept("new"):
        ts.expect("(")
        x = ts.ident()
        ann = parse_type_from(ts) if ts.accept(":") else None
        y = ts.ident()
        ts.expect(")")
        return Res(x, y, _proc(ts), ann)
    if ts.accept("fwd"):
        ts.expect("[")
        x = ts.ident()
        ts.expect("<>")
        y = ts.ident()
        ts.expect("]")
        return Fwd(x, y)
    ts.fail("expected a process")


def parse_process(text: str):
    ts = TokenStream(text)
    p = parse_process_from(ts)
    ts.done()
    return p
