"""Recursive-descent parser for terms and types of the functional language.

Grammar (application binds tightest and associates to the left)::

    term ::= \\x[:T]. term | let (x, y) = term in term | let x[:T] = term in term
           | spawn term; term | close term; term | case term { l: term, ... } | app
    app  ::= send atom atom | recv atom | select l atom | atom atom*
    atom ::= x | () | (term) | (term, term) | new | atom⦃term/x⦄
    type ::= pair [⊸ type]      pair ::= tatom [× pair]
    tatom ::= 1 | end | X | !tatom.tatom | ?tatom.tatom | ⊕{l: type, ...} | &{l: type, ...} | (type)

``-o``, ``*`` and ``+`` are accepted for ``⊸``, ``×`` and ``⊕``.
"""

from __future__ import annotations

import re

from sessio.lastn.terms import (
    Abs, App, CaseTm, CloseTm, ExplSub, LetPair, New, Pair, RecvTm, SBra, SEnd, SRecv, SSel, SSend,
    SelectTm, SendTm, Spawn, TFun, TName, TPair, TUnit, UNIT_VAL, Var, choice,
)
from sessio.parser import ParseError, Token, TokenStream

_TOKEN = re.compile(
    r"""
    (?P<ws>[ \t\r]+)
  | (?P<nl>\n)
  | (?P<comment>--[^\n]*)
  | (?P<num>\d+(?![A-Za-z_'#]))
  | (?P<id>[A-Za-z_][A-Za-z0-9_'#]*)
  | (?P<sym>-o|[()\[\]{},:.;=\\λ⊸×*!?⊕+&⦃⦄/])
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


class _Stream(TokenStream):
    keywords = frozenset({"let", "in", "new", "spawn", "send", "recv", "select", "case", "close", "end"})
    tokenize = staticmethod(tokenize)


# -- types ---------------------------------------------------------------------

def _type(ts):
    left = _pair_type(ts)
    if ts.accept("⊸") or ts.accept("-o"):
        return TFun(left, _type(ts))
    return left


def _pair_type(ts):
    left = _type_atom(ts)
    if ts.accept("×") or ts.accept("*"):
        return TPair(left, _pair_type(ts))
    return left


def _type_atom(ts):
    t = ts.peek
    if t.kind == "num" and t.text == "1":
        ts.next()
        return TUnit()
    if ts.accept("end"):
        return SEnd()
    if ts.accept("("):
        inner = _type(ts)
        ts.expect(")")
        return inner
    for sym, cls in (("!", SSend), ("?", SRecv)):
        if ts.accept(sym):
            payload = _type_atom(ts)
            ts.expect(".")
            return cls(payload, _type_atom(ts))
    for syms, cls in ((("⊕", "+"), SSel), (("&",), SBra)):
        if any(ts.accept(s) for s in syms):
            ts.expect("{")
            branches = []
            while True:
                label = ts.ident()
                ts.expect(":")
                branches.append((label, _type(ts)))
                if not ts.accept(","):
                    break
            ts.expect("}")
            if len({l for l, _ in branches}) != len(branches):
                ts.fail("duplicate labels")
            return choice(cls, branches)
    if t.kind == "id" and t.text not in ts.keywords:
        return TName(ts.ident())
    ts.fail("expected a type")


# -- terms ---------------------------------------------------------------------

def _term(ts):
    if ts.accept("\\") or ts.accept("λ"):
        x = ts.ident()
        ann = _type(ts) if ts.accept(":") else None
        ts.expect(".")
        return Abs(x, _term(ts), ann)
    if ts.accept("let"):
        if ts.accept("("):
            x = ts.ident()
            ts.expect(",")
            y = ts.ident()
            ts.expect(")")
            ts.expect("=")
            scrut = _term(ts)
            ts.expect("in")
            return LetPair(x, y, scrut, _term(ts))
        x = ts.ident()
        ann = _type(ts) if ts.accept(":") else None
        ts.expect("=")
        bound = _term(ts)
        ts.expect("in")
        return App(Abs(x, _term(ts), ann), bound)
    for kw, cls in (("spawn", Spawn), ("close", CloseTm)):
        if ts.accept(kw):
            first = _term(ts)
            ts.expect(";")
            return cls(first, _term(ts))
    if ts.accept("case"):
        chan = _term(ts)
        ts.expect("{")
        branches = []
        while True:
            label = ts.ident()
            ts.expect(":")
            branches.append((label, _term(ts)))
            if not ts.accept(","):
                break
        ts.expect("}")
        if len({l for l, _ in branches}) != len(branches):
            ts.fail("duplicate labels")
        return CaseTm(chan, tuple(branches))
    return _app(ts)


def _app(ts):
    if ts.accept("send"):
        payload = _atom(ts)
        return SendTm(payload, _atom(ts))
    if ts.accept("recv"):
        return RecvTm(_atom(ts))
    if ts.accept("select"):
        label = ts.ident()
        return SelectTm(label, _atom(ts))
    head = _atom(ts)
    while _starts_atom(ts):
        head = App(head, _atom(ts))
    return head


def _starts_atom(ts) -> bool:
    t = ts.peek
    return ts.at("(") or ts.at("new") or (t.kind == "id" and t.text not in ts.keywords)


def _atom(ts):
    if ts.accept("new"):
        ann = _type_atom(ts) if ts.accept(":") else None
        result = New(ann)
    elif ts.accept("("):
        if ts.accept(")"):
            result = UNIT_VAL
        else:
            first = _term(ts)
            if ts.accept(","):
                result = Pair(first, _term(ts))
            else:
                result = first
            ts.expect(")")
    elif _starts_atom(ts):
        result = Var(ts.ident())
    else:
        ts.fail("expected a term")
    while ts.accept("⦃"):
        arg = _term(ts)
        ts.expect("/")
        x = ts.ident()
        ts.expect("⦄")
        result = ExplSub(result, x, arg)
    return result


def parse_term(text: str):
    ts = _Stream(text)
    t = _term(ts)
    ts.done()
    return t


def parse_fun_type(text: str):
    ts = _Stream(text)
    t = _type(ts)
    ts.done()
    return t
