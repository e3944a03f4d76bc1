import pytest
from hypothesis import given, strategies as st

from sessio.parser import ParseError, parse_context, parse_process, parse_type
from sessio.process import INACT, Bra, Fwd, Par, Recv, Res, Sel, Send, show
from sessio.types import END, Atom, Const, ParT, Tensor, Var


def test_parses_every_constructor():
    p = parse_process("new (x:end * end y) (send x[a,b] | recv y(u,v). bra u(w) > { l: 0, r: fwd [w<>v] } | sel c[d] < l)")
    assert p == Res("x", "y", Par(Send("x", "a", "b"), Par(
        Recv("y", "u", "v", Bra("u", "w", (("l", INACT), ("r", Fwd("w", "v"))))), Sel("c", "d", "l"))),
        Tensor(END, END))


def test_comments_and_unicode_types():
    assert parse_type("• ⊗[1] • -- trailing") == Tensor(END, END, Const(1))
    assert parse_type("end ⅋[pi] end") == ParT(END, END, Var("pi"))


def test_wildcards_are_fresh():
    p = parse_process("recv x(_,_). 0")
    assert p.msg != p.cont


def test_atoms_parse_next_to_connectives():
    assert parse_type("end %[[S]]") == ParT(END, Atom("S"))
    assert parse_type("~[[T]] *[2] end") == Tensor(Atom("T", True), END, Const(2))


def test_context_entries():
    assert parse_context("a : end, b: end * end\nc:end") == {"a": END, "b": Tensor(END, END), "c": END}


def test_duplicate_context_entry_rejected():
    with pytest.raises(ParseError):
        parse_context("a:end, a:end")


@pytest.mark.parametrize("text", ["send x[a]", "recv x(y,z)", "new (x y)", "bra x(z) > { }", "0 0", "$"])
def test_malformed_processes_rejected(text):
    with pytest.raises(ParseError):
        parse_process(text)


def test_errors_carry_positions():
    with pytest.raises(ParseError) as e:
        parse_process("0 |\n  send x[")
    assert (e.value.line, e.value.col) == (2, 10)


names = st.sampled_from(["a", "b", "x", "y'"])


def processes():
    leaves = st.one_of(
        st.just(INACT),
        st.builds(Send, names, names, names),
        st.builds(Sel, names, names, st.sampled_from(["l", "r"])),
        st.builds(Fwd, names, names),
    )

    def extend(kids):
        return st.one_of(
            st.builds(Par, kids, kids),
            st.builds(Recv, names, names, names, kids),
            st.builds(Res, names, names, kids, st.sampled_from([None, END, Tensor(END, END, Const(1))])),
            st.builds(lambda x, z, p, q: Bra(x, z, (("l", p), ("r", q))), names, names, kids, kids),
        )
    return st.recursive(leaves, extend, max_leaves=8)


@given(processes())
def test_show_parse_round_trip(p):
    q = parse_process(show(p))
    assert show(q) == show(p)
