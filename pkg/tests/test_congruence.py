import itertools

import pytest
from hypothesis import given

from helpers import process_corpus
from test_parser import processes
from sessio.congruence import (
    acp_key, congruent, congruent_acp, is_cut_shape, normalize, scope_extrude, to_cut_shape,
)
from sessio.parser import parse_process as P
from sessio.process import INACT, Par, Recv, Res, Send, free_names, rename_bound

SEND = Send("a", "b", "c")
RECV = Recv("d", "e", "f", INACT)


def test_units_vanish():
    cf = normalize(Par(INACT, INACT))
    assert cf.residual == INACT and cf.zero


def test_restricted_forwarder_vanishes():
    assert normalize(P("new (x y) fwd [x<>y]")).zero


def test_unused_restriction_over_unit():
    assert normalize(Res("x", "y", Par(SEND, INACT))) == normalize(SEND)


def test_parallel_commutes():
    assert congruent(Par(SEND, RECV), Par(RECV, SEND))


def test_distinct_heads_not_congruent():
    assert not congruent(Send("x", "a", "b"), Recv("x", "a", "b", INACT))


def test_forwarder_symmetry():
    assert congruent(P("fwd [a<>b]"), P("fwd [b<>a]"))


def test_scope_extrusion():
    assert congruent(P("new (x y) (send x[a,b] | recv y(u,v). 0) | send c[d,e]"),
                     P("new (x y) (send c[d,e] | send x[a,b] | recv y(u,v). 0)"))


def test_restriction_symmetry_and_commutation():
    p = P("new (x y) new (u w) (send x[a,b] | recv w(s,t). 0 | recv y(p,q). send u[p,q])")
    q = P("new (w u) new (y x) (recv y(p,q). send u[p,q] | send x[a,b] | recv w(s,t). 0)")
    assert congruent(p, q)


def test_alpha_invariance_of_bound_names():
    p = P("new (x y) (recv x(u,v). send v[u,w] | send y[a,b])")
    names = iter(f"n{k}" for k in range(100))
    assert congruent(p, rename_bound(p, lambda _: next(names)))


def test_congruence_is_sensitive_to_pairing():
    assert not congruent(P("new (x y) new (u w) (send x[a,b] | recv y(c,d). 0 | send u[e,f] | recv w(c,d). send c[g,h])"),
                         P("new (x y) new (u w) (send x[a,b] | recv y(c,d). send c[g,h] | send u[e,f] | recv w(c,d). 0)"))


def test_acp_cut_symmetry():
    p, q = SEND, Recv("y", "e", "f", INACT)
    assert congruent_acp(Res("x", "y", Par(p, q)), Res("y", "x", Par(q, p)))


def test_cut_shape():
    assert is_cut_shape(P("new (x y) (send x[a,b] | recv y(u,v). 0)"))
    assert not is_cut_shape(P("new (x y) new (u w) (send x[a,b] | recv y(u',v). 0)"))
    assert not is_cut_shape(P("send x[a,b] | send c[d,e]"))


def test_to_cut_shape_rebuilds_tree():
    p = P("new (x y) new (u w) (recv x(v,x'). send u[a,b] | recv w(z,w'). 0 | send y[c,d])")
    q = to_cut_shape(p)
    assert q is not None and is_cut_shape(q) and congruent(p, q)


def test_to_cut_shape_refuses_cycles():
    assert to_cut_shape(P("new (x y) new (u w) (recv x(v,x'). send u[a,b] | recv w(z,w'). send y[c,d])")) is None


def test_scope_extrude_is_congruent():
    p = P("(new (x y) send x[a,b]) | recv c(d,e). 0")
    assert isinstance(scope_extrude(p), Res) and congruent(p, scope_extrude(p))


CORPUS = [s.process for s in process_corpus()]


@pytest.mark.parametrize("p", CORPUS, ids=[s.path.rsplit("/", 1)[-1] for s in process_corpus()])
def test_normalize_is_idempotent_on_corpus(p):
    cf = normalize(p)
    assert normalize(cf.residual) == cf
    assert free_names(cf.residual) == free_names(p)


def test_congruence_is_an_equivalence_on_corpus():
    keys = {id(p): normalize(p).key for p in CORPUS}
    for p in CORPUS:
        assert congruent(p, p)
    for p, q in itertools.product(CORPUS, repeat=2):
        assert congruent(p, q) == congruent(q, p) == (keys[id(p)] == keys[id(q)])


def test_acp_congruence_implies_congruence_on_cut_shapes():
    shaped = [p for p in CORPUS if is_cut_shape(p)]
    assert len(shaped) >= 10
    for p, q in itertools.product(shaped, repeat=2):
        if congruent_acp(p, q):
            assert congruent(p, q)
    for p in shaped:
        assert acp_key(p) == acp_key(to_cut_shape(p))


@given(processes())
def test_normalize_idempotent(p):
    cf = normalize(p)
    assert normalize(cf.residual).key == cf.key


@given(processes(), processes())
def test_parallel_commutes_generally(p, q):
    assert congruent(Par(p, q), Par(q, p))
