import pytest
from hypothesis import given, settings, strategies as st

from helpers import process_corpus
from sessio.congruence import normalize
from sessio.parser import parse_process as P
from sessio.reduction import RedexStale, Redex, explore, find_redexes, run, state_graph, step, successors


def test_send_recv_substitutes_payload_and_continuation():
    p = P("new (x y) (send x[a,b] | recv y(u,v). send u[v,c])")
    (r,) = find_redexes(p)
    assert r.kind == "send-recv"
    assert normalize(step(p, r)).key == "send a[b,c]"


def test_sel_bra_picks_branch():
    p = P("new (x y) (sel x[b] < r | bra y(z) > { l: send z[c,d], r: send c[z,d] })")
    (r,) = find_redexes(p)
    assert r.kind == "sel-bra"
    assert normalize(step(p, r)).key == "send c[b,d]"


def test_unmatched_label_does_not_step():
    assert find_redexes(P("new (x y) (sel x[b] < m | bra y(z) > { l: 0 })")) == []


def test_forwarder_substitutes():
    p = P("new (x y) (fwd [y<>a] | recv x(u,v). send u[v,c])")
    (r,) = find_redexes(p)
    assert r.kind == "fwd"
    assert normalize(step(p, r)).key == "recv a(_0,_1). send _0[_1,c]"


def test_prefix_blocks_reduction():
    assert find_redexes(P("new (x y) recv c(d,e). (send x[a,b] | recv y(u,v). 0)")) == []


def test_stale_redex_rejected():
    with pytest.raises(RedexStale):
        step(P("0"), Redex("send-recv", (0, 1), ("x", "y")))


def test_run_first_strategy_is_deterministic():
    p = next(s.process for s in process_corpus() if s.path.endswith("fixed.pi"))
    a, b = run(p), run(p)
    assert a.render() == b.render() and a.terminal.zero


def test_run_respects_step_bound():
    p = next(s.process for s in process_corpus() if s.path.endswith("scheduler.pi"))
    assert len(run(p, max_steps=2).steps) == 2
    with pytest.raises(ValueError):
        run(p, max_steps=-1)


@settings(max_examples=25, deadline=None)
@given(st.integers(min_value=0, max_value=2**32))
def test_random_runs_end_at_an_explored_terminal(seed):
    p = next(s.process for s in process_corpus() if s.path.endswith("scheduler.pi"))
    t1, t2 = run(p, strategy="random", seed=seed), run(p, strategy="random", seed=seed)
    assert t1.render() == t2.render()
    assert t1.terminal.zero


def test_explore_deadlock_example():
    p = next(s.process for s in process_corpus() if s.path.endswith("deadlock.pi"))
    rep = explore(p)
    assert rep.states_visited == 1 and len(rep.deadlocked) == 1 and not rep.deadlock_free


def test_explore_truncates():
    p = next(s.process for s in process_corpus() if s.path.endswith("scheduler.pi"))
    rep = explore(p, max_states=3)
    assert rep.truncated and not rep.deadlock_free
    with pytest.raises(ValueError):
        explore(p, max_states=0)


def test_state_graph_matches_explore():
    p = next(s.process for s in process_corpus() if s.path.endswith("scheduler.pi"))
    forms, edges, truncated = state_graph(p)
    rep = explore(p)
    assert len(forms) == rep.states_visited and not truncated
    assert sum(len(v) for v in edges.values()) == rep.transitions
    assert {k for k, v in edges.items() if not v} == {t.key for t in rep.terminals}


@pytest.mark.parametrize("src", process_corpus(), ids=lambda s: s.path.rsplit("/", 1)[-1])
def test_successors_are_normal_forms(src):
    for _, q in successors(src.process):
        assert normalize(q).residual == q
