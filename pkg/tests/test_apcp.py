from sessio.apcp import Eq, Lt, LtMin, check_apcp, generate_constraints, render_priorities, solve
from sessio.parser import parse_context as C, parse_process as P
from sessio.types import OMEGA, Const, Var

ABCD = C("a:end, b:end, c:end, d:end")
DEADLOCK = P("new (x:end %[pi] end y) new (u:end *[rho] end w) (recv x(v,x'). send u[a,b] | recv w(z,w'). send y[c,d])")
FIXED = P("new (x:end %[pi] end y) (new (u:end *[rho] end w) (recv x(v,x'). send u[a,b] | recv w(z,w'). 0) | send y[c,d])")


def test_solve_orders_variables():
    sol = solve([Lt(Var("a"), Var("b")), Lt(Var("b"), Var("c"))])
    assert sol.feasible and sol.assignment == {"a": 0, "b": 1, "c": 2}


def test_solve_reports_shortest_cycle():
    sol = solve([Lt(Var("a"), Var("b")), Lt(Var("b"), Var("a")), Lt(Var("b"), Var("c")), Lt(Var("c"), Var("a"))])
    assert not sol.feasible and len(sol.witness) == 2


def test_solve_equalities_merge_classes():
    assert not solve([Eq(Var("a"), Var("b")), Lt(Var("a"), Var("b"))]).feasible
    assert solve([Eq(Var("a"), Var("b")), Lt(Var("a"), Var("c"))]).assignment == {"a": 0, "b": 0, "c": 1}


def test_solve_omega_bounds():
    assert solve([Lt(Var("a"), OMEGA)]).feasible
    assert not solve([Lt(OMEGA, Var("a"))]).feasible


def test_solve_respects_constants():
    assert solve([Lt(Const(2), Var("a"))]).assignment == {"a": 3}
    assert not solve([Lt(Var("a"), Const(0))]).feasible


def test_lt_min_expands_per_member():
    c = LtMin(Var("p"), (Var("q"), Var("r")), "why")
    assert {str(x) for x in c.expand()} == {"p < q", "p < r"}


def test_deadlock_rejected_with_two_cycle():
    r = check_apcp(DEADLOCK, ABCD)
    assert not r.accepted
    assert {str(c) for c in r.solution.witness} == {"pi < rho", "rho < pi"}


def test_fixed_accepted_with_solution():
    r = check_apcp(FIXED, ABCD)
    assert r.accepted and r.solution.value(Var("pi")) < r.solution.value(Var("rho"))
    assert "%[0]" in render_priorities(r) and "*[1]" in render_priorities(r)


def test_missing_priorities_are_inferred():
    p = P("new (x:end % end y) (new (u:end * end w) (recv x(v,x'). send u[a,b] | recv w(z,w'). 0) | send y[c,d])")
    assert check_apcp(p, ABCD).accepted


def test_unannotated_restriction_gets_fresh_variables():
    constraints, verdict = generate_constraints(
        P("new (x:end * end y) (send x[a,b] | recv y(u,v). 0)"), C("a:end, b:end"))
    assert verdict.accepted and constraints


def test_structural_failure_stops_before_solving():
    r = check_apcp(P("send x[a,b]"), {})
    assert not r.accepted and r.solution is None
