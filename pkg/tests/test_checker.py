import pytest

from sessio.checker import check_acp, check_ap
from sessio.parser import parse_context as C, parse_process as P
from sessio.types import END, ParT, Tensor

ABCD = C("a:end, b:end, c:end, d:end")


def test_send_consumes_three_assignments():
    ctx = {"x": Tensor(END, END), "a": END, "b": END}
    v = check_ap(P("send x[a,b]"), ctx)
    assert v.accepted and v.residual_context == {}


def test_send_missing_continuation_rejected():
    v = check_ap(P("send x[a,b]"), {"x": Tensor(END, END), "a": END})
    assert not v.accepted


def test_send_payload_type_mismatch_rejected():
    v = check_ap(P("send x[a,b]"), {"x": Tensor(Tensor(END, END), END), "a": END, "b": END})
    assert not v.accepted and v.failure.rule


def test_recv_extends_context():
    assert check_ap(P("recv x(u,v). 0"), {"x": ParT(END, END)}).accepted


def test_forwarder_needs_dual_types():
    assert check_ap(P("fwd [x<>y]"), {"x": Tensor(END, END), "y": ParT(END, END)}).accepted
    assert not check_ap(P("fwd [x<>y]"), {"x": Tensor(END, END), "y": Tensor(END, END)}).accepted


def test_closed_entries_may_be_dropped():
    assert check_ap(P("0"), {"a": END}).accepted


def test_linear_entries_may_not_be_dropped():
    assert not check_ap(P("0"), {"x": Tensor(END, END)}).accepted


def test_names_are_not_shared_across_par():
    ctx = {"x": Tensor(END, END), "a": END, "b": END}
    assert not check_ap(P("send x[a,b] | send x[a,b]"), ctx).accepted


def test_branches_check_against_every_label():
    ctx = {"x": C("x: &{l: end * end, r: end}")["x"], "a": END, "b": END}
    assert check_ap(P("bra x(z) > { l: send z[a,b], r: 0 }"), ctx).accepted
    assert not check_ap(P("bra x(z) > { l: send z[a,b], r: send z[a,b] }"), ctx).accepted
    ctx["x"] = C("x: &{l: end * end, r: end * end}")["x"]
    assert check_ap(P("bra x(z) > { l: send z[a,b], r: send z[a,b] }"), ctx).accepted


def test_selection_requires_label():
    ctx = {"x": C("x: +{l: end}")["x"], "b": END}
    assert check_ap(P("sel x[b] < l"), ctx).accepted
    assert not check_ap(P("sel x[b] < r"), ctx).accepted


def test_restriction_without_annotation_is_reported():
    v = check_ap(P("new (x y) (send x[a,b] | recv y(u,v). 0)"), {"a": END, "b": END})
    assert not v.accepted and v.failure.rule == "MissingAnnotation"


def test_deadlock_example_ap_accepts_acp_rejects():
    p = P("new (x:end % end y) new (u:end * end w) (recv x(v,x'). send u[a,b] | recv w(z,w'). send y[c,d])")
    assert check_ap(p, ABCD).accepted
    v = check_acp(p, ABCD)
    assert not v.accepted and v.failure.rule == "NotCutShape"
    assert v.render().startswith("REJECT ACP: NotCutShape")


def test_cut_shaped_fixed_variant_accepted_by_acp():
    p = P("new (x:end % end y) (new (u:end * end w) (recv x(v,x'). send u[a,b] | recv w(z,w'). 0) | send y[c,d])")
    assert check_acp(p, ABCD).accepted


def test_acp_rejects_cut_that_shares_no_channel():
    p = P("new (x:end * end y) (send x[a,b] | send c[d,e])")
    assert not check_acp(p, C("a:end,b:end,c:end*end,d:end,e:end")).accepted


@pytest.mark.parametrize("check", [check_ap, check_acp])
def test_verdict_json(check):
    v = check(P("0"), {})
    assert v.to_json() == {"accepted": True, "discipline": v.discipline, "residual_context": {}}
