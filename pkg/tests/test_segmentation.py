from __future__ import annotations

from collections import Counter
from fractions import Fraction

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

import oracles
from conftest import distinct_trees, fig2_trace, make_log
from lpminer.errors import SegmentationError
from lpminer.log import EventLog, activities, activities_count, events_of, project
from lpminer.petri import Marking, accepts, reachable_label_moves, tau_closure
from lpminer.segmentation import GAMMA, LAMBDA, Replay, determinism, gamma, gamma_log, segment_trace
from lpminer.tree import parse_tree, tree_to_apn
from test_petri import printed_net


def ids(events):
    return [e.id for e in events]


@pytest.fixture(params=["printed", "tree"])
def lpm(request):
    return printed_net() if request.param == "printed" else parse_tree("seq(A, and(loop(B), C))")


def test_fig2_segmentation(lpm):
    seg = segment_trace(fig2_trace(), lpm)
    assert seg.projected.activities == list("ABBCCABCBB")
    kinds = [k for k, _ in seg.segments]
    assert kinds == [LAMBDA, GAMMA, LAMBDA, GAMMA, LAMBDA]
    l1, g1, l2, g2, l3 = (evs for _, evs in seg.segments)
    assert ids(l1) == []
    assert ids(g1) == ["1", "2", "4", "5"]
    assert ids(l2) == ["6"]
    assert ids(g2) == ["7", "8", "9", "10", "11"]
    assert ids(l3) == []
    assert seg.render() == "[A B B C] C [A B C B B]"
    assert seg.describe() == "l1=<> g1=<A,B,B,C> l2=<C> g2=<A,B,C,B,B> l3=<>"


def test_fig2_gamma(lpm):
    g = gamma(fig2_trace(), lpm)
    assert [e.activity for e in g] == list("ABBCABCBB")
    assert ids(g) == ["1", "2", "4", "5", "7", "8", "9", "10", "11"]
    assert g[1].props["cost"] == 500.0  # original events, properties intact


def test_no_lpm_activities():
    log = make_log(["XYZ"])
    seg = segment_trace(log.traces[0], parse_tree("seq(A,B)"))
    assert seg.projected.activities == [] and seg.gammas == []
    assert seg.segments == ((LAMBDA, ()),)


def test_exactly_one_word():
    log = make_log(["ACB"])
    seg = segment_trace(log.traces[0], parse_tree("seq(A, and(loop(B), C))"))
    assert [(k, [e.activity for e in evs]) for k, evs in seg.segments] == [(LAMBDA, []), (GAMMA, list("ACB")), (LAMBDA, [])]


def test_back_to_back_runs():
    tree = parse_tree("seq(A, and(loop(B), C))")
    trace = make_log(["ABCACB"]).traces[0]
    seg = segment_trace(trace, tree)
    assert [[e.activity for e in g] for g in seg.gammas] == [list("ABC"), list("ACB")]
    assert len(gamma(trace, tree)) == 6 == oracles.max_fitting(list("ABCACB"), lambda w: oracles.accepts(tree, w))
    assert [k for k, _ in seg.segments] == [LAMBDA, GAMMA, LAMBDA, GAMMA, LAMBDA]


def test_gamma_log(lpm):
    log = EventLog([fig2_trace()])
    sub = gamma_log(log, lpm)
    assert sub.n_events == 9 and len(sub) == 1
    assert sub.traces[0].case_props == {"total_cost": 4200.0}
    assert activities(sub) == Counter({"A": 2, "B": 5, "C": 2})
    empty = gamma_log(EventLog([]), lpm)
    assert len(empty) == 0 and empty.n_events == 0
    nofit = gamma_log(make_log(["XX", "BA"]), lpm)
    assert [len(t) for t in nofit] == [0, 0]
    assert len(nofit.as_event_log()) == 2


# ----------------------------------------------------------------- determinism


def hand_determinism(apn, log) -> Fraction:
    """Replay every fitting run on the net itself: at each consumed event count
    the distinct labels offered by the current tau-closed marking set."""
    moves = choices = 0
    for t in log.traces:
        for g in segment_trace(t, apn).gammas:
            states = {apn.initial}
            for e in g:
                offered = {}
                for m in states:
                    for lab, nxt in reachable_label_moves(apn, m):
                        offered.setdefault(lab, set()).add(nxt)
                moves += 1
                choices += len(offered)
                states = set().union(*(tau_closure(apn.net, m) for m in offered[e.activity]))
            assert any(f in states for f in apn.finals)
    return Fraction(moves, choices)


def test_determinism_fig2(lpm):
    apn = printed_net() if not hasattr(lpm, "op") else tree_to_apn(lpm)
    log = EventLog([fig2_trace()])
    value = determinism(lpm, log)
    assert 0 < value < 1
    assert value == pytest.approx(float(hand_determinism(apn, log)), abs=1e-15)
    assert value == pytest.approx(9 / 14, abs=1e-15)


def test_determinism_sequence_is_one():
    log = make_log(["AB", "ABAB", "XAB"])
    assert determinism(parse_tree("seq(A,B)"), log) == 1.0


def test_determinism_three_way_xor():
    log = make_log(["ABC", "CCA", "B"])
    assert determinism(parse_tree("xor(A,B,C)"), log) == pytest.approx(1 / 3, abs=1e-15)


def test_determinism_undefined_without_fit():
    with pytest.raises(SegmentationError, match="undefined"):
        determinism(parse_tree("seq(A,B)"), make_log(["BA"]))


@settings(max_examples=40, deadline=None)
@given(distinct_trees(alphabet="ABC", max_acts=3), st.lists(st.text("ABCX", min_size=1, max_size=8), min_size=1, max_size=3))
def test_determinism_invariant_under_duplication(tree, words):
    log = make_log(words)
    doubled = make_log(words + words)
    rp = Replay(log, tree_to_apn(tree))
    if rp.n_moves == 0:
        return
    assert determinism(tree, doubled) == pytest.approx(rp.determinism(), abs=1e-12)


def test_determinism_matches_hand_replay_on_random_logs():
    for text in ["loop(and(A,B))", "xor(seq(A,B),loop(C,A))", "and(A, loop(xor(B,C)))", "loop(seq(A,loop(B)),C)"]:
        tree = parse_tree(text)
        log = make_log(["ABCABBACB", "CABAB", "BBAACC", "ACBCA"])
        if Replay(log, tree_to_apn(tree)).n_moves:
            assert determinism(tree, log) == pytest.approx(float(hand_determinism(tree_to_apn(tree), log)), abs=1e-12)


# ----------------------------------------------------------------- invariants


@settings(max_examples=200, deadline=None)
@given(distinct_trees(alphabet="ABC", max_acts=3), st.text("ABCX", min_size=1, max_size=12))
def test_segmentation_invariants_and_max_fit(tree, word):
    apn = tree_to_apn(tree)
    trace = make_log([word]).traces[0]
    seg = segment_trace(trace, apn)
    proj = project(trace, set(tree.activities))
    # concatenation reproduces the projection exactly
    assert [e for _, evs in seg.segments for e in evs] == list(proj.events)
    kinds = [k for k, _ in seg.segments]
    assert kinds[0] == LAMBDA and kinds[-1] == LAMBDA
    assert all(a != b for a, b in zip(kinds, kinds[1:]))
    for kind, evs in seg.segments:
        w = [e.activity for e in evs]
        if kind == GAMMA:
            assert evs and accepts(apn, w)
        elif evs:
            assert not accepts(apn, w)
    # no other segmentation covers more events
    if len(proj) <= 10:
        best = oracles.max_fitting(proj.activities, lambda w: oracles.accepts(tree, w))
        assert len(seg.fitting) == best


@settings(max_examples=60, deadline=None)
@given(distinct_trees(alphabet="ABC", max_acts=3), st.lists(st.text("ABCX", min_size=1, max_size=8), min_size=1, max_size=4))
def test_sublog_is_sub_multiset(tree, words):
    log = make_log(words)
    sub = gamma_log(log, tree)
    assert events_of(sub) <= events_of(log)
    for a in "ABCX":
        assert activities_count(sub, a) <= activities_count(log, a)
    for t, g in zip(log.traces, sub.traces):
        pos = [t.events.index(e) for e in g.events]
        assert pos == sorted(pos)


def test_empty_language_fits_nothing():
    from lpminer.petri import AcceptingPetriNet, PetriNet, Transition

    net = PetriNet(["a", "b", "c"], [Transition("t", "A")], [("a", "t"), ("t", "b")])
    apn = AcceptingPetriNet(net, Marking(["a"]), [Marking(["c"])])
    rp = Replay(make_log(["AAA"]), apn)
    assert rp.n_fitting == 0
