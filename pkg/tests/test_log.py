from __future__ import annotations

import io
from collections import Counter
from datetime import datetime, timedelta, timezone

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from conftest import FIG2_ACTS, make_log
from lpminer.errors import ConfigError, LogFormatError
from lpminer.log import (
    ColumnMapping,
    Event,
    EventLog,
    Ordinal,
    Trace,
    activities,
    activities_count,
    events_of,
    lift_property,
    parse_csv,
    parse_xes,
    project,
    write_csv,
    write_xes,
)

XES_TWO_TRACES = b"""<?xml version="1.0" encoding="UTF-8"?>
<log xes.version="1.0" xmlns="http://www.xes-standard.org/">
  <extension name="Concept" prefix="concept" uri="http://www.xes-standard.org/concept.xesext"/>
  <trace>
    <string key="concept:name" value="case1"/>
    <float key="total_cost" value="30.5"/>
    <event><string key="concept:name" value="A"/><date key="time:timestamp" value="2020-01-01T10:00:00.000+00:00"/><int key="cost" value="10"/></event>
    <event><string key="concept:name" value="B"/><date key="time:timestamp" value="2020-01-01T10:05:00.000+00:00"/><float key="cost" value="20.5"/></event>
    <event><string key="concept:name" value="C"/><date key="time:timestamp" value="2020-01-01T10:05:00.000+00:00"/><boolean key="urgent" value="true"/></event>
  </trace>
  <trace>
    <string key="concept:name" value="case2"/>
    <event><string key="concept:name" value="A"/><date key="time:timestamp" value="2020-01-02T10:00:00Z"/></event>
    <event><string key="concept:name" value="C"/><date key="time:timestamp" value="2020-01-02T11:00:00Z"/></event>
    <event><string key="concept:name" value="D"/><date key="time:timestamp" value="2020-01-02T12:00:00Z"/></event>
  </trace>
</log>
"""


def _xes_one(events: str) -> bytes:
    return f"""<log><trace><string key="concept:name" value="t9"/>{events}</trace></log>""".encode()


# ----------------------------------------------------------------- XES


def test_xes_two_traces_six_events():
    log = parse_xes(XES_TWO_TRACES)
    assert len(log) == 2
    assert log.n_events == 6
    assert log.alphabet == {"A", "B", "C", "D"}
    t1 = log.traces[0]
    assert t1.case_id == "case1"
    assert t1.case_props["total_cost"] == 30.5
    assert [e.get("cost") for e in t1] == [10, 20.5, None]
    assert t1[2].props["urgent"] is True
    assert t1[0].time == datetime(2020, 1, 1, 10, tzinfo=timezone.utc)


def test_xes_missing_timestamp_names_trace_and_event():
    doc = _xes_one('<event><string key="concept:name" value="A"/></event>')
    with pytest.raises(LogFormatError) as exc:
        parse_xes(doc)
    assert "t9" in str(exc.value) and "event index 0" in str(exc.value)
    assert exc.value.module == "event_log"


def test_xes_out_of_order_rejected():
    doc = _xes_one(
        '<event><string key="concept:name" value="A"/><date key="time:timestamp" value="2020-01-01T10:00:00Z"/></event>'
        '<event><string key="concept:name" value="B"/><date key="time:timestamp" value="2020-01-01T09:00:00Z"/></event>'
    )
    with pytest.raises(LogFormatError, match="event index 1"):
        parse_xes(doc)


def test_xes_malformed_xml():
    with pytest.raises(LogFormatError, match="malformed"):
        parse_xes(b"<log><trace>")


def test_xes_missing_activity():
    doc = _xes_one('<event><date key="time:timestamp" value="2020-01-01T10:00:00Z"/></event>')
    with pytest.raises(LogFormatError, match="concept:name"):
        parse_xes(doc)


def test_xes_round_trip(fig2_log):
    buf = io.StringIO()
    write_xes(fig2_log, buf)
    back = parse_xes(buf.getvalue())
    assert [e.id for e in back.traces[0]] == [e.id for e in fig2_log.traces[0]]
    assert [e.activity for e in back.traces[0]] == FIG2_ACTS
    assert [e.props for e in back.traces[0]] == [e.props for e in fig2_log.traces[0]]
    assert [e.time for e in back.traces[0]] == [e.time for e in fig2_log.traces[0]]
    assert back.traces[0].case_props["total_cost"] == 4200.0


# ----------------------------------------------------------------- CSV


def test_csv_fig2(fig2_csv_log, fig2_log):
    log = fig2_csv_log
    assert len(log) == 1
    tr = log.traces[0]
    assert [e.id for e in tr] == [str(i) for i in range(1, 13)]
    assert [e.activity for e in tr] == FIG2_ACTS
    assert [e.props["cost"] for e in tr] == [e.props["cost"] for e in fig2_log.traces[0]]
    assert tr.case_props == {"total_cost": 4200.0}


def test_csv_empty_body():
    log = parse_csv("case,activity,time\n", {})
    assert len(log) == 0 and log.n_events == 0


def test_csv_interleaved_cases_grouped_and_sorted():
    rows = [
        ("k1", "A", "2020-01-01T10:00:00Z"),
        ("k2", "X", "2020-01-01T10:30:00Z"),
        ("k1", "C", "2020-01-01T12:00:00Z"),
        ("k2", "Y", "2020-01-01T09:00:00Z"),
        ("k1", "B", "2020-01-01T11:00:00Z"),
        ("k2", "Z", "2020-01-01T10:30:00Z"),
    ]
    text = "case,activity,time\n" + "".join(",".join(r) + "\n" for r in rows)
    log = parse_csv(text, {})
    # oracle: manual grouping, stable sort on time
    expected = {}
    for i, (c, a, t) in enumerate(rows):
        expected.setdefault(c, []).append((t, i, a))
    got = {t.case_id: t.activities for t in log}
    assert got == {c: [a for _, _, a in sorted(v)] for c, v in expected.items()}
    assert got["k2"] == ["Y", "X", "Z"]  # X and Z tie: file order kept


def test_csv_errors_are_row_addressed():
    with pytest.raises(LogFormatError, match="row 3"):
        parse_csv("case,activity,time\nk,A,2020-01-01T00:00:00Z\nk,B,yesterday\n", {})
    with pytest.raises(LogFormatError, match="row 2"):
        parse_csv("case,activity,time,cost\nk,A,2020-01-01T00:00:00Z,cheap\n", {"properties": {"cost": "real"}})
    with pytest.raises(LogFormatError, match="missing mapped column"):
        parse_csv("case,activity\nk,A\n", {})


def test_csv_explicit_time_format_and_types():
    text = "id,act,ts,risk,n,ok\n1,A,01/02/2020 10:00,low,3,yes\n1,B,01/02/2020 11:00,high,4,no\n"
    mapping = {
        "case": "id",
        "activity": "act",
        "timestamp": "ts",
        "timestamp_format": "%d/%m/%Y %H:%M",
        "properties": {"risk": {"type": "ordinal", "levels": ["low", "medium", "high"]}, "n": "int", "ok": "bool"},
    }
    log = parse_csv(text, mapping)
    a, b = log.traces[0]
    assert a.time == datetime(2020, 2, 1, 10)
    assert a.props["risk"] == Ordinal("low", 0, "risk") and b.props["risk"].rank == 2
    assert a.props["risk"] < b.props["risk"]
    assert (a.props["n"], a.props["ok"], b.props["ok"]) == (3, True, False)


def test_csv_unknown_mapping_key():
    with pytest.raises(ConfigError) as exc:
        ColumnMapping.from_dict({"cols": 1})
    assert exc.value.module == "event_log"


def test_csv_round_trip(fig2_csv_log):
    mapping = {"event_id": "id", "properties": {"cost": "real"}, "case_properties": {"total_cost": "real"}}
    buf = io.StringIO()
    write_csv(fig2_csv_log, buf, mapping)
    back = parse_csv(buf.getvalue(), mapping)
    a, b = fig2_csv_log.traces[0], back.traces[0]
    assert [(e.id, e.activity, e.time, e.props) for e in a] == [(e.id, e.activity, e.time, e.props) for e in b]
    assert a.case_props == b.case_props


# ----------------------------------------------------------------- types


def test_ordinal_scales_incomparable():
    with pytest.raises(TypeError):
        _ = Ordinal("low", 0, "risk") < Ordinal("low", 0, "priority")


def test_trace_invariants():
    t0 = datetime(2020, 1, 1)
    e1, e2 = Event("1", "A", t0), Event("2", "B", t0 - timedelta(seconds=1))
    with pytest.raises(LogFormatError):
        Trace((e1, e2))
    with pytest.raises(LogFormatError):
        Trace((e1, e1))
    with pytest.raises(LogFormatError):
        EventLog([Trace(())])
    with pytest.raises(LogFormatError, match="duplicate"):
        EventLog([Trace((e1,), {}, "a"), Trace((Event("1", "C", t0),), {}, "b")])
    with pytest.raises(LogFormatError):
        Event("3", "", t0)
    with pytest.raises(LogFormatError):
        Event("3", "A", None)  # type: ignore[arg-type]


# ----------------------------------------------------------------- projection and lifting


def test_project_examples(fig2_log):
    log = make_log(["abcabc"])
    assert project(log.traces[0], {"a", "c"}).activities == list("acac")
    assert project(fig2_log.traces[0], {"A", "B", "C"}).activities == list("ABBCCABCBB")
    assert project(fig2_log.traces[0], set()).activities == []
    projected = project(fig2_log.traces[0], {"A"})
    assert all(e is f for e, f in zip(projected, [fig2_log.traces[0][0], fig2_log.traces[0][6]]))


def test_lift_property_examples():
    t0 = datetime(2020, 1, 1)
    evs = [Event(str(i), a, t0, {"cost": 5 * i} if i in (2, 4) else {}) for i, a in enumerate("abcde", start=1)]
    tr = Trace(tuple(evs))
    assert lift_property(evs[:2], "activity") == ["a", "b"]
    assert lift_property([], "cost") == []
    assert lift_property(tr, "cost") == [e.props["cost"] for e in evs if "cost" in e.props] == [10, 20]


def test_counts(fig2_log):
    assert activities_count(fig2_log, "B") == 5
    assert activities_count(EventLog([]), "A") == 0
    assert activities_count(fig2_log, "nope") == 0
    assert activities(fig2_log) == Counter({"A": 2, "B": 5, "C": 3, "X": 2})
    assert len(events_of(fig2_log)) == 12
    assert events_of(EventLog([])) == set()
    assert len(events_of(make_log(["abc", "abd"]))) == 6


# ----------------------------------------------------------------- properties

words = st.lists(st.text(alphabet="abcd", min_size=1, max_size=8), min_size=1, max_size=4)
subsets = st.sets(st.sampled_from("abcde"))


@settings(max_examples=100, deadline=None)
@given(words, subsets)
def test_projection_properties(ws, alpha):
    for t in make_log(ws).traces:
        p = project(t, alpha)
        assert project(p, alpha).events == p.events
        assert len(p) <= len(t)
        assert (len(p) == len(t)) == all(e.activity in alpha for e in t)
        assert len(lift_property(t, "activity")) == len(t)
        assert len(lift_property(t, "cost")) <= len(t)


@settings(max_examples=50, deadline=None)
@given(words)
def test_multiset_sums_to_event_count(ws):
    log = make_log(ws)
    assert sum(activities(log).values()) == len(events_of(log)) == log.n_events


@settings(max_examples=50, deadline=None)
@given(words, st.integers(0, 10_000))
def test_csv_round_trip_property(ws, seed):
    log = make_log(ws, costs=lambda k, i, a: (seed * 31 + k * 7 + i) % 997 / 4)
    mapping = {"event_id": "id", "properties": {"cost": "real"}}
    buf = io.StringIO()
    write_csv(log, buf, mapping)
    back = parse_csv(buf.getvalue(), mapping)
    assert [[(e.id, e.activity, e.time, e.props) for e in t] for t in log] == [
        [(e.id, e.activity, e.time, e.props) for e in t] for t in back
    ]
