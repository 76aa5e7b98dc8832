"""Events, traces and event logs.

Logs are immutable once built. Besides the object view (``Event`` /
``Trace`` / ``EventLog``) every log lazily builds a columnar
:class:`LogIndex` with integer activity codes and numeric property
columns, which is what the replay kernels and the builtin utilities read.
"""

from __future__ import annotations

import csv
import io
import re
import xml.etree.ElementTree as ET
from collections import Counter
from dataclasses import dataclass, field
from datetime import datetime, timezone
from functools import cached_property, total_ordering
from typing import IO, Any, Iterable, Iterator, Mapping, Sequence, Union

import numpy as np

from .errors import ConfigError, LogFormatError

__all__ = [
    "Ordinal",
    "Event",
    "Trace",
    "EventLog",
    "LogIndex",
    "ColumnMapping",
    "parse_xes",
    "parse_csv",
    "write_csv",
    "write_xes",
    "project",
    "lift_property",
    "activities",
    "activities_count",
    "events_of",
]


@total_ordering
@dataclass(frozen=True)
class Ordinal:
    """A value on a declared ordinal scale, e.g. ``risk=medium``."""

    label: str
    rank: int
    scale: str

    def _check(self, other: object) -> "Ordinal":
        if not isinstance(other, Ordinal):
            return NotImplemented  # type: ignore[return-value]
        if other.scale != self.scale:
            raise TypeError(
                f"cannot compare ordinal values of scales {self.scale!r} and {other.scale!r}"
            )
        return other

    def __lt__(self, other: object) -> bool:
        o = self._check(other)
        if o is NotImplemented:
            return NotImplemented
        return self.rank < o.rank

    def __str__(self) -> str:
        return self.label


PropertyValue = Union[str, int, float, bool, datetime, Ordinal]


class Event:
    """A single event. Identity (hash/equality) is the event id."""

    __slots__ = ("id", "activity", "time", "props")

    def __init__(
        self,
        id: str,
        activity: str,
        time: datetime,
        props: Mapping[str, PropertyValue] | None = None,
    ):
        if activity is None or activity == "":
            raise LogFormatError("event has no activity", location=f"event {id}")
        if not isinstance(time, datetime):
            raise LogFormatError("event has no timestamp", location=f"event {id}")
        object.__setattr__(self, "id", str(id))
        object.__setattr__(self, "activity", activity)
        object.__setattr__(self, "time", time)
        object.__setattr__(self, "props", dict(props or {}))

    def __setattr__(self, name: str, value: Any) -> None:
        raise AttributeError("Event is immutable")

    def get(self, prop: str, default: Any = None) -> Any:
        """Partial property access; ``activity`` and ``time`` are total."""
        if prop == "activity":
            return self.activity
        if prop == "time":
            return self.time
        return self.props.get(prop, default)

    def __hash__(self) -> int:
        return hash(self.id)

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, Event):
            return NotImplemented
        return self.id == other.id

    def __repr__(self) -> str:
        return f"Event({self.id!r}, {self.activity!r})"


@dataclass(frozen=True)
class Trace:
    """Time-ordered sequence of distinct events plus case properties.

    Empty traces are representable because projections and fitting
    sub-traces may be empty; :class:`EventLog` rejects them.
    """

    events: tuple[Event, ...]
    case_props: Mapping[str, PropertyValue] = field(default_factory=dict)
    case_id: str = ""

    def __post_init__(self) -> None:
        object.__setattr__(self, "events", tuple(self.events))
        seen = set()
        prev = None
        for i, e in enumerate(self.events):
            if e.id in seen:
                raise LogFormatError(
                    f"event {e.id!r} appears twice", location=f"trace {self.case_id!r}"
                )
            seen.add(e.id)
            if prev is not None and _ts_key(e.time) < _ts_key(prev):
                raise LogFormatError(
                    "timestamps decrease within trace",
                    location=f"trace {self.case_id!r}, event index {i}",
                )
            prev = e.time

    def __len__(self) -> int:
        return len(self.events)

    def __iter__(self) -> Iterator[Event]:
        return iter(self.events)

    def __getitem__(self, i):
        return self.events[i]

    @property
    def activities(self) -> list[str]:
        return [e.activity for e in self.events]

    def with_events(self, events: Iterable[Event]) -> "Trace":
        return Trace(tuple(events), self.case_props, self.case_id)


class EventLog:
    """An immutable collection of non-empty traces with globally unique events."""

    def __init__(self, traces: Iterable[Trace], *, allow_empty_traces: bool = False):
        self.traces: tuple[Trace, ...] = tuple(traces)
        ids: set[str] = set()
        for t in self.traces:
            if not t.events and not allow_empty_traces:
                raise LogFormatError("empty trace", location=f"trace {t.case_id!r}")
            for e in t.events:
                if e.id in ids:
                    raise LogFormatError(f"duplicate event id {e.id!r}", location=f"trace {t.case_id!r}")
                ids.add(e.id)

    def __len__(self) -> int:
        return len(self.traces)

    def __iter__(self) -> Iterator[Trace]:
        return iter(self.traces)

    def __repr__(self) -> str:
        return f"EventLog({len(self.traces)} traces, {self.n_events} events)"

    @cached_property
    def alphabet(self) -> frozenset[str]:
        return frozenset(e.activity for t in self.traces for e in t.events)

    @property
    def n_events(self) -> int:
        return sum(len(t) for t in self.traces)

    @cached_property
    def index(self) -> "LogIndex":
        return LogIndex(self)


def _ts_key(t: datetime) -> float:
    if t.tzinfo is None:
        t = t.replace(tzinfo=timezone.utc)
    return t.timestamp()


class LogIndex:
    """Columnar view of a log: flat event list, activity codes, trace offsets."""

    def __init__(self, log: EventLog):
        self.log = log
        self.activities: list[str] = sorted(log.alphabet)
        self.code_of: dict[str, int] = {a: i for i, a in enumerate(self.activities)}
        self.events: list[Event] = [e for t in log.traces for e in t.events]
        lengths = [len(t) for t in log.traces]
        self.offsets = np.zeros(len(lengths) + 1, dtype=np.int64)
        np.cumsum(lengths, out=self.offsets[1:])
        self.codes = np.fromiter(
            (self.code_of[e.activity] for e in self.events), dtype=np.int32, count=len(self.events)
        )
        self.times = np.fromiter(
            (_ts_key(e.time) for e in self.events), dtype=np.float64, count=len(self.events)
        )
        self.trace_of = np.repeat(np.arange(len(lengths), dtype=np.int64), lengths)
        self._raw: dict[str, list] = {}
        self.cache: dict = {}

    @property
    def n_events(self) -> int:
        return len(self.events)

    def raw_column(self, prop: str) -> list:
        """Property values per event (``None`` where missing)."""
        if prop not in self._raw:
            self._raw[prop] = [e.get(prop) for e in self.events]
        return self._raw[prop]

    def label_map(self, alphabet: Sequence[str]) -> np.ndarray:
        """Map log activity codes to positions in ``alphabet`` (-1 when absent)."""
        out = np.full(len(self.activities), -1, dtype=np.int32)
        for j, a in enumerate(alphabet):
            c = self.code_of.get(a)
            if c is not None:
                out[c] = j
        return out


# --------------------------------------------------------------------------
# Projection and lifting


def project(trace: Trace, alphabet: Iterable[str]) -> Trace:
    """Keep the events whose activity is in ``alphabet``; the result may be empty."""
    keep = set(alphabet)
    return trace.with_events(e for e in trace.events if e.activity in keep)


def lift_property(trace: Trace | Iterable[Event], prop: str) -> list[PropertyValue]:
    """Apply the partial function ``event -> prop`` along a sequence, skipping gaps."""
    events = trace.events if isinstance(trace, Trace) else trace
    out = []
    for e in events:
        v = e.get(prop)
        if v is not None:
            out.append(v)
    return out


def _traces(log: EventLog | Iterable[Trace]) -> Iterable[Trace]:
    return log.traces if isinstance(log, EventLog) else log


def activities(log: EventLog | Iterable[Trace]) -> Counter:
    """Multiset of activity occurrences."""
    return Counter(e.activity for t in _traces(log) for e in t.events)


def activities_count(log: EventLog | Iterable[Trace], activity: str) -> int:
    return sum(1 for t in _traces(log) for e in t.events if e.activity == activity)


def events_of(log: EventLog | Iterable[Trace]) -> set[Event]:
    return {e for t in _traces(log) for e in t.events}


# --------------------------------------------------------------------------
# Timestamps

_FRACTION = re.compile(r"\.(\d+)")


def parse_iso8601(text: str) -> datetime:
    s = text.strip()
    if s.endswith("Z"):
        s = s[:-1] + "+00:00"
    # fromisoformat on 3.10 wants exactly 3 or 6 fractional digits
    m = _FRACTION.search(s)
    if m:
        digits = (m.group(1) + "000000")[:6]
        s = s[: m.start()] + "." + digits + s[m.end():]
    return datetime.fromisoformat(s)


def format_iso8601(t: datetime) -> str:
    return t.isoformat(timespec="milliseconds") if t.microsecond else t.isoformat()


# --------------------------------------------------------------------------
# XES

ACTIVITY_KEY = "concept:name"
TIMESTAMP_KEY = "time:timestamp"
ID_KEY = "identity:id"


def _local(tag: str) -> str:
    return tag.rsplit("}", 1)[-1]


def _xes_value(el: ET.Element, where: str) -> PropertyValue | None:
    kind = _local(el.tag)
    value = el.get("value")
    if value is None:
        return None
    try:
        if kind == "string" or kind == "id":
            return value
        if kind == "date":
            return parse_iso8601(value)
        if kind == "int":
            return int(value)
        if kind == "float":
            return float(value)
        if kind == "boolean":
            return value.strip().lower() == "true"
    except ValueError as exc:
        raise LogFormatError(f"bad {kind} value {value!r} for key {el.get('key')!r}", location=where) from exc
    return None


def _xes_attributes(el: ET.Element, where: str) -> dict[str, PropertyValue]:
    attrs = {}
    for child in el:
        if _local(child.tag) in ("string", "date", "int", "float", "boolean", "id"):
            key = child.get("key")
            v = _xes_value(child, where)
            if key is not None and v is not None:
                attrs[key] = v
    return attrs


def parse_xes(stream: IO[bytes] | IO[str] | str | bytes) -> EventLog:
    """Read the log/trace/event subset of XES."""
    try:
        if isinstance(stream, (str, bytes)):
            root = ET.fromstring(stream)
        else:
            root = ET.parse(stream).getroot()
    except ET.ParseError as exc:
        raise LogFormatError(f"malformed XML: {exc}") from exc
    if _local(root.tag) != "log":
        raise LogFormatError(f"root element is <{_local(root.tag)}>, expected <log>")
    traces = []
    for ti, tr in enumerate(x for x in root if _local(x.tag) == "trace"):
        case_props = _xes_attributes(tr, f"trace {ti}")
        case_id = str(case_props.get(ACTIVITY_KEY, ti))
        events = []
        for ei, ev in enumerate(x for x in tr if _local(x.tag) == "event"):
            where = f"trace {case_id!r}, event index {ei}"
            attrs = _xes_attributes(ev, where)
            act = attrs.pop(ACTIVITY_KEY, None)
            ts = attrs.pop(TIMESTAMP_KEY, None)
            if act is None:
                raise LogFormatError("event lacks concept:name", location=where)
            if not isinstance(ts, datetime):
                raise LogFormatError("event lacks time:timestamp", location=where)
            eid = str(attrs.pop(ID_KEY, f"{case_id}:{ei}"))
            events.append(Event(eid, str(act), ts, attrs))
        traces.append(Trace(tuple(events), case_props, case_id))
    return EventLog(traces)


def _xes_attr_element(parent: ET.Element, key: str, value: PropertyValue) -> None:
    if isinstance(value, bool):
        tag, text = "boolean", "true" if value else "false"
    elif isinstance(value, int):
        tag, text = "int", str(value)
    elif isinstance(value, float):
        tag, text = "float", repr(value)
    elif isinstance(value, datetime):
        tag, text = "date", format_iso8601(value)
    else:
        tag, text = "string", str(value)
    ET.SubElement(parent, tag, key=key, value=text)


def write_xes(log: EventLog, stream: IO[str]) -> None:
    root = ET.Element("log", {"xes.version": "1.0", "xmlns": "http://www.xes-standard.org/"})
    for t in log.traces:
        tr = ET.SubElement(root, "trace")
        props = dict(t.case_props)
        props.setdefault(ACTIVITY_KEY, t.case_id)
        for k, v in props.items():
            _xes_attr_element(tr, k, v)
        for e in t.events:
            ev = ET.SubElement(tr, "event")
            _xes_attr_element(ev, ID_KEY, e.id)
            _xes_attr_element(ev, ACTIVITY_KEY, e.activity)
            _xes_attr_element(ev, TIMESTAMP_KEY, e.time)
            for k, v in e.props.items():
                _xes_attr_element(ev, k, v)
    ET.indent(root)
    stream.write('<?xml version="1.0" encoding="UTF-8"?>\n')
    stream.write(ET.tostring(root, encoding="unicode"))
    stream.write("\n")


# --------------------------------------------------------------------------
# CSV

_TYPES = ("text", "int", "real", "timestamp", "bool", "ordinal")


@dataclass(frozen=True)
class PropertyColumn:
    column: str
    type: str = "text"
    name: str = ""
    scale: str = ""
    levels: tuple[str, ...] = ()

    def __post_init__(self) -> None:
        if self.type not in _TYPES:
            raise ConfigError(f"unknown property type {self.type!r} for column {self.column!r}", module="event_log")
        if self.type == "ordinal" and not self.levels:
            raise ConfigError(f"ordinal column {self.column!r} needs declared levels", module="event_log")
        if not self.name:
            object.__setattr__(self, "name", self.column)
        if not self.scale:
            object.__setattr__(self, "scale", self.name)
        object.__setattr__(self, "levels", tuple(self.levels))


@dataclass(frozen=True)
class ColumnMapping:
    """How CSV columns map onto the log model.

    ``timestamp_format`` is either ``"iso8601"`` or a ``strptime`` format.
    """

    case: str = "case"
    activity: str = "activity"
    timestamp: str = "time"
    timestamp_format: str = "iso8601"
    event_id: str | None = None
    properties: tuple[PropertyColumn, ...] = ()
    case_properties: tuple[PropertyColumn, ...] = ()

    @classmethod
    def from_dict(cls, d: Mapping[str, Any]) -> "ColumnMapping":
        allowed = {"case", "activity", "timestamp", "timestamp_format", "event_id", "properties", "case_properties"}
        unknown = set(d) - allowed
        if unknown:
            raise ConfigError(f"unknown column mapping keys: {sorted(unknown)}", module="event_log")

        def cols(spec) -> tuple[PropertyColumn, ...]:
            out = []
            if isinstance(spec, Mapping):
                spec = [dict(v, column=k) if isinstance(v, Mapping) else {"column": k, "type": v} for k, v in spec.items()]
            for item in spec or ():
                if isinstance(item, str):
                    item = {"column": item}
                out.append(PropertyColumn(**item))
            return tuple(out)

        kw = {k: v for k, v in d.items() if k not in ("properties", "case_properties")}
        return cls(**kw, properties=cols(d.get("properties")), case_properties=cols(d.get("case_properties")))

    def parse_time(self, text: str) -> datetime:
        if self.timestamp_format == "iso8601":
            return parse_iso8601(text)
        return datetime.strptime(text.strip(), self.timestamp_format)

    def format_time(self, t: datetime) -> str:
        if self.timestamp_format == "iso8601":
            return format_iso8601(t)
        return t.strftime(self.timestamp_format)


def _convert(col: PropertyColumn, text: str, mapping: ColumnMapping) -> PropertyValue:
    if col.type == "text":
        return text
    if col.type == "int":
        return int(text)
    if col.type == "real":
        return float(text)
    if col.type == "timestamp":
        return mapping.parse_time(text)
    if col.type == "bool":
        low = text.strip().lower()
        if low in ("true", "1", "yes"):
            return True
        if low in ("false", "0", "no"):
            return False
        raise ValueError(f"not a boolean: {text!r}")
    if text not in col.levels:
        raise ValueError(f"{text!r} is not a level of ordinal scale {col.scale!r}")
    return Ordinal(text, col.levels.index(text), col.scale)


def _render(col: PropertyColumn, value: PropertyValue, mapping: ColumnMapping) -> str:
    if isinstance(value, datetime):
        return mapping.format_time(value)
    if isinstance(value, Ordinal):
        return value.label
    if isinstance(value, bool):
        return "true" if value else "false"
    if isinstance(value, float):
        return repr(value)
    return str(value)


def parse_csv(stream: IO[str] | IO[bytes] | str, mapping: ColumnMapping | Mapping[str, Any]) -> EventLog:
    """Read a headered CSV, grouping rows by case id and ordering by time.

    Rows with equal timestamps keep their file order.
    """
    if not isinstance(mapping, ColumnMapping):
        mapping = ColumnMapping.from_dict(mapping)
    if isinstance(stream, str):
        stream = io.StringIO(stream)
    else:
        data = stream.read()
        if isinstance(data, bytes):
            data = data.decode("utf-8-sig")
        stream = io.StringIO(data)
    reader = csv.DictReader(stream)
    header = reader.fieldnames or []
    required = [mapping.case, mapping.activity, mapping.timestamp]
    required += [c.column for c in mapping.properties + mapping.case_properties]
    if mapping.event_id:
        required.append(mapping.event_id)
    if header:
        missing = [c for c in required if c not in header]
        if missing:
            raise LogFormatError(f"missing mapped column(s) {missing}", location="header")

    cases: dict[str, list[tuple[datetime, int, Event]]] = {}
    case_props: dict[str, dict[str, PropertyValue]] = {}
    for rowno, row in enumerate(reader, start=2):
        where = f"row {rowno}"
        case = row[mapping.case]
        act = row[mapping.activity]
        if not act:
            raise LogFormatError("empty activity", location=where)
        try:
            ts = mapping.parse_time(row[mapping.timestamp])
        except (ValueError, TypeError) as exc:
            raise LogFormatError(f"unparseable timestamp {row[mapping.timestamp]!r}", location=where) from exc
        props = {}
        for col in mapping.properties:
            text = row[col.column]
            if text is None or text == "":
                continue
            try:
                props[col.name] = _convert(col, text, mapping)
            except ValueError as exc:
                raise LogFormatError(f"column {col.column!r}: {exc}", location=where) from exc
        cprops = case_props.setdefault(case, {})
        for col in mapping.case_properties:
            text = row[col.column]
            if text is None or text == "":
                continue
            try:
                cprops.setdefault(col.name, _convert(col, text, mapping))
            except ValueError as exc:
                raise LogFormatError(f"column {col.column!r}: {exc}", location=where) from exc
        eid = row[mapping.event_id] if mapping.event_id else f"{case}:{rowno - 1}"
        cases.setdefault(case, []).append((ts, rowno, Event(eid, act, ts, props)))

    traces = []
    for case, rows in cases.items():
        rows.sort(key=lambda r: (_ts_key(r[0]), r[1]))
        traces.append(Trace(tuple(r[2] for r in rows), case_props.get(case, {}), case))
    return EventLog(traces)


def write_csv(log: EventLog, stream: IO[str], mapping: ColumnMapping | Mapping[str, Any]) -> None:
    """Inverse of :func:`parse_csv` for the columns named in ``mapping``."""
    if not isinstance(mapping, ColumnMapping):
        mapping = ColumnMapping.from_dict(mapping)
    header = [mapping.case]
    if mapping.event_id:
        header.append(mapping.event_id)
    header += [mapping.activity, mapping.timestamp]
    header += [c.column for c in mapping.properties + mapping.case_properties]
    w = csv.writer(stream, lineterminator="\n")
    w.writerow(header)
    for t in log.traces:
        for e in t.events:
            row = [t.case_id]
            if mapping.event_id:
                row.append(e.id)
            row += [e.activity, mapping.format_time(e.time)]
            for col in mapping.properties:
                v = e.props.get(col.name)
                row.append("" if v is None else _render(col, v, mapping))
            for col in mapping.case_properties:
                v = t.case_props.get(col.name)
                row.append("" if v is None else _render(col, v, mapping))
            w.writerow(row)
