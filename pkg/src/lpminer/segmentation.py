"""Segmentation of traces into fitting and non-fitting parts.

A trace is projected onto the LPM alphabet and split as
``lambda_1 gamma_1 ... gamma_n lambda_n+1`` where every gamma is a complete
run of the LPM and every non-empty lambda is not. The split maximizes the
number of fitting events (exact dynamic program over the projected trace);
ties go to the segmentation that starts a run earliest and, for a given
start, makes it longest.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import cached_property
from typing import Iterator, Union

import numpy as np

from . import kernels
from .automaton import LabelAutomaton
from .errors import BudgetExceeded, SegmentationError
from .log import Event, EventLog, Trace
from .petri import DEFAULT_BUDGET, AcceptingPetriNet
from .tree import ProcessTree, tree_to_apn

LAMBDA = "lambda"
GAMMA = "gamma"

LPMLike = Union[AcceptingPetriNet, ProcessTree]


def as_apn(lpm: LPMLike) -> AcceptingPetriNet:
    if isinstance(lpm, ProcessTree):
        return tree_to_apn(lpm)
    return lpm


@dataclass(frozen=True)
class Segmentation:
    """Alternating lambda/gamma decomposition of one projected trace."""

    projected: Trace
    segments: tuple[tuple[str, tuple[Event, ...]], ...]

    @property
    def gammas(self) -> list[tuple[Event, ...]]:
        return [evs for kind, evs in self.segments if kind == GAMMA]

    @property
    def lambdas(self) -> list[tuple[Event, ...]]:
        return [evs for kind, evs in self.segments if kind == LAMBDA]

    @property
    def fitting(self) -> tuple[Event, ...]:
        return tuple(e for g in self.gammas for e in g)

    def render(self) -> str:
        """One-line view: fitting runs in brackets, non-fitting events bare."""
        parts = []
        for kind, evs in self.segments:
            acts = " ".join(e.activity for e in evs)
            if kind == GAMMA:
                parts.append(f"[{acts}]")
            elif acts:
                parts.append(acts)
        return " ".join(parts)

    def describe(self) -> str:
        """Numbered listing, e.g. ``l1=<> g1=<A,B> l2=<C>``."""
        out = []
        li = gi = 0
        for kind, evs in self.segments:
            if kind == LAMBDA:
                li += 1
                name = f"l{li}"
            else:
                gi += 1
                name = f"g{gi}"
            out.append(f"{name}=<{','.join(e.activity for e in evs)}>")
        return " ".join(out)


class Replay:
    """All traces of a log replayed on one LPM in a single kernel call.

    ``lpm`` is a net or its compiled :class:`~lpminer.automaton.LabelAutomaton`.
    """

    def __init__(self, log: EventLog, lpm: AcceptingPetriNet | LabelAutomaton, budget: int = DEFAULT_BUDGET):
        self.log = log
        self.automaton = lpm if isinstance(lpm, LabelAutomaton) else lpm.automaton(budget)
        idx = log.index
        self.index = idx
        label_map = idx.label_map(self.automaton.labels)
        if self.automaton.empty:
            table = np.zeros((0, max(1, len(self.automaton.labels))), dtype=np.int32)
        else:
            table = self.automaton.table
        self.seg_id, self.n_segments, self.choice_sum, self.n_moves = kernels.segment_log(
            idx.codes, idx.offsets, label_map, table, self.automaton.accepting, self.automaton.outdegree
        )

    @cached_property
    def fit_mask(self) -> np.ndarray:
        return self.seg_id >= 0

    @property
    def n_fitting(self) -> int:
        return int(self.fit_mask.sum())

    def segmentation(self, t: int) -> Segmentation:
        lo, hi = int(self.index.offsets[t]), int(self.index.offsets[t + 1])
        trace = self.log.traces[t]
        events = self.index.events
        projected = []
        segments: list[tuple[str, tuple[Event, ...]]] = []
        lam: list[Event] = []
        cur_id = None
        cur: list[Event] = []
        for i in range(lo, hi):
            sid = int(self.seg_id[i])
            if sid == kernels.NOT_PROJECTED:
                continue
            e = events[i]
            projected.append(e)
            if sid == kernels.NON_FITTING:
                if cur_id is not None:
                    segments.append((GAMMA, tuple(cur)))
                    cur_id, cur = None, []
                lam.append(e)
            else:
                if cur_id is not None and sid != cur_id:
                    segments.append((GAMMA, tuple(cur)))
                    segments.append((LAMBDA, ()))
                    cur = []
                elif cur_id is None:
                    segments.append((LAMBDA, tuple(lam)))
                    lam = []
                cur_id = sid
                cur.append(e)
        if cur_id is not None:
            segments.append((GAMMA, tuple(cur)))
        segments.append((LAMBDA, tuple(lam)))
        return Segmentation(trace.with_events(projected), tuple(segments))

    def segmentations(self) -> Iterator[Segmentation]:
        for t in range(len(self.log.traces)):
            yield self.segmentation(t)

    def gamma(self, t: int) -> Trace:
        lo, hi = int(self.index.offsets[t]), int(self.index.offsets[t + 1])
        events = self.index.events
        fit = self.fit_mask
        return self.log.traces[t].with_events(events[i] for i in range(lo, hi) if fit[i])

    @cached_property
    def sublog(self) -> "FittingSubLog":
        return FittingSubLog(self)

    def determinism(self) -> float:
        if self.n_moves == 0:
            raise SegmentationError("determinism is undefined: no fitting behaviour in the log")
        return float(self.n_moves) / float(self.choice_sum)


class FittingSubLog:
    """The fitting sub-log: one (possibly empty) sub-trace per log trace.

    Sub-traces keep the case properties of their trace. Iterating yields
    :class:`Trace` objects, so the log helpers in :mod:`lpminer.log` apply.
    """

    def __init__(self, replay: Replay):
        self.replay = replay
        self.log = replay.log
        self.index = replay.index

    @property
    def mask(self) -> np.ndarray:
        return self.replay.fit_mask

    @cached_property
    def traces(self) -> tuple[Trace, ...]:
        return tuple(self.replay.gamma(t) for t in range(len(self.log.traces)))

    def __iter__(self) -> Iterator[Trace]:
        return iter(self.traces)

    def __len__(self) -> int:
        return len(self.log.traces)

    @property
    def n_events(self) -> int:
        return self.replay.n_fitting

    def as_event_log(self) -> EventLog:
        return EventLog(self.traces, allow_empty_traces=True)


def replay(log: EventLog, lpm: LPMLike, budget: int = DEFAULT_BUDGET) -> Replay:
    return Replay(log, as_apn(lpm), budget)


def segment_trace(trace: Trace, lpm: LPMLike, budget: int = DEFAULT_BUDGET) -> Segmentation:
    return Replay(EventLog([trace], allow_empty_traces=True), as_apn(lpm), budget).segmentation(0)


def gamma(trace: Trace, lpm: LPMLike, budget: int = DEFAULT_BUDGET) -> tuple[Event, ...]:
    return segment_trace(trace, lpm, budget).fitting


def gamma_log(log: EventLog, lpm: LPMLike, budget: int = DEFAULT_BUDGET) -> FittingSubLog:
    return Replay(log, as_apn(lpm), budget).sublog


def determinism(lpm: LPMLike, log: EventLog, budget: int = DEFAULT_BUDGET) -> float:
    """Reciprocal of the mean number of labels offered per replayed fitting move."""
    return Replay(log, as_apn(lpm), budget).determinism()


__all__ = [
    "Segmentation",
    "Replay",
    "FittingSubLog",
    "replay",
    "segment_trace",
    "gamma",
    "gamma_log",
    "determinism",
    "BudgetExceeded",
]
