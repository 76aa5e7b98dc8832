"""Scoped utility functions, constraints and their composition.

Each evaluator sees only the arguments of its scope:

=========  =====================================================
trace      ``(log, fitting_sublog)``
event      ``(events(log), events(fitting_sublog))`` as EventSets
activity   ``(activities(log), activities(fitting_sublog))`` Counters
model      ``(model,)`` with ``model.apn`` and, if known, ``model.tree``
=========  =====================================================

The composite score is the product of all constraints times the sum of
all weighted utilities.
"""

from __future__ import annotations

import contextvars
import logging
from collections import Counter
from dataclasses import dataclass, field
from enum import Enum
from typing import Any, Callable, Iterator, Sequence

import numpy as np

from ..errors import ConfigError
from ..log import Event, EventLog, LogIndex, Ordinal
from ..petri import DEFAULT_BUDGET, AcceptingPetriNet
from ..segmentation import FittingSubLog, Replay
from ..tree import ProcessTree, tree_automaton, tree_to_apn

logger = logging.getLogger(__name__)


class Scope(Enum):
    TRACE = "trace"
    EVENT = "event"
    ACTIVITY = "activity"
    MODEL = "model"


@dataclass(frozen=True)
class UtilityFunction:
    scope: Scope
    evaluator: Callable[..., float]
    weight: float = 1.0
    name: str = ""
    meta: dict = field(default_factory=dict, compare=False, hash=False)
    # True when the value depends only on the model's language, not its structure
    language_invariant: bool = False

    def scaled(self, k: float) -> "UtilityFunction":
        return UtilityFunction(self.scope, self.evaluator, self.weight * k, self.name, self.meta, self.language_invariant)


@dataclass(frozen=True)
class Constraint:
    scope: Scope
    predicate: Callable[..., Any]
    name: str = ""
    meta: dict = field(default_factory=dict, compare=False, hash=False)
    language_invariant: bool = False


@dataclass
class CompositeUtility:
    constraints: list[Constraint] = field(default_factory=list)
    utilities: list[UtilityFunction] = field(default_factory=list)

    @property
    def needs_log(self) -> bool:
        return any(f.scope is not Scope.MODEL for f in [*self.constraints, *self.utilities])

    @property
    def model_constraints(self) -> list[Constraint]:
        return [c for c in self.constraints if c.scope is Scope.MODEL]

    @property
    def language_invariant(self) -> bool:
        return all(f.language_invariant for f in [*self.constraints, *self.utilities])

    def evaluate(self, log: EventLog, lpm, **kw) -> float:
        return evaluate(log, lpm, self, **kw)


class Model:
    """What model-scope evaluators see: the LPM's net and, if known, its tree.

    The net and the automaton are built on first use.
    """

    def __init__(self, apn: AcceptingPetriNet | None = None, tree: ProcessTree | None = None):
        if apn is None and tree is None:
            raise TypeError("a model needs a net or a process tree")
        self._apn = apn
        self.tree = tree
        self._automata: dict[int, Any] = {}

    @property
    def apn(self) -> AcceptingPetriNet:
        if self._apn is None:
            self._apn = tree_to_apn(self.tree)
        return self._apn

    def automaton(self, budget: int = DEFAULT_BUDGET):
        if self._apn is not None:
            return self._apn.automaton(budget)
        if budget not in self._automata:
            self._automata[budget] = tree_automaton(self.tree, budget)
        return self._automata[budget]

    def __repr__(self) -> str:
        return f"Model({self.tree.text if self.tree is not None else self._apn!r})"


def as_model(lpm) -> Model:
    if isinstance(lpm, Model):
        return lpm
    if isinstance(lpm, ProcessTree):
        return Model(tree=lpm)
    if isinstance(lpm, AcceptingPetriNet):
        return Model(lpm, None)
    raise TypeError(f"not an LPM: {lpm!r}")


# ---------------------------------------------------------------------------
# run statistics (missing properties, capped singularities)


@dataclass
class EvalStats:
    missing: Counter = field(default_factory=Counter)
    capped: Counter = field(default_factory=Counter)
    undecided: Counter = field(default_factory=Counter)

    def merge(self, other: "EvalStats") -> None:
        self.missing.update(other.missing)
        self.capped.update(other.capped)
        self.undecided.update(other.undecided)


_stats: contextvars.ContextVar[EvalStats | None] = contextvars.ContextVar("lpminer_eval_stats", default=None)


def current_stats() -> EvalStats:
    st = _stats.get()
    return st if st is not None else EvalStats()


# ---------------------------------------------------------------------------
# numeric property access


class OrdinalMap:
    """Maps ordinal labels to reals before aggregation.

    ``OrdinalMap({"low": 1, "medium": 2, "high": 5})`` or
    ``OrdinalMap.ranks()`` to use the declared rank of each level.
    """

    def __init__(self, assignment: dict[str, float] | None = None, *, use_rank: bool = False, name: str = ""):
        self.assignment = {str(k): float(v) for k, v in (assignment or {}).items()}
        self.use_rank = use_rank
        self.name = name

    @classmethod
    def ranks(cls) -> "OrdinalMap":
        return cls(use_rank=True, name="rank")

    def __call__(self, value: Any) -> float:
        if self.use_rank:
            if isinstance(value, Ordinal):
                return float(value.rank)
            raise ConfigError(f"value {value!r} is not ordinal")
        label = value.label if isinstance(value, Ordinal) else str(value)
        try:
            return self.assignment[label]
        except KeyError:
            raise ConfigError(f"ordinal label {label!r} has no assigned value in mapping {self.name or self.assignment}") from None

    def __repr__(self) -> str:
        return f"OrdinalMap({'rank' if self.use_rank else self.assignment})"


def to_number(value: Any, transform: Callable[[Any], float] | None = None) -> float:
    if value is None:
        return np.nan
    if transform is not None:
        return float(transform(value))
    if isinstance(value, (bool, int, float, np.integer, np.floating)):
        return float(value)
    if isinstance(value, Ordinal):
        raise ConfigError(f"ordinal value {value.label!r} of scale {value.scale!r} needs an ordinal mapping")
    raise ConfigError(f"property value {value!r} is not numeric")


def numeric_column(index: LogIndex, prop: str, transform=None) -> np.ndarray:
    """Float column of ``prop`` over all events, NaN where missing."""
    key = ("num", prop, id(transform) if transform is not None else None)
    col = index.cache.get(key)
    if col is None:
        raw = index.raw_column(prop)
        col = np.fromiter((to_number(v, transform) for v in raw), dtype=np.float64, count=len(raw))
        index.cache[key] = (col, transform)
        return col
    return col[0]


def case_column(log: EventLog, prop: str, transform=None) -> np.ndarray:
    index = log.index
    key = ("case", prop, id(transform) if transform is not None else None)
    col = index.cache.get(key)
    if col is None:
        vals = [t.case_props.get(prop) for t in log.traces]
        arr = np.fromiter((to_number(v, transform) for v in vals), dtype=np.float64, count=len(vals))
        index.cache[key] = (arr, transform)
        return arr
    return col[0]


class EventSet:
    """A set of events of one log, backed by the log's columnar index."""

    def __init__(self, index: LogIndex, mask: np.ndarray | None = None):
        self.index = index
        self.mask = mask

    def __len__(self) -> int:
        return self.index.n_events if self.mask is None else int(self.mask.sum())

    def __iter__(self) -> Iterator[Event]:
        if self.mask is None:
            return iter(self.index.events)
        return (self.index.events[i] for i in np.flatnonzero(self.mask))

    def __contains__(self, e: object) -> bool:
        return any(e == x for x in self)

    def values(self, prop: str, transform=None) -> np.ndarray:
        col = numeric_column(self.index, prop, transform)
        return col if self.mask is None else col[self.mask]

    @property
    def codes(self) -> np.ndarray:
        return self.index.codes if self.mask is None else self.index.codes[self.mask]

    def sum_by_activity(self, prop: str, transform=None) -> np.ndarray:
        """Per-activity sums (indexed like ``index.activities``); missing counts as 0."""
        vals = np.nan_to_num(self.values(prop, transform), nan=0.0)
        return np.bincount(self.codes, weights=vals, minlength=len(self.index.activities))

    def note_missing(self, prop: str, transform=None) -> np.ndarray:
        vals = self.values(prop, transform)
        n = int(np.isnan(vals).sum())
        if n:
            current_stats().missing[prop] += n
        return vals


def activity_counter(index: LogIndex, mask: np.ndarray | None) -> Counter:
    codes = index.codes if mask is None else index.codes[mask]
    counts = np.bincount(codes, minlength=len(index.activities))
    return Counter({a: int(n) for a, n in zip(index.activities, counts) if n})


# ---------------------------------------------------------------------------
# evaluation


@dataclass
class Term:
    name: str
    scope: Scope
    kind: str  # "constraint" | "utility"
    value: float | None
    weight: float = 1.0


@dataclass
class Breakdown:
    score: float
    terms: list[Term]
    fitting_events: int | None
    stats: EvalStats

    def as_dict(self) -> dict:
        return {
            "score": self.score,
            "fitting_events": self.fitting_events,
            "terms": [
                {"name": t.name, "scope": t.scope.value, "kind": t.kind, "value": t.value, "weight": t.weight}
                for t in self.terms
            ],
        }


class _Args:
    """Lazily built scope arguments for one (log, model) pair."""

    def __init__(self, log: EventLog, model: Model, budget: int):
        self.log = log
        self.model = model
        self.budget = budget
        self._replay: Replay | None = None
        self._cache: dict[Scope, tuple] = {}

    @property
    def replay(self) -> Replay:
        if self._replay is None:
            self._replay = Replay(self.log, self.model.automaton(self.budget), self.budget)
        return self._replay

    def for_scope(self, scope: Scope) -> tuple:
        if scope in self._cache:
            return self._cache[scope]
        if scope is Scope.MODEL:
            args: tuple = (self.model,)
        elif scope is Scope.TRACE:
            args = (self.log, self.replay.sublog)
        elif scope is Scope.EVENT:
            idx = self.log.index
            args = (EventSet(idx), EventSet(idx, self.replay.fit_mask))
        else:
            idx = self.log.index
            args = (activity_counter(idx, None), activity_counter(idx, self.replay.fit_mask))
        self._cache[scope] = args
        return args


def _check_real(name: str, v: Any) -> float:
    v = float(v)
    if not np.isfinite(v):
        raise ConfigError(f"utility {name!r} returned a non-finite value {v}")
    return v


def breakdown(
    log: EventLog,
    lpm,
    comp: CompositeUtility,
    *,
    budget: int = DEFAULT_BUDGET,
    full: bool = True,
    stats: EvalStats | None = None,
) -> Breakdown:
    """Score ``lpm`` on ``log`` and report every term.

    With ``full=False`` evaluation stops at the first failed constraint.
    Model-level constraints are checked before anything touches the log.
    """
    model = as_model(lpm)
    run_stats = EvalStats()
    token = _stats.set(run_stats)
    try:
        args = _Args(log, model, budget)
        terms: list[Term] = []
        product = 1
        ordered = sorted(comp.constraints, key=lambda c: c.scope is not Scope.MODEL)
        for c in ordered:
            if product == 0 and not full:
                terms.append(Term(c.name, c.scope, "constraint", None))
                continue
            ok = 1 if c.predicate(*args.for_scope(c.scope)) else 0
            terms.append(Term(c.name, c.scope, "constraint", ok))
            product *= ok
        total = 0.0
        for f in comp.utilities:
            if product == 0 and not full:
                terms.append(Term(f.name, f.scope, "utility", None, f.weight))
                continue
            v = _check_real(f.name, f.evaluator(*args.for_scope(f.scope)))
            terms.append(Term(f.name, f.scope, "utility", v, f.weight))
            total += f.weight * v
        score = float(product * total) if product else 0.0
        fitting = args._replay.n_fitting if args._replay is not None else None
    finally:
        _stats.reset(token)
    if stats is not None:
        stats.merge(run_stats)
    for prop, n in run_stats.missing.items():
        logger.debug("%d fitting/log events lack property %r (counted as 0)", n, prop)
    return Breakdown(score, terms, fitting, run_stats)


def evaluate(log: EventLog, lpm, comp: CompositeUtility, *, budget: int = DEFAULT_BUDGET, stats: EvalStats | None = None) -> float:
    """Composite utility: product of constraints times sum of weighted utilities."""
    return breakdown(log, lpm, comp, budget=budget, full=False, stats=stats).score


def combine(*parts: Sequence) -> CompositeUtility:
    """Build a composite from a mix of constraints and utility functions."""
    comp = CompositeUtility()
    for p in parts:
        for f in (p if isinstance(p, (list, tuple)) else [p]):
            if isinstance(f, Constraint):
                comp.constraints.append(f)
            elif isinstance(f, UtilityFunction):
                comp.utilities.append(f)
            else:
                raise TypeError(f"not a constraint or utility function: {f!r}")
    return comp
