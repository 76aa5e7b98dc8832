"""Library of ready-made utility functions and constraints."""

from __future__ import annotations

import math
from typing import Callable, Mapping

import numpy as np

from ..errors import BudgetExceeded, ConfigError, SegmentationError
from .core import (
    Constraint,
    EventSet,
    Model,
    Scope,
    UtilityFunction,
    case_column,
    current_stats,
    numeric_column,
)


def _require_present(events: EventSet, prop: str, transform) -> None:
    if events.index.n_events and np.isnan(numeric_column(events.index, prop, transform)).all():
        raise ConfigError(f"property {prop!r} is absent from every event of the log")


def _suffix(transform) -> str:
    return "" if transform is None else f", {transform!r}"


# --------------------------------------------------------------------- event


def event_cost_sum(property: str = "cost", *, transform: Callable | None = None, weight: float = 1.0) -> UtilityFunction:
    """Sum of ``property`` over the fitting events."""

    def f(log_events: EventSet, fit_events: EventSet) -> float:
        _require_present(log_events, property, transform)
        vals = fit_events.note_missing(property, transform)
        return float(np.nansum(vals))

    return UtilityFunction(
        Scope.EVENT, f, weight, f"event_cost_sum({property}{_suffix(transform)})",
        meta={"kind": "event_cost_sum", "property": property}, language_invariant=True,
    )


def share_per_activity(property: str = "cost", *, transform: Callable | None = None, weight: float = 1.0) -> UtilityFunction:
    """Sum over activities of (fitting share of that activity's total ``property``).

    Activities whose log-wide total is zero contribute 0.
    """

    def f(log_events: EventSet, fit_events: EventSet) -> float:
        _require_present(log_events, property, transform)
        fit_events.note_missing(property, transform)
        total = log_events.sum_by_activity(property, transform)
        fit = fit_events.sum_by_activity(property, transform)
        nz = total != 0
        return float(np.sum(fit[nz] / total[nz]))

    return UtilityFunction(
        Scope.EVENT, f, weight, f"share_per_activity({property}{_suffix(transform)})",
        meta={"kind": "share_per_activity", "property": property}, language_invariant=True,
    )


def min_total(threshold: float, property: str = "cost", *, transform: Callable | None = None) -> Constraint:
    """Holds when the fitting events' ``property`` adds up to at least ``threshold``."""
    total = event_cost_sum(property, transform=transform)

    def c(log_events: EventSet, fit_events: EventSet) -> bool:
        return total.evaluator(log_events, fit_events) >= threshold

    return Constraint(
        Scope.EVENT, c, f"min_total({property}>={threshold:g})",
        meta={"kind": "min_total", "property": property}, language_invariant=True,
    )


def per_event_min(property: str, threshold: float, *, transform: Callable | None = None) -> Constraint:
    """Holds when every fitting event carrying ``property`` has value >= ``threshold``."""

    def c(log_events: EventSet, fit_events: EventSet) -> bool:
        _require_present(log_events, property, transform)
        vals = fit_events.note_missing(property, transform)
        vals = vals[~np.isnan(vals)]
        return bool(np.all(vals >= threshold))

    return Constraint(
        Scope.EVENT, c, f"per_event_min({property}>={threshold:g})",
        meta={"kind": "per_event_min", "property": property}, language_invariant=True,
    )


# --------------------------------------------------------------------- trace


def _per_trace(sublog, values: np.ndarray) -> np.ndarray:
    idx = sublog.index
    mask = sublog.mask
    return np.bincount(idx.trace_of[mask], weights=values[mask], minlength=len(idx.log.traces))


def trace_cost_share(event_property: str = "cost", case_property: str = "total_cost", *, transform: Callable | None = None, weight: float = 1.0) -> UtilityFunction:
    """Sum over fitting sub-traces of (their ``event_property`` total / the case's ``case_property``).

    A case whose ``case_property`` is missing or zero contributes 0.
    """

    def f(log, sublog) -> float:
        idx = log.index
        col = numeric_column(idx, event_property, transform)
        if idx.n_events and np.isnan(col).all():
            raise ConfigError(f"property {event_property!r} is absent from every event of the log")
        denom = case_column(log, case_property)
        if len(denom) and np.isnan(denom).all():
            raise ConfigError(f"case property {case_property!r} is absent from every trace of the log")
        mask = sublog.mask
        n_missing = int(np.isnan(col[mask]).sum())
        if n_missing:
            current_stats().missing[event_property] += n_missing
        sums = _per_trace(sublog, np.nan_to_num(col, nan=0.0))
        has_fit = np.bincount(idx.trace_of[mask], minlength=len(log.traces)) > 0
        bad = has_fit & (np.isnan(denom) | (denom == 0))
        if bad.any():
            current_stats().capped[f"trace_cost_share:{case_property}=0/missing"] += int(bad.sum())
        ok = has_fit & ~bad
        return float(np.sum(sums[ok] / denom[ok]))

    return UtilityFunction(
        Scope.TRACE, f, weight, f"trace_cost_share({event_property}/{case_property})",
        meta={"kind": "trace_cost_share"}, language_invariant=True,
    )


def inverse_timespan(*, ceiling: float = 1.0, zero_duration: str = "cap", weight: float = 1.0) -> UtilityFunction:
    """Sum over fitting sub-traces of 1 / (time of last event - time of first), in 1/s.

    Each contribution is capped at ``ceiling``; with ``zero_duration="skip"``
    sub-traces of zero duration contribute 0 instead.
    """
    if zero_duration not in ("cap", "skip"):
        raise ConfigError(f"zero_duration must be 'cap' or 'skip', not {zero_duration!r}")

    def f(log, sublog) -> float:
        idx = log.index
        mask = sublog.mask
        if not mask.any():
            return 0.0
        tr = idx.trace_of[mask]
        times = idx.times[mask]
        n = len(log.traces)
        first = np.full(n, np.inf)
        last = np.full(n, -np.inf)
        np.minimum.at(first, tr, times)
        np.maximum.at(last, tr, times)
        has = np.isfinite(first)
        dur = last[has] - first[has]
        zero = dur <= 0
        with np.errstate(divide="ignore"):
            inv = np.where(zero, ceiling if zero_duration == "cap" else 0.0, 1.0 / np.where(zero, 1.0, dur))
        capped = inv > ceiling
        if zero.any() or capped.any():
            current_stats().capped["inverse_timespan"] += int(zero.sum() + (capped & ~zero).sum())
        inv = np.minimum(inv, ceiling)
        return float(inv.sum())

    return UtilityFunction(
        Scope.TRACE, f, weight, f"inverse_timespan(ceiling={ceiling:g},{zero_duration})",
        meta={"kind": "inverse_timespan"}, language_invariant=True,
    )


def determinism_metric(*, weight: float = 1.0, undefined: str = "zero") -> UtilityFunction:
    """Reciprocal of the mean number of labels offered per fitting move.

    Combines the model (offered moves) with the fitting trace fragments. With
    no fitting behaviour the value is undefined: ``undefined="zero"`` scores
    it 0, ``undefined="error"`` raises.
    """

    def f(log, sublog) -> float:
        try:
            return sublog.replay.determinism()
        except SegmentationError:
            if undefined == "error":
                raise
            current_stats().undecided["determinism_undefined"] += 1
            return 0.0

    return UtilityFunction(
        Scope.TRACE, f, weight, "determinism", meta={"kind": "determinism"}, language_invariant=True,
    )


# ------------------------------------------------------------------ activity


def support(*, weight: float = 1.0) -> UtilityFunction:
    """Number of fitting events."""

    def f(log_acts, fit_acts) -> float:
        return float(sum(fit_acts.values()))

    return UtilityFunction(
        Scope.ACTIVITY, f, weight, "support",
        meta={"kind": "activity_interest", "weights": {}, "default": 1.0}, language_invariant=True,
    )


def activity_interest(weights: Mapping[str, float], *, default: float = 0.0, weight: float = 1.0) -> UtilityFunction:
    """Interest-weighted count of fitting events per activity."""
    table = {str(k): float(v) for k, v in weights.items()}

    def f(log_acts, fit_acts) -> float:
        return float(sum(table.get(a, default) * n for a, n in fit_acts.items()))

    return UtilityFunction(
        Scope.ACTIVITY, f, weight, f"activity_interest({len(table)} weights, default={default:g})",
        meta={"kind": "activity_interest", "weights": table, "default": default}, language_invariant=True,
    )


# --------------------------------------------------------------------- model


def ends_with(activity: str, *, budget: int = 100_000) -> Constraint:
    """Holds when every word of the LPM's language ends with ``activity``.

    Decided on the process tree when available, otherwise on the net's
    determinized language; if that exceeds ``budget`` the constraint fails.
    """

    def c(model: Model) -> bool:
        if model.tree is not None:
            return not model.tree.nullable() and model.tree.last_activities() == frozenset([activity])
        try:
            return model.automaton(budget).ends_with(activity)
        except BudgetExceeded:
            current_stats().undecided["ends_with"] += 1
            return False

    return Constraint(
        Scope.MODEL, c, f"ends_with({activity})",
        meta={"kind": "ends_with", "activity": activity}, language_invariant=True,
    )


# ---------------------------------------------------------------- threshold


def threshold(fn: UtilityFunction, *, min: float | None = None, max: float | None = None) -> Constraint:
    """Turn a utility function into a constraint ``min <= f <= max``."""
    if min is None and max is None:
        raise ConfigError("a threshold constraint needs min and/or max")
    lo = -math.inf if min is None else min
    hi = math.inf if max is None else max

    def c(*args) -> bool:
        return lo <= fn.evaluator(*args) <= hi

    bounds = []
    if min is not None:
        bounds.append(f">={min:g}")
    if max is not None:
        bounds.append(f"<={max:g}")
    return Constraint(
        fn.scope, c, f"{fn.name}{''.join(bounds)}",
        meta={"kind": "threshold", "of": fn.meta}, language_invariant=fn.language_invariant,
    )


__all__ = [
    "event_cost_sum",
    "share_per_activity",
    "min_total",
    "per_event_min",
    "trace_cost_share",
    "inverse_timespan",
    "determinism_metric",
    "support",
    "activity_interest",
    "ends_with",
    "threshold",
]
