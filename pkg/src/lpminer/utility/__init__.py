"""Utility functions and constraints on trace, event, activity and model scope."""

from .builtins import (
    activity_interest,
    determinism_metric,
    ends_with,
    event_cost_sum,
    inverse_timespan,
    min_total,
    per_event_min,
    share_per_activity,
    support,
    threshold,
    trace_cost_share,
)
from .core import (
    Breakdown,
    CompositeUtility,
    Constraint,
    EvalStats,
    EventSet,
    Model,
    OrdinalMap,
    Scope,
    UtilityFunction,
    as_model,
    breakdown,
    combine,
    evaluate,
)
from .spec import UtilitySpec, load_spec, parse_spec, zero_utility_activities


def ordinal_map(assignment: dict[str, float] | str, *, name: str = "") -> OrdinalMap:
    """Property transformer for ordinal values; ``"rank"`` uses each level's rank."""
    if assignment == "rank":
        return OrdinalMap.ranks()
    return OrdinalMap(dict(assignment), name=name)


__all__ = [
    "Scope",
    "UtilityFunction",
    "Constraint",
    "CompositeUtility",
    "Model",
    "EventSet",
    "EvalStats",
    "Breakdown",
    "OrdinalMap",
    "ordinal_map",
    "as_model",
    "evaluate",
    "breakdown",
    "combine",
    "UtilitySpec",
    "load_spec",
    "parse_spec",
    "zero_utility_activities",
    "event_cost_sum",
    "share_per_activity",
    "trace_cost_share",
    "inverse_timespan",
    "determinism_metric",
    "support",
    "activity_interest",
    "min_total",
    "per_event_min",
    "ends_with",
    "threshold",
]
