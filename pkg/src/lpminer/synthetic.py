"""Synthetic logs with a planted pattern, for desk-scale experiments.

Every trace carries one accepted word of the pattern tree. Before each
planted event a noise event is inserted with probability ``noise_rate``,
and one more may follow the last planted event. Costs are drawn per event
and each case gets ``total_cost``, the sum of its event costs.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from datetime import datetime, timedelta, timezone
from typing import Mapping, Sequence

import numpy as np

from .errors import ConfigError
from .log import ColumnMapping, Event, EventLog, Trace
from .tree import AND, LOOP, SEQ, XOR, ProcessTree, parse_tree

SYNTHETIC_CSV_MAPPING = ColumnMapping.from_dict(
    {
        "case": "case",
        "activity": "activity",
        "timestamp": "time",
        "event_id": "id",
        "properties": {"cost": "real"},
        "case_properties": {"total_cost": "real"},
    }
)


@dataclass(frozen=True)
class CostModel:
    """Uniform integer costs in ``[low, high]``, optionally per activity."""

    low: int = 10
    high: int = 100
    per_activity: Mapping[str, tuple[int, int]] = field(default_factory=dict)

    @classmethod
    def from_dict(cls, d: Mapping | None) -> "CostModel":
        if d is None:
            return cls()
        unknown = set(d) - {"low", "high", "per_activity"}
        if unknown:
            raise ConfigError(f"unknown cost model keys {sorted(unknown)}", module="synthetic")
        per = {str(a): (int(v[0]), int(v[1])) for a, v in (d.get("per_activity") or {}).items()}
        return cls(int(d.get("low", 10)), int(d.get("high", 100)), per)

    def draw(self, activity: str, rng: np.random.Generator) -> float:
        lo, hi = self.per_activity.get(activity, (self.low, self.high))
        return float(rng.integers(lo, hi + 1))


def sample_word(tree: ProcessTree, rng: np.random.Generator, *, repeat_p: float = 0.3, max_repeats: int = 3) -> list[str]:
    """One word of the tree's language; loops repeat with probability ``repeat_p``."""
    if tree.is_leaf:
        return [] if tree.label is None else [tree.label]
    if tree.op == SEQ:
        return [a for c in tree.children for a in sample_word(c, rng, repeat_p=repeat_p, max_repeats=max_repeats)]
    if tree.op == XOR:
        k = int(rng.integers(len(tree.children)))
        return sample_word(tree.children[k], rng, repeat_p=repeat_p, max_repeats=max_repeats)
    if tree.op == AND:
        parts = [sample_word(c, rng, repeat_p=repeat_p, max_repeats=max_repeats) for c in tree.children]
        owners = np.repeat(np.arange(len(parts)), [len(p) for p in parts])
        rng.shuffle(owners)
        pos = [0] * len(parts)
        out = []
        for k in owners:
            out.append(parts[k][pos[k]])
            pos[k] += 1
        return out
    if tree.op == LOOP:
        body, redo = tree.children
        out = sample_word(body, rng, repeat_p=repeat_p, max_repeats=max_repeats)
        for _ in range(max_repeats):
            if rng.random() >= repeat_p:
                break
            out += sample_word(redo, rng, repeat_p=repeat_p, max_repeats=max_repeats)
            out += sample_word(body, rng, repeat_p=repeat_p, max_repeats=max_repeats)
        return out
    raise ConfigError(f"unknown operator {tree.op!r}", module="synthetic")


def gen_synthetic(
    pattern_tree: ProcessTree | str,
    n_traces: int,
    noise_rate: float,
    rng_seed: int,
    *,
    cost_model: CostModel | Mapping | None = None,
    noise_activities: Sequence[str] = ("X", "Y", "Z"),
    start: datetime = datetime(2020, 1, 1, tzinfo=timezone.utc),
) -> EventLog:
    """Deterministic log of ``n_traces`` traces, each planting one word of ``pattern_tree``."""
    tree = parse_tree(pattern_tree) if isinstance(pattern_tree, str) else pattern_tree
    if not 0.0 <= noise_rate <= 1.0:
        raise ConfigError(f"noise_rate must be in [0, 1], got {noise_rate}", module="synthetic")
    if n_traces < 1:
        raise ConfigError("n_traces must be positive", module="synthetic")
    noise = list(noise_activities)
    if noise_rate > 0 and not noise:
        raise ConfigError("noise_rate > 0 needs at least one noise activity", module="synthetic")
    costs = cost_model if isinstance(cost_model, CostModel) else CostModel.from_dict(cost_model)
    rng = np.random.default_rng(rng_seed)
    traces = []
    for k in range(n_traces):
        acts: list[str] = []
        for a in sample_word(tree, rng):
            if noise and rng.random() < noise_rate:
                acts.append(noise[int(rng.integers(len(noise)))])
            acts.append(a)
        if noise and rng.random() < noise_rate:
            acts.append(noise[int(rng.integers(len(noise)))])
        case = f"case{k + 1}"
        t = start + timedelta(days=k)
        events = []
        for i, a in enumerate(acts):
            t = t + timedelta(minutes=int(rng.integers(1, 60)))
            events.append(Event(f"{case}:{i}", a, t, {"cost": costs.draw(a, rng)}))
        total = float(sum(e.props["cost"] for e in events))
        traces.append(Trace(tuple(events), {"total_cost": total}, case))
    return EventLog(traces)


__all__ = ["CostModel", "SYNTHETIC_CSV_MAPPING", "gen_synthetic", "sample_word"]
