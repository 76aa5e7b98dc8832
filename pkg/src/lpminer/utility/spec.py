"""Declarative utility specifications (YAML or JSON).

Example::

    ordinal_scales:
      risk: {low: 1, medium: 2, high: 5}
    constraints:
      - builtin: per_event_min
        params: {property: cost, threshold: 100}
      - builtin: support          # any utility builtin becomes a constraint
        min: 10                   # with min and/or max
    utilities:
      - builtin: event_cost_sum
        scope: event              # optional; checked against the builtin
        params: {property: risk, ordinal: risk}
        weight: 2.0

Only builtins can be named here; custom evaluators go through the Python API.
"""

from __future__ import annotations

import inspect
from dataclasses import dataclass
from pathlib import Path
from typing import Any, Iterable, Mapping

import yaml

from ..errors import ConfigError
from . import builtins as B
from .core import CompositeUtility, Constraint, OrdinalMap, Scope, UtilityFunction

UTILITY_BUILTINS = {
    "event_cost_sum": (B.event_cost_sum, Scope.EVENT),
    "share_per_activity": (B.share_per_activity, Scope.EVENT),
    "trace_cost_share": (B.trace_cost_share, Scope.TRACE),
    "inverse_timespan": (B.inverse_timespan, Scope.TRACE),
    "determinism": (B.determinism_metric, Scope.TRACE),
    "support": (B.support, Scope.ACTIVITY),
    "activity_interest": (B.activity_interest, Scope.ACTIVITY),
}
CONSTRAINT_BUILTINS = {
    "min_total": (B.min_total, Scope.EVENT),
    "per_event_min": (B.per_event_min, Scope.EVENT),
    "ends_with": (B.ends_with, Scope.MODEL),
}

_TOP_KEYS = {"constraints", "utilities", "ordinal_scales"}
_ENTRY_KEYS = {"builtin", "scope", "params", "weight", "min", "max"}


@dataclass
class UtilitySpec:
    """A parsed specification plus the composite it builds."""

    raw: dict
    composite: CompositeUtility

    @property
    def constraints(self) -> list[Constraint]:
        return self.composite.constraints

    @property
    def utilities(self) -> list[UtilityFunction]:
        return self.composite.utilities


def _scales(raw: Mapping[str, Any]) -> dict[str, OrdinalMap]:
    out = {}
    for name, assignment in (raw or {}).items():
        if assignment == "rank":
            out[name] = OrdinalMap.ranks()
        elif isinstance(assignment, Mapping):
            out[name] = OrdinalMap(dict(assignment), name=name)
        else:
            raise ConfigError(f"ordinal scale {name!r} must map labels to numbers or be 'rank'")
    return out


def _call(factory, params: dict, scales: dict[str, OrdinalMap], where: str, weight=None):
    params = dict(params)
    if "ordinal" in params:
        ref = params.pop("ordinal")
        if isinstance(ref, Mapping):
            params["transform"] = OrdinalMap(dict(ref))
        elif ref in scales:
            params["transform"] = scales[ref]
        else:
            raise ConfigError(f"{where}: unknown ordinal scale {ref!r}")
    if weight is not None:
        params["weight"] = float(weight)
    sig = inspect.signature(factory)
    unknown = set(params) - set(sig.parameters)
    if unknown:
        raise ConfigError(f"{where}: unknown parameter(s) {sorted(unknown)}")
    try:
        sig.bind(**params)
    except TypeError as exc:
        raise ConfigError(f"{where}: {exc}") from None
    return factory(**params)


def _entry(entry: Any, where: str) -> dict:
    if isinstance(entry, str):
        entry = {"builtin": entry}
    if not isinstance(entry, Mapping):
        raise ConfigError(f"{where}: expected a mapping, got {entry!r}")
    unknown = set(entry) - _ENTRY_KEYS
    if unknown:
        raise ConfigError(f"{where}: unknown key(s) {sorted(unknown)}")
    if "builtin" not in entry:
        raise ConfigError(f"{where}: missing 'builtin'")
    return dict(entry)


def _check_scope(entry: dict, scope: Scope, where: str) -> None:
    if "scope" in entry:
        try:
            given = Scope(entry["scope"])
        except ValueError:
            raise ConfigError(f"{where}: unknown scope {entry['scope']!r}") from None
        if given is not scope:
            raise ConfigError(f"{where}: builtin {entry['builtin']!r} has scope {scope.value}, not {given.value}")


def parse_spec(raw: Mapping[str, Any]) -> UtilitySpec:
    if raw is None:
        raw = {}
    if not isinstance(raw, Mapping):
        raise ConfigError("utility spec must be a mapping")
    unknown = set(raw) - _TOP_KEYS
    if unknown:
        raise ConfigError(f"unknown utility spec key(s) {sorted(unknown)}")
    scales = _scales(raw.get("ordinal_scales") or {})
    comp = CompositeUtility()
    for i, entry in enumerate(raw.get("utilities") or []):
        where = f"utilities[{i}]"
        e = _entry(entry, where)
        if "min" in e or "max" in e:
            raise ConfigError(f"{where}: min/max belong in the constraints section")
        if e["builtin"] not in UTILITY_BUILTINS:
            raise ConfigError(f"{where}: unknown utility builtin {e['builtin']!r}")
        factory, scope = UTILITY_BUILTINS[e["builtin"]]
        _check_scope(e, scope, where)
        comp.utilities.append(_call(factory, e.get("params") or {}, scales, where, e.get("weight", 1.0)))
    for i, entry in enumerate(raw.get("constraints") or []):
        where = f"constraints[{i}]"
        e = _entry(entry, where)
        if "weight" in e:
            raise ConfigError(f"{where}: constraints take no weight")
        name = e["builtin"]
        if name in CONSTRAINT_BUILTINS:
            factory, scope = CONSTRAINT_BUILTINS[name]
            _check_scope(e, scope, where)
            if "min" in e or "max" in e:
                raise ConfigError(f"{where}: {name} takes no min/max")
            comp.constraints.append(_call(factory, e.get("params") or {}, scales, where))
        elif name in UTILITY_BUILTINS:
            factory, scope = UTILITY_BUILTINS[name]
            _check_scope(e, scope, where)
            if "min" not in e and "max" not in e:
                raise ConfigError(f"{where}: utility {name!r} used as a constraint needs min and/or max")
            fn = _call(factory, e.get("params") or {}, scales, where)
            comp.constraints.append(B.threshold(fn, min=e.get("min"), max=e.get("max")))
        else:
            raise ConfigError(f"{where}: unknown builtin {name!r}")
    return UtilitySpec(dict(raw), comp)


def load_spec(source: str | Path | Mapping[str, Any]) -> UtilitySpec:
    """Parse a spec from a mapping or a YAML/JSON file path."""
    if isinstance(source, Mapping):
        return parse_spec(source)
    path = Path(source)
    try:
        text = path.read_text(encoding="utf-8")
    except OSError as exc:
        raise ConfigError(f"cannot read utility spec {path}: {exc}") from None
    try:
        raw = yaml.safe_load(text)
    except yaml.YAMLError as exc:
        raise ConfigError(f"{path}: {exc}") from None
    return parse_spec(raw or {})


def zero_utility_activities(spec: UtilitySpec | CompositeUtility, alphabet: Iterable[str]) -> frozenset[str]:
    """Activities that provably add nothing to any utility term.

    Only proven when every utility is an activity-interest table (support
    included) and every constraint is an ``ends_with`` constraint, whose
    target activity is never pruned. Anything else yields the empty set.
    """
    comp = spec.composite if isinstance(spec, UtilitySpec) else spec
    alphabet = set(alphabet)
    if not comp.utilities:
        return frozenset()
    for f in comp.utilities:
        if f.meta.get("kind") != "activity_interest":
            return frozenset()
    keep: set[str] = set()
    for c in comp.constraints:
        if c.meta.get("kind") != "ends_with":
            return frozenset()
        keep.add(c.meta["activity"])
    zero = set()
    for a in alphabet:
        if a in keep:
            continue
        if all(f.weight == 0 or f.meta["weights"].get(a, f.meta["default"]) == 0 for f in comp.utilities):
            zero.add(a)
    return frozenset(zero)
