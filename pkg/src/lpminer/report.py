"""Text and JSON renderings of rankings and score breakdowns.

Both renderings are deterministic for identical inputs. The text report
carries one timestamp line, ``# generated: ...``, which is the only part
that changes between runs.
"""

from __future__ import annotations

import json
from datetime import datetime, timezone
from typing import Any, Mapping

from .discovery import Ranking
from .log import EventLog
from .utility.core import Breakdown


def _num(v: float | int | None) -> str:
    if v is None:
        return "skipped"
    if isinstance(v, float) and v.is_integer() and abs(v) < 1e15:
        return str(int(v))
    return repr(v) if isinstance(v, float) else str(v)


def breakdown_lines(bd: Breakdown, indent: str = "  ") -> list[str]:
    lines = []
    if bd.fitting_events is not None:
        lines.append(f"{indent}fitting events: {bd.fitting_events}")
    for t in bd.terms:
        if t.kind == "constraint":
            lines.append(f"{indent}constraint [{t.scope.value}] {t.name} = {_num(t.value)}")
        else:
            lines.append(f"{indent}utility    [{t.scope.value}] {t.name} = {_num(t.value)} (weight {_num(t.weight)})")
    for kind, counter in (("missing property", bd.stats.missing), ("capped", bd.stats.capped), ("undecided", bd.stats.undecided)):
        for key in sorted(counter):
            lines.append(f"{indent}note: {kind} {key}: {counter[key]}")
    return lines


def log_summary(log: EventLog) -> str:
    return f"{len(log)} traces, {log.n_events} events, {len(log.alphabet)} activities"


def ranking_text(ranking: Ranking, log: EventLog, *, header: Mapping[str, Any], timestamp: datetime | None = None) -> str:
    ts = (timestamp or datetime.now(timezone.utc)).strftime("%Y-%m-%dT%H:%M:%SZ")
    out = ["# lpminer discovery report", f"# generated: {ts}"]
    for k, v in header.items():
        if isinstance(v, Mapping):
            out.append(f"{k}:")
            for kk in sorted(v):
                out.append(f"  {kk}: {json.dumps(v[kk], sort_keys=True)}")
        else:
            out.append(f"{k}: {v}")
    out.append(f"log: {log_summary(log)}")
    out.append(
        "search: "
        f"generations={ranking.generations} generated={ranking.generated} evaluated={ranking.evaluated} "
        f"pruned_by_model_constraints={ranking.pruned_model} truncated={str(ranking.truncated).lower()}"
    )
    out.append(f"pruned activities: {', '.join(sorted(ranking.pruned_activities)) or '-'}")
    out.append(f"results: {len(ranking)}")
    for i, c in enumerate(ranking, start=1):
        out.append("")
        out.append(f"#{i} score={_num(c.score)} activities={c.n_activities} tree={c.text}")
        if c.breakdown is not None:
            out.extend(breakdown_lines(c.breakdown))
    return "\n".join(out) + "\n"


def ranking_json(ranking: Ranking, log: EventLog, *, header: Mapping[str, Any]) -> str:
    doc = {
        "header": dict(header),
        "log": {"traces": len(log), "events": log.n_events, "activities": sorted(log.alphabet)},
        "search": {
            "generations": ranking.generations,
            "generated": ranking.generated,
            "evaluated": ranking.evaluated,
            "pruned_by_model_constraints": ranking.pruned_model,
            "pruned_activities": sorted(ranking.pruned_activities),
            "truncated": ranking.truncated,
        },
        "ranking": [
            {
                "rank": i,
                "score": c.score,
                "tree": c.text,
                "activities": sorted(set(c.tree.activities)),
                **(c.breakdown.as_dict() if c.breakdown is not None else {}),
            }
            for i, c in enumerate(ranking, start=1)
        ],
    }
    return json.dumps(doc, indent=2, sort_keys=True) + "\n"


__all__ = ["ranking_text", "ranking_json", "breakdown_lines", "log_summary"]
