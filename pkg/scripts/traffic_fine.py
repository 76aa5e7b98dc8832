"""Full-size run on the public road traffic fine management log.

Not part of the test suite. Download the log (XES, optionally gzipped) from
https://doi.org/10.4121/uuid:270fd440-1057-4fb9-89a9-b699b47990f5 and run

    python scripts/traffic_fine.py Road_Traffic_Fine_Management_Process.xes.gz

Each event gets a ``remaining`` property: the amount still owed on the fine
at that moment (latest ``amount`` plus any ``expense`` minus the
``paymentAmount`` of payments so far). Discovery then ranks LPMs by the sum
of ``remaining`` over fitting events. The expected top-1 total is about
12.6 million; the script reports the relative deviation and exits non-zero
beyond 5%.
"""

from __future__ import annotations

import argparse
import gzip
import sys
import time
from pathlib import Path

from lpminer.discovery import discover
from lpminer.log import Event, EventLog, Trace, parse_xes
from lpminer.utility import combine, event_cost_sum

EXPECTED = 12.6e6
TOLERANCE = 0.05


def _num(v) -> float:
    return float(v) if isinstance(v, (int, float)) else 0.0


def with_remaining(log: EventLog) -> EventLog:
    traces = []
    for t in log:
        amount = expense = paid = 0.0
        events = []
        for e in t:
            act = e.activity.lower()
            if act in ("create fine", "add penalty") and "amount" in e.props:
                amount = _num(e.props["amount"])
            if act == "send fine":
                expense += _num(e.props.get("expense"))
            if act == "payment":
                paid += _num(e.props.get("paymentAmount"))
            props = dict(e.props, remaining=amount + expense - paid)
            events.append(Event(e.id, e.activity, e.time, props))
        traces.append(Trace(tuple(events), t.case_props, t.case_id))
    return EventLog(traces)


def load(path: Path) -> EventLog:
    opener = gzip.open if path.suffix == ".gz" else open
    with opener(path, "rb") as fh:
        return parse_xes(fh)


def main(argv=None) -> int:
    ap = argparse.ArgumentParser(description="Traffic fine run (remaining amount utility).")
    ap.add_argument("log", type=Path)
    ap.add_argument("--max-activities", type=int, default=4)
    ap.add_argument("--beam-width", type=int, default=50)
    ap.add_argument("--top-k", type=int, default=3)
    ap.add_argument("--workers", type=int, default=1)
    args = ap.parse_args(argv)

    t0 = time.perf_counter()
    log = with_remaining(load(args.log))
    print(f"loaded {len(log)} traces, {log.n_events} events, {len(log.alphabet)} activities in {time.perf_counter() - t0:.0f} s")
    ranking = discover(
        log, combine(event_cost_sum("remaining")),
        max_activities=args.max_activities, top_k=args.top_k, beam_width=args.beam_width, workers=args.workers,
    )
    for i, c in enumerate(ranking, start=1):
        print(f"#{i} {c.score:,.0f}  {c.text}")
    if not len(ranking):
        print("no LPM with positive utility")
        return 1
    dev = abs(ranking[0].score - EXPECTED) / EXPECTED
    print(f"top-1 deviation from {EXPECTED:,.0f}: {dev:.1%} (tolerance {TOLERANCE:.0%})")
    return 0 if dev <= TOLERANCE else 1


if __name__ == "__main__":
    sys.exit(main())
