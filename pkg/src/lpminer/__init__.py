"""Utility-driven mining of Local Process Models from event logs."""

from __future__ import annotations

__version__ = "0.1.0"

from .discovery import Candidate, Ranking, discover, evaluate_candidates, expand, initial_candidates
from .errors import (
    BudgetExceeded,
    ConfigError,
    DiscoveryError,
    LogFormatError,
    LPMError,
    PetriNetError,
    SegmentationError,
)
from .log import ColumnMapping, Event, EventLog, Ordinal, Trace, parse_csv, parse_xes, write_csv, write_xes
from .petri import AcceptingPetriNet, Marking, PetriNet, Transition, smoke_check
from .pnml import read_pnml, write_pnml
from .segmentation import Replay, determinism, gamma, gamma_log, replay, segment_trace
from .tree import ProcessTree, parse_tree, tree_to_apn
from .utility import breakdown, evaluate, load_spec, parse_spec

__all__ = [
    "__version__",
    "AcceptingPetriNet", "BudgetExceeded", "Candidate", "ColumnMapping", "ConfigError",
    "DiscoveryError", "Event", "EventLog", "LPMError", "LogFormatError", "Marking", "Ordinal",
    "PetriNet", "PetriNetError", "ProcessTree", "Ranking", "Replay", "SegmentationError",
    "Trace", "Transition", "breakdown", "determinism", "discover", "evaluate",
    "evaluate_candidates", "expand", "gamma", "gamma_log", "initial_candidates", "load_spec",
    "parse_csv", "parse_spec", "parse_tree", "parse_xes", "read_pnml", "replay",
    "segment_trace", "smoke_check", "tree_to_apn", "write_csv", "write_pnml", "write_xes",
]
