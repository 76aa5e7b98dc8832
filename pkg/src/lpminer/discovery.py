"""Utility-driven discovery of Local Process Models.

Candidates are process trees over distinct activities. The search starts
from every two-activity tree, then repeatedly expands the best language
classes of the current generation:

* any node ``x`` (except a loop's redo leaf) may be replaced by
  ``seq(x, a)``, ``seq(a, x)``, ``xor(x, a)``, ``and(x, a)`` or ``loop(x, a)``
  for a fresh activity ``a``, and a leaf ``x`` also by ``loop(a, x)``;
* any node that is not already a tau-loop may be wrapped as ``loop(x, tau)``.

Trees are deduplicated by canonical form and scored once per language
(minimal-DFA signature) when every term of the composite utility depends
only on the language.
"""

from __future__ import annotations

import logging
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from functools import cached_property
from typing import Iterable, Sequence

from .errors import BudgetExceeded, DiscoveryError
from .log import EventLog
from .petri import DEFAULT_BUDGET, AcceptingPetriNet, smoke_check
from .tree import LOOP, ProcessTree, leaf, loop, par, seq, tree_to_apn, xor
from .utility.core import Breakdown, CompositeUtility, EvalStats, Model, breakdown
from .utility.spec import UtilitySpec, zero_utility_activities

logger = logging.getLogger(__name__)


@dataclass
class Candidate:
    tree: ProcessTree
    score: float = 0.0
    fitting_events: int | None = None
    breakdown: Breakdown | None = None

    @cached_property
    def apn(self) -> AcceptingPetriNet:
        return tree_to_apn(self.tree)

    @property
    def text(self) -> str:
        return self.tree.text

    @property
    def n_activities(self) -> int:
        return self.tree.n_activities

    @property
    def constraints(self) -> dict[str, int | None]:
        if self.breakdown is None:
            return {}
        return {t.name: t.value for t in self.breakdown.terms if t.kind == "constraint"}

    def sort_key(self) -> tuple:
        return (-self.score, self.n_activities, self.text)


@dataclass
class Ranking:
    candidates: list[Candidate]
    truncated: bool = False
    evaluated: int = 0
    generated: int = 0
    pruned_model: int = 0
    pruned_activities: frozenset[str] = frozenset()
    generations: int = 0
    params: dict = field(default_factory=dict)
    stats: EvalStats = field(default_factory=EvalStats)
    pruned_trees: list[ProcessTree] = field(default_factory=list)

    def __len__(self) -> int:
        return len(self.candidates)

    def __iter__(self):
        return iter(self.candidates)

    def __getitem__(self, i: int) -> Candidate:
        return self.candidates[i]

    @property
    def trees(self) -> list[ProcessTree]:
        return [c.tree for c in self.candidates]

    @property
    def scores(self) -> list[float]:
        return [c.score for c in self.candidates]


# ---------------------------------------------------------------------------
# search space


def _composite(comp: CompositeUtility | UtilitySpec) -> CompositeUtility:
    return comp.composite if isinstance(comp, UtilitySpec) else comp


def cooccurring_pairs(log: EventLog) -> set[frozenset[str]]:
    """Unordered activity pairs that appear together in at least one trace."""
    pairs: set[frozenset[str]] = set()
    for t in log.traces:
        acts = sorted(set(t.activities))
        for i, a in enumerate(acts):
            for b in acts[i + 1:]:
                pairs.add(frozenset((a, b)))
    return pairs


def initial_candidates(
    alphabet: Iterable[str],
    spec: CompositeUtility | UtilitySpec | None = None,
    *,
    pruned: Iterable[str] | None = None,
    pairs: set[frozenset[str]] | None = None,
) -> list[ProcessTree]:
    """All two-activity trees: seq and loop per ordered pair, xor and and per unordered pair.

    Activities in ``pruned`` (by default the zero-utility activities of ``spec``)
    are left out; ``pairs`` restricts seeds to the given unordered pairs.
    """
    alphabet = sorted(set(alphabet))
    if pruned is None:
        pruned = zero_utility_activities(_composite(spec), alphabet) if spec is not None else frozenset()
    acts = [a for a in alphabet if a not in set(pruned)]
    out = []
    for i, a in enumerate(acts):
        for b in acts[i + 1:]:
            if pairs is not None and frozenset((a, b)) not in pairs:
                continue
            out.extend([seq(a, b), seq(b, a), xor(a, b), par(a, b), loop(a, b), loop(b, a)])
    return [t.canonical() for t in out]


def _redo_paths(tree: ProcessTree) -> set[tuple[int, ...]]:
    return {path + (1,) for path, node in tree.nodes() if node.op == LOOP}


def expand(
    tree: ProcessTree,
    alphabet: Iterable[str],
    *,
    max_activities: int = 4,
    pruned: Iterable[str] = (),
) -> list[ProcessTree]:
    """Canonical, duplicate-free one-step expansions of ``tree``."""
    acts = set(tree.activities)
    fresh = sorted(set(alphabet) - acts - set(pruned))
    grow = len(acts) < max_activities
    redo = _redo_paths(tree)
    out: dict[str, ProcessTree] = {}

    def add(t: ProcessTree) -> None:
        t = t.canonical()
        if t.text != tree.text:
            out.setdefault(t.text, t)

    for path, node in tree.nodes():
        if path in redo:
            continue
        if grow:
            for a in fresh:
                x = leaf(a)
                for new in (seq(node, x), seq(x, node), xor(node, x), par(node, x), loop(node, x)):
                    add(tree.replace(path, new))
                if node.is_leaf:
                    add(tree.replace(path, loop(x, node)))
        if not node.is_tau_loop:
            add(tree.replace(path, loop(node)))
    return [out[k] for k in sorted(out)]


# ---------------------------------------------------------------------------
# evaluation


@dataclass
class _Scored:
    tree: ProcessTree
    model: Model
    key: tuple | None  # None when pruned by a model constraint
    score: float = 0.0
    fitting: int | None = None
    evaluated: bool = False
    error: str | None = None


class _Evaluator:
    def __init__(self, log: EventLog, comp: CompositeUtility, budget: int, model_pruning: bool):
        self.log = log
        self.comp = comp
        self.budget = budget
        self.model_pruning = model_pruning
        self.cache: dict[tuple, tuple[float, int | None]] = {}
        self.stats = EvalStats()

    def key(self, model: Model) -> tuple:
        sig = model.automaton(self.budget).signature
        return (sig,) if self.comp.language_invariant else (sig, model.tree.text)

    def model_ok(self, model: Model) -> bool:
        return all(c.predicate(model) for c in self.comp.model_constraints)

    def prepare(self, tree: ProcessTree) -> _Scored:
        model = Model(tree=tree)
        try:
            if self.model_pruning and not self.model_ok(model):
                return _Scored(tree, model, None)
            return _Scored(tree, model, self.key(model))
        except BudgetExceeded as exc:
            return _Scored(tree, model, None, error=str(exc))

    def score(self, item: _Scored) -> _Scored:
        stats = EvalStats()
        bd = breakdown(self.log, item.model, self.comp, budget=self.budget, full=False, stats=stats)
        item.score, item.fitting, item.evaluated = bd.score, bd.fitting_events, True
        self.stats.merge(stats)
        return item


def evaluate_candidates(
    log: EventLog,
    candidates: Sequence[ProcessTree | Candidate],
    comp: CompositeUtility | UtilitySpec,
    *,
    budget: int = DEFAULT_BUDGET,
    workers: int = 1,
) -> list[Candidate]:
    """Score each candidate independently; the result follows the input order."""
    comp = _composite(comp)

    def one(c) -> Candidate:
        tree = c.tree if isinstance(c, Candidate) else c
        bd = breakdown(log, tree, comp, budget=budget)
        return Candidate(tree, bd.score, bd.fitting_events, bd)

    items = list(candidates)
    if workers > 1 and len(items) > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            return list(pool.map(one, items))
    return [one(c) for c in items]


# ---------------------------------------------------------------------------
# beam search


def discover(
    log: EventLog,
    comp: CompositeUtility | UtilitySpec,
    *,
    max_activities: int = 4,
    top_k: int = 10,
    beam_width: int = 200,
    budget: int = 100_000,
    prune_zero_utility: bool = True,
    prune_model: bool = True,
    cooccurrence_prefilter: bool = True,
    workers: int = 1,
    replay_budget: int = DEFAULT_BUDGET,
    keep_pruned: bool = False,
    check_soundness: bool = True,
) -> Ranking:
    """Beam search for the ``top_k`` highest-utility LPMs.

    ``budget`` caps the number of utility evaluations; when it runs out the
    ranking built so far is returned with ``truncated=True``. Ties are
    broken by fewer activities, then by the canonical tree text.
    """
    comp = _composite(comp)
    if len(log) == 0 or log.n_events == 0:
        raise DiscoveryError("cannot discover LPMs in an empty log")
    if max_activities < 2:
        raise DiscoveryError("max_activities must be at least 2")
    if top_k < 1 or beam_width < 1 or budget < 0:
        raise DiscoveryError("top_k and beam_width must be positive and budget non-negative")

    alphabet = sorted(log.alphabet)
    pruned = zero_utility_activities(comp, alphabet) if prune_zero_utility else frozenset()
    pairs = cooccurring_pairs(log) if cooccurrence_prefilter else None
    params = {
        "max_activities": max_activities,
        "top_k": top_k,
        "beam_width": beam_width,
        "budget": budget,
        "prune_zero_utility": prune_zero_utility,
        "prune_model": prune_model,
        "cooccurrence_prefilter": cooccurrence_prefilter,
    }
    ev = _Evaluator(log, comp, replay_budget, prune_model)
    ranking = Ranking([], pruned_activities=pruned, params=params)
    seen: set[str] = set()
    # language key -> best (score, n_acts, text, tree, fitting)
    best: dict[tuple, tuple] = {}

    frontier = []
    for t in initial_candidates(alphabet, pruned=pruned, pairs=pairs):
        if t.text not in seen:
            seen.add(t.text)
            frontier.append(t)

    pool = ThreadPoolExecutor(max_workers=workers) if workers > 1 else None
    try:
        while frontier:
            ranking.generations += 1
            ranking.generated += len(frontier)
            prepared = list(pool.map(ev.prepare, frontier)) if pool else [ev.prepare(t) for t in frontier]
            live = []
            for item in prepared:
                if item.key is None:
                    ranking.pruned_model += 1
                    if keep_pruned:
                        ranking.pruned_trees.append(item.tree)
                    if item.error:
                        logger.warning("skipping %s: %s", item.tree.text, item.error)
                else:
                    live.append(item)
            todo: dict[tuple, _Scored] = {}
            for item in live:
                if item.key not in ev.cache and item.key not in todo:
                    todo[item.key] = item
            work = list(todo.values())
            if ranking.evaluated + len(work) > budget:
                ranking.truncated = True
                work = work[: budget - ranking.evaluated]
            done = list(pool.map(ev.score, work)) if pool else [ev.score(w) for w in work]
            for item in done:
                ev.cache[item.key] = (item.score, item.fitting)
            ranking.evaluated += len(done)
            live = [it for it in live if it.key in ev.cache]
            classes: dict[tuple, list[_Scored]] = {}
            for item in live:
                item.score, item.fitting = ev.cache[item.key]
                classes.setdefault(item.key, []).append(item)
                lang = item.key[0]
                entry = (item.score, item.tree.n_activities, item.tree.text, item.tree, item.fitting)
                old = best.get(lang)
                if old is None or (-entry[0], entry[1], entry[2]) < (-old[0], old[1], old[2]):
                    best[lang] = entry
            if ranking.truncated:
                break
            order = sorted(
                classes.values(),
                key=lambda ms: (-ms[0].score, min((m.tree.n_activities, m.tree.text) for m in ms)),
            )
            nxt = []
            for members in order[:beam_width]:
                for m in members:
                    for t in expand(m.tree, alphabet, max_activities=max_activities, pruned=pruned):
                        if t.text not in seen:
                            seen.add(t.text)
                            nxt.append(t)
            frontier = nxt
    finally:
        if pool:
            pool.shutdown()

    ranking.stats = ev.stats
    chosen = sorted((e for e in best.values() if e[0] > 0), key=lambda e: (-e[0], e[1], e[2]))[:top_k]
    for score, _, _, tree, fitting in chosen:
        cand = Candidate(tree, score, fitting)
        cand.breakdown = breakdown(log, Model(cand.apn, tree), comp, budget=replay_budget)
        if check_soundness:
            problems = smoke_check(cand.apn)
            if problems:
                raise DiscoveryError(f"emitted net for {tree.text} failed the soundness check: {problems}")
        ranking.candidates.append(cand)
    if ranking.truncated:
        logger.warning("evaluation budget of %d exhausted; ranking is partial", budget)
    return ranking


__all__ = [
    "Candidate",
    "Ranking",
    "initial_candidates",
    "expand",
    "evaluate_candidates",
    "discover",
    "cooccurring_pairs",
]
