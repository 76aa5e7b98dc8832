"""Determinized label automata of accepting Petri nets.

Replay of a log against an LPM only ever needs the visible language, so
each net is compiled once: subset construction over tau-closed marking
sets, then trimming and minimization. The result is the minimal DFA of
the language in a canonical numbering, stored as ``int32`` tables that the
replay kernels walk. States from which acceptance is unreachable are
removed, so a run dies as soon as it can no longer complete.
"""

from __future__ import annotations

from functools import cached_property
from typing import Sequence

import numpy as np

from . import kernels
from .errors import BudgetExceeded, PetriNetError
from .petri import AcceptingPetriNet, DEFAULT_BUDGET


class LabelAutomaton:
    """Trimmed DFA over ``labels``; ``table[s, j] == -1`` means no move."""

    def __init__(self, labels: Sequence[str], table: np.ndarray, accepting: np.ndarray):
        self.labels = tuple(labels)
        self.index = {a: j for j, a in enumerate(self.labels)}
        self.table = np.ascontiguousarray(table, dtype=np.int32)
        self.accepting = np.ascontiguousarray(accepting, dtype=np.uint8)
        self.outdegree = np.ascontiguousarray((self.table >= 0).sum(axis=1), dtype=np.int32)

    @property
    def n_states(self) -> int:
        return self.table.shape[0]

    @property
    def empty(self) -> bool:
        return self.n_states == 0

    def run(self, word: Sequence[str]) -> int:
        """State reached after ``word`` (-1 if the word is not a live prefix)."""
        if self.empty:
            return -1
        s = 0
        for a in word:
            j = self.index.get(a)
            if j is None:
                return -1
            s = int(self.table[s, j])
            if s < 0:
                return -1
        return s

    def accepts(self, word: Sequence[str]) -> bool:
        s = self.run(word)
        return s >= 0 and bool(self.accepting[s])

    def offered(self, state: int) -> list[str]:
        """Labels that can be consumed next from ``state``."""
        return [a for j, a in enumerate(self.labels) if self.table[state, j] >= 0]

    def ends_with(self, label: str) -> bool:
        """Every accepted word is non-empty and its last label is ``label``."""
        if self.empty or self.accepting[0]:
            return False
        acc = self.accepting.astype(bool)
        for j, a in enumerate(self.labels):
            if a == label:
                continue
            col = self.table[:, j]
            if np.any(acc[col[col >= 0]]):
                return False
        return bool(acc.any())

    @cached_property
    def signature(self) -> tuple:
        """Equal iff same labels and same language (the automaton is minimal and canonically numbered)."""
        return (self.labels, self.table.shape[0], self.table.tobytes(), self.accepting.tobytes())


def _vector_determinize(apn: AcceptingPetriNet, labels: list[str], budget: int) -> tuple[list[list[int]], list[int]]:
    """Subset construction with count-vector markings, for nets that are not 1-safe.

    Same state numbering as the bitmask kernels: breadth-first, labels in
    ascending order.
    """
    net = apn.net
    places = {p: i for i, p in enumerate(net.places)}
    lidx = {a: j for j, a in enumerate(labels)}
    taus, vis = [], []
    for name, t in net.transitions.items():
        pre = tuple(places[p] for p in net.preset[name])
        post = tuple(places[p] for p in net.postset[name])
        if t.label is None:
            taus.append((pre, post))
        else:
            vis.append((pre, post, lidx[t.label]))

    def encode(m) -> tuple[int, ...]:
        v = [0] * len(places)
        for p, c in m.items():
            v[places[p]] = c
        return tuple(v)

    def fire(m: tuple[int, ...], pre, post) -> tuple[int, ...]:
        v = list(m)
        for p in pre:
            v[p] -= 1
        for p in post:
            v[p] += 1
        return tuple(v)

    seen_all: set = set()

    def note(m) -> None:
        seen_all.add(m)
        if len(seen_all) > budget:
            raise BudgetExceeded("net state space too large to determinize", visited=len(seen_all))

    cache: dict = {}

    def closure(m) -> frozenset:
        hit = cache.get(m)
        if hit is not None:
            return hit
        seen = {m}
        stack = [m]
        while stack:
            cur = stack.pop()
            for pre, post in taus:
                if all(cur[p] > 0 for p in pre):
                    nxt = fire(cur, pre, post)
                    if nxt not in seen:
                        note(nxt)
                        seen.add(nxt)
                        stack.append(nxt)
        cache[m] = result = frozenset(seen)
        return result

    finals = {encode(f) for f in apn.finals}
    m0 = encode(apn.initial)
    note(m0)
    start = closure(m0)
    state_id = {start: 0}
    states = [start]
    table: list[list[int]] = []
    accepting: list[int] = []
    for S in states:
        succ: list[set] = [set() for _ in labels]
        for m in S:
            for pre, post, lab in vis:
                if all(m[p] > 0 for p in pre):
                    nxt = fire(m, pre, post)
                    note(nxt)
                    succ[lab] |= closure(nxt)
        row = []
        for ms in succ:
            if not ms:
                row.append(-1)
                continue
            T = frozenset(ms)
            if T not in state_id:
                state_id[T] = len(states)
                states.append(T)
                if len(states) > budget:
                    raise BudgetExceeded("too many automaton states", visited=len(states))
            row.append(state_id[T])
        table.append(row)
        accepting.append(int(bool(S & finals)))
    return table, accepting


def _bitmask_determinize(apn: AcceptingPetriNet, labels: list[str], budget: int):
    """Run the subset-construction kernel; None when the net is not 1-safe."""
    net = apn.net
    if len(net.places) > 64:
        return None
    if any(c > 1 for m in (apn.initial, *apn.finals) for c in m.values()):
        return None
    places = {p: i for i, p in enumerate(net.places)}
    lidx = {a: j for j, a in enumerate(labels)}
    names = list(net.transitions)
    pre = np.array([sum(1 << places[p] for p in net.preset[t]) for t in names], dtype=np.uint64)
    post = np.array([sum(1 << places[p] for p in net.postset[t]) for t in names], dtype=np.uint64)
    lab = np.array([-1 if net.transitions[t].label is None else lidx[net.transitions[t].label] for t in names], dtype=np.int32)
    m0 = sum(1 << places[p] for p in apn.initial)
    finals = np.array([sum(1 << places[p] for p in f) for f in apn.finals], dtype=np.uint64)
    return _run_safe(labels, pre, post, lab, m0, finals, budget)


def _run_safe(labels, pre, post, lab, m0, finals, budget):
    status, table, acc, visited = kernels.determinize_safe(pre, post, lab, m0, finals, len(labels), budget)
    if status == kernels.UNSAFE:
        return None
    if status == kernels.OVER_BUDGET:
        raise BudgetExceeded("net state space too large to determinize", visited=int(visited))
    return table, acc


def compile_safe_arrays(labels, pre, post, lab, m0: int, finals, budget: int = DEFAULT_BUDGET) -> LabelAutomaton:
    """Minimal DFA of a 1-safe net given as place bitmasks per transition."""
    res = _run_safe(labels, pre, post, lab, m0, finals, budget)
    if res is None:
        raise PetriNetError("net is not 1-safe")
    return LabelAutomaton(labels, *kernels.minimize(*res))


def compile_automaton(apn: AcceptingPetriNet, budget: int = DEFAULT_BUDGET) -> LabelAutomaton:
    """Subset construction over tau-closed marking sets, then trimming.

    1-safe nets (every tree translation) go through the bitmask kernel;
    anything else uses count-vector markings.
    """
    labels = sorted(apn.alphabet)
    res = _bitmask_determinize(apn, labels, budget)
    if res is None:
        res = _vector_determinize(apn, labels, budget)
    table, accepting = res
    table = np.array(table, dtype=np.int32).reshape(len(table), len(labels))
    return LabelAutomaton(labels, *kernels.minimize(table, np.array(accepting, dtype=np.uint8)))
