"""Labeled and accepting Petri nets with weight-1 arcs.

Markings are immutable multisets of places. ``accepts`` decides language
membership by a bounded breadth-first search over (marking, word position)
states; it raises :class:`~lpminer.errors.BudgetExceeded` rather than
answering when the budget runs out.
"""

from __future__ import annotations

from collections import deque
from dataclasses import dataclass
from typing import Iterable, Iterator, Mapping, Sequence

from .errors import BudgetExceeded, PetriNetError

DEFAULT_BUDGET = 100_000


class Marking(Mapping[str, int]):
    """Multiset of places. Zero counts are dropped, so equal markings hash equal."""

    __slots__ = ("_items", "_counts", "_hash")

    def __init__(self, tokens: Mapping[str, int] | Iterable[str] = ()):
        if isinstance(tokens, Mapping):
            counts = {p: int(n) for p, n in tokens.items() if n}
        else:
            counts = {}
            for p in tokens:
                counts[p] = counts.get(p, 0) + 1
        if any(n < 0 for n in counts.values()):
            raise PetriNetError(f"negative token count in {counts}")
        self._items = tuple(sorted(counts.items()))
        self._counts = counts
        self._hash = hash(self._items)

    def __getitem__(self, place: str) -> int:
        return self._counts.get(place, 0)

    def get(self, place: str, default: int = 0) -> int:  # type: ignore[override]
        return self._counts.get(place, default)

    def __iter__(self) -> Iterator[str]:
        return (p for p, _ in self._items)

    def __len__(self) -> int:
        return len(self._items)

    def __hash__(self) -> int:
        return self._hash

    def __eq__(self, other: object) -> bool:
        if isinstance(other, Marking):
            return self._items == other._items
        if isinstance(other, Mapping):
            return self == Marking(other)
        return NotImplemented

    def __le__(self, other: "Marking") -> bool:
        """Multiset inclusion."""
        return all(other[p] >= n for p, n in self._items)

    def __repr__(self) -> str:
        inner = ", ".join(p if n == 1 else f"{p}^{n}" for p, n in self._items)
        return f"[{inner}]"

    @property
    def total(self) -> int:
        return sum(n for _, n in self._items)


@dataclass(frozen=True)
class Transition:
    name: str
    label: str | None = None

    @property
    def invisible(self) -> bool:
        return self.label is None


class PetriNet:
    """Labeled Petri net ``(P, T, F, labels, l)``; unlabeled transitions are tau."""

    def __init__(
        self,
        places: Iterable[str],
        transitions: Iterable[Transition],
        arcs: Iterable[tuple[str, str]],
        labels: Iterable[str] | None = None,
    ):
        self.places: tuple[str, ...] = tuple(dict.fromkeys(places))
        self.transitions: dict[str, Transition] = {}
        for t in transitions:
            if t.name in self.transitions:
                raise PetriNetError(f"duplicate transition {t.name!r}")
            self.transitions[t.name] = t
        place_set = set(self.places)
        overlap = place_set & set(self.transitions)
        if overlap:
            raise PetriNetError(f"names used as both place and transition: {sorted(overlap)}")
        self.arcs: frozenset[tuple[str, str]] = frozenset(arcs)
        pre: dict[str, list[str]] = {t: [] for t in self.transitions}
        post: dict[str, list[str]] = {t: [] for t in self.transitions}
        for src, dst in self.arcs:
            if src in place_set and dst in self.transitions:
                pre[dst].append(src)
            elif src in self.transitions and dst in place_set:
                post[src].append(dst)
            else:
                raise PetriNetError(f"arc {src!r}->{dst!r} does not connect a place and a transition")
        self.preset = {t: tuple(sorted(ps)) for t, ps in pre.items()}
        self.postset = {t: tuple(sorted(ps)) for t, ps in post.items()}
        used = {t.label for t in self.transitions.values() if t.label is not None}
        self.labels: frozenset[str] = frozenset(labels) | used if labels is not None else frozenset(used)

    def __repr__(self) -> str:
        return f"PetriNet({len(self.places)} places, {len(self.transitions)} transitions)"


def enabled(net: PetriNet, m: Marking) -> set[str]:
    """Names of the transitions enabled at ``m``."""
    return {t for t, ps in net.preset.items() if all(m[p] >= 1 for p in ps)}


def fire(net: PetriNet, m: Marking, t: str) -> Marking:
    if t not in net.transitions:
        raise PetriNetError(f"unknown transition {t!r}")
    counts = dict(m.items())
    for p in net.preset[t]:
        if counts.get(p, 0) < 1:
            raise PetriNetError(f"transition {t!r} is not enabled at {m!r}")
        counts[p] -= 1
    for p in net.postset[t]:
        counts[p] = counts.get(p, 0) + 1
    return Marking(counts)


class AcceptingPetriNet:
    """A labeled net with an initial marking and pairwise-incomparable final markings."""

    def __init__(self, net: PetriNet, initial: Marking | Mapping[str, int], finals: Iterable[Marking | Mapping[str, int]]):
        self.net = net
        self.initial = initial if isinstance(initial, Marking) else Marking(initial)
        fin = []
        for f in finals:
            f = f if isinstance(f, Marking) else Marking(f)
            if f not in fin:
                fin.append(f)
        if not fin:
            raise PetriNetError("an accepting Petri net needs at least one final marking")
        for i, a in enumerate(fin):
            for b in fin[i + 1:]:
                if a <= b or b <= a:
                    raise PetriNetError(f"final markings {a!r} and {b!r} are comparable")
        for m in [self.initial, *fin]:
            unknown = set(m) - set(net.places)
            if unknown:
                raise PetriNetError(f"marking refers to unknown places {sorted(unknown)}")
        self.finals: tuple[Marking, ...] = tuple(fin)
        self._automata: dict[int, object] = {}

    @property
    def alphabet(self) -> frozenset[str]:
        return self.net.labels

    def __repr__(self) -> str:
        return f"AcceptingPetriNet({self.net!r}, m0={self.initial!r}, finals={list(self.finals)!r})"

    def automaton(self, budget: int = DEFAULT_BUDGET):
        """Determinized label automaton (cached per budget)."""
        from .automaton import compile_automaton

        if budget not in self._automata:
            self._automata[budget] = compile_automaton(self, budget=budget)
        return self._automata[budget]


def tau_closure(net: PetriNet, m: Marking, budget: int = DEFAULT_BUDGET) -> set[Marking]:
    """All markings reachable from ``m`` through invisible transitions only."""
    seen = {m}
    stack = [m]
    while stack:
        cur = stack.pop()
        for t in enabled(net, cur):
            if net.transitions[t].invisible:
                nxt = fire(net, cur, t)
                if nxt not in seen:
                    seen.add(nxt)
                    if len(seen) > budget:
                        raise BudgetExceeded("tau-closure did not terminate within budget", visited=len(seen))
                    stack.append(nxt)
    return seen


def reachable_label_moves(apn: AcceptingPetriNet, m: Marking, budget: int = DEFAULT_BUDGET) -> set[tuple[str, Marking]]:
    """(label, marking) pairs reachable by tau steps followed by one visible firing."""
    net = apn.net
    moves = set()
    for cur in tau_closure(net, m, budget):
        for t in enabled(net, cur):
            label = net.transitions[t].label
            if label is not None:
                moves.add((label, fire(net, cur, t)))
    return moves


def accepts(apn: AcceptingPetriNet, word: Sequence[str], budget: int = DEFAULT_BUDGET) -> bool:
    """Whether ``word`` is in the language of ``apn``.

    Breadth-first search over (marking, consumed-prefix-length) pairs.
    """
    net = apn.net
    finals = set(apn.finals)
    word = tuple(word)
    n = len(word)
    start = (apn.initial, 0)
    seen = {start}
    queue = deque([start])
    while queue:
        m, i = queue.popleft()
        if i == n and m in finals:
            return True
        for t in enabled(net, m):
            label = net.transitions[t].label
            if label is None:
                nxt = (fire(net, m, t), i)
            elif i < n and label == word[i]:
                nxt = (fire(net, m, t), i + 1)
            else:
                continue
            if nxt not in seen:
                seen.add(nxt)
                if len(seen) > budget:
                    raise BudgetExceeded("language membership undecided", visited=len(seen))
                queue.append(nxt)
    return False


def smoke_check(apn: AcceptingPetriNet, budget: int = DEFAULT_BUDGET) -> list[str]:
    """Cheap soundness check over the full reachability graph.

    Returns a list of problems: no final marking reachable from the initial
    one, or transitions that occur in no accepted run. Empty means passed.
    """
    net = apn.net
    edges: dict[Marking, list[tuple[str, Marking]]] = {}
    stack = [apn.initial]
    edges[apn.initial] = []
    while stack:
        m = stack.pop()
        for t in sorted(enabled(net, m)):
            nxt = fire(net, m, t)
            edges[m].append((t, nxt))
            if nxt not in edges:
                if len(edges) >= budget:
                    raise BudgetExceeded("reachability graph exceeds budget", visited=len(edges))
                edges[nxt] = []
                stack.append(nxt)
    back: dict[Marking, list[Marking]] = {m: [] for m in edges}
    for m, out in edges.items():
        for _, nxt in out:
            back[nxt].append(m)
    good = {f for f in apn.finals if f in edges}
    stack = list(good)
    while stack:
        m = stack.pop()
        for p in back[m]:
            if p not in good:
                good.add(p)
                stack.append(p)
    problems = []
    if apn.initial not in good:
        problems.append("no final marking is reachable from the initial marking")
    used = {t for m, out in edges.items() if m in good for t, nxt in out if nxt in good}
    dead = sorted(set(net.transitions) - used)
    if dead:
        problems.append(f"transitions in no accepted run: {dead}")
    return problems
