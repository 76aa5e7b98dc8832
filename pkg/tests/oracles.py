"""Independent reference implementations used as test oracles.

None of these share code with the package's replay, automaton or search
code: languages come from direct tree semantics, segmentations from brute
force over all block decompositions, and the candidate space from a
top-down enumeration of canonical trees.
"""

from __future__ import annotations

import itertools
from functools import lru_cache
from typing import Callable, Iterable, Sequence

from lpminer.tree import LOOP, ProcessTree, leaf, loop, par, seq, xor

Word = tuple[str, ...]


# ---------------------------------------------------------------------------
# bounded languages from tree semantics


def _concat(xs: frozenset[Word], ys: frozenset[Word], n: int) -> frozenset[Word]:
    return frozenset(x + y for x in xs for y in ys if len(x) + len(y) <= n)


def _shuffle(x: Word, y: Word) -> set[Word]:
    if not x:
        return {y}
    if not y:
        return {x}
    return {(x[0],) + w for w in _shuffle(x[1:], y)} | {(y[0],) + w for w in _shuffle(x, y[1:])}


@lru_cache(maxsize=None)
def words(tree: ProcessTree, n: int) -> frozenset[Word]:
    """All words of length <= n in the language of ``tree``."""
    if tree.is_leaf:
        return frozenset({()}) if tree.label is None else frozenset({(tree.label,)})
    kids = [words(c, n) for c in tree.children]
    if tree.op == "seq":
        out = frozenset({()})
        for k in kids:
            out = _concat(out, k, n)
        return out
    if tree.op == "xor":
        return frozenset().union(*kids)
    if tree.op == "and":
        out = {()}
        for k in kids:
            out = {w for x in out for y in k if len(x) + len(y) <= n for w in _shuffle(x, y)}
        return frozenset(out)
    assert tree.op == LOOP
    body, redo = kids
    out = set(body)
    frontier = set(body)
    while frontier:
        nxt = set(_concat(_concat(frozenset(frontier), redo, n), body, n)) - out
        out |= nxt
        frontier = nxt
    return frozenset(out)


def accepts(tree: ProcessTree, word: Sequence[str], slack: int = 0) -> bool:
    return tuple(word) in words(tree, len(word) + slack)


# ---------------------------------------------------------------------------
# maximal-fit segmentation by brute force


def max_fitting(projected: Sequence[str], member: Callable[[Word], bool]) -> int:
    """Largest number of events covered by disjoint consecutive accepted blocks.

    Tries every composition of the sequence into blocks (2^(n-1) of them).
    """
    n = len(projected)
    if n == 0:
        return 0
    best = 0
    for cuts in itertools.product((False, True), repeat=n - 1):
        start, total = 0, 0
        for i in range(1, n + 1):
            if i == n or cuts[i - 1]:
                block = tuple(projected[start:i])
                if member(block):
                    total += len(block)
                start = i
        best = max(best, total)
    return best


# ---------------------------------------------------------------------------
# candidate space: canonical trees over distinct activities


def _set_partitions(items: list[str]):
    if not items:
        yield []
        return
    first, rest = items[0], items[1:]
    for part in _set_partitions(rest):
        for i in range(len(part)):
            yield part[:i] + [[first] + part[i]] + part[i + 1:]
        yield [[first]] + part


@lru_cache(maxsize=None)
def trees_over(acts: frozenset[str]) -> frozenset[ProcessTree]:
    """Every canonical tree using exactly the activities ``acts`` once each."""
    return frozenset(_plain(acts) | {loop(t) for t in _plain(acts)})


@lru_cache(maxsize=None)
def _plain(acts: frozenset[str]) -> frozenset[ProcessTree]:
    """Canonical trees over ``acts`` whose root is not a tau-loop."""
    items = sorted(acts)
    out: set[ProcessTree] = set()
    if len(items) == 1:
        out.add(leaf(items[0]))
        return frozenset(out)
    for part in _set_partitions(items):
        if len(part) < 2:
            continue
        blocks = [frozenset(b) for b in part]
        for op in ("xor", "and"):
            choices = [[t for t in trees_over(b) if t.op != op] for b in blocks]
            for kids in itertools.product(*choices):
                out.add((xor if op == "xor" else par)(*sorted(kids, key=lambda t: t.text)))
        choices_seq = [[t for t in trees_over(b) if t.op != "seq"] for b in blocks]
        for order in itertools.permutations(range(len(blocks))):
            for kids in itertools.product(*(choices_seq[i] for i in order)):
                out.add(seq(*kids))
    for b in items:
        for body in trees_over(acts - {b}):
            out.add(loop(body, leaf(b)))
    return frozenset(out)


def candidate_space(alphabet: Iterable[str], max_activities: int) -> list[ProcessTree]:
    """All trees with 2..max_activities distinct activities from ``alphabet``."""
    alphabet = sorted(set(alphabet))
    out = []
    for k in range(2, max_activities + 1):
        for combo in itertools.combinations(alphabet, k):
            out.extend(trees_over(frozenset(combo)))
    return sorted(out, key=lambda t: t.text)


def language_classes(trees: Iterable[ProcessTree]) -> dict[tuple, list[ProcessTree]]:
    classes: dict[tuple, list[ProcessTree]] = {}
    for t in trees:
        classes.setdefault(language_id(t), []).append(t)
    return classes


def exhaustive_ranking(trees: Iterable[ProcessTree], score: Callable[[ProcessTree], float], top_k: int):
    """Best tree per language class, ranked by score, fewer activities, text."""
    best = {}
    for lang, members in language_classes(trees).items():
        scored = [(-score(t), t.n_activities, t.text, t) for t in members]
        best[lang] = min(scored, key=lambda e: e[:3])
    ranked = sorted((e for e in best.values() if -e[0] > 0), key=lambda e: e[:3])
    return [(e[3].text, -e[0]) for e in ranked[:top_k]]


# ---------------------------------------------------------------------------
# exact language identity via Brzozowski derivatives
#
# Expressions: ("0",) empty set, ("1",) empty word, ("s", a), ("." , x, y),
# ("+", frozenset), ("|", x, y) shuffle, ("*", x). Smart constructors keep
# them in a normal form modulo associativity, commutativity and idempotence
# of "+", which makes the set of derivatives finite.

ZERO, ONE = ("0",), ("1",)


def _cat(x, y):
    if x == ZERO or y == ZERO:
        return ZERO
    if x == ONE:
        return y
    if y == ONE:
        return x
    if x[0] == ".":
        return _cat(x[1], _cat(x[2], y))
    return (".", x, y)


def _alt(*xs):
    items = set()
    for x in xs:
        if x[0] == "+":
            items |= x[1]
        elif x != ZERO:
            items.add(x)
    if not items:
        return ZERO
    if len(items) == 1:
        return next(iter(items))
    return ("+", frozenset(items))


def _shuf(x, y):
    if x == ZERO or y == ZERO:
        return ZERO
    if x == ONE:
        return y
    if y == ONE:
        return x
    x, y = sorted((x, y), key=repr)
    return ("|", x, y)


def _star(x):
    if x in (ZERO, ONE):
        return ONE
    if x[0] == "*":
        return x
    return ("*", x)


def to_expr(tree: ProcessTree):
    if tree.is_leaf:
        return ONE if tree.label is None else ("s", tree.label)
    kids = [to_expr(c) for c in tree.children]
    if tree.op == "seq":
        out = ONE
        for k in reversed(kids):
            out = _cat(k, out)
        return out
    if tree.op == "xor":
        return _alt(*kids)
    if tree.op == "and":
        out = ONE
        for k in kids:
            out = _shuf(out, k)
        return out
    body, redo = kids
    return _cat(body, _star(_cat(redo, body)))


def nullable(e) -> bool:
    k = e[0]
    if k in ("1", "*"):
        return True
    if k in ("0", "s"):
        return False
    if k == "+":
        return any(nullable(x) for x in e[1])
    return nullable(e[1]) and nullable(e[2])


def deriv(e, a):
    k = e[0]
    if k in ("0", "1"):
        return ZERO
    if k == "s":
        return ONE if e[1] == a else ZERO
    if k == "+":
        return _alt(*(deriv(x, a) for x in e[1]))
    if k == ".":
        d = _cat(deriv(e[1], a), e[2])
        return _alt(d, deriv(e[2], a)) if nullable(e[1]) else d
    if k == "|":
        return _alt(_shuf(deriv(e[1], a), e[2]), _shuf(e[1], deriv(e[2], a)))
    return _cat(deriv(e[1], a), e)


def language_id(tree: ProcessTree, alphabet: Sequence[str] | None = None, limit: int = 10_000) -> tuple:
    """Canonical minimal-DFA encoding of the tree's language.

    States are derivatives; the DFA is trimmed, reduced by partition
    refinement and renumbered breadth-first with letters in sorted order.
    Equal ids mean equal languages.
    """
    sigma = sorted(set(alphabet) if alphabet is not None else set(tree.activities))
    start = to_expr(tree)
    index = {start: 0}
    states = [start]
    delta = []
    for e in states:
        row = []
        for a in sigma:
            d = deriv(e, a)
            if d not in index:
                index[d] = len(states)
                states.append(d)
                if len(states) > limit:
                    raise RuntimeError("derivative explosion")
            row.append(index[d])
        delta.append(row)
    acc = [nullable(e) for e in states]
    n = len(states)
    # trim: keep states from which acceptance is reachable
    live = set(i for i in range(n) if acc[i])
    changed = True
    while changed:
        changed = False
        for i in range(n):
            if i not in live and any(t in live for t in delta[i]):
                live.add(i)
                changed = True
    if 0 not in live:
        return (tuple(sigma), ())
    block = {i: (acc[i],) for i in live}
    while True:
        sig = {i: (block[i], tuple(block.get(t) for t in delta[i])) for i in live}
        ids = {s: j for j, s in enumerate(sorted(set(sig.values()), key=repr))}
        new = {i: ids[sig[i]] for i in live}
        if len(set(new.values())) == len(set(block.values())):
            block = new
            break
        block = new
    order = {block[0]: 0}
    rep = {}
    for i in sorted(live):
        rep.setdefault(block[i], i)
    queue = [block[0]]
    rows = []
    for b in queue:
        i = rep[b]
        row = []
        for t in delta[i]:
            if t not in live:
                row.append(-1)
                continue
            if block[t] not in order:
                order[block[t]] = len(order)
                queue.append(block[t])
            row.append(order[block[t]])
        rows.append((acc[i], tuple(row)))
    return (tuple(sigma), tuple(rows))
