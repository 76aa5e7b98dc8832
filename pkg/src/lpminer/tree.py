"""Process trees: the candidate representation used by discovery.

Operators are ``seq``, ``xor``, ``and`` and ``loop``. A loop has a body and
a redo child, where the redo child is either a single activity or ``tau``
(``loop(B, tau)`` is "B, one or more times"). Trees are kept in a canonical
form: nested ``seq``/``xor``/``and`` of the same kind are flattened, the
children of the commutative ``xor``/``and`` are sorted, and
``loop(loop(X, tau), tau)`` collapses to ``loop(X, tau)``.
"""

from __future__ import annotations

import re
from dataclasses import dataclass
from functools import cached_property
from typing import Iterator

import numpy as np

from .errors import DiscoveryError, PetriNetError
from .petri import DEFAULT_BUDGET, AcceptingPetriNet, Marking, PetriNet, Transition

SEQ, XOR, AND, LOOP = "seq", "xor", "and", "loop"
OPERATORS = (SEQ, XOR, AND, LOOP)
COMMUTATIVE = (XOR, AND)
TAU = "tau"


def _mark_canonical(t: "ProcessTree") -> "ProcessTree":
    # children are canonical already, so t is its own canonical form
    t.__dict__["_canonical"] = t
    return t


@dataclass(frozen=True)
class ProcessTree:
    op: str | None = None  # None for a leaf
    label: str | None = None  # activity of a leaf; None for a tau leaf
    children: tuple["ProcessTree", ...] = ()

    # ------------------------------------------------------------------ shape

    @property
    def is_leaf(self) -> bool:
        return self.op is None

    @property
    def is_tau(self) -> bool:
        return self.op is None and self.label is None

    @property
    def is_tau_loop(self) -> bool:
        return self.op == LOOP and self.children[1].is_tau

    @cached_property
    def activities(self) -> tuple[str, ...]:
        if self.is_leaf:
            return () if self.label is None else (self.label,)
        return tuple(a for c in self.children for a in c.activities)

    @property
    def n_activities(self) -> int:
        return len(set(self.activities))

    def __str__(self) -> str:
        return self.text

    @cached_property
    def text(self) -> str:
        if self.is_leaf:
            return TAU if self.label is None else _quote(self.label)
        return f"{self.op}({','.join(c.text for c in self.children)})"

    def __repr__(self) -> str:
        return f"ProcessTree({self.text})"

    # -------------------------------------------------------------- canonical

    def canonical(self) -> "ProcessTree":
        return self._canonical

    @cached_property
    def _canonical(self) -> "ProcessTree":
        if self.is_leaf:
            return self
        kids = [c.canonical() for c in self.children]
        if self.op == LOOP:
            if len(kids) != 2:
                raise DiscoveryError("loop needs exactly a body and a redo child")
            body, redo = kids
            if redo.is_tau and body.is_tau_loop:
                return body
            return _mark_canonical(ProcessTree(LOOP, None, (body, redo)))
        flat: list[ProcessTree] = []
        for k in kids:
            if k.op == self.op:
                flat.extend(k.children)
            else:
                flat.append(k)
        if self.op in COMMUTATIVE:
            flat.sort(key=lambda t: t.text)
        if len(flat) == 1:
            return flat[0]
        return _mark_canonical(ProcessTree(self.op, None, tuple(flat)))

    # ------------------------------------------------------------ semantics

    def last_activities(self) -> frozenset[str]:
        """Activities that can end a word of the tree's language."""
        if self.is_leaf:
            return frozenset() if self.label is None else frozenset([self.label])
        if self.op == SEQ:
            out: set[str] = set()
            for c in reversed(self.children):
                out |= c.last_activities()
                if not c.nullable():
                    break
            return frozenset(out)
        if self.op == LOOP:
            return self.children[0].last_activities()
        return frozenset().union(*(c.last_activities() for c in self.children))

    def nullable(self) -> bool:
        """Whether the empty word is in the language."""
        if self.is_leaf:
            return self.label is None
        if self.op == XOR:
            return any(c.nullable() for c in self.children)
        if self.op == LOOP:
            return self.children[0].nullable()
        return all(c.nullable() for c in self.children)

    def nodes(self) -> Iterator[tuple[tuple[int, ...], "ProcessTree"]]:
        """Pre-order (path, subtree) pairs."""
        yield (), self
        for i, c in enumerate(self.children):
            for path, sub in c.nodes():
                yield (i,) + path, sub

    def replace(self, path: tuple[int, ...], new: "ProcessTree") -> "ProcessTree":
        if not path:
            return new
        i = path[0]
        kids = list(self.children)
        kids[i] = kids[i].replace(path[1:], new)
        return ProcessTree(self.op, self.label, tuple(kids))


def leaf(label: str) -> ProcessTree:
    return ProcessTree(None, label)


def tau() -> ProcessTree:
    return ProcessTree(None, None)


def _node(op: str, kids) -> ProcessTree:
    return ProcessTree(op, None, tuple(leaf(k) if isinstance(k, str) else k for k in kids))


def seq(*kids) -> ProcessTree:
    return _node(SEQ, kids)


def xor(*kids) -> ProcessTree:
    return _node(XOR, kids)


def par(*kids) -> ProcessTree:
    return _node(AND, kids)


def loop(body, redo=None) -> ProcessTree:
    return _node(LOOP, (body, tau() if redo is None else redo))


# ---------------------------------------------------------------------------
# text form: seq(A, and(loop(B, tau), C)); quote labels with spaces or commas

_PLAIN = re.compile(r"^[A-Za-z0-9_.:\-/|#]+$")
_TOKEN = re.compile(r"\s*(?:(\()|(\))|(,)|'((?:[^'\\]|\\.)*)'|\"((?:[^\"\\]|\\.)*)\"|([^\s(),'\"]+))")


def _quote(label: str) -> str:
    if _PLAIN.match(label) and label not in OPERATORS and label != TAU:
        return label
    return "'" + label.replace("\\", "\\\\").replace("'", "\\'") + "'"


def parse_tree(text: str) -> ProcessTree:
    tokens: list[tuple[str, str]] = []
    pos = 0
    text = text.strip()
    while pos < len(text):
        m = _TOKEN.match(text, pos)
        if not m or m.end() == pos:
            raise DiscoveryError(f"cannot parse process tree at {text[pos:]!r}")
        pos = m.end()
        if m.group(1):
            tokens.append(("(", "("))
        elif m.group(2):
            tokens.append((")", ")"))
        elif m.group(3):
            tokens.append((",", ","))
        elif m.group(4) is not None or m.group(5) is not None:
            raw = m.group(4) if m.group(4) is not None else m.group(5)
            tokens.append(("str", re.sub(r"\\(.)", r"\1", raw)))
        else:
            tokens.append(("word", m.group(6)))
    i = 0

    def expr() -> ProcessTree:
        nonlocal i
        if i >= len(tokens):
            raise DiscoveryError("unexpected end of process tree text")
        kind, val = tokens[i]
        i += 1
        if kind == "str":
            return leaf(val)
        if kind != "word":
            raise DiscoveryError(f"unexpected {val!r} in process tree text")
        if i < len(tokens) and tokens[i][0] == "(":
            op = {"and": AND, "par": AND, "seq": SEQ, "xor": XOR, "loop": LOOP}.get(val)
            if op is None:
                raise DiscoveryError(f"unknown operator {val!r}")
            i += 1
            kids = [expr()]
            while i < len(tokens) and tokens[i][0] == ",":
                i += 1
                kids.append(expr())
            if i >= len(tokens) or tokens[i][0] != ")":
                raise DiscoveryError("missing ')' in process tree text")
            i += 1
            if op == LOOP:
                if len(kids) == 1:
                    kids.append(tau())
                if len(kids) != 2:
                    raise DiscoveryError("loop takes a body and an optional redo child")
            elif len(kids) < 2:
                raise DiscoveryError(f"{op} needs at least two children")
            return ProcessTree(op, None, tuple(kids))
        if val == TAU:
            return tau()
        return leaf(val)

    tree = expr()
    if i != len(tokens):
        raise DiscoveryError(f"trailing input in process tree text: {tokens[i:]}")
    return tree


# ---------------------------------------------------------------------------
# translation to an accepting Petri net


def _translate(tree: ProcessTree) -> tuple[int, list[tuple[tuple[int, ...], tuple[int, ...], str | None]]]:
    """Places are 0..n-1 (0 is the source, 1 the sink); transitions as (pre, post, label)."""
    n_places = 0
    transitions: list[tuple[tuple[int, ...], tuple[int, ...], str | None]] = []

    def new_place() -> int:
        nonlocal n_places
        n_places += 1
        return n_places - 1

    def build(node: ProcessTree, src: int, dst: int) -> None:
        if node.is_leaf:
            transitions.append(((src,), (dst,), node.label))
        elif node.op == SEQ:
            cur = src
            for k, c in enumerate(node.children):
                nxt = dst if k == len(node.children) - 1 else new_place()
                build(c, cur, nxt)
                cur = nxt
        elif node.op == XOR:
            for c in node.children:
                build(c, src, dst)
        elif node.op == AND:
            pairs = [(new_place(), new_place()) for _ in node.children]
            transitions.append(((src,), tuple(a for a, _ in pairs), None))
            transitions.append((tuple(b for _, b in pairs), (dst,), None))
            for c, (a, b) in zip(node.children, pairs):
                build(c, a, b)
        elif node.op == LOOP:
            body, redo = node.children
            a, b = new_place(), new_place()
            transitions.append(((src,), (a,), None))
            transitions.append(((b,), (dst,), None))
            build(body, a, b)
            build(redo, b, a)
        else:
            raise PetriNetError(f"unknown operator {node.op!r}")

    source, sink = new_place(), new_place()
    build(tree, source, sink)
    return n_places, transitions


def tree_to_apn(tree: ProcessTree) -> AcceptingPetriNet:
    """Block-structured translation into a sound workflow net.

    One source place holds the initial token and one sink place is the
    only final marking. Concurrency uses a tau split and a tau join; a loop
    wraps its body between tau entry/exit transitions and a redo path back.
    """
    n_places, trans = _translate(tree)
    places = [f"p{i}" for i in range(n_places)]
    transitions = [Transition(f"t{k}", label) for k, (_, _, label) in enumerate(trans)]
    arcs = []
    for k, (pre, post, _) in enumerate(trans):
        arcs.extend((places[p], f"t{k}") for p in pre)
        arcs.extend((f"t{k}", places[p]) for p in post)
    net = PetriNet(places, transitions, arcs, labels=tree.activities)
    return AcceptingPetriNet(net, Marking([places[0]]), [Marking([places[1]])])


_SINK_FINAL = np.array([2], dtype=np.uint64)  # place 1 is the sink


def tree_automaton(tree: ProcessTree, budget: int = DEFAULT_BUDGET):
    """Minimal DFA of ``tree_to_apn(tree)`` without building the net objects."""
    from .automaton import compile_safe_arrays

    n_places, trans = _translate(tree)
    if n_places > 64:
        return tree_to_apn(tree).automaton(budget)
    labels = sorted(set(tree.activities))
    lidx = {a: j for j, a in enumerate(labels)}
    pre, post, lab = [], [], []
    for src, dst, label in trans:
        m = 0
        for p in src:
            m |= 1 << p
        pre.append(m)
        m = 0
        for p in dst:
            m |= 1 << p
        post.append(m)
        lab.append(-1 if label is None else lidx[label])
    return compile_safe_arrays(
        labels, np.array(pre, dtype=np.uint64), np.array(post, dtype=np.uint64),
        np.array(lab, dtype=np.int32), 1, _SINK_FINAL, budget,
    )
