"""Graphviz DOT rendering of accepting Petri nets and label automata."""

from __future__ import annotations

from .automaton import LabelAutomaton
from .petri import AcceptingPetriNet


def _q(s: str) -> str:
    return '"' + s.replace("\\", "\\\\").replace('"', '\\"') + '"'


def net_to_dot(apn: AcceptingPetriNet, *, title: str = "") -> str:
    """Places are circles with initial tokens drawn as dots; places of a
    final marking are hatched (``style=diagonals``). Visible transitions are
    boxes, tau transitions filled black bars."""
    net = apn.net
    final_places = {p for f in apn.finals for p in f}
    lines = ["digraph lpm {", "  rankdir=LR;"]
    if title:
        lines.append(f"  label={_q(title)};")
    for p in net.places:
        tokens = apn.initial[p]
        label = "&bull;" * tokens if tokens <= 3 else str(tokens)
        style = ", style=diagonals" if p in final_places else ""
        lines.append(f"  {_q(p)} [shape=circle{style}, label=<{label}>, xlabel={_q(p)}, width=0.4, fixedsize=true];")
    for tid in sorted(net.transitions):
        t = net.transitions[tid]
        if t.label is None:
            lines.append(f"  {_q(tid)} [shape=box, style=filled, fillcolor=black, label=\"\", width=0.15, height=0.5];")
        else:
            lines.append(f"  {_q(tid)} [shape=box, label={_q(t.label)}];")
    for src, dst in sorted(net.arcs):
        lines.append(f"  {_q(src)} -> {_q(dst)};")
    lines.append("}")
    return "\n".join(lines) + "\n"


def automaton_to_dot(auto: LabelAutomaton, *, title: str = "") -> str:
    lines = ["digraph dfa {", "  rankdir=LR;", '  __start [shape=point, label=""];']
    if title:
        lines.append(f"  label={_q(title)};")
    for s in range(auto.n_states):
        shape = "doublecircle" if auto.accepting[s] else "circle"
        lines.append(f"  s{s} [shape={shape}, label=\"{s}\"];")
    if auto.n_states:
        lines.append("  __start -> s0;")
    for s in range(auto.n_states):
        for j, a in enumerate(auto.labels):
            t = int(auto.table[s, j])
            if t >= 0:
                lines.append(f"  s{s} -> s{t} [label={_q(a)}];")
    lines.append("}")
    return "\n".join(lines) + "\n"


__all__ = ["net_to_dot", "automaton_to_dot"]
