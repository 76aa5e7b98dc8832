"""Pure-Python replay kernel; reference semantics for the compiled twin in ``_kernels.pyx``."""

from __future__ import annotations

import numpy as np

NOT_PROJECTED = -1
NON_FITTING = -2

OK, UNSAFE, OVER_BUDGET = 0, 1, 2


def segment_log(codes, offsets, label_map, table, accepting, outdegree):
    """Segment every trace of a log against a label automaton.

    Each trace is projected through ``label_map`` (log activity code ->
    automaton label, -1 when outside the model alphabet) and split into
    fitting runs so that the number of fitting events is maximal. Among
    equally good segmentations a run is started as early as possible and
    made as long as possible.

    Returns ``(seg_id, n_segments, choice_sum, n_moves)``. ``seg_id`` holds,
    per event, the index of its fitting segment, ``-2`` for projected events
    that do not fit and ``-1`` for events outside the model alphabet.
    ``choice_sum`` adds up, over every move replayed inside a fitting
    segment, the number of labels the automaton offered at that point.
    """
    codes = np.asarray(codes)
    n_events = codes.shape[0]
    seg_id = np.full(n_events, NOT_PROJECTED, dtype=np.int32)
    n_states = table.shape[0]
    tab = table.tolist()
    acc = accepting.tolist()
    deg = outdegree.tolist()
    lmap = label_map.tolist()
    cl = codes.tolist()
    off = offsets.tolist()
    n_seg = 0
    choice_sum = 0
    n_moves = 0
    for t in range(len(off) - 1):
        pos = []
        proj = []
        for i in range(off[t], off[t + 1]):
            lab = lmap[cl[i]]
            if lab >= 0:
                pos.append(i)
                proj.append(lab)
        n = len(proj)
        if n == 0:
            continue
        best = [0] * (n + 1)
        choice = [-1] * n
        for i in range(n - 1, -1, -1):
            b = best[i + 1]
            ch = -1
            if n_states:
                s = 0
                for j in range(i, n):
                    s = tab[s][proj[j]]
                    if s < 0:
                        break
                    if acc[s]:
                        cand = j + 1 - i + best[j + 1]
                        if cand >= b:
                            b = cand
                            ch = j + 1
            best[i] = b
            choice[i] = ch
        i = 0
        while i < n:
            end = choice[i]
            if end < 0:
                seg_id[pos[i]] = NON_FITTING
                i += 1
                continue
            s = 0
            for q in range(i, end):
                seg_id[pos[q]] = n_seg
                choice_sum += deg[s]
                n_moves += 1
                s = tab[s][proj[q]]
            n_seg += 1
            i = end
    return seg_id, n_seg, choice_sum, n_moves


def determinize_safe(pre, post, lab, m0, finals, n_labels, budget):
    """Subset construction for a net whose markings fit in 64-bit masks.

    ``pre``/``post`` are per-transition place bitmasks and ``lab`` the label
    index (-1 for tau). DFA states are tau-closed marking sets, numbered in
    breadth-first order with labels visited in ascending order; state 0 is
    the start. Returns ``(status, table, accepting, visited)`` where status
    is ``OK``, ``UNSAFE`` (a place would hold two tokens) or ``OVER_BUDGET``
    (more than ``budget`` markings or states). The table is not trimmed.
    """
    trans = [(int(p), int(q), int(a)) for p, q, a in zip(pre, post, lab)]
    taus = [(p, q) for p, q, a in trans if a < 0]
    vis = [(p, q, a) for p, q, a in trans if a >= 0]
    finals = {int(f) for f in finals}
    seen_all = {int(m0)}
    empty = np.zeros((0, n_labels), dtype=np.int32), np.zeros(0, dtype=np.uint8)

    class _Stop(Exception):
        def __init__(self, status):
            self.status = status

    def closure(m):
        seen = {m}
        stack = [m]
        while stack:
            cur = stack.pop()
            for p, q in taus:
                if cur & p == p:
                    rest = cur & ~p
                    if rest & q:
                        raise _Stop(UNSAFE)
                    nxt = rest | q
                    if nxt not in seen:
                        seen.add(nxt)
                        seen_all.add(nxt)
                        if len(seen_all) > budget:
                            raise _Stop(OVER_BUDGET)
                        stack.append(nxt)
        return seen

    cache = {}
    try:
        start = tuple(sorted(closure(int(m0))))
        state_id = {start: 0}
        states = [start]
        table = []
        acc = []
        si = 0
        while si < len(states):
            succ = [set() for _ in range(n_labels)]
            acc_s = 0
            for m in states[si]:
                if m in finals:
                    acc_s = 1
                for p, q, a in vis:
                    if m & p == p:
                        rest = m & ~p
                        if rest & q:
                            raise _Stop(UNSAFE)
                        nxt = rest | q
                        cl = cache.get(nxt)
                        if cl is None:
                            seen_all.add(nxt)
                            cl = cache[nxt] = closure(nxt)
                        succ[a] |= cl
            acc.append(acc_s)
            row = []
            for a in range(n_labels):
                if not succ[a]:
                    row.append(-1)
                    continue
                T = tuple(sorted(succ[a]))
                if T not in state_id:
                    state_id[T] = len(states)
                    states.append(T)
                    if len(states) > budget:
                        raise _Stop(OVER_BUDGET)
                row.append(state_id[T])
            table.append(row)
            si += 1
        if len(seen_all) > budget:
            raise _Stop(OVER_BUDGET)
    except _Stop as stop:
        return (stop.status, *empty, len(seen_all))
    tab = np.array(table, dtype=np.int32).reshape(len(table), n_labels)
    return OK, tab, np.array(acc, dtype=np.uint8), len(seen_all)


def minimize(table, accepting):
    """Trimmed minimal DFA in canonical numbering.

    States that cannot reach acceptance are dropped (missing moves act as a
    dead sink), equivalent states are merged by Moore refinement, and the
    result is renumbered breadth-first from the start state with labels in
    ascending order. Two automata over the same labels accept the same
    language iff their outputs are equal. An empty language gives 0 states.
    """
    n, k = np.shape(table)
    tab = np.asarray(table).tolist()
    acc = [int(a) for a in np.asarray(accepting).tolist()]
    rev = [[] for _ in range(n)]
    for s, row in enumerate(tab):
        for t in row:
            if t >= 0:
                rev[t].append(s)
    live = [bool(a) for a in acc]
    stack = [s for s in range(n) if acc[s]]
    while stack:
        t = stack.pop()
        for s in rev[t]:
            if not live[s]:
                live[s] = True
                stack.append(s)
    if n == 0 or not live[0]:
        return np.zeros((0, k), dtype=np.int32), np.zeros(0, dtype=np.uint8)
    tab = [[t if t >= 0 and live[t] else -1 for t in row] for row in tab]
    cls = acc[:]
    n_cls = len(set(cls[s] for s in range(n) if live[s]))
    while True:
        ids: dict = {}
        new = [
            ids.setdefault((cls[s],) + tuple(cls[t] if t >= 0 else -1 for t in tab[s]), len(ids)) if live[s] else -1
            for s in range(n)
        ]
        cls = new
        if len(ids) == n_cls:
            break
        n_cls = len(ids)
    rep: dict = {}
    for s in range(n):
        if live[s]:
            rep.setdefault(cls[s], s)
    order = {cls[0]: 0}
    queue = [cls[0]]
    rows = []
    out_acc = []
    for c in queue:
        s = rep[c]
        row = []
        for t in tab[s]:
            if t < 0:
                row.append(-1)
                continue
            tc = cls[t]
            if tc not in order:
                order[tc] = len(order)
                queue.append(tc)
            row.append(order[tc])
        rows.append(row)
        out_acc.append(acc[s])
    return np.array(rows, dtype=np.int32).reshape(len(rows), k), np.array(out_acc, dtype=np.uint8)
