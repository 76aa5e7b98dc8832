# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True
# distutils: language = c++
"""Compiled kernels. Same contracts as the functions in ``_kernels_py``."""

import numpy as np
cimport numpy as cnp
from libc.stdlib cimport malloc, free
from libcpp.algorithm cimport sort
from libcpp.map cimport map as cmap
from libcpp.unordered_map cimport unordered_map
from libcpp.unordered_set cimport unordered_set
from libcpp.vector cimport vector

ctypedef unsigned long long u64

cnp.import_array()

cdef enum:
    NOT_PROJECTED = -1
    NON_FITTING = -2
    OK = 0
    UNSAFE = 1
    OVER_BUDGET = 2


def segment_log(codes, offsets, label_map, table, accepting, outdegree):
    cdef const int[::1] c_codes = np.ascontiguousarray(codes, dtype=np.int32)
    cdef const long long[::1] c_off = np.ascontiguousarray(offsets, dtype=np.int64)
    cdef const int[::1] c_lmap = np.ascontiguousarray(label_map, dtype=np.int32)
    cdef const int[:, ::1] c_tab = np.ascontiguousarray(table, dtype=np.int32)
    cdef const unsigned char[::1] c_acc = np.ascontiguousarray(accepting, dtype=np.uint8)
    cdef const int[::1] c_deg = np.ascontiguousarray(outdegree, dtype=np.int32)
    cdef Py_ssize_t n_events = c_codes.shape[0]
    cdef Py_ssize_t n_traces = c_off.shape[0] - 1
    cdef int n_states = c_tab.shape[0]
    seg_arr = np.full(n_events, NOT_PROJECTED, dtype=np.int32)
    cdef int[::1] seg = seg_arr

    cdef Py_ssize_t maxlen = 0, t, k
    for t in range(n_traces):
        if c_off[t + 1] - c_off[t] > maxlen:
            maxlen = c_off[t + 1] - c_off[t]

    cdef Py_ssize_t *pos = <Py_ssize_t *> malloc((maxlen + 1) * sizeof(Py_ssize_t))
    cdef int *proj = <int *> malloc((maxlen + 1) * sizeof(int))
    cdef Py_ssize_t *best = <Py_ssize_t *> malloc((maxlen + 1) * sizeof(Py_ssize_t))
    cdef Py_ssize_t *choice = <Py_ssize_t *> malloc((maxlen + 1) * sizeof(Py_ssize_t))
    if pos == NULL or proj == NULL or best == NULL or choice == NULL:
        free(pos); free(proj); free(best); free(choice)
        raise MemoryError()

    cdef int n_seg = 0, s, lab
    cdef long long choice_sum = 0, n_moves = 0
    cdef Py_ssize_t i, j, n, b, ch, cand, end, q
    try:
        with nogil:
            for t in range(n_traces):
                n = 0
                for i in range(c_off[t], c_off[t + 1]):
                    lab = c_lmap[c_codes[i]]
                    if lab >= 0:
                        pos[n] = i
                        proj[n] = lab
                        n += 1
                if n == 0:
                    continue
                best[n] = 0
                for i in range(n - 1, -1, -1):
                    b = best[i + 1]
                    ch = -1
                    if n_states > 0:
                        s = 0
                        for j in range(i, n):
                            s = c_tab[s, proj[j]]
                            if s < 0:
                                break
                            if c_acc[s]:
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
                        seg[pos[i]] = NON_FITTING
                        i += 1
                        continue
                    s = 0
                    for q in range(i, end):
                        seg[pos[q]] = n_seg
                        choice_sum += c_deg[s]
                        n_moves += 1
                        s = c_tab[s, proj[q]]
                    n_seg += 1
                    i = end
    finally:
        free(pos); free(proj); free(best); free(choice)
    return seg_arr, n_seg, choice_sum, n_moves


cdef struct Net:
    int n_trans
    const u64 *pre
    const u64 *post
    const int *lab


cdef int _closure(Net *net, u64 m, vector[u64] *out, unordered_set[u64] *seen_all,
                  long long budget) nogil:
    """Tau-closure of ``m`` appended to ``out`` (unsorted)."""
    cdef unordered_set[u64] seen
    cdef vector[u64] stack
    cdef u64 cur, rest, nxt
    cdef int t
    seen.insert(m)
    stack.push_back(m)
    out.push_back(m)
    while stack.size():
        cur = stack.back()
        stack.pop_back()
        for t in range(net.n_trans):
            if net.lab[t] >= 0 or (cur & net.pre[t]) != net.pre[t]:
                continue
            rest = cur & ~net.pre[t]
            if rest & net.post[t]:
                return UNSAFE
            nxt = rest | net.post[t]
            if seen.count(nxt) == 0:
                seen.insert(nxt)
                seen_all.insert(nxt)
                if <long long> seen_all.size() > budget:
                    return OVER_BUDGET
                stack.push_back(nxt)
                out.push_back(nxt)
    return OK


def determinize_safe(pre, post, lab, u64 m0, finals, int n_labels, long long budget):
    cdef const u64[::1] c_pre = np.ascontiguousarray(pre, dtype=np.uint64)
    cdef const u64[::1] c_post = np.ascontiguousarray(post, dtype=np.uint64)
    cdef const int[::1] c_lab = np.ascontiguousarray(lab, dtype=np.int32)
    cdef const u64[::1] c_fin = np.ascontiguousarray(finals, dtype=np.uint64)
    cdef Net net
    net.n_trans = c_pre.shape[0]
    net.pre = &c_pre[0] if net.n_trans else NULL
    net.post = &c_post[0] if net.n_trans else NULL
    net.lab = &c_lab[0] if net.n_trans else NULL
    cdef unordered_set[u64] finals_set
    cdef Py_ssize_t f
    for f in range(c_fin.shape[0]):
        finals_set.insert(c_fin[f])

    cdef unordered_set[u64] seen_all
    cdef unordered_map[u64, vector[u64]] cache
    cdef cmap[vector[u64], int] state_id
    cdef vector[vector[u64]] states
    cdef vector[int] table
    cdef vector[unsigned char] acc
    cdef vector[vector[u64]] succ
    cdef vector[u64] start, cl, T
    cdef u64 m, rest, nxt
    cdef size_t si, k, q, w, r
    cdef int t, a, status = OK, acc_s

    with nogil:
        seen_all.insert(m0)
        status = _closure(&net, m0, &start, &seen_all, budget)
        if status == OK:
            sort(start.begin(), start.end())
            state_id[start] = 0
            states.push_back(start)
            succ.resize(n_labels)
            si = 0
            while si < states.size() and status == OK:
                for a in range(n_labels):
                    succ[a].clear()
                acc_s = 0
                for k in range(states[si].size()):
                    m = states[si][k]
                    if finals_set.count(m):
                        acc_s = 1
                    for t in range(net.n_trans):
                        if net.lab[t] < 0 or (m & net.pre[t]) != net.pre[t]:
                            continue
                        rest = m & ~net.pre[t]
                        if rest & net.post[t]:
                            status = UNSAFE
                            break
                        nxt = rest | net.post[t]
                        if cache.count(nxt) == 0:
                            seen_all.insert(nxt)
                            cl.clear()
                            status = _closure(&net, nxt, &cl, &seen_all, budget)
                            if status != OK:
                                break
                            cache[nxt] = cl
                        for q in range(cache[nxt].size()):
                            succ[net.lab[t]].push_back(cache[nxt][q])
                    if status != OK:
                        break
                if status != OK:
                    break
                acc.push_back(acc_s)
                for a in range(n_labels):
                    if succ[a].size() == 0:
                        table.push_back(-1)
                        continue
                    sort(succ[a].begin(), succ[a].end())
                    T.clear()
                    for q in range(succ[a].size()):
                        if q == 0 or succ[a][q] != succ[a][q - 1]:
                            T.push_back(succ[a][q])
                    if state_id.count(T) == 0:
                        r = states.size()
                        state_id[T] = <int> r
                        states.push_back(T)
                        if <long long> states.size() > budget:
                            status = OVER_BUDGET
                    table.push_back(state_id[T])
                si += 1
            if status == OK and <long long> seen_all.size() > budget:
                status = OVER_BUDGET

    n = <Py_ssize_t> acc.size()
    tab_arr = np.full((n, n_labels), -1, dtype=np.int32)
    acc_arr = np.zeros(n, dtype=np.uint8)
    cdef int[:, ::1] tv = tab_arr
    cdef unsigned char[::1] av = acc_arr
    cdef Py_ssize_t i, j
    if status == OK:
        for i in range(n):
            av[i] = acc[i]
            for j in range(n_labels):
                tv[i, j] = table[i * n_labels + j]
    return status, tab_arr, acc_arr, <long long> seen_all.size()


def minimize(table, accepting):
    cdef const int[:, ::1] tab = np.ascontiguousarray(table, dtype=np.int32)
    cdef const unsigned char[::1] acc = np.ascontiguousarray(accepting, dtype=np.uint8)
    cdef int n = tab.shape[0], k = tab.shape[1]
    cdef vector[vector[int]] rev
    cdef vector[char] live
    cdef vector[int] stack, cls, new_cls, key, rep, order, queue, rows, out_acc
    cdef cmap[vector[int], int] ids
    cdef int s, t, j, c, n_cls, m, tc, qi
    if n == 0:
        return np.zeros((0, k), dtype=np.int32), np.zeros(0, dtype=np.uint8)
    with nogil:
        rev.resize(n)
        live.resize(n, 0)
        for s in range(n):
            for j in range(k):
                t = tab[s, j]
                if t >= 0:
                    rev[t].push_back(s)
        for s in range(n):
            if acc[s]:
                live[s] = 1
                stack.push_back(s)
        while stack.size():
            t = stack.back()
            stack.pop_back()
            for m in range(<int> rev[t].size()):
                s = rev[t][m]
                if not live[s]:
                    live[s] = 1
                    stack.push_back(s)
    if not live[0]:
        return np.zeros((0, k), dtype=np.int32), np.zeros(0, dtype=np.uint8)
    with nogil:
        cls.resize(n, -1)
        new_cls.resize(n, -1)
        key.resize(k + 1)
        n_cls = 0
        m = 0
        for s in range(n):
            if live[s]:
                cls[s] = acc[s]
                if acc[s]:
                    m |= 2
                else:
                    m |= 1
        n_cls = (m & 1) + ((m >> 1) & 1)
        while True:
            ids.clear()
            for s in range(n):
                if not live[s]:
                    continue
                key[0] = cls[s]
                for j in range(k):
                    t = tab[s, j]
                    key[j + 1] = cls[t] if t >= 0 and live[t] else -1
                if ids.count(key) == 0:
                    c = <int> ids.size()
                    ids[key] = c
                new_cls[s] = ids[key]
            for s in range(n):
                cls[s] = new_cls[s]
            if <int> ids.size() == n_cls:
                break
            n_cls = <int> ids.size()
        rep.resize(n_cls, -1)
        for s in range(n):
            if live[s] and rep[cls[s]] < 0:
                rep[cls[s]] = s
        order.resize(n_cls, -1)
        order[cls[0]] = 0
        queue.push_back(cls[0])
        qi = 0
        while qi < <int> queue.size():
            c = queue[qi]
            s = rep[c]
            for j in range(k):
                t = tab[s, j]
                if t < 0 or not live[t]:
                    rows.push_back(-1)
                    continue
                tc = cls[t]
                if order[tc] < 0:
                    order[tc] = <int> queue.size()
                    queue.push_back(tc)
                rows.push_back(order[tc])
            out_acc.push_back(acc[s])
            qi += 1
    nq = <Py_ssize_t> queue.size()
    tab_arr = np.empty((nq, k), dtype=np.int32)
    acc_arr = np.empty(nq, dtype=np.uint8)
    cdef int[:, ::1] tv = tab_arr
    cdef unsigned char[::1] av = acc_arr
    cdef Py_ssize_t i
    for i in range(nq):
        av[i] = out_acc[i]
        for j in range(k):
            tv[i, j] = rows[i * k + j]
    return tab_arr, acc_arr
