"""Compiled vs pure-Python kernels on realistic inputs.

    python benchmarks/bench_kernels.py [--traces 2000] [--repeat 5]

Every kernel is run on identical inputs by both backends; results are
checked for equality before timings are reported.
"""

from __future__ import annotations

import argparse
import sys
import time

import numpy as np

from lpminer import kernels
from lpminer.synthetic import gen_synthetic
from lpminer.tree import _translate, parse_tree, tree_automaton

TREES = [
    "seq(A, and(loop(B), C))",
    "loop(and(A, B, xor(C, D)))",
    "and(loop(A), loop(B), loop(C), D, E)",
    "seq(xor(A, B), loop(and(C, D), E))",
]


def best_of(fn, repeat: int) -> float:
    times = []
    for _ in range(repeat):
        t0 = time.perf_counter()
        fn()
        times.append(time.perf_counter() - t0)
    return min(times)


def safe_arrays(tree):
    _, trans = _translate(tree)
    labels = sorted(set(tree.activities))
    lidx = {a: j for j, a in enumerate(labels)}
    pre = np.array([sum(1 << p for p in t[0]) for t in trans], dtype=np.uint64)
    post = np.array([sum(1 << p for p in t[1]) for t in trans], dtype=np.uint64)
    lab = np.array([-1 if t[2] is None else lidx[t[2]] for t in trans], dtype=np.int32)
    return pre, post, lab, 1, np.array([2], dtype=np.uint64), len(labels), 1_000_000


def same(a, b) -> bool:
    if isinstance(a, tuple):
        return len(a) == len(b) and all(same(x, y) for x, y in zip(a, b))
    if isinstance(a, np.ndarray):
        return np.array_equal(a, b)
    return a == b


def main(argv=None) -> int:
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--traces", type=int, default=2000)
    ap.add_argument("--repeat", type=int, default=5)
    args = ap.parse_args(argv)
    if kernels.segment_log_compiled is None:
        print("compiled kernels are not built; run `pip install -e . --no-build-isolation` first")
        return 1

    log = gen_synthetic("seq(A, and(loop(B), C, xor(D, E)))", args.traces, 0.3, 7)
    idx = log.index
    cases = []
    for text in TREES:
        tree = parse_tree(text)
        auto = tree_automaton(tree)
        seg = (idx.codes, idx.offsets, idx.label_map(auto.labels), auto.table, auto.accepting, auto.outdegree)
        cases.append((f"segment_log  {text}", kernels.segment_log_py, kernels.segment_log_compiled, seg))
        det = safe_arrays(tree)
        cases.append((f"determinize  {text}", kernels.determinize_safe_py, kernels.determinize_safe_compiled, det))
        _, table, acc, _ = kernels.determinize_safe_py(*det)
        cases.append((f"minimize     {text}", kernels.minimize_py, kernels.minimize_compiled, (table, acc)))

    print(f"log: {len(log)} traces, {log.n_events} events; best of {args.repeat}")
    print(f"{'kernel':58s} {'python':>10s} {'cython':>10s} {'speedup':>8s}")
    for name, py, cy, inputs in cases:
        if not same(py(*inputs), cy(*inputs)):
            print(f"MISMATCH in {name}", file=sys.stderr)
            return 1
        tp = best_of(lambda: py(*inputs), args.repeat)
        tc = best_of(lambda: cy(*inputs), args.repeat)
        print(f"{name:58s} {tp * 1e3:9.2f}ms {tc * 1e3:9.2f}ms {tp / tc:7.1f}x")
    return 0


if __name__ == "__main__":
    sys.exit(main())
