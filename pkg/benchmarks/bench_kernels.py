#!/usr/bin/env python3
"""Benchmark the compiled kernels against the pure-NumPy reference.

Covers the two hot paths: the pairwise pose-distance matrix (graph build)
and the DP relaxation step (sequence search). Run after building the
extension:

    python benchmarks/bench_kernels.py [--frames 600] [--joints 24] [--repeats 5]
"""

import argparse
import time

import numpy as np

from motiongraph._kernels import pyref

try:
    from motiongraph._kernels import _core
except ImportError:
    _core = None


def timeit(fn, repeats):
    best = float("inf")
    for _ in range(repeats):
        t0 = time.perf_counter()
        fn()
        best = min(best, time.perf_counter() - t0)
    return best


def bench_pairwise(impl, L, G, repeats):
    block = 128
    n = L.shape[0]

    def run():
        for row0 in range(0, n, block):
            impl.pairwise_block(L, G, row0, min(row0 + block, n))

    return timeit(run, repeats)


def bench_dp(impl, n_nodes, n_edges, steps, repeats, seed=0):
    rng = np.random.default_rng(seed)
    edges = sorted(
        {(int(rng.integers(0, n_nodes)), int(rng.integers(0, n_nodes)))
         for _ in range(n_edges)},
        key=lambda e: (e[1], e[0]),
    )
    edges = [(u, v) for u, v in edges if u != v]
    src = np.array([e[0] for e in edges], dtype=np.int32)
    dst = np.array([e[1] for e in edges], dtype=np.int32)
    w = rng.uniform(0, 2, len(edges))
    rows = rng.uniform(0, 1, size=(steps, n_nodes))
    hist = np.full((steps, n_nodes), -1, dtype=np.int32)

    def run():
        cost = rows[0].copy()
        for t in range(1, steps):
            cost, bp = impl.dp_relax(cost, src, dst, w, 1.0, rows[t], 0.0, 0, hist, t)
            hist[t] = bp

    return timeit(run, repeats)


def main():
    parser = argparse.ArgumentParser()
    parser.add_argument("--frames", type=int, default=600)
    parser.add_argument("--joints", type=int, default=24)
    parser.add_argument("--repeats", type=int, default=5)
    parser.add_argument("--steps", type=int, default=240)
    args = parser.parse_args()

    rng = np.random.default_rng(42)
    L = np.ascontiguousarray(rng.normal(size=(args.frames, 3 * args.joints)))
    G = np.ascontiguousarray(rng.normal(size=(args.frames, 3 * args.joints)))

    impls = [("python", pyref)] + ([("cython", _core)] if _core else [])
    print(f"pairwise matrix: {args.frames} frames x {args.joints} joints")
    results = {}
    for name, impl in impls:
        results[name] = bench_pairwise(impl, L, G, args.repeats)
        print(f"  {name:8s} {results[name] * 1e3:9.2f} ms")
    if _core:
        print(f"  speedup  {results['python'] / results['cython']:9.2f}x")

    n_nodes, n_edges = args.frames, args.frames * 12
    print(f"dp relaxation: {n_nodes} nodes, ~{n_edges} edges, {args.steps} steps")
    for name, impl in impls:
        results[name] = bench_dp(impl, n_nodes, n_edges, args.steps, args.repeats)
        print(f"  {name:8s} {results[name] * 1e3:9.2f} ms")
    if _core:
        print(f"  speedup  {results['python'] / results['cython']:9.2f}x")
    if not _core:
        print("compiled extension not built; only the reference backend was timed")


if __name__ == "__main__":
    main()
