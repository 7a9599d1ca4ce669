#!/usr/bin/env python3
"""Benchmark the numba kernels against their pure-numpy fallbacks.

Run: python benchmarks/bench_kernels.py
The numpy path is what you get with VCKIT_NO_NUMBA=1; both paths return
bit-identical results (asserted here before timing).
"""

import time

import numpy as np

from vckit import kernels


def timeit(fn, *args, repeat=3):
    best = float("inf")
    result = None
    for _ in range(repeat):
        t0 = time.perf_counter()
        result = fn(*args)
        best = min(best, time.perf_counter() - t0)
    return best, result


def bench_markov(n_steps=200_000, states=8, seed=0):
    rng = np.random.default_rng(seed)
    P = rng.random((states, states))
    P /= P.sum(axis=1, keepdims=True)
    cum = np.ascontiguousarray(np.cumsum(P, axis=1))
    us = rng.random(n_steps)
    kernels.markov_path_numba(cum, 0, us[:10])  # compile outside the timer
    t_nb, out_nb = timeit(kernels.markov_path_numba, cum, 0, us)
    t_np, out_np = timeit(kernels.markov_path_numpy, cum, 0, us, repeat=1)
    assert np.array_equal(out_nb, out_np)
    return f"markov_path ({n_steps:,} steps, {states} states)", t_nb, t_np


def bench_subset_search(points=48, seed=1):
    # every interval on a grid; no 3-subset is shattered, so the search
    # enumerates all C(points, 3) candidates
    members = [(a, b) for a in range(points) for b in range(a + 1, points + 1)]
    matrix = np.zeros((len(members), points), dtype=np.uint8)
    for j, (a, b) in enumerate(members):
        matrix[j, a:b] = 1
    kernels.full_trace_subset_numba(matrix[:, :8].copy(), 3, 10**9)  # compile
    t_nb, out_nb = timeit(kernels.full_trace_subset_numba, matrix, 3, 10**9)
    t_np, out_np = timeit(kernels.full_trace_subset_numpy, matrix, 3, 10**9, repeat=1)
    assert out_nb[0] == out_np[0] and out_nb[2] == out_np[2]
    label = (f"full_trace_subset ({len(members)} members, "
             f"C({points},3) = {out_nb[2]:,} subsets)")
    return label, t_nb, t_np


def main():
    if not kernels.HAVE_NUMBA:
        raise SystemExit("numba is not installed; nothing to compare")
    rows = [bench_markov(), bench_subset_search()]
    width = max(len(r[0]) for r in rows)
    print(f"{'kernel':<{width}}  {'numba':>10}  {'numpy':>10}  {'speedup':>8}")
    for label, t_nb, t_np in rows:
        print(f"{label:<{width}}  {t_nb:>9.4f}s  {t_np:>9.4f}s  {t_np / t_nb:>7.1f}x")


if __name__ == "__main__":
    main()
