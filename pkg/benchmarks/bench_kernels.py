#!/usr/bin/env python3
"""Benchmark the boundary-matching kernel: numba JIT vs pure NumPy.

Times the DP over unmatched-boundary arrays at several sizes, then a
corpus-level kappa_B workload through each backend.  Run:

    python benchmarks/bench_kernels.py
"""

from __future__ import annotations

import time

import numpy as np

from labovkit.segmetrics import _kernels


def _load_numba_kernel():
    try:
        from labovkit.segmetrics import _kernels_numba

        return _kernels_numba.boundary_match_tables
    except ImportError:
        return None


def make_pair(rng, n_boundaries, spread):
    base = np.sort(rng.choice(spread, size=n_boundaries, replace=False) + 1)
    jitter = rng.integers(-2, 3, size=n_boundaries)
    moved = np.unique(np.clip(base + jitter, 1, spread))
    return base.astype(np.int64), moved.astype(np.int64)


def time_kernel(kernel, pairs, repeats=3):
    best = float("inf")
    for _ in range(repeats):
        started = time.perf_counter()
        for pos_a, pos_b in pairs:
            kernel(pos_a, pos_b, 1)
        best = min(best, time.perf_counter() - started)
    return best


def main():
    rng = np.random.default_rng(7)
    numba_kernel = _load_numba_kernel()
    numpy_kernel = _kernels.boundary_match_tables

    print(f"{'boundaries':>10} | {'pairs':>6} | {'numpy (s)':>10} | "
          f"{'numba (s)':>10} | {'speedup':>8}")
    print("-" * 58)
    for n_boundaries, n_pairs in ((10, 2000), (40, 1000), (100, 400), (300, 40)):
        pairs = [make_pair(rng, n_boundaries, n_boundaries * 20) for _ in range(n_pairs)]
        if numba_kernel is not None:
            numba_kernel(*pairs[0], 1)  # compile outside the timer
            t_numba = time_kernel(numba_kernel, pairs)
        else:
            t_numba = float("nan")
        t_numpy = time_kernel(numpy_kernel, pairs)
        speedup = t_numpy / t_numba if t_numba == t_numba else float("nan")
        print(f"{n_boundaries:>10} | {n_pairs:>6} | {t_numpy:>10.4f} | "
              f"{t_numba:>10.4f} | {speedup:>7.1f}x")

    # end-to-end agreement workload (16 fragments x 3 coders)
    from labovkit.segmetrics import Segmentation, fleiss_kappa_b, random_segmentation

    corpus = {}
    for k in range(16):
        atoms = int(rng.integers(300, 801))
        count = atoms // 20
        corpus[f"f{k}"] = {
            f"c{i}": random_segmentation(atoms, count, int(rng.integers(0, 2**31)))
            for i in range(3)
        }
    started = time.perf_counter()
    for _ in range(20):
        fleiss_kappa_b(corpus)
    elapsed = time.perf_counter() - started
    from labovkit.segmetrics import KERNEL_BACKEND

    print(f"\nkappa_B on 16x3 corpus, 20 runs, active backend "
          f"({KERNEL_BACKEND}): {elapsed:.3f}s")
    print("set LABOV_NUMBA=0 and rerun to time the pure-numpy path end to end")


if __name__ == "__main__":
    main()
