"""Numba-compiled kernels, equivalent to ``_kernels.py``."""

from __future__ import annotations

import numpy as np
from numba import njit


@njit(cache=True)
def boundary_match_tables(pos_a: np.ndarray, pos_b: np.ndarray, window: int):
    n = pos_a.shape[0]
    m = pos_b.shape[0]
    pairs = np.zeros((n + 1, m + 1), dtype=np.int64)
    cost = np.zeros((n + 1, m + 1), dtype=np.int64)
    for i in range(n - 1, -1, -1):
        for j in range(m - 1, -1, -1):
            best_p = pairs[i + 1, j]
            best_c = cost[i + 1, j]
            p = pairs[i, j + 1]
            c = cost[i, j + 1]
            if p > best_p or (p == best_p and c < best_c):
                best_p = p
                best_c = c
            d = pos_a[i] - pos_b[j]
            if d < 0:
                d = -d
            if d <= window:
                p = pairs[i + 1, j + 1] + 1
                c = cost[i + 1, j + 1] + d
                if p > best_p or (p == best_p and c < best_c):
                    best_p = p
                    best_c = c
            pairs[i, j] = best_p
            cost[i, j] = best_c
    return pairs, cost
