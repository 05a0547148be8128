"""Pure NumPy/Python reference kernels for boundary matching.

These are the fallback implementations used when the JIT backend is
disabled via ``LABOV_NUMBA=0`` or numba is not installed.  The JIT
variants in ``_kernels_numba.py`` must stay line-for-line equivalent.
"""

from __future__ import annotations

import numpy as np


def boundary_match_tables(pos_a: np.ndarray, pos_b: np.ndarray, window: int):
    """DP tables for pairing two sorted arrays of boundary positions.

    A pairing is valid when |pos_a[i] - pos_b[j]| <= window, and only
    monotone (non-crossing) pairings are considered, which is optimal on
    a line.  The tables are filled back-to-front; cell [0, 0] holds the
    lexicographic optimum: maximum pair count, then minimum total offset.
    """
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
