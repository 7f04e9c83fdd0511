"""Pure-Python fallback implementations of the hot kernels.

Selected when the compiled extension is unavailable or when
``SPANALIGN_PURE_PYTHON=1``. Every function must stay bit-for-bit
equivalent to its compiled twin in ``_ckernels.pyx``, including tie
handling, so the two backends are interchangeable.

Span indices at this layer are 0-based *inclusive* (k, l) pairs into
the raw probability vectors; callers convert to half-open spans.
"""

from __future__ import annotations

import numpy as np


def best_span_kernel(p1, p2):
    """Argmax of p1[k] * p2[l] over k <= l in a single O(n) scan.

    Ties broken by smallest k, then smallest l. Returns (k, l, score).
    """
    v1 = np.ascontiguousarray(p1, dtype=np.float64).tolist()
    v2 = np.ascontiguousarray(p2, dtype=np.float64).tolist()
    n = len(v1)
    best_k = 0
    best_l = 0
    best_s = -1.0
    max_p1 = -1.0
    argk = 0
    for l in range(n):
        v = v1[l]
        if v > max_p1:
            max_p1 = v
            argk = l
        s = max_p1 * v2[l]
        if s > best_s or (s == best_s and argk < best_k):
            best_s = s
            best_k = argk
            best_l = l
    return best_k, best_l, best_s


def top_k_spans_kernel(p1, p2, k):
    """The k highest-scoring (k', l') pairs with k' <= l', exactly.

    Sorted by descending score, ties by smaller start then smaller end;
    identical to fully sorting all n(n+1)/2 pairs and taking the head.
    Returns (starts, ends, scores) as int64/int64/float64 arrays.
    """
    v1 = np.ascontiguousarray(p1, dtype=np.float64)
    v2 = np.ascontiguousarray(p2, dtype=np.float64)
    n = v1.shape[0]
    starts, ends = np.triu_indices(n)
    scores = v1[starts] * v2[ends]
    # np.lexsort keys: last key is primary.
    order = np.lexsort((ends, starts, -scores))[: min(k, scores.shape[0])]
    return (
        starts[order].astype(np.int64),
        ends[order].astype(np.int64),
        scores[order],
    )


def dp_solve_kernel(sim11, sim12, sim21, sim22, penalties):
    """Monotonic bead DP over precomputed similarity tables.

    ``simAB[i][j]`` is the similarity of the bead consuming ``a`` source
    sentences from ``i`` and ``b`` target sentences from ``j``; 1-0 and
    0-1 beads contribute no similarity. ``penalties`` follows
    ``BEAD_ORDER``. On score ties the earliest bead in ``BEAD_ORDER``
    wins. Returns (total score, choice table) where ``choice[i][j]`` is
    the bead index ending at (i, j), -1 at the origin.
    """
    s11 = np.ascontiguousarray(sim11, dtype=np.float64)
    s12 = np.ascontiguousarray(sim12, dtype=np.float64)
    s21 = np.ascontiguousarray(sim21, dtype=np.float64)
    s22 = np.ascontiguousarray(sim22, dtype=np.float64)
    pen = np.ascontiguousarray(penalties, dtype=np.float64).tolist()
    n, m = s11.shape
    neg = float("-inf")
    dp = [[neg] * (m + 1) for _ in range(n + 1)]
    choice = np.full((n + 1, m + 1), -1, dtype=np.int8)
    dp[0][0] = 0.0
    for i in range(n + 1):
        row = dp[i]
        for j in range(m + 1):
            if i == 0 and j == 0:
                continue
            best = neg
            arg = -1
            if i >= 1 and j >= 1:
                cand = dp[i - 1][j - 1] + s11[i - 1, j - 1] - pen[0]
                if cand > best:
                    best, arg = cand, 0
            if j >= 1:
                cand = row[j - 1] - pen[1]
                if cand > best:
                    best, arg = cand, 1
            if i >= 1:
                cand = dp[i - 1][j] - pen[2]
                if cand > best:
                    best, arg = cand, 2
            if i >= 1 and j >= 2:
                cand = dp[i - 1][j - 2] + s12[i - 1, j - 2] - pen[3]
                if cand > best:
                    best, arg = cand, 3
            if i >= 2 and j >= 1:
                cand = dp[i - 2][j - 1] + s21[i - 2, j - 1] - pen[4]
                if cand > best:
                    best, arg = cand, 4
            if i >= 2 and j >= 2:
                cand = dp[i - 2][j - 2] + s22[i - 2, j - 2] - pen[5]
                if cand > best:
                    best, arg = cand, 5
            row[j] = best
            choice[i, j] = arg
    return dp[n][m], choice
