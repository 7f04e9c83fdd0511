# cython: boundscheck=False, wraparound=False, initializedcheck=False
"""Compiled hot kernels: span argmax scan, exact top-k, bead DP.

Bit-for-bit equivalent to ``_pykernels``; see that module for the
contract of each function.
"""

import numpy as np

from libc.math cimport INFINITY
from libcpp.vector cimport vector
from libcpp.algorithm cimport partial_sort


cdef struct Item:
    double score
    Py_ssize_t k
    Py_ssize_t l


cdef bint item_less(const Item& a, const Item& b) noexcept nogil:
    # Descending score, then ascending start, then ascending end.
    if a.score != b.score:
        return a.score > b.score
    if a.k != b.k:
        return a.k < b.k
    return a.l < b.l


def best_span_kernel(double[::1] p1, double[::1] p2):
    cdef Py_ssize_t n = p1.shape[0]
    cdef Py_ssize_t l, best_k = 0, best_l = 0, argk = 0
    cdef double best_s = -1.0, max_p1 = -1.0, s, v
    for l in range(n):
        v = p1[l]
        if v > max_p1:
            max_p1 = v
            argk = l
        s = max_p1 * p2[l]
        if s > best_s or (s == best_s and argk < best_k):
            best_s = s
            best_k = argk
            best_l = l
    return best_k, best_l, best_s


def top_k_spans_kernel(double[::1] p1, double[::1] p2, Py_ssize_t k):
    cdef Py_ssize_t n = p1.shape[0]
    cdef Py_ssize_t total = n * (n + 1) // 2
    cdef Py_ssize_t out_n = k if k < total else total
    cdef vector[Item] items
    items.reserve(total)
    cdef Item it
    cdef Py_ssize_t a, b
    cdef double va
    for a in range(n):
        va = p1[a]
        for b in range(a, n):
            it.score = va * p2[b]
            it.k = a
            it.l = b
            items.push_back(it)
    partial_sort(items.begin(), items.begin() + out_n, items.end(), item_less)

    starts = np.empty(out_n, dtype=np.int64)
    ends = np.empty(out_n, dtype=np.int64)
    scores = np.empty(out_n, dtype=np.float64)
    cdef long long[::1] sv = starts
    cdef long long[::1] ev = ends
    cdef double[::1] cv = scores
    for a in range(out_n):
        sv[a] = items[a].k
        ev[a] = items[a].l
        cv[a] = items[a].score
    return starts, ends, scores


def dp_solve_kernel(
    double[:, ::1] sim11,
    double[:, ::1] sim12,
    double[:, ::1] sim21,
    double[:, ::1] sim22,
    double[::1] penalties,
):
    cdef Py_ssize_t n = sim11.shape[0]
    cdef Py_ssize_t m = sim11.shape[1]
    dp_arr = np.full((n + 1, m + 1), -INFINITY, dtype=np.float64)
    choice_arr = np.full((n + 1, m + 1), -1, dtype=np.int8)
    cdef double[:, ::1] dp = dp_arr
    cdef signed char[:, ::1] choice = choice_arr
    cdef Py_ssize_t i, j
    cdef double best, cand
    cdef signed char arg
    dp[0, 0] = 0.0
    for i in range(n + 1):
        for j in range(m + 1):
            if i == 0 and j == 0:
                continue
            best = -INFINITY
            arg = -1
            if i >= 1 and j >= 1:
                cand = dp[i - 1, j - 1] + sim11[i - 1, j - 1] - penalties[0]
                if cand > best:
                    best = cand
                    arg = 0
            if j >= 1:
                cand = dp[i, j - 1] - penalties[1]
                if cand > best:
                    best = cand
                    arg = 1
            if i >= 1:
                cand = dp[i - 1, j] - penalties[2]
                if cand > best:
                    best = cand
                    arg = 2
            if i >= 1 and j >= 2:
                cand = dp[i - 1, j - 2] + sim12[i - 1, j - 2] - penalties[3]
                if cand > best:
                    best = cand
                    arg = 3
            if i >= 2 and j >= 1:
                cand = dp[i - 2, j - 1] + sim21[i - 2, j - 1] - penalties[4]
                if cand > best:
                    best = cand
                    arg = 4
            if i >= 2 and j >= 2:
                cand = dp[i - 2, j - 2] + sim22[i - 2, j - 2] - penalties[5]
                if cand > best:
                    best = cand
                    arg = 5
            dp[i, j] = best
            choice[i, j] = arg
    return dp_arr[n, m].item(), choice_arr
