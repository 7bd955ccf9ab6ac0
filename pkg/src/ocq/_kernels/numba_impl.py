"""Numba-compiled kernels (default backend when numba imports)."""

from __future__ import annotations

import numpy as np
from numba import njit

BACKEND_NAME = "numba"


@njit(cache=True, nogil=True)
def expand_adjacency(src, offsets, neighbor, qual, qual_code):
    n = src.size
    total = 0
    for i in range(n):
        total += offsets[src[i] + 1] - offsets[src[i]]
    row_idx = np.empty(total, dtype=np.int64)
    out_neighbor = np.empty(total, dtype=np.int32)
    k = 0
    for i in range(n):
        lo = offsets[src[i]]
        hi = offsets[src[i] + 1]
        prev = np.int32(-1)
        for j in range(lo, hi):
            if qual_code >= 0 and qual[j] != qual_code:
                continue
            # rows sorted by neighbor: equal neighbors are adjacent
            if neighbor[j] == prev:
                continue
            prev = neighbor[j]
            row_idx[k] = i
            out_neighbor[k] = prev
            k += 1
    return row_idx[:k], out_neighbor[:k]


@njit(cache=True, nogil=True)
def pairs_in_table(keys, table):
    out = np.empty(keys.size, dtype=np.bool_)
    m = table.size
    for i in range(keys.size):
        key = keys[i]
        lo = 0
        hi = m
        while lo < hi:
            mid = (lo + hi) >> 1
            if table[mid] < key:
                lo = mid + 1
            else:
                hi = mid
        out[i] = lo < m and table[lo] == key
    return out


@njit(cache=True, nogil=True)
def group_count(parent_idx, n_parents):
    out = np.zeros(n_parents, dtype=np.int64)
    for i in range(parent_idx.size):
        out[parent_idx[i]] += 1
    return out


@njit(cache=True, nogil=True)
def group_duration_stats(parent_idx, values, n_parents):
    min_ = np.full(n_parents, np.iinfo(np.int64).max, dtype=np.int64)
    max_ = np.full(n_parents, np.iinfo(np.int64).min, dtype=np.int64)
    sum_ = np.zeros(n_parents, dtype=np.int64)
    count = np.zeros(n_parents, dtype=np.int64)
    for i in range(parent_idx.size):
        p = parent_idx[i]
        v = values[i]
        if v < min_[p]:
            min_[p] = v
        if v > max_[p]:
            max_[p] = v
        sum_[p] += v
        count[p] += 1
    return min_, max_, sum_, count
