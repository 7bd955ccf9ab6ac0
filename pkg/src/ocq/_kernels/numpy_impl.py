"""Pure-numpy kernel implementations (fallback backend)."""

from __future__ import annotations

import numpy as np

BACKEND_NAME = "numpy"


def expand_adjacency(src, offsets, neighbor, qual, qual_code):
    """Expand each source code to its distinct neighbors.

    src: int64 row sources (CSR row codes, one per input row).
    qual_code: qualifier filter, -1 for any.
    Returns (row_idx, neighbors): one output row per kept adjacency entry,
    deduplicated per (input row, neighbor).  Relies on CSR rows being sorted
    by neighbor then qualifier.
    """
    degrees = offsets[src + 1] - offsets[src]
    total = int(degrees.sum())
    if total == 0:
        return np.empty(0, dtype=np.int64), np.empty(0, dtype=np.int32)
    row_idx = np.repeat(np.arange(src.size, dtype=np.int64), degrees)
    starts = np.cumsum(degrees) - degrees
    within = np.arange(total, dtype=np.int64) - np.repeat(starts, degrees)
    pos = np.repeat(offsets[src], degrees) + within
    out_neighbor = neighbor[pos]
    if qual_code >= 0:
        keep = qual[pos] == qual_code
        row_idx, out_neighbor = row_idx[keep], out_neighbor[keep]
    if row_idx.size:
        first = np.empty(row_idx.size, dtype=bool)
        first[0] = True
        first[1:] = (row_idx[1:] != row_idx[:-1]) | (out_neighbor[1:] != out_neighbor[:-1])
        row_idx, out_neighbor = row_idx[first], out_neighbor[first]
    return row_idx, out_neighbor.astype(np.int32, copy=False)


def pairs_in_table(keys, table):
    """Membership of each key in a sorted int64 table."""
    if table.size == 0:
        return np.zeros(keys.size, dtype=np.bool_)
    pos = np.searchsorted(table, keys)
    pos[pos == table.size] = 0
    return table[pos] == keys


def group_count(parent_idx, n_parents):
    """Rows per parent index."""
    if parent_idx.size == 0:
        return np.zeros(int(n_parents), dtype=np.int64)
    return np.bincount(parent_idx, minlength=int(n_parents)).astype(np.int64, copy=False)


def group_duration_stats(parent_idx, values, n_parents):
    """Per-parent (min, max, sum, count) of int64 values."""
    n = int(n_parents)
    min_ = np.full(n, np.iinfo(np.int64).max, dtype=np.int64)
    max_ = np.full(n, np.iinfo(np.int64).min, dtype=np.int64)
    sum_ = np.zeros(n, dtype=np.int64)
    count = group_count(parent_idx, n)
    if parent_idx.size:
        np.minimum.at(min_, parent_idx, values)
        np.maximum.at(max_, parent_idx, values)
        np.add.at(sum_, parent_idx, values)
    return min_, max_, sum_, count
