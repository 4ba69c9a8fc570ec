"""Incremental prefix rank-sum kernel.

One pass over the rows of a code matrix maintains, per sample, a Fenwick
tree of value counts and the running sum of midranks. Rank sums are kept
as doubled integers so midrank halves stay exact; the caller divides by
two. The compiled and fallback paths run the same integer arithmetic and
produce identical output.
"""

import numpy as np

__all__ = ["rank_sum_trace", "NUMBA_AVAILABLE"]


def _rank_sum_trace_impl(codes, n_distinct):
    # codes: (n, c) int64 indices into the sorted distinct value domain.
    # Returns (n, c) int64 doubled per-sample rank sums after each row.
    n, c = codes.shape
    size = n_distinct
    tree = np.zeros((c, size + 1), dtype=np.int64)
    r2 = np.zeros(c, dtype=np.int64)
    out = np.empty((n, c), dtype=np.int64)
    lt = np.empty((c, c), dtype=np.int64)
    leq = np.empty((c, c), dtype=np.int64)
    for t in range(n):
        # per sample l, count previously inserted values < and <= codes[t, j]
        for j in range(c):
            v = codes[t, j]
            for l in range(c):
                s = np.int64(0)
                i = v
                while i > 0:
                    s += tree[l, i]
                    i &= i - 1
                lt[l, j] = s
                s = np.int64(0)
                i = v + 1
                while i > 0:
                    s += tree[l, i]
                    i &= i - 1
                leq[l, j] = s
        for l in range(c):
            vl = codes[t, l]
            # doubled rank gained by sample l's old observations: +2 per new
            # value below them, +1 per new value tying them
            delta2 = np.int64(0)
            for j in range(c):
                greater = t - leq[l, j]
                equal = leq[l, j] - lt[l, j]
                delta2 += 2 * greater + equal
            wless = np.int64(0)
            weq = np.int64(0)
            less_all = np.int64(0)
            eq_all = np.int64(0)
            for j in range(c):
                if codes[t, j] < vl:
                    wless += 1
                elif codes[t, j] == vl:
                    weq += 1
                less_all += lt[j, l]
                eq_all += leq[j, l] - lt[j, l]
            # doubled midrank of the incoming value itself, ties included
            midrank2 = 2 * (less_all + wless) + (eq_all + weq) + 1
            r2[l] += delta2 + midrank2
            out[t, l] = r2[l]
        for l in range(c):
            i = codes[t, l] + 1
            while i <= size:
                tree[l, i] += 1
                i += i & (-i)
    return out


try:
    from numba import njit

    rank_sum_trace = njit(cache=True)(_rank_sum_trace_impl)
    NUMBA_AVAILABLE = True
except ImportError:  # pragma: no cover - exercised only without numba
    rank_sum_trace = _rank_sum_trace_impl
    NUMBA_AVAILABLE = False
