"""Rank maintenance over growing prefixes of a c-sample dataset.

The observation model is a matrix of n independent vectors by c coordinates,
where column l holds sample l. Rank statistics over the prefix of the first
k rows need the per-sample sums of (mid)ranks in the pooled kc observations;
recomputing those from scratch for every k costs O(n^2 log n) over a full
sweep. The accumulator here maintains them incrementally with per-sample
Fenwick trees over a compressed value domain, for O(c^2 log(kc)) per row.

All rank bookkeeping is integer-exact: internally rank sums are stored
doubled, so midranks (which are halves) never touch floating point until
the caller divides by two.
"""

import numpy as np
from scipy.stats import rankdata

from ._kernels import rank_sum_trace
from ._validation import check_matrix, check_vector

__all__ = ["CSampleDataset", "RankAccumulator", "batch_ranks", "prefix_rank_sums"]


class CSampleDataset:
    """n observation vectors by c coordinates; column l is sample l.

    Parameters
    ----------
    values : array_like of shape (n, c)
        Finite real observations, one row per vector. c >= 2.
    """

    def __init__(self, values):
        self.values = check_matrix(values)
        self.n, self.c = self.values.shape

    def __repr__(self):
        return f"CSampleDataset(n={self.n}, c={self.c})"

    def __eq__(self, other):
        if not isinstance(other, CSampleDataset):
            return NotImplemented
        return self.values.shape == other.values.shape and np.array_equal(
            self.values, other.values
        )


def batch_ranks(values):
    """Midranks of a sequence, 1-based; ties share the mean of their span.

    Parameters
    ----------
    values : array_like, 1-D
        Non-empty finite sequence.

    Returns
    -------
    ndarray of the same length; sums to m(m+1)/2.
    """
    arr = check_vector(values)
    return rankdata(arr, method="average")


def _compress(values):
    """Map a value matrix onto integer codes over its sorted distinct domain."""
    uniq, codes = np.unique(values, return_inverse=True)
    return uniq, codes.reshape(values.shape).astype(np.int64)


def prefix_rank_sums(values):
    """Per-sample midrank sums after every prefix row.

    Parameters
    ----------
    values : array_like of shape (n, c)

    Returns
    -------
    ndarray of shape (n, c) where entry [k-1, l] is the sum of midranks of
    sample l's first k observations within the pooled kc-observation prefix.
    """
    arr = check_matrix(values)
    uniq, codes = _compress(arr)
    return rank_sum_trace(codes, len(uniq)) / 2.0


class RankAccumulator:
    """Incremental per-sample rank sums over a growing row prefix.

    The value domain must be known up front (simulation sweeps and
    permutation replays always know all values before the prefix pass), so
    the accumulator is built from the full dataset and rows are then pushed
    in any order. Tie detection is exact bitwise equality.

    Parameters
    ----------
    data : CSampleDataset
        Supplies the value domain and the column count.
    """

    def __init__(self, data):
        if not isinstance(data, CSampleDataset):
            data = CSampleDataset(data)
        self.c = data.c
        self._domain = np.unique(data.values)
        size = len(self._domain)
        self._tree = np.zeros((self.c, size + 1), dtype=np.int64)
        self._r2 = np.zeros(self.c, dtype=np.int64)
        self.k = 0

    @property
    def N(self):
        """Pooled observation count of the current prefix."""
        return self.k * self.c

    def _prefix_count(self, l, idx):
        """Count of sample l's inserted values with code <= idx - 1."""
        s = 0
        i = idx
        tree_l = self._tree[l]
        while i > 0:
            s += int(tree_l[i])
            i &= i - 1
        return s

    def push_vector(self, row):
        """Insert one observation vector and update every rank sum.

        Parameters
        ----------
        row : array_like of length c
            Values must belong to the construction-time value domain.

        Returns
        -------
        self
        """
        row = check_vector(row, name="row")
        if len(row) != self.c:
            raise ValueError(f"row has length {len(row)}, expected {self.c}")
        codes = np.searchsorted(self._domain, row)
        if np.any(codes >= len(self._domain)) or np.any(self._domain[codes] != row):
            raise ValueError("row contains values outside the accumulator's domain")

        c = self.c
        t = self.k
        lt = np.empty((c, c), dtype=np.int64)
        leq = np.empty((c, c), dtype=np.int64)
        for j in range(c):
            v = int(codes[j])
            for l in range(c):
                lt[l, j] = self._prefix_count(l, v)
                leq[l, j] = self._prefix_count(l, v + 1)
        for l in range(c):
            vl = codes[l]
            delta2 = 0
            for j in range(c):
                greater = t - leq[l, j]
                equal = leq[l, j] - lt[l, j]
                delta2 += 2 * int(greater) + int(equal)
            wless = int(np.sum(codes < vl))
            weq = int(np.sum(codes == vl))
            less_all = int(lt[:, l].sum())
            eq_all = int((leq[:, l] - lt[:, l]).sum())
            midrank2 = 2 * (less_all + wless) + (eq_all + weq) + 1
            self._r2[l] += delta2 + midrank2
        size = len(self._domain)
        for l in range(c):
            i = int(codes[l]) + 1
            tree_l = self._tree[l]
            while i <= size:
                tree_l[i] += 1
                i += i & (-i)
        self.k = t + 1
        return self

    def rank_sums(self):
        """Current (R_1, ..., R_c); raises if no rows were pushed."""
        if self.k == 0:
            raise RuntimeError("rank_sums on an empty accumulator")
        return self._r2 / 2.0
