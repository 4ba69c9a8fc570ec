"""Logarithmic quantile estimation.

The log-average empirical distribution of a prefix trace assigns weight 1/k
to the statistic at prefix length k. Its quantiles estimate the limit
distribution's quantiles without any variance estimation, which is the
point: for dependent samples the asymptotic variance is unknown, but the
log-average quantile is still consistent. Quantiles are stabilized by
averaging over random reorderings of the data and an initial burn-in that
discards the heaviest, least-converged weights.
"""

from dataclasses import dataclass
from typing import Callable, Optional, Sequence, Tuple

import numpy as np
from scipy.stats import norm

from ._rng import PERMUTATION_STREAM, substream
from ._validation import check_alpha, check_count, check_vector
from .rank_engine import CSampleDataset
from .rank_statistics import scaled_kw_trace

__all__ = [
    "LogEmpiricalDistribution",
    "LqeQuantile",
    "TestReport",
    "build_distribution",
    "cdf",
    "quantile",
    "permuted_quantile",
    "lqe_test",
    "asclt_diagnostic",
]


class LogEmpiricalDistribution:
    """Discrete distribution with log-harmonic weights over trace values.

    Attributes
    ----------
    support : ndarray
        Sorted distinct trace values from prefixes k = burn_in+1 .. n.
    weights : ndarray
        Per-value summed weights 1/k, aligned with ``support``.
    burn_in : int
        Number of initial prefixes excluded from both weights and
        normalizer.
    normalizer : float
        C = sum of 1/k over the contributing prefixes.
    """

    def __init__(self, support, weights, burn_in, normalizer):
        self.support = np.asarray(support, dtype=float)
        self.weights = np.asarray(weights, dtype=float)
        self.burn_in = int(burn_in)
        self.normalizer = float(normalizer)
        if self.support.shape != self.weights.shape or self.support.ndim != 1:
            raise ValueError("support and weights must be matching 1-D arrays")
        if self.support.size == 0:
            raise ValueError("distribution needs at least one support point")
        if np.any(np.diff(self.support) <= 0):
            raise ValueError("support must be strictly increasing")
        if np.any(self.weights < 0):
            raise ValueError("weights must be nonnegative")
        total = float(self.weights.sum())
        if not np.isclose(total, self.normalizer, rtol=1e-12, atol=0):
            raise ValueError(
                f"weights sum {total} does not match normalizer {self.normalizer}"
            )
        # cumulative weight up to and including each support point
        self._cum = np.cumsum(self.weights)

    def cdf(self, t, strict=False):
        return cdf(self, t, strict=strict)

    def quantile(self, alpha):
        return quantile(self, alpha)

    def __repr__(self):
        return (
            f"LogEmpiricalDistribution({self.support.size} support points, "
            f"burn_in={self.burn_in}, C={self.normalizer:.6g})"
        )


@dataclass(frozen=True, eq=False)
class LqeQuantile:
    """Level, per-reordering quantiles, and their mean."""

    alpha: float
    per_permutation: np.ndarray
    averaged: float

    def __post_init__(self):
        per = np.asarray(self.per_permutation, dtype=float)
        object.__setattr__(self, "per_permutation", per)
        lo, hi = per.min(), per.max()
        if not lo - 1e-12 <= self.averaged <= hi + 1e-12:
            raise ValueError("averaged quantile outside per-permutation range")

    def __eq__(self, other):
        if not isinstance(other, LqeQuantile):
            return NotImplemented
        return (
            self.alpha == other.alpha
            and np.array_equal(self.per_permutation, other.per_permutation)
            and self.averaged == other.averaged
        )


@dataclass(frozen=True)
class TestReport:
    """Decision record for one dataset.

    ``quantile`` holds the critical value, the averaged (1 - alpha)
    log-quantile of the permuted traces. ``interval`` is the random
    interval [Q - t_upper, Q - t_lower] built from the 1 - alpha and alpha
    quantiles; it covers the statistic's centered location at asymptotic
    level 1 - 2*alpha.
    """

    statistic_value: float
    quantile: LqeQuantile
    reject: bool
    interval: Tuple[float, float]
    alpha: float
    permutations: int
    burn_in: int
    seed: int


def build_distribution(trace, burn_in=0):
    """Log-average empirical distribution of a prefix trace.

    Prefix k contributes weight 1/k for k = burn_in+1 .. n; the first
    burn_in prefixes are excluded from the weights and from the
    normalizer C alike.
    """
    values = check_vector(trace, name="trace")
    n = values.size
    burn_in = check_count(burn_in, 0, "burn_in")
    if burn_in >= n:
        raise ValueError(f"burn_in={burn_in} must be smaller than trace length {n}")
    kept = values[burn_in:]
    w = 1.0 / np.arange(burn_in + 1, n + 1, dtype=float)
    support, inverse = np.unique(kept, return_inverse=True)
    weights = np.zeros(support.size)
    np.add.at(weights, inverse, w)
    return LogEmpiricalDistribution(support, weights, burn_in, float(w.sum()))


def cdf(dist, t, strict=False):
    """Weighted fraction of trace values <= t, or < t when strict.

    Accepts scalar or array t; returns matching shape.
    """
    t_arr = np.asarray(t, dtype=float)
    side = "left" if strict else "right"
    idx = np.searchsorted(dist.support, t_arr, side=side)
    padded = np.concatenate(([0.0], dist._cum))
    out = padded[idx] / dist.normalizer
    if np.isscalar(t) or t_arr.ndim == 0:
        return float(out)
    return out


def quantile(dist, alpha):
    """Largest support value whose strict CDF does not exceed alpha.

    The maximizer of {t : (1/C) sum (1/k) I(T_k < t) <= alpha} over the
    reals is attained at an observed trace value for alpha < 1, so the
    search runs over the support. The strict CDF at the smallest support
    point is 0, so the result always exists.
    """
    alpha = check_alpha(alpha)
    strict_cdf = np.concatenate(([0.0], dist._cum[:-1])) / dist.normalizer
    j = int(np.searchsorted(strict_cdf, alpha, side="right")) - 1
    return float(dist.support[j])


def _permute_rows(values, rng, mode):
    n = values.shape[0]
    if mode == "joint_rows":
        return values[rng.permutation(n), :]
    if mode == "per_sample":
        out = np.empty_like(values)
        for j in range(values.shape[1]):
            out[:, j] = values[rng.permutation(n), j]
        return out
    raise ValueError(f"permutation_mode must be 'joint_rows' or 'per_sample', got {mode!r}")


def _per_permutation_quantiles(values, builder, alphas, permutations, burn_in, seed, mode):
    """Quantiles at several levels from one shared set of permuted traces.

    Permutation i always uses the substream (seed, PERMUTATION_STREAM, i),
    so adding levels or permutations never disturbs earlier draws.
    """
    out = np.empty((len(alphas), permutations))
    for i in range(permutations):
        rng = substream(seed, PERMUTATION_STREAM, i)
        permuted = _permute_rows(values, rng, mode)
        trace = np.asarray(builder(permuted), dtype=float)
        dist = build_distribution(trace, burn_in)
        for a_idx, a in enumerate(alphas):
            out[a_idx, i] = quantile(dist, a)
    return out


def permuted_quantile(
    data,
    alpha,
    statistic: Optional[Callable] = None,
    permutations=20,
    burn_in=5,
    seed=0,
    permutation_mode="joint_rows",
):
    """Average the log-quantile over random reorderings of the data.

    Parameters
    ----------
    data : CSampleDataset or array_like of shape (n, c)
    alpha : float in (0, 1)
    statistic : callable, optional
        Maps an (n, c) matrix to a 1-D prefix trace. Defaults to the
        scaled Kruskal-Wallis trace.
    permutations : int
        Number of reorderings averaged.
    burn_in : int
        Initial prefixes discarded in each per-permutation distribution.
    seed : int
        Master seed; reordering i draws from an indexed substream.
    permutation_mode : {"joint_rows", "per_sample"}
        "joint_rows" reorders whole observation vectors, preserving
        within-vector dependence. "per_sample" reorders each column
        independently, valid only for independent samples.
    """
    dataset = data if isinstance(data, CSampleDataset) else CSampleDataset(data)
    alpha = check_alpha(alpha)
    permutations = check_count(permutations, 1, "permutations")
    builder = statistic if statistic is not None else scaled_kw_trace
    per = _per_permutation_quantiles(
        dataset.values, builder, [alpha], permutations, burn_in, seed, permutation_mode
    )[0]
    return LqeQuantile(alpha=alpha, per_permutation=per, averaged=float(per.mean()))


def lqe_test(
    data,
    alpha=0.10,
    permutations=20,
    burn_in=5,
    seed=0,
    dependent=True,
    permutation_mode=None,
    statistic: Optional[Callable] = None,
):
    """Test equality of the c marginal distributions at level alpha.

    Rejects when the full-sample scaled Kruskal-Wallis statistic exceeds
    the averaged (1 - alpha) log-quantile of its permuted traces. No
    variance estimate is involved, so within-vector dependence of
    arbitrary form is allowed; declare it via ``dependent`` so the
    reorderings preserve it.
    """
    dataset = data if isinstance(data, CSampleDataset) else CSampleDataset(data)
    alpha = check_alpha(alpha)
    permutations = check_count(permutations, 1, "permutations")
    mode = permutation_mode or ("joint_rows" if dependent else "per_sample")
    builder = statistic if statistic is not None else scaled_kw_trace
    trace = np.asarray(builder(dataset.values), dtype=float)
    statistic_value = float(trace[-1])
    upper_level = 1.0 - alpha
    quantiles = _per_permutation_quantiles(
        dataset.values, builder, [upper_level, alpha], permutations, burn_in, seed, mode
    )
    upper = LqeQuantile(
        alpha=upper_level,
        per_permutation=quantiles[0],
        averaged=float(quantiles[0].mean()),
    )
    lower_avg = float(quantiles[1].mean())
    interval = (statistic_value - upper.averaged, statistic_value - lower_avg)
    return TestReport(
        statistic_value=statistic_value,
        quantile=upper,
        reject=bool(statistic_value > upper.averaged),
        interval=interval,
        alpha=alpha,
        permutations=permutations,
        burn_in=burn_in,
        seed=int(seed),
    )


def asclt_diagnostic(sample, n=None):
    """Kolmogorov distance of the log-averaged scaled partial sums to Phi.

    For i.i.d. standard normal draws x_1..x_n, builds the log-average
    distribution of S_k/sqrt(k) with no burn-in and returns the sup of
    |G(t) - Phi(t)| over the support, evaluating G from both sides at
    each jump. Convergence is at rate 1/sqrt(ln n), so the distance
    shrinks extremely slowly.
    """
    x = check_vector(sample, name="sample")
    if n is None:
        n = x.size
    n = check_count(n, 1, "n")
    if n > x.size:
        raise ValueError(f"n={n} exceeds sample length {x.size}")
    scaled = np.cumsum(x[:n]) / np.sqrt(np.arange(1, n + 1, dtype=float))
    dist = build_distribution(scaled, burn_in=0)
    g_right = dist._cum / dist.normalizer
    g_left = np.concatenate(([0.0], g_right[:-1]))
    phi = norm.cdf(dist.support)
    return float(np.max(np.maximum(np.abs(g_right - phi), np.abs(g_left - phi))))
