"""Simple linear rank statistics and the Kruskal-Wallis family.

Builds on the rank engine: the linear rank statistic L_k under a score
function and regression constants, the centered per-sample vector T_k^(l),
the Kruskal-Wallis statistic in its classical and quadratic-form versions,
the scaling that gives it a log-average limit distribution, and prefix
traces of these statistics for the quantile machinery.
"""

from dataclasses import dataclass, field
from typing import Callable

import numpy as np
from scipy.stats import norm

from ._validation import check_count, check_matrix
from .rank_engine import CSampleDataset, prefix_rank_sums

__all__ = [
    "ScoreFunction",
    "RegressionConstants",
    "StatisticSpec",
    "wilcoxon_score",
    "van_der_waerden_score",
    "linear_rank_statistic",
    "linear_rank_statistic_from_ranks",
    "t_statistic_vector",
    "kruskal_wallis",
    "kruskal_wallis_via_t",
    "scaled_kw",
    "q_statistic",
    "prefix_trace",
    "scaled_kw_trace",
]


@dataclass(frozen=True)
class ScoreFunction:
    """Score map J on (0, 1) applied to normalized ranks R/(N+1).

    The theory behind the normal limit asks for a twice differentiable J
    with bounded second derivative; that is a documentation contract, not a
    runtime check. Unbounded scores are admitted because ranks never touch
    the endpoints of (0, 1).
    """

    evaluate: Callable[[np.ndarray], np.ndarray]
    name: str


def wilcoxon_score():
    """Identity score J(t) = t."""
    return ScoreFunction(evaluate=lambda t: np.asarray(t, dtype=float), name="wilcoxon")


def van_der_waerden_score():
    """Normal-quantile score J(t) = Phi^{-1}(t)."""
    return ScoreFunction(evaluate=lambda t: norm.ppf(np.asarray(t, dtype=float)),
                         name="van_der_waerden")


class RegressionConstants:
    """Weight matrix lambda_ij selecting observations in L_n.

    Normalized so the largest absolute entry is 1.
    """

    def __init__(self, lam):
        self.lam = check_matrix(lam, min_cols=1, name="lambda")
        peak = np.max(np.abs(self.lam))
        if not np.isclose(peak, 1.0):
            raise ValueError(f"largest absolute regression constant must be 1, got {peak}")

    @classmethod
    def sample_indicator(cls, n, c, sample):
        """Pattern isolating one sample: lambda_ij = 1 iff j == sample (0-based)."""
        n = check_count(n, 1, "n")
        c = check_count(c, 2, "c")
        if not 0 <= sample < c:
            raise ValueError(f"sample must be in [0, {c}), got {sample}")
        lam = np.zeros((n, c))
        lam[:, sample] = 1.0
        return cls(lam)


def _sqrt_scaling(k):
    return float(np.sqrt(k))


@dataclass(frozen=True)
class StatisticSpec:
    """Score, null centering constant, and normalizing sequence a_k.

    The centering is the null-hypothesis value of the statistic's mean
    functional; it cannot be estimated from data without knowing the true
    marginals, so it is supplied by the caller. For the c-sample Wilcoxon
    problem it is 1/(2c) and the default scaling is sqrt(k).
    """

    score: ScoreFunction
    centering: float
    scaling: Callable[[int], float] = field(default=_sqrt_scaling)

    @classmethod
    def wilcoxon_c_sample(cls, c):
        c = check_count(c, 2, "c")
        return cls(score=wilcoxon_score(), centering=1.0 / (2 * c))


def _check_rank_sums(rank_sums, k):
    rs = np.asarray(rank_sums, dtype=float)
    if rs.ndim != 1 or rs.size < 2:
        raise ValueError("rank_sums must be a 1-D array with one entry per sample")
    check_count(k, 1, "k")
    return rs


def linear_rank_statistic(rank_sums, sample, k, score=None):
    """L_k for the sample-indicator pattern, from per-sample rank sums.

    Only the Wilcoxon score reduces to a function of rank sums; the result
    is R_sample / (N(N+1)) with N = kc. Other scores need the individual
    ranks, see :func:`linear_rank_statistic_from_ranks`.

    Parameters
    ----------
    rank_sums : array_like of c reals
    sample : int
        0-based sample index.
    k : int
        Prefix length.
    score : ScoreFunction, optional
        Defaults to Wilcoxon.
    """
    rs = _check_rank_sums(rank_sums, k)
    c = rs.size
    if not 0 <= sample < c:
        raise ValueError(f"sample must be in [0, {c}), got {sample}")
    if score is not None and score.name != "wilcoxon":
        raise ValueError(
            "only the Wilcoxon score reduces to rank sums; "
            "use linear_rank_statistic_from_ranks for general scores"
        )
    N = k * c
    return float(rs[sample] / (N * (N + 1)))


def linear_rank_statistic_from_ranks(ranks, constants, score):
    """General L = (1/N) sum_ij lambda_ij J(R_ij / (N+1)).

    Parameters
    ----------
    ranks : array_like of shape (k, c)
        Pooled-prefix midranks of each observation.
    constants : RegressionConstants or array_like of shape (k, c)
        Arbitrary weight matrices are accepted here (a zero matrix yields 0).
    score : ScoreFunction
    """
    r = check_matrix(ranks, min_cols=1, name="ranks")
    lam = constants.lam if isinstance(constants, RegressionConstants) else np.asarray(
        constants, dtype=float
    )
    if lam.shape != r.shape:
        raise ValueError(f"constants shape {lam.shape} != ranks shape {r.shape}")
    N = r.size
    return float(np.sum(lam * score.evaluate(r / (N + 1))) / N)


def t_statistic_vector(rank_sums, k):
    """Centered per-sample vector T_k^(l) = R_l/(N(N+1)) - 1/(2c).

    Sums to zero exactly because the rank sums total N(N+1)/2.
    """
    rs = _check_rank_sums(rank_sums, k)
    c = rs.size
    N = k * c
    return rs / (N * (N + 1.0)) - 1.0 / (2 * c)


def kruskal_wallis(rank_sums, k):
    """Classical c-sample statistic from per-sample rank sums.

    F = [12 / (N(N+1))] (1/k) sum_l R_l^2 - 3(N+1) with N = kc.
    """
    rs = _check_rank_sums(rank_sums, k)
    c = rs.size
    N = k * c
    return float(12.0 / (N * (N + 1.0)) * np.sum(rs**2) / k - 3.0 * (N + 1.0))


def kruskal_wallis_via_t(t_vector, k):
    """Same statistic as a quadratic form: 12 N(N+1)/k sum_l (T^(l))^2."""
    t = np.asarray(t_vector, dtype=float)
    if t.ndim != 1 or t.size < 2:
        raise ValueError("t_vector must be a 1-D array with one entry per sample")
    check_count(k, 1, "k")
    c = t.size
    N = k * c
    return float(12.0 * N * (N + 1.0) / k * np.sum(t**2))


def scaled_kw(kw, k, c):
    """Scale the statistic by kc^3 / (12(kc+1)).

    This is the form whose log-average distribution the quantile method
    tracks; under independence its limit is (c^2/12) chi-squared(c-1).
    """
    k = check_count(k, 1, "k")
    c = check_count(c, 2, "c")
    return float(k * c**3 / (12.0 * (k * c + 1.0)) * kw)


def q_statistic(L_k, spec, k, c):
    """Normalized statistic (N(k)/a_k) (L_k - centering), N(k) = kc."""
    k = check_count(k, 1, "k")
    c = check_count(c, 2, "c")
    a = spec.scaling(k)
    if a <= 0:
        raise ValueError(f"scaling must be positive, got {a}")
    return float(k * c / a * (float(L_k) - spec.centering))


def _scaled_kw_from_rank_sums(rank_sum_rows):
    """Vectorized scaled statistic for every prefix from a (n, c) rank-sum trace."""
    n, c = rank_sum_rows.shape
    k = np.arange(1, n + 1, dtype=float)
    N = k * c
    kw = 12.0 / (N * (N + 1.0)) * np.sum(rank_sum_rows**2, axis=1) / k - 3.0 * (N + 1.0)
    return k * c**3 / (12.0 * (N + 1.0)) * kw


def prefix_trace(data, statistic="scaled_kw", spec=None, sample=None):
    """Statistic values over all row prefixes, T_1 .. T_n.

    Parameters
    ----------
    data : CSampleDataset or array_like of shape (n, c)
    statistic : {"scaled_kw", "q"}
        "scaled_kw" tracks the scaled Kruskal-Wallis statistic. "q" tracks
        (N(k)/a_k)(L_k^(sample) - centering) for a Wilcoxon StatisticSpec.
    spec : StatisticSpec, required for "q"
    sample : int, required for "q"
        0-based sample index.

    Returns
    -------
    ndarray of length n. Element n-1 equals a from-scratch evaluation on
    the full dataset.
    """
    values = data.values if isinstance(data, CSampleDataset) else check_matrix(data)
    rows = prefix_rank_sums(values)
    if statistic == "scaled_kw":
        return _scaled_kw_from_rank_sums(rows)
    if statistic == "q":
        if spec is None or sample is None:
            raise ValueError("statistic 'q' requires spec and sample")
        if spec.score.name != "wilcoxon":
            raise ValueError("prefix traces support Wilcoxon scores only")
        n, c = rows.shape
        if not 0 <= sample < c:
            raise ValueError(f"sample must be in [0, {c}), got {sample}")
        k = np.arange(1, n + 1, dtype=float)
        N = k * c
        L = rows[:, sample] / (N * (N + 1.0))
        a = np.asarray([spec.scaling(int(kk)) for kk in range(1, n + 1)], dtype=float)
        if np.any(a <= 0):
            raise ValueError("scaling must be positive for every prefix")
        return N / a * (L - spec.centering)
    raise ValueError(f"unknown statistic {statistic!r}")


def scaled_kw_trace(data):
    """Prefix trace of the scaled Kruskal-Wallis statistic."""
    return prefix_trace(data, statistic="scaled_kw")
