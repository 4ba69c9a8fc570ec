"""Estimator-style front end for the log-quantile rank test."""

import numpy as np
from sklearn.base import BaseEstimator
from sklearn.utils.validation import check_array

from .lqe import lqe_test

__all__ = ["LqeKruskalWallis"]


class LqeKruskalWallis(BaseEstimator):
    """Equality-of-distributions test over the columns of X.

    Each row of X is one joint observation of c >= 2 samples; rows are
    i.i.d. vectors but columns may be dependent within a row. fit() runs
    the scaled Kruskal-Wallis statistic against its averaged logarithmic
    permutation quantile; there is nothing to predict or transform, so
    the fitted state is the test decision.

    Parameters
    ----------
    alpha : float
        Test level in (0, 1).
    permutations : int
        Reorderings averaged in the quantile estimate.
    burn_in : int
        Initial prefixes excluded from each log-average distribution.
    seed : int
        Master seed; fit is deterministic given (X, params).
    dependent : bool
        Declare within-row dependence. True reorders whole rows; False
        reorders each column independently.

    Attributes
    ----------
    statistic_ : float
        Scaled Kruskal-Wallis statistic on the full data.
    critical_value_ : float
        Averaged (1 - alpha) logarithmic quantile.
    reject_ : bool
    interval_ : tuple of float
        Random interval for the statistic's centered location.
    report_ : TestReport
        Full decision record.
    """

    def __init__(self, alpha=0.10, permutations=20, burn_in=5, seed=0, dependent=True):
        self.alpha = alpha
        self.permutations = permutations
        self.burn_in = burn_in
        self.seed = seed
        self.dependent = dependent

    def fit(self, X, y=None):
        X = check_array(X, dtype=np.float64)
        if X.shape[1] < 2:
            raise ValueError(f"X needs at least 2 columns, got {X.shape[1]}")
        report = lqe_test(
            X,
            alpha=self.alpha,
            permutations=self.permutations,
            burn_in=self.burn_in,
            seed=self.seed,
            dependent=self.dependent,
        )
        self.n_features_in_ = X.shape[1]
        self.report_ = report
        self.statistic_ = report.statistic_value
        self.critical_value_ = report.quantile.averaged
        self.reject_ = report.reject
        self.interval_ = report.interval
        return self
