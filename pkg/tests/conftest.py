import os

import numpy as np
import pytest
from scipy.stats import rankdata


def pytest_collection_modifyitems(config, items):
    if os.environ.get("LQRANK_FULL_SCALE") == "1":
        return
    skip = pytest.mark.skip(reason="full-scale run disabled; set LQRANK_FULL_SCALE=1")
    for item in items:
        if "fullscale" in item.keywords:
            item.add_marker(skip)


def random_tied_dataset(rng, max_n=200, c_choices=(2, 3, 4, 5)):
    """Random matrix with a coin-flip chance of heavy ties via rounding."""
    n = int(rng.integers(2, max_n + 1))
    c = int(rng.choice(c_choices))
    values = rng.standard_normal((n, c))
    if rng.random() < 0.5:
        values = np.round(values, int(rng.integers(0, 2)))
    return values


def brute_prefix_rank_sums(values):
    """Per-sample midrank sums by full re-ranking of every prefix."""
    values = np.asarray(values, dtype=float)
    n, c = values.shape
    out = np.empty((n, c))
    for k in range(1, n + 1):
        pooled = rankdata(values[:k].ravel(), method="average")
        out[k - 1] = pooled.reshape(k, c).sum(axis=0)
    return out


@pytest.fixture
def tied_corpus():
    """Thirty modest datasets with ties for exactness checks."""
    rng = np.random.default_rng(20240817)
    return [random_tied_dataset(rng, max_n=60) for _ in range(30)]
