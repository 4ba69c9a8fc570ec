"""Deterministic random-stream derivation.

Every stochastic routine in the package derives its generator from a master
seed plus a structured spawn key, so results are independent of execution
order and worker count.
"""

import numpy as np

__all__ = ["substream"]

# Spawn-key tags keep the major stream families disjoint.
DATA_STREAM = 0
PERMUTATION_STREAM = 1
DIAGNOSTIC_STREAM = 2


def substream(seed, *key):
    """Return a Generator for the (seed, key) substream.

    Parameters
    ----------
    seed : int
        Master seed.
    *key : int
        Structured position, e.g. (stream tag, cell, replicate).
    """
    ss = np.random.SeedSequence(int(seed), spawn_key=tuple(int(k) for k in key))
    return np.random.default_rng(ss)
