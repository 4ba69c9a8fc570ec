"""Seeded generators for three-sample simulation inputs.

Covers the simulation families: independent normal or exponential triples,
dependent normal pairs via the closed-form Cholesky factor, dependent
exponential pairs via the Marshall-Olkin shared-shock construction, each
with an extra independent third sample and per-column mean shifts for
power studies.
"""

from dataclasses import dataclass
from typing import Tuple

import numpy as np
from scipy.stats import norm

from ._rng import DATA_STREAM, substream
from ._validation import check_count
from .rank_engine import CSampleDataset

__all__ = [
    "DependenceSpec",
    "gen_bivariate_normal",
    "gen_marshall_olkin",
    "gen_c_sample",
    "gen_coupled_families",
]


def _as_rng(seed):
    if isinstance(seed, np.random.Generator):
        return seed
    return substream(seed, DATA_STREAM)


@dataclass(frozen=True)
class DependenceSpec:
    """Sampling law for one three-column dataset.

    kind selects the coupling of columns 1-2 (column 3 is always an
    independent draw from the same family):

    - "independent": all three columns i.i.d.
    - "normal_rho": columns 1-2 bivariate normal with correlation rho.
    - "marshall_olkin": columns 1-2 bivariate exponential with shared
      shock rate lambdas[2]; marginal rates are lambda1+lambda3 and
      lambda2+lambda3.

    shifts move the column means: added directly for normal families,
    while exponential columns are rescaled so column l has mean
    (base mean + shifts[l]), preserving the dependence structure.
    """

    kind: str = "independent"
    family: str = "normal"
    rho: float = 0.0
    lambdas: Tuple[float, float, float] = (1.0, 1.0, 1.0)
    mean: float = 0.0
    sd: float = 1.0
    rate: float = 1.0
    shifts: Tuple[float, float, float] = (0.0, 0.0, 0.0)

    def __post_init__(self):
        if self.kind not in ("independent", "normal_rho", "marshall_olkin"):
            raise ValueError(f"unknown dependence kind {self.kind!r}")
        if self.family not in ("normal", "exponential"):
            raise ValueError(f"unknown family {self.family!r}")
        object.__setattr__(self, "shifts", tuple(float(s) for s in self.shifts))
        if len(self.shifts) != 3:
            raise ValueError("shifts must have one entry per column (3)")
        object.__setattr__(self, "lambdas", tuple(float(v) for v in self.lambdas))
        if abs(self.rho) > 1:
            raise ValueError(f"rho must lie in [-1, 1], got {self.rho}")
        if self.sd <= 0:
            raise ValueError(f"sd must be positive, got {self.sd}")
        if self.rate <= 0:
            raise ValueError(f"rate must be positive, got {self.rate}")
        l1, l2, l3 = self.lambdas
        if min(l1, l2, l3) < 0:
            raise ValueError("lambdas must be nonnegative")
        if self.kind == "marshall_olkin" and (l1 + l3 <= 0 or l2 + l3 <= 0):
            raise ValueError("each coordinate needs a positive total rate")

    @classmethod
    def independent_normal(cls, mean=0.0, sd=1.0, shifts=(0.0, 0.0, 0.0)):
        return cls(kind="independent", family="normal", mean=mean, sd=sd, shifts=shifts)

    @classmethod
    def independent_exponential(cls, rate=1.0, shifts=(0.0, 0.0, 0.0)):
        return cls(kind="independent", family="exponential", rate=rate, shifts=shifts)

    @classmethod
    def normal_pair(cls, rho, mean=0.0, sd=1.0, shifts=(0.0, 0.0, 0.0)):
        return cls(kind="normal_rho", family="normal", rho=rho, mean=mean, sd=sd,
                   shifts=shifts)

    @classmethod
    def marshall_olkin_pair(cls, lambdas=(1.0, 1.0, 1.0), shifts=(0.0, 0.0, 0.0)):
        return cls(kind="marshall_olkin", family="exponential", lambdas=lambdas,
                   shifts=shifts)

    def label(self):
        """Short distribution tag used in report cells."""
        if self.kind == "independent":
            if self.family == "normal":
                return f"normal({self.mean:g},{self.sd:g})"
            return f"exponential(rate={self.rate:g})"
        if self.kind == "normal_rho":
            return f"normal({self.mean:g},{self.sd:g}) rho={self.rho:g}"
        l1, l2, l3 = self.lambdas
        return f"marshall_olkin({l1:g},{l2:g},{l3:g})"


def gen_bivariate_normal(rho, n, seed):
    """n standard-normal pairs with correlation rho.

    Uses the explicit lower Cholesky factor of [[1, rho], [rho, 1]], so
    rho = +/-1 degenerates cleanly to comonotone or antimonotone pairs.
    """
    if abs(rho) > 1:
        raise ValueError(f"rho must lie in [-1, 1], got {rho}")
    n = check_count(n, 1, "n")
    rng = _as_rng(seed)
    x = rng.standard_normal((n, 2))
    out = np.empty_like(x)
    out[:, 0] = x[:, 0]
    out[:, 1] = rho * x[:, 0] + np.sqrt(max(0.0, 1.0 - rho * rho)) * x[:, 1]
    return out


def gen_marshall_olkin(l1, l2, l3, n, seed):
    """n bivariate exponential pairs with a shared shock.

    X1 = min(E1/l1, E3/l3), X2 = min(E2/l2, E3/l3) for independent
    standard exponentials E; a zero rate drops its branch. Marginals are
    Exp(l1+l3) and Exp(l2+l3), correlation l3/(l1+l2+l3).
    """
    if min(l1, l2, l3) < 0:
        raise ValueError("rates must be nonnegative")
    if l1 + l3 <= 0 or l2 + l3 <= 0:
        raise ValueError("each coordinate needs a positive total rate")
    n = check_count(n, 1, "n")
    rng = _as_rng(seed)
    e = rng.standard_exponential((n, 3))
    shock = e[:, 2] / l3 if l3 > 0 else np.full(n, np.inf)
    own1 = e[:, 0] / l1 if l1 > 0 else np.full(n, np.inf)
    own2 = e[:, 1] / l2 if l2 > 0 else np.full(n, np.inf)
    out = np.empty((n, 2))
    out[:, 0] = np.minimum(own1, shock)
    out[:, 1] = np.minimum(own2, shock)
    return out


def _apply_exponential_shifts(values, base_means, shifts):
    """Rescale each column to mean base + shift; scaling preserves the copula."""
    targets = np.asarray(base_means, dtype=float) + np.asarray(shifts, dtype=float)
    if np.any(targets <= 0):
        raise ValueError(f"shifted exponential means must stay positive, got {targets}")
    return values * (targets / np.asarray(base_means, dtype=float))


def gen_c_sample(spec, n, seed):
    """Three-column dataset drawn according to a DependenceSpec."""
    if not isinstance(spec, DependenceSpec):
        raise TypeError("spec must be a DependenceSpec")
    n = check_count(n, 1, "n")
    rng = _as_rng(seed)
    shifts = np.asarray(spec.shifts, dtype=float)

    if spec.kind == "independent":
        if spec.family == "normal":
            values = spec.mean + spec.sd * rng.standard_normal((n, 3)) + shifts
        else:
            base = rng.standard_exponential((n, 3)) / spec.rate
            values = _apply_exponential_shifts(base, [1.0 / spec.rate] * 3, shifts)
        return CSampleDataset(values)

    if spec.kind == "normal_rho":
        values = np.empty((n, 3))
        values[:, :2] = gen_bivariate_normal(spec.rho, n, rng)
        values[:, 2] = rng.standard_normal(n)
        values = spec.mean + spec.sd * values + shifts
        return CSampleDataset(values)

    l1, l2, l3 = spec.lambdas
    values = np.empty((n, 3))
    values[:, :2] = gen_marshall_olkin(l1, l2, l3, n, rng)
    # the independent third sample matches the first marginal, so equal
    # own-rates l1 == l2 put all three columns under the null
    values[:, 2] = rng.standard_exponential(n) / (l1 + l3)
    base_means = [1.0 / (l1 + l3), 1.0 / (l2 + l3), 1.0 / (l1 + l3)]
    values = _apply_exponential_shifts(values, base_means, shifts)
    return CSampleDataset(values)


def gen_coupled_families(n, seed, mean=2.0, sd=1.0, rate=3.0):
    """Normal and exponential independent triples from shared uniforms.

    Both datasets are inverse-CDF transforms of one uniform block, so the
    within-column ranks coincide exactly. Rank statistics computed on the
    two datasets are therefore identical, which isolates distributional
    stability of quantile procedures from Monte Carlo noise.
    """
    n = check_count(n, 1, "n")
    rng = _as_rng(seed)
    u = rng.random((n, 3))
    u = np.clip(u, 1e-15, 1.0 - 1e-15)
    normal_vals = mean + sd * norm.ppf(u)
    expo_vals = -np.log1p(-u) / rate
    return CSampleDataset(normal_vals), CSampleDataset(expo_vals)
