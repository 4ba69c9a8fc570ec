"""Rank tests with logarithmic quantile estimation.

Almost-sure limit theorems say the log-weighted occupation measure of a
statistic along growing prefixes of the data converges to its limit
distribution. This package turns that into a working inference method for
simple linear rank statistics: prefix traces of the scaled Kruskal-Wallis
statistic, their log-average empirical distributions, permutation-averaged
quantiles, and a c-sample equality test that needs no variance estimate
and so tolerates arbitrary dependence between the samples within each
observation vector. A deterministic Monte Carlo harness reproduces the
reference simulation tables.
"""

from .estimator import LqeKruskalWallis
from .lqe import (
    LogEmpiricalDistribution,
    LqeQuantile,
    TestReport,
    asclt_diagnostic,
    build_distribution,
    cdf,
    lqe_test,
    permuted_quantile,
    quantile,
)
from .rank_engine import CSampleDataset, RankAccumulator, batch_ranks, prefix_rank_sums
from .rank_statistics import (
    RegressionConstants,
    ScoreFunction,
    StatisticSpec,
    kruskal_wallis,
    kruskal_wallis_via_t,
    linear_rank_statistic,
    linear_rank_statistic_from_ranks,
    prefix_trace,
    q_statistic,
    scaled_kw,
    scaled_kw_trace,
    t_statistic_vector,
    van_der_waerden_score,
    wilcoxon_score,
)
from .sim_harness import (
    ReportCell,
    SimulationConfig,
    SimulationReport,
    asymptotic_quantile,
    desk_config,
    full_scale_config,
    load_config,
    render_table,
    run_power_study,
    run_quantile_study,
    run_significance_study,
    run_study,
)
from .synthetic_data import (
    DependenceSpec,
    gen_bivariate_normal,
    gen_c_sample,
    gen_coupled_families,
    gen_marshall_olkin,
)

__version__ = "0.1.0"

__all__ = [
    "CSampleDataset",
    "DependenceSpec",
    "LogEmpiricalDistribution",
    "LqeKruskalWallis",
    "LqeQuantile",
    "RankAccumulator",
    "RegressionConstants",
    "ReportCell",
    "ScoreFunction",
    "SimulationConfig",
    "SimulationReport",
    "StatisticSpec",
    "TestReport",
    "asclt_diagnostic",
    "asymptotic_quantile",
    "batch_ranks",
    "build_distribution",
    "cdf",
    "desk_config",
    "full_scale_config",
    "gen_bivariate_normal",
    "gen_c_sample",
    "gen_coupled_families",
    "gen_marshall_olkin",
    "kruskal_wallis",
    "kruskal_wallis_via_t",
    "linear_rank_statistic",
    "linear_rank_statistic_from_ranks",
    "load_config",
    "lqe_test",
    "permuted_quantile",
    "prefix_rank_sums",
    "prefix_trace",
    "q_statistic",
    "quantile",
    "render_table",
    "run_power_study",
    "run_quantile_study",
    "run_significance_study",
    "run_study",
    "scaled_kw",
    "scaled_kw_trace",
    "t_statistic_vector",
    "van_der_waerden_score",
    "wilcoxon_score",
]
