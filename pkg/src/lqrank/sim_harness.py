"""Deterministic Monte Carlo driver for quantile, level, and power studies.

Every (distribution, n, replicate) task derives its data and permutation
streams from the master seed and its own grid position, so results do not
depend on execution order or worker count. Reports carry one cell per
configured (distribution, shifts, n, alpha) with a Monte Carlo standard
error, and serialize to JSON that is byte-identical across thread counts.
"""

import json
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, replace
from functools import partial
from typing import Optional, Tuple

import numpy as np
from scipy.stats import chi2

from ._rng import DATA_STREAM, substream
from ._validation import check_alpha, check_count
from .lqe import _per_permutation_quantiles
from .rank_statistics import scaled_kw_trace
from .synthetic_data import DependenceSpec, gen_c_sample, gen_coupled_families

__all__ = [
    "SimulationConfig",
    "ReportCell",
    "SimulationReport",
    "asymptotic_quantile",
    "run_quantile_study",
    "run_significance_study",
    "run_power_study",
    "run_study",
    "desk_config",
    "full_scale_config",
    "load_config",
    "render_table",
]

# spawn-key tag for per-task permutation seeds, disjoint from the
# data/permutation/diagnostic stream tags
_TASK_SEED_TAG = 3

_STUDIES = ("quantiles", "significance", "power")


@dataclass(frozen=True)
class SimulationConfig:
    """Declarative description of one study.

    alphas are quantile levels (e.g. 0.99) for the quantiles study and
    test levels (e.g. 0.10) for significance and power studies.

    prefix_drop removes the first entries of every prefix trace before
    the log-average distribution is built, renumbering the weights over
    the remainder; burn_in then applies to the shortened trace. shift_rows
    lets a power study scan several alternatives from one base spec.
    threads is an execution hint only and never appears in reports.
    """

    study: str
    spec: object
    n_values: Tuple[int, ...]
    alphas: Tuple[float, ...]
    replications: int = 100
    permutations: int = 20
    burn_in: int = 5
    seed: int = 0
    threads: Optional[int] = None
    prefix_drop: int = 0
    coupled: bool = False
    shift_rows: Tuple[Tuple[float, float, float], ...] = ()
    permutation_mode: Optional[str] = None

    def __post_init__(self):
        if self.study not in _STUDIES:
            raise ValueError(f"study must be one of {_STUDIES}, got {self.study!r}")
        specs = self.spec if isinstance(self.spec, (tuple, list)) else (self.spec,)
        for s in specs:
            if not isinstance(s, DependenceSpec):
                raise TypeError("spec must be a DependenceSpec or a sequence of them")
        object.__setattr__(self, "spec", tuple(specs))
        object.__setattr__(self, "n_values",
                           tuple(check_count(n, 1, "n") for n in self.n_values))
        if not self.n_values:
            raise ValueError("n_values must be non-empty")
        object.__setattr__(self, "alphas", tuple(check_alpha(a) for a in self.alphas))
        if not self.alphas:
            raise ValueError("alphas must be non-empty")
        check_count(self.replications, 1, "replications")
        check_count(self.permutations, 1, "permutations")
        check_count(self.burn_in, 0, "burn_in")
        check_count(self.prefix_drop, 0, "prefix_drop")
        floor = self.burn_in + self.prefix_drop
        for n in self.n_values:
            if n <= floor:
                raise ValueError(
                    f"n={n} leaves no trace after prefix_drop={self.prefix_drop} "
                    f"and burn_in={self.burn_in}"
                )
        rows = tuple(tuple(float(x) for x in row) for row in self.shift_rows)
        for row in rows:
            if len(row) != 3:
                raise ValueError("each shift row needs one entry per column (3)")
        object.__setattr__(self, "shift_rows", rows)
        if self.permutation_mode not in (None, "joint_rows", "per_sample"):
            raise ValueError(f"bad permutation_mode {self.permutation_mode!r}")

    @property
    def specs(self):
        return self.spec


@dataclass(frozen=True)
class ReportCell:
    dist: str
    shifts: Tuple[float, float, float]
    n: int
    alpha: float
    value: float
    stderr: float


@dataclass(frozen=True)
class SimulationReport:
    study: str
    cells: Tuple[ReportCell, ...]
    config: dict
    replicates: int

    def to_json(self):
        payload = {
            "study": self.study,
            "replicates": self.replicates,
            "config": self.config,
            "cells": [
                {
                    "dist": c.dist,
                    "shifts": list(c.shifts),
                    "n": c.n,
                    "alpha": c.alpha,
                    "value": c.value,
                    "stderr": c.stderr,
                }
                for c in self.cells
            ],
        }
        return json.dumps(payload, indent=2)

    @classmethod
    def from_json(cls, text):
        payload = json.loads(text)
        cells = tuple(
            ReportCell(
                dist=c["dist"],
                shifts=tuple(c["shifts"]),
                n=c["n"],
                alpha=c["alpha"],
                value=c["value"],
                stderr=c["stderr"],
            )
            for c in payload["cells"]
        )
        return cls(study=payload["study"], cells=cells, config=payload["config"],
                   replicates=payload["replicates"])


def asymptotic_quantile(alpha, c=3):
    """Limit-law quantile (c^2/12) * chi2_{c-1} quantile; -1.5*ln(1-alpha) for c=3."""
    alpha = check_alpha(alpha)
    c = check_count(c, 2, "c")
    return float(c * c / 12.0 * chi2.ppf(alpha, c - 1))


def _spec_to_dict(spec):
    return {
        "kind": spec.kind,
        "family": spec.family,
        "rho": spec.rho,
        "lambdas": list(spec.lambdas),
        "mean": spec.mean,
        "sd": spec.sd,
        "rate": spec.rate,
        "shifts": list(spec.shifts),
    }


def _spec_from_dict(d):
    allowed = {"kind", "family", "rho", "lambdas", "mean", "sd", "rate", "shifts"}
    unknown = set(d) - allowed
    if unknown:
        raise ValueError(f"unknown spec fields: {sorted(unknown)}")
    kwargs = dict(d)
    for key in ("lambdas", "shifts"):
        if key in kwargs:
            kwargs[key] = tuple(kwargs[key])
    return DependenceSpec(**kwargs)


def _config_echo(cfg):
    """Config as plain JSON data. threads is an execution hint, left out."""
    return {
        "study": cfg.study,
        "specs": [_spec_to_dict(s) for s in cfg.specs],
        "n_values": list(cfg.n_values),
        "alphas": list(cfg.alphas),
        "replications": cfg.replications,
        "permutations": cfg.permutations,
        "burn_in": cfg.burn_in,
        "seed": cfg.seed,
        "prefix_drop": cfg.prefix_drop,
        "coupled": cfg.coupled,
        "shift_rows": [list(r) for r in cfg.shift_rows],
        "permutation_mode": cfg.permutation_mode,
    }


def load_config(path):
    """Read a SimulationConfig from a JSON file mirroring its fields."""
    with open(path, "r", encoding="utf-8") as fh:
        raw = json.load(fh)
    if not isinstance(raw, dict):
        raise ValueError("config file must hold a JSON object")
    allowed = {
        "study", "spec", "specs", "n_values", "alphas", "replications",
        "permutations", "burn_in", "seed", "threads", "prefix_drop",
        "coupled", "shift_rows", "permutation_mode",
    }
    unknown = set(raw) - allowed
    if unknown:
        raise ValueError(f"unknown config fields: {sorted(unknown)}")
    specs_raw = raw.get("specs", raw.get("spec"))
    if specs_raw is None:
        raise ValueError("config must define 'spec' or 'specs'")
    if isinstance(specs_raw, dict):
        specs_raw = [specs_raw]
    specs = tuple(_spec_from_dict(d) for d in specs_raw)
    kwargs = {k: v for k, v in raw.items() if k not in ("spec", "specs")}
    if "n_values" in kwargs:
        kwargs["n_values"] = tuple(kwargs["n_values"])
    if "alphas" in kwargs:
        kwargs["alphas"] = tuple(kwargs["alphas"])
    if "shift_rows" in kwargs:
        kwargs["shift_rows"] = tuple(tuple(r) for r in kwargs["shift_rows"])
    return SimulationConfig(spec=specs, **kwargs)


def _dropped_scaled_kw_trace(values, drop):
    return scaled_kw_trace(values)[drop:]


def _trace_builder(prefix_drop):
    if prefix_drop == 0:
        return scaled_kw_trace
    return partial(_dropped_scaled_kw_trace, drop=prefix_drop)


def _mode_for(spec, override):
    if override is not None:
        return override
    return "per_sample" if spec.kind == "independent" else "joint_rows"


def _task_seed(master_seed, key):
    ss = np.random.SeedSequence(int(master_seed), spawn_key=(_TASK_SEED_TAG,) + key)
    return int(ss.generate_state(1)[0])


def _quantile_task(payload):
    spec, n, alphas, permutations, burn_in, prefix_drop, mode, master_seed, key = payload
    rng = substream(master_seed, DATA_STREAM, *key)
    data = gen_c_sample(spec, n, rng)
    builder = _trace_builder(prefix_drop)
    per = _per_permutation_quantiles(
        data.values, builder, list(alphas), permutations, burn_in,
        _task_seed(master_seed, key), mode,
    )
    return per.mean(axis=1)


def _coupled_quantile_task(payload):
    (mean, sd, rate, n, alphas, permutations, burn_in, prefix_drop,
     master_seed, key) = payload
    rng = substream(master_seed, DATA_STREAM, *key)
    normal_data, expo_data = gen_coupled_families(n, rng, mean=mean, sd=sd, rate=rate)
    builder = _trace_builder(prefix_drop)
    seed = _task_seed(master_seed, key)
    out = np.empty((2, len(alphas)))
    for row, data in enumerate((normal_data, expo_data)):
        per = _per_permutation_quantiles(
            data.values, builder, list(alphas), permutations, burn_in, seed,
            "per_sample",
        )
        out[row] = per.mean(axis=1)
    return out


def _test_task(payload):
    spec, n, alphas, permutations, burn_in, prefix_drop, mode, master_seed, key = payload
    rng = substream(master_seed, DATA_STREAM, *key)
    data = gen_c_sample(spec, n, rng)
    builder = _trace_builder(prefix_drop)
    trace = np.asarray(builder(data.values), dtype=float)
    statistic = float(trace[-1])
    upper_levels = [1.0 - a for a in alphas]
    crit = _per_permutation_quantiles(
        data.values, builder, upper_levels, permutations, burn_in,
        _task_seed(master_seed, key), mode,
    ).mean(axis=1)
    return (statistic > crit).astype(float)


def _execute(worker, payloads, threads):
    if threads is None or threads <= 1:
        return [worker(p) for p in payloads]
    with ProcessPoolExecutor(max_workers=threads) as pool:
        chunk = max(1, len(payloads) // (threads * 4))
        return list(pool.map(worker, payloads, chunksize=chunk))


def _mean_stderr(values):
    arr = np.asarray(values, dtype=float)
    mean = float(arr.mean())
    if arr.size < 2:
        return mean, 0.0
    return mean, float(arr.std(ddof=1) / np.sqrt(arr.size))


def _rate_stderr(flags):
    arr = np.asarray(flags, dtype=float)
    p = float(arr.mean())
    return p, float(np.sqrt(p * (1.0 - p) / arr.size))


def run_quantile_study(cfg):
    """Averaged log-quantiles per (distribution, n, alpha), plus the
    limit-law reference quantiles as extra cells with n = 0.

    With coupled=True the normal and exponential datasets of each
    replicate are inverse-CDF images of shared uniforms, removing all
    Monte Carlo noise from their comparison.
    """
    if cfg.study != "quantiles":
        raise ValueError(f"config study is {cfg.study!r}, expected 'quantiles'")
    cells = []
    if cfg.coupled:
        specs = cfg.specs
        if (len(specs) != 2 or specs[0].family != "normal"
                or specs[1].family != "exponential"
                or any(s.kind != "independent" for s in specs)):
            raise ValueError(
                "coupled quantile study needs exactly an independent normal "
                "spec followed by an independent exponential spec"
            )
        mean, sd, rate = specs[0].mean, specs[0].sd, specs[1].rate
        for n_idx, n in enumerate(cfg.n_values):
            payloads = [
                (mean, sd, rate, n, cfg.alphas, cfg.permutations, cfg.burn_in,
                 cfg.prefix_drop, cfg.seed, (0, n_idx, rep))
                for rep in range(cfg.replications)
            ]
            results = np.asarray(_execute(_coupled_quantile_task, payloads, cfg.threads))
            for s_idx, spec in enumerate(specs):
                for a_idx, alpha in enumerate(cfg.alphas):
                    value, err = _mean_stderr(results[:, s_idx, a_idx])
                    cells.append(ReportCell(spec.label(), spec.shifts, n, alpha,
                                            value, err))
    else:
        for s_idx, spec in enumerate(cfg.specs):
            for n_idx, n in enumerate(cfg.n_values):
                mode = _mode_for(spec, cfg.permutation_mode)
                payloads = [
                    (spec, n, cfg.alphas, cfg.permutations, cfg.burn_in,
                     cfg.prefix_drop, mode, cfg.seed, (s_idx, n_idx, rep))
                    for rep in range(cfg.replications)
                ]
                results = np.asarray(_execute(_quantile_task, payloads, cfg.threads))
                for a_idx, alpha in enumerate(cfg.alphas):
                    value, err = _mean_stderr(results[:, a_idx])
                    cells.append(ReportCell(spec.label(), spec.shifts, n, alpha,
                                            value, err))
    for alpha in cfg.alphas:
        cells.append(ReportCell("asymptotic", (0.0, 0.0, 0.0), 0, alpha,
                                asymptotic_quantile(alpha, c=3), 0.0))
    return SimulationReport("quantiles", tuple(cells), _config_echo(cfg),
                            cfg.replications)


def _run_rejection_study(cfg, specs):
    cells = []
    for s_idx, spec in enumerate(specs):
        for n_idx, n in enumerate(cfg.n_values):
            mode = _mode_for(spec, cfg.permutation_mode)
            payloads = [
                (spec, n, cfg.alphas, cfg.permutations, cfg.burn_in,
                 cfg.prefix_drop, mode, cfg.seed, (s_idx, n_idx, rep))
                for rep in range(cfg.replications)
            ]
            results = np.asarray(_execute(_test_task, payloads, cfg.threads))
            for a_idx, alpha in enumerate(cfg.alphas):
                value, err = _rate_stderr(results[:, a_idx])
                cells.append(ReportCell(spec.label(), spec.shifts, n, alpha,
                                        value, err))
    return cells


def run_significance_study(cfg):
    """Empirical rejection rate under the null per (distribution, n, alpha)."""
    if cfg.study != "significance":
        raise ValueError(f"config study is {cfg.study!r}, expected 'significance'")
    for spec in cfg.specs:
        if any(s != 0.0 for s in spec.shifts):
            raise ValueError("significance study requires all shifts zero")
    cells = _run_rejection_study(cfg, cfg.specs)
    return SimulationReport("significance", tuple(cells), _config_echo(cfg),
                            cfg.replications)


def run_power_study(cfg):
    """Empirical rejection rate under location alternatives.

    shift_rows, when given, replicate each base spec once per shift row;
    otherwise the specs' own shifts are used and at least one must be
    nonzero.
    """
    if cfg.study != "power":
        raise ValueError(f"config study is {cfg.study!r}, expected 'power'")
    if cfg.shift_rows:
        specs = tuple(
            replace(spec, shifts=row) for spec in cfg.specs for row in cfg.shift_rows
        )
    else:
        specs = cfg.specs
    if all(all(s == 0.0 for s in spec.shifts) for spec in specs):
        raise ValueError("power study needs at least one nonzero shift row")
    cells = _run_rejection_study(cfg, specs)
    return SimulationReport("power", tuple(cells), _config_echo(cfg),
                            cfg.replications)


def run_study(cfg):
    """Dispatch on cfg.study."""
    runner = {
        "quantiles": run_quantile_study,
        "significance": run_significance_study,
        "power": run_power_study,
    }[cfg.study]
    return runner(cfg)


def desk_config(study, seed=0, threads=None):
    """Small-footprint presets that finish in minutes on one core."""
    if study == "quantiles":
        return SimulationConfig(
            study="quantiles",
            spec=(DependenceSpec.independent_normal(mean=2.0, sd=1.0),
                  DependenceSpec.independent_exponential(rate=3.0)),
            n_values=(500,),
            alphas=(0.99, 0.95, 0.90),
            replications=100,
            permutations=20,
            burn_in=0,
            prefix_drop=10,
            seed=seed,
            threads=threads,
            coupled=True,
        )
    if study == "significance":
        return SimulationConfig(
            study="significance",
            spec=(DependenceSpec.independent_normal(mean=2.0, sd=1.0),),
            n_values=(200,),
            alphas=(0.10, 0.01),
            replications=200,
            permutations=20,
            burn_in=0,
            prefix_drop=10,
            seed=seed,
            threads=threads,
        )
    if study == "power":
        return SimulationConfig(
            study="power",
            spec=(DependenceSpec.independent_normal(mean=0.0, sd=1.0),),
            n_values=(30, 80),
            alphas=(0.10, 0.01),
            replications=200,
            permutations=20,
            burn_in=0,
            prefix_drop=10,
            seed=seed,
            threads=threads,
            shift_rows=((0.0, 1.0, 0.0), (0.0, 0.2, 0.0)),
        )
    raise ValueError(f"unknown study {study!r}")


def full_scale_config(study, seed=0, threads=None):
    """Full simulation settings for reproducing the published tables.

    The quantile study at this scale drops the first 10 trace entries and
    renumbers the log-weights over the remainder instead of using the
    plain burn-in; see the quantile-protocol notes in the README.
    """
    if study == "quantiles":
        return SimulationConfig(
            study="quantiles",
            spec=(DependenceSpec.independent_normal(mean=2.0, sd=1.0),
                  DependenceSpec.independent_exponential(rate=3.0)),
            n_values=(1000,),
            alphas=(0.99, 0.95, 0.90),
            replications=500,
            permutations=100,
            burn_in=0,
            prefix_drop=10,
            seed=seed,
            threads=threads,
        )
    if study == "significance":
        return SimulationConfig(
            study="significance",
            spec=(
                DependenceSpec.normal_pair(rho=0.5),
                DependenceSpec.marshall_olkin_pair(lambdas=(1.0, 1.0, 1.0)),
                DependenceSpec.independent_normal(mean=2.0, sd=1.0),
                DependenceSpec.independent_exponential(rate=3.0),
            ),
            n_values=(30, 50, 80, 100, 200, 500, 1000),
            alphas=(0.10, 0.05, 0.01),
            replications=200,
            permutations=20,
            burn_in=0,
            prefix_drop=10,
            seed=seed,
            threads=threads,
        )
    if study == "power":
        return SimulationConfig(
            study="power",
            spec=(
                DependenceSpec.normal_pair(rho=0.5),
                DependenceSpec.independent_normal(mean=0.0, sd=1.0),
            ),
            n_values=(30, 50, 80, 100),
            alphas=(0.10, 0.05, 0.01),
            replications=200,
            permutations=20,
            burn_in=0,
            prefix_drop=10,
            seed=seed,
            threads=threads,
            shift_rows=((0.0, 0.2, 0.0), (0.0, 0.5, 0.0), (0.0, 1.0, 0.0)),
        )
    raise ValueError(f"unknown study {study!r}")


def render_table(report):
    """Aligned text table, one row per (distribution, shifts, n), one
    column per level."""
    alphas = []
    for cell in report.cells:
        if cell.alpha not in alphas:
            alphas.append(cell.alpha)
    rows = {}
    order = []
    for cell in report.cells:
        key = (cell.dist, cell.shifts, cell.n)
        if key not in rows:
            rows[key] = {}
            order.append(key)
        rows[key][cell.alpha] = cell
    dist_width = max(12, max(len(k[0]) for k in order) + 2)
    shift_strs = {k: "(" + ",".join(f"{s:g}" for s in k[1]) + ")" for k in order}
    shift_width = max(8, max(len(v) for v in shift_strs.values()) + 2)
    header = (f"{'dist':<{dist_width}}{'shifts':<{shift_width}}{'n':>6}  "
              + "".join(f"{'a=' + format(a, 'g'):>12}" for a in alphas))
    lines = [f"study: {report.study}  (replicates: {report.replicates})", header,
             "-" * len(header)]
    for key in order:
        dist, shifts, n = key
        n_str = f"{n}" if n > 0 else "limit"
        body = ""
        for a in alphas:
            cell = rows[key].get(a)
            body += f"{cell.value:>12.5f}" if cell is not None else f"{'':>12}"
        lines.append(f"{dist:<{dist_width}}{shift_strs[key]:<{shift_width}}"
                     f"{n_str:>6}  {body}")
    return "\n".join(lines) + "\n"
