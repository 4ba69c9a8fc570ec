import dataclasses
import json

import numpy as np
import pytest
from scipy.stats import chi2

from lqrank._rng import DATA_STREAM, substream
from lqrank.lqe import permuted_quantile, build_distribution, quantile
from lqrank.rank_statistics import scaled_kw_trace
from lqrank.sim_harness import (
    SimulationConfig,
    SimulationReport,
    _task_seed,
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
from lqrank.synthetic_data import DependenceSpec, gen_c_sample


def small_config(**overrides):
    base = dict(
        study="significance",
        spec=DependenceSpec.independent_normal(mean=2.0, sd=1.0),
        n_values=(40,),
        alphas=(0.10,),
        replications=6,
        permutations=4,
        burn_in=5,
        seed=0,
    )
    base.update(overrides)
    return SimulationConfig(**base)


class TestSimulationConfig:
    def test_single_spec_becomes_tuple(self):
        cfg = small_config()
        assert isinstance(cfg.specs, tuple) and len(cfg.specs) == 1

    def test_rejects_unknown_study(self):
        with pytest.raises(ValueError, match="study"):
            small_config(study="calibration")

    def test_rejects_bad_alpha(self):
        with pytest.raises(ValueError, match="alpha"):
            small_config(alphas=(1.2,))

    def test_rejects_n_swallowed_by_trims(self):
        with pytest.raises(ValueError, match="leaves no trace"):
            small_config(n_values=(12,), burn_in=6, prefix_drop=6)

    def test_rejects_bad_shift_row(self):
        with pytest.raises(ValueError, match="shift row"):
            small_config(study="power", shift_rows=((0.0, 1.0),))

    def test_rejects_non_spec(self):
        with pytest.raises(TypeError, match="DependenceSpec"):
            small_config(spec="normal")

    def test_rejects_bad_mode(self):
        with pytest.raises(ValueError, match="permutation_mode"):
            small_config(permutation_mode="rows")


class TestAsymptoticQuantile:
    def test_three_sample_closed_form(self):
        assert asymptotic_quantile(0.99) == pytest.approx(6.907755, abs=1e-5)
        assert asymptotic_quantile(0.95) == pytest.approx(4.493598, abs=1e-5)
        assert asymptotic_quantile(0.90) == pytest.approx(3.453878, abs=1e-5)

    def test_log_form_for_three_samples(self):
        for a in (0.5, 0.9, 0.99):
            assert asymptotic_quantile(a) == pytest.approx(-1.5 * np.log(1 - a),
                                                           rel=1e-10)

    def test_general_c(self):
        assert asymptotic_quantile(0.9, c=4) == pytest.approx(
            16 / 12 * chi2.ppf(0.9, 3), rel=1e-12)


class TestQuantileStudy:
    def test_single_replicate_matches_direct_call(self):
        spec = DependenceSpec.independent_normal(mean=2.0, sd=1.0)
        cfg = SimulationConfig(study="quantiles", spec=spec, n_values=(30,),
                               alphas=(0.9,), replications=1, permutations=1,
                               burn_in=5, seed=12)
        report = run_quantile_study(cfg)
        cell = [c for c in report.cells if c.dist != "asymptotic"][0]
        data = gen_c_sample(spec, 30, substream(12, DATA_STREAM, 0, 0, 0))
        expected = permuted_quantile(data, 0.9, permutations=1, burn_in=5,
                                     seed=_task_seed(12, (0, 0, 0)),
                                     permutation_mode="per_sample")
        assert cell.value == expected.averaged
        assert cell.stderr == 0.0

    def test_asymptotic_cells_present(self):
        cfg = dataclasses.replace(desk_config("quantiles"), replications=2,
                                  n_values=(25,))
        report = run_quantile_study(cfg)
        ref = {c.alpha: c.value for c in report.cells if c.dist == "asymptotic"}
        assert ref[0.9] == pytest.approx(3.453878, abs=1e-5)
        assert set(ref) == {0.99, 0.95, 0.9}

    def test_coupled_gap_is_zero(self):
        cfg = dataclasses.replace(desk_config("quantiles"), replications=3,
                                  n_values=(40,))
        report = run_quantile_study(cfg)
        by_dist = {}
        for c in report.cells:
            if c.n > 0:
                by_dist.setdefault(c.dist, {})[c.alpha] = c.value
        normal, expo = by_dist["normal(2,1)"], by_dist["exponential(rate=3)"]
        for a in cfg.alphas:
            assert normal[a] == expo[a]

    def test_coupled_requires_normal_then_exponential(self):
        cfg = small_config(study="quantiles", coupled=True,
                           alphas=(0.9,), replications=2)
        with pytest.raises(ValueError, match="coupled"):
            run_quantile_study(cfg)

    def test_study_mismatch(self):
        with pytest.raises(ValueError, match="expected 'quantiles'"):
            run_quantile_study(small_config())

    def test_prefix_drop_renumbers_weights(self):
        # dropping d leading trace entries and renumbering must equal a
        # quantile of the shortened trace with fresh 1/1, 1/2, ... weights
        spec = DependenceSpec.independent_normal()
        cfg = SimulationConfig(study="quantiles", spec=spec, n_values=(40,),
                               alphas=(0.9,), replications=1, permutations=1,
                               burn_in=0, prefix_drop=10, seed=5)
        report = run_quantile_study(cfg)
        cell = [c for c in report.cells if c.dist != "asymptotic"][0]
        data = gen_c_sample(spec, 40, substream(5, DATA_STREAM, 0, 0, 0))
        rng = substream(_task_seed(5, (0, 0, 0)), 1, 0)
        permuted = np.empty_like(data.values)
        for j in range(3):
            permuted[:, j] = data.values[rng.permutation(40), j]
        trace = scaled_kw_trace(permuted)[10:]
        assert cell.value == quantile(build_distribution(trace, 0), 0.9)


class TestRejectionStudies:
    def test_significance_requires_zero_shifts(self):
        spec = DependenceSpec.independent_normal(shifts=(0.0, 1.0, 0.0))
        with pytest.raises(ValueError, match="shifts zero"):
            run_significance_study(small_config(spec=spec))

    def test_power_requires_nonzero_shift(self):
        cfg = small_config(study="power")
        with pytest.raises(ValueError, match="nonzero shift"):
            run_power_study(cfg)

    def test_values_are_rates(self):
        report = run_significance_study(small_config())
        for cell in report.cells:
            assert 0.0 <= cell.value <= 1.0
            assert cell.stderr >= 0.0

    def test_zero_shift_power_equals_significance(self):
        sig = run_significance_study(small_config(seed=77))
        pow_cfg = small_config(study="power", seed=77,
                               shift_rows=((0.0, 0.0, 0.0), (0.0, 2.0, 0.0)))
        pow_report = run_power_study(pow_cfg)
        null_cells = [c for c in pow_report.cells if c.shifts == (0.0, 0.0, 0.0)]
        assert len(null_cells) == len(sig.cells)
        for a, b in zip(sig.cells, null_cells):
            assert a.value == b.value

    def test_power_increases_with_obvious_shift(self):
        cfg = small_config(study="power", replications=8,
                           shift_rows=((0.0, 3.0, 0.0),))
        report = run_power_study(cfg)
        assert report.cells[0].value >= 0.9


class TestDeterminismAndSerialization:
    def test_serial_rerun_identical(self):
        a = run_significance_study(small_config()).to_json()
        b = run_significance_study(small_config()).to_json()
        assert a == b

    def test_thread_count_invariance(self):
        serial = run_significance_study(small_config()).to_json()
        threaded = run_significance_study(small_config(threads=2)).to_json()
        assert serial == threaded

    def test_threads_absent_from_report(self):
        report = run_significance_study(small_config(threads=2))
        assert "threads" not in report.config
        assert "threads" not in report.to_json()

    def test_json_roundtrip_bitwise(self):
        report = run_significance_study(small_config())
        text = report.to_json()
        back = SimulationReport.from_json(text)
        assert back == report
        assert back.to_json() == text

    def test_cell_fields(self):
        report = run_significance_study(small_config())
        payload = json.loads(report.to_json())
        assert set(payload) == {"study", "replicates", "config", "cells"}
        for cell in payload["cells"]:
            assert set(cell) == {"dist", "shifts", "n", "alpha", "value",
                                 "stderr"}


class TestConfigFile:
    def test_load_minimal(self, tmp_path):
        path = tmp_path / "cfg.json"
        path.write_text(json.dumps({
            "study": "significance",
            "spec": {"kind": "independent", "family": "normal", "mean": 2.0},
            "n_values": [40],
            "alphas": [0.1],
            "replications": 3,
            "permutations": 4,
        }))
        cfg = load_config(path)
        assert cfg.study == "significance"
        assert cfg.specs[0].mean == 2.0
        assert cfg.replications == 3

    def test_load_spec_list(self, tmp_path):
        path = tmp_path / "cfg.json"
        path.write_text(json.dumps({
            "study": "quantiles",
            "specs": [
                {"kind": "independent", "family": "normal", "mean": 2.0},
                {"kind": "marshall_olkin", "family": "exponential",
                 "lambdas": [1, 1, 1]},
            ],
            "n_values": [30],
            "alphas": [0.9],
        }))
        cfg = load_config(path)
        assert len(cfg.specs) == 2
        assert cfg.specs[1].kind == "marshall_olkin"

    def test_unknown_field_rejected(self, tmp_path):
        path = tmp_path / "cfg.json"
        path.write_text(json.dumps({"study": "power", "spec": {}, "n_values": [10],
                                    "alphas": [0.1], "bootstrap": True}))
        with pytest.raises(ValueError, match="unknown config fields"):
            load_config(path)

    def test_unknown_spec_field_rejected(self, tmp_path):
        path = tmp_path / "cfg.json"
        path.write_text(json.dumps({"study": "power",
                                    "spec": {"kine": "independent"},
                                    "n_values": [10], "alphas": [0.1]}))
        with pytest.raises(ValueError, match="unknown spec fields"):
            load_config(path)

    def test_missing_spec_rejected(self, tmp_path):
        path = tmp_path / "cfg.json"
        path.write_text(json.dumps({"study": "power", "n_values": [10],
                                    "alphas": [0.1]}))
        with pytest.raises(ValueError, match="spec"):
            load_config(path)


class TestPresetsAndRendering:
    def test_presets_construct(self):
        for study in ("quantiles", "significance", "power"):
            assert desk_config(study).study == study
            assert full_scale_config(study).study == study
        with pytest.raises(ValueError, match="unknown study"):
            desk_config("levels")

    def test_full_scale_quantiles_protocol(self):
        cfg = full_scale_config("quantiles")
        assert cfg.replications == 500
        assert cfg.n_values == (1000,)
        assert cfg.permutations == 100
        assert cfg.prefix_drop == 10 and cfg.burn_in == 0

    def test_run_study_dispatch(self):
        report = run_study(small_config())
        assert report.study == "significance"

    def test_render_table_layout(self):
        report = run_significance_study(small_config())
        text = render_table(report)
        assert "study: significance" in text
        assert "normal(2,1)" in text
        assert "a=0.1" in text
        value = report.cells[0].value
        assert f"{value:.5f}" in text
