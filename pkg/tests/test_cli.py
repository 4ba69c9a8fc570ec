import json

import numpy as np
import pytest

from lqrank.cli import (
    EXIT_DATA,
    EXIT_OK,
    EXIT_REJECT,
    EXIT_USAGE,
    DataError,
    load_csv,
    main,
)
from lqrank.lqe import lqe_test
from lqrank.sim_harness import SimulationReport


@pytest.fixture
def null_csv(tmp_path):
    rng = np.random.default_rng(61)
    path = tmp_path / "null.csv"
    rows = rng.standard_normal((80, 3))
    lines = ["a,b,c"] + [",".join(f"{v:.6f}" for v in row) for row in rows]
    path.write_text("\n".join(lines) + "\n")
    return path


@pytest.fixture
def shifted_csv(tmp_path):
    rng = np.random.default_rng(62)
    path = tmp_path / "shifted.csv"
    rows = rng.standard_normal((80, 3))
    rows[:, 1] += 2.5
    lines = ["a,b,c"] + [",".join(f"{v:.6f}" for v in row) for row in rows]
    path.write_text("\n".join(lines) + "\n")
    return path


class TestLoadCsv:
    def test_parses_header_and_rows(self, null_csv):
        header, dataset = load_csv(null_csv, 5)
        assert header == ["a", "b", "c"]
        assert (dataset.n, dataset.c) == (80, 3)

    def test_missing_file(self, tmp_path):
        with pytest.raises(DataError, match="cannot read"):
            load_csv(tmp_path / "nope.csv", 5)

    def test_empty_file(self, tmp_path):
        path = tmp_path / "empty.csv"
        path.write_text("")
        with pytest.raises(DataError, match="empty"):
            load_csv(path, 5)

    def test_single_column_header(self, tmp_path):
        path = tmp_path / "one.csv"
        path.write_text("a\n1.0\n2.0\n")
        with pytest.raises(DataError, match="line 1"):
            load_csv(path, 0)

    def test_ragged_row_cites_line(self, tmp_path):
        path = tmp_path / "ragged.csv"
        path.write_text("a,b\n1.0,2.0\n3.0\n")
        with pytest.raises(DataError, match="line 3: expected 2 fields"):
            load_csv(path, 0)

    def test_non_numeric_cell_cites_line_and_column(self, tmp_path):
        path = tmp_path / "bad.csv"
        path.write_text("a,b\n1.0,2.0\n3.0,x\n")
        with pytest.raises(DataError, match="line 3: non-numeric value 'x'"):
            load_csv(path, 0)

    def test_nan_cell_rejected(self, tmp_path):
        path = tmp_path / "nan.csv"
        path.write_text("a,b\n1.0,2.0\nnan,4.0\n")
        with pytest.raises(DataError, match="line 3: non-finite"):
            load_csv(path, 0)

    def test_too_few_rows_for_burn_in(self, tmp_path):
        path = tmp_path / "short.csv"
        path.write_text("a,b\n" + "\n".join(f"{i}.0,{i}.5" for i in range(6)) + "\n")
        with pytest.raises(DataError, match="at least 7 data rows"):
            load_csv(path, 5)


class TestTestCommand:
    def test_fail_to_reject_exit_zero(self, null_csv, capsys):
        code = main(["test", str(null_csv), "--seed", "1"])
        out = capsys.readouterr().out
        assert code == EXIT_OK
        assert "fail to reject" in out

    def test_reject_exit_three(self, shifted_csv, capsys):
        code = main(["test", str(shifted_csv), "--seed", "1"])
        out = capsys.readouterr().out
        assert code == EXIT_REJECT
        assert "decision:        reject" in out

    def test_json_format(self, null_csv, capsys):
        code = main(["test", str(null_csv), "--seed", "3", "--format", "json"])
        payload = json.loads(capsys.readouterr().out)
        assert code in (EXIT_OK, EXIT_REJECT)
        assert set(payload) == {"statistic", "critical_value", "alpha", "reject",
                                "interval", "permutations", "burn_in", "seed",
                                "dependent"}
        assert payload["seed"] == 3

    def test_matches_library_call(self, null_csv, capsys):
        main(["test", str(null_csv), "--seed", "5", "--independent",
              "--format", "json"])
        payload = json.loads(capsys.readouterr().out)
        _, dataset = load_csv(null_csv, 5)
        report = lqe_test(dataset, alpha=0.10, permutations=20, burn_in=5,
                          seed=5, dependent=False)
        assert payload["statistic"] == report.statistic_value
        assert payload["critical_value"] == report.quantile.averaged

    def test_data_error_exit_two(self, tmp_path, capsys):
        path = tmp_path / "bad.csv"
        path.write_text("a,b\n1.0,oops\n" * 1)
        code = main(["test", str(path)])
        err = capsys.readouterr().err
        assert code == EXIT_DATA
        assert "line 2" in err

    def test_bad_alpha_exit_one(self, null_csv, capsys):
        code = main(["test", str(null_csv), "--alpha", "1.5"])
        assert code == EXIT_USAGE

    def test_unknown_flag_exit_one(self, null_csv, capsys):
        code = main(["test", str(null_csv), "--bootstrap"])
        assert code == EXIT_USAGE

    def test_env_seed_fallback(self, null_csv, capsys, monkeypatch):
        monkeypatch.setenv("LQE_SEED", "11")
        main(["test", str(null_csv), "--format", "json"])
        with_env = json.loads(capsys.readouterr().out)
        monkeypatch.delenv("LQE_SEED")
        main(["test", str(null_csv), "--seed", "11", "--format", "json"])
        explicit = json.loads(capsys.readouterr().out)
        assert with_env == explicit

    def test_bad_env_seed_is_data_error(self, null_csv, capsys, monkeypatch):
        monkeypatch.setenv("LQE_SEED", "eleven")
        code = main(["test", str(null_csv)])
        assert code == EXIT_DATA


class TestQuantileCommand:
    def test_default_levels(self, null_csv, capsys):
        code = main(["quantile", str(null_csv), "--seed", "2", "--format",
                     "json"])
        payload = json.loads(capsys.readouterr().out)
        assert code == EXIT_OK
        assert [q["alpha"] for q in payload] == [0.99, 0.95, 0.90]
        for q in payload:
            per = q["per_permutation"]
            assert len(per) == 20
            assert min(per) <= q["averaged"] <= max(per)

    def test_requested_levels_table(self, null_csv, capsys):
        code = main(["quantile", str(null_csv), "--alpha", "0.5", "--seed", "2"])
        out = capsys.readouterr().out
        assert code == EXIT_OK
        assert "averaged" in out and "0.5" in out

    def test_quantiles_increase_with_level(self, null_csv, capsys):
        main(["quantile", str(null_csv), "--seed", "2", "--format", "json"])
        payload = json.loads(capsys.readouterr().out)
        by_alpha = {q["alpha"]: q["averaged"] for q in payload}
        assert by_alpha[0.90] <= by_alpha[0.95] <= by_alpha[0.99]


class TestSimulateCommand:
    def test_preset_required_without_config(self, capsys):
        code = main(["simulate"])
        assert code == EXIT_USAGE

    def test_desk_preset_json(self, capsys):
        code = main(["simulate", "--study", "significance", "--replications",
                     "4", "--n", "30", "--seed", "5", "--format", "json"])
        out = capsys.readouterr().out
        assert code == EXIT_OK
        report = SimulationReport.from_json(out)
        assert report.study == "significance"
        assert report.replicates == 4
        # bundled reader reproduces the emitted report bit for bit
        assert report.to_json() + "\n" == out

    def test_table_output(self, capsys):
        code = main(["simulate", "--study", "power", "--replications", "3",
                     "--n", "30", "--seed", "5"])
        out = capsys.readouterr().out
        assert code == EXIT_OK
        assert "study: power" in out

    def test_output_file(self, tmp_path, capsys):
        target = tmp_path / "report.json"
        code = main(["simulate", "--study", "significance", "--replications",
                     "3", "--n", "30", "--output", str(target)])
        capsys.readouterr()
        assert code == EXIT_OK
        report = SimulationReport.from_json(target.read_text())
        assert report.replicates == 3

    def test_config_file_run(self, tmp_path, capsys):
        cfg_path = tmp_path / "cfg.json"
        cfg_path.write_text(json.dumps({
            "study": "significance",
            "spec": {"kind": "independent", "family": "normal", "mean": 2.0,
                     "sd": 1.0},
            "n_values": [30],
            "alphas": [0.1],
            "replications": 3,
            "permutations": 4,
        }))
        code = main(["simulate", str(cfg_path), "--format", "json"])
        report = SimulationReport.from_json(capsys.readouterr().out)
        assert code == EXIT_OK
        assert report.replicates == 3

    def test_bad_config_exit_two(self, tmp_path, capsys):
        cfg_path = tmp_path / "cfg.json"
        cfg_path.write_text(json.dumps({"study": "significance"}))
        code = main(["simulate", str(cfg_path)])
        assert code == EXIT_DATA

    def test_config_and_paper_scale_conflict(self, tmp_path, capsys):
        cfg_path = tmp_path / "cfg.json"
        cfg_path.write_text("{}")
        code = main(["simulate", str(cfg_path), "--paper-scale"])
        assert code == EXIT_USAGE

    def test_seed_determinism_across_thread_counts(self, capsys):
        args = ["simulate", "--study", "significance", "--replications", "4",
                "--n", "30", "--seed", "9", "--format", "json"]
        main(args)
        serial = capsys.readouterr().out
        main(args + ["--threads", "2"])
        threaded = capsys.readouterr().out
        assert serial == threaded


class TestDiagnoseCommand:
    def test_distance_output(self, capsys):
        code = main(["diagnose", "--draws", "500", "--seed", "3"])
        out = capsys.readouterr().out
        assert code == EXIT_OK
        assert "Kolmogorov distance" in out

    def test_json_deterministic(self, capsys):
        main(["diagnose", "--draws", "400", "--seed", "3", "--format", "json"])
        a = json.loads(capsys.readouterr().out)
        main(["diagnose", "--draws", "400", "--seed", "3", "--format", "json"])
        b = json.loads(capsys.readouterr().out)
        assert a == b
        assert 0.0 < a["distance"] < 1.0

    def test_bad_draws_exit_one(self, capsys):
        code = main(["diagnose", "--draws", "0"])
        assert code == EXIT_USAGE


class TestTopLevel:
    def test_no_command_is_usage_error(self, capsys):
        assert main([]) == EXIT_USAGE

    def test_help_exits_zero(self, capsys):
        assert main(["--help"]) == 0
        assert "test" in capsys.readouterr().out
