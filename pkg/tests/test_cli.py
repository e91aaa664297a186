"""CLI tests: subcommand behavior, file outputs, and exit codes."""

import json

import numpy as np
import pytest
from click.testing import CliRunner

from chaoshedge.cli import OracleCheck, main, oracle_checks
from chaoshedge.harness import config_dumps, config_to_json
from chaoshedge.models import BrownianMotion, TimeGrid, load_path_batch, simulate_paths
from chaoshedge.payoffs import EuropeanCall

from test_harness import bm_config


@pytest.fixture
def runner():
    return CliRunner()


def write_simulate_config(path, seed=3):
    path.write_text(json.dumps({
        "model": {"kind": "BrownianMotion", "d": 1, "x0": [0.0]},
        "grid": {"T": 1.0, "K": 16},
        "n_paths": 40,
        "seed": seed,
    }))


class TestSimulate:
    def test_writes_binary_and_sidecar(self, runner, tmp_path):
        cfg = tmp_path / "sim.json"
        write_simulate_config(cfg)
        result = runner.invoke(main, ["simulate", "--config", str(cfg),
                                      "--out", str(tmp_path / "out")])
        assert result.exit_code == 0, result.output
        assert "paths.bin" in result.output and "paths.json" in result.output

        grid = TimeGrid(T=1.0, K=16)
        batch = load_path_batch(tmp_path / "out" / "paths.bin", grid)
        direct = simulate_paths(BrownianMotion(dims=1), grid, 40, 3)
        np.testing.assert_array_equal(batch.states, direct.states)

        sidecar = json.loads((tmp_path / "out" / "paths.json").read_text())
        assert sidecar["seed"] == 3 and sidecar["measure"] == "Physical"
        assert sidecar["model"]["kind"] == "BrownianMotion"

    def test_seed_override(self, runner, tmp_path):
        cfg = tmp_path / "sim.json"
        write_simulate_config(cfg, seed=3)
        runner.invoke(main, ["simulate", "--config", str(cfg),
                             "--out", str(tmp_path / "a"), "--seed", "9"])
        grid = TimeGrid(T=1.0, K=16)
        batch = load_path_batch(tmp_path / "a" / "paths.bin", grid)
        direct = simulate_paths(BrownianMotion(dims=1), grid, 40, 9)
        np.testing.assert_array_equal(batch.states, direct.states)

    def test_missing_key_is_config_error(self, runner, tmp_path):
        cfg = tmp_path / "sim.json"
        cfg.write_text(json.dumps({"model": {"kind": "BrownianMotion", "d": 1, "x0": [0.0]}}))
        result = runner.invoke(main, ["simulate", "--config", str(cfg),
                                      "--out", str(tmp_path / "out")])
        assert result.exit_code == 2
        assert "config error" in result.output

    def test_malformed_value_is_config_error(self, runner, tmp_path):
        cfg = tmp_path / "sim.json"
        doc = {"model": {"kind": "Cev", "x0": [100.0], "alpha": -0.02, "sigma0": 0.4},
               "grid": {"T": 1.0, "K": 16}, "n_paths": 40}
        cfg.write_text(json.dumps(doc))
        result = runner.invoke(main, ["simulate", "--config", str(cfg),
                                      "--out", str(tmp_path / "out")])
        assert result.exit_code == 2
        assert "config error" in result.output and "malformed" in result.output


class TestRun:
    def test_emits_files(self, runner, tmp_path):
        cfg_path = tmp_path / "exp.json"
        cfg_path.write_text(config_dumps(bm_config(orders=(0, 1))))
        result = runner.invoke(main, ["run", "--config", str(cfg_path),
                                      "--out", str(tmp_path / "res")])
        assert result.exit_code == 0, result.output
        names = {p.name for p in (tmp_path / "res").iterdir()}
        assert names == {"report.json", "learning_curve.csv",
                         "payoff_scatter.csv", "hedge_paths.csv"}
        doc = json.loads((tmp_path / "res" / "report.json").read_text())
        assert [row["order"] for row in doc["orders"]] == [0, 1]

    def test_seed_override_changes_paths_seed(self, runner, tmp_path):
        cfg_path = tmp_path / "exp.json"
        cfg_path.write_text(config_dumps(bm_config(orders=(0,))))
        runner.invoke(main, ["run", "--config", str(cfg_path),
                             "--out", str(tmp_path / "res"), "--seed", "42"])
        doc = json.loads((tmp_path / "res" / "report.json").read_text())
        assert doc["config"]["seeds"]["paths"] == 42
        assert doc["config"]["seeds"]["features"] == 6  # untouched

    def test_missing_file_is_config_error(self, runner, tmp_path):
        result = runner.invoke(main, ["run", "--config", str(tmp_path / "nope.json"),
                                      "--out", str(tmp_path / "res")])
        assert result.exit_code == 2
        assert "config error" in result.output

    def test_malformed_json_is_config_error(self, runner, tmp_path):
        cfg_path = tmp_path / "exp.json"
        cfg_path.write_text("{not json")
        result = runner.invoke(main, ["run", "--config", str(cfg_path),
                                      "--out", str(tmp_path / "res")])
        assert result.exit_code == 2

    def test_invalid_config_is_config_error(self, runner, tmp_path):
        doc = config_to_json(bm_config(orders=(0, 1)))
        doc["orders"] = [1, 0]
        cfg_path = tmp_path / "exp.json"
        cfg_path.write_text(json.dumps(doc))
        result = runner.invoke(main, ["run", "--config", str(cfg_path),
                                      "--out", str(tmp_path / "res")])
        assert result.exit_code == 2
        assert "ascending" in result.output


class TestReproduce:
    def test_unknown_name_is_usage_error(self, runner):
        result = runner.invoke(main, ["reproduce", "heston"])
        assert result.exit_code == 2

    def test_desk_scale_flag_parses(self, runner):
        result = runner.invoke(main, ["reproduce", "--help"])
        assert result.exit_code == 0
        assert "--desk-scale" in result.output


class TestOracleCheck:
    def test_checks_pass_at_small_sample(self):
        checks = oracle_checks(n_paths=4_000, seed=17)
        assert [c.name for c in checks] == [
            "bm-call-delta", "cev-asian-value", "cev-asian-delta",
            "affine-basket-value", "affine-basket-delta-0", "affine-basket-delta-1",
        ]
        for check in checks:
            assert check.passed, f"{check.name}: err {check.error} > tol {check.tolerance}"

    def test_command_reports_and_exits_zero(self, runner, monkeypatch):
        monkeypatch.setattr(
            "chaoshedge.cli.oracle_checks",
            lambda n_paths, seed: [OracleCheck("fake", 1.0, 1.0001, 0.01)],
        )
        result = runner.invoke(main, ["oracle-check"])
        assert result.exit_code == 0, result.output
        assert "ok" in result.output and "all oracle checks passed" in result.output

    def test_failure_exits_three(self, runner, monkeypatch):
        monkeypatch.setattr(
            "chaoshedge.cli.oracle_checks",
            lambda n_paths, seed: [OracleCheck("fake", 1.0, 2.0, 0.01)],
        )
        result = runner.invoke(main, ["oracle-check"])
        assert result.exit_code == 3
        assert "FAIL" in result.output and "numerical error" in result.output

    def test_bad_paths_is_config_error(self, runner):
        result = runner.invoke(main, ["oracle-check", "--paths", "1"])
        assert result.exit_code == 2


class TestThreads:
    def test_nonpositive_rejected(self, runner, tmp_path):
        cfg = tmp_path / "sim.json"
        write_simulate_config(cfg)
        result = runner.invoke(main, ["simulate", "--config", str(cfg),
                                      "--out", str(tmp_path / "out"), "--threads", "0"])
        assert result.exit_code == 2

    def test_limit_accepted(self, runner, tmp_path):
        cfg = tmp_path / "sim.json"
        write_simulate_config(cfg)
        result = runner.invoke(main, ["simulate", "--config", str(cfg),
                                      "--out", str(tmp_path / "out"), "--threads", "1"])
        assert result.exit_code == 0, result.output
