"""Harness tests: config round-trips, the pipeline's regression identities,
reference hedges, and file emission."""

import json
from dataclasses import replace

import numpy as np
import pytest

from chaoshedge.errors import ConfigError
from chaoshedge.harness import (
    ExperimentConfig,
    FitReport,
    Seeds,
    config_dumps,
    config_loads,
    config_to_json,
    emit_results,
    oracle_supported,
    reference_hedge,
    report_dumps,
    report_to_json,
    reproduce_config,
    run_and_emit,
    run_experiment,
)
from chaoshedge.models import (
    AffineMultiD,
    BrownianMotion,
    Cev,
    PathBatch,
    TimeGrid,
    sample_affine_model,
    simulate_paths,
    zero_drift,
)
from chaoshedge.oracle import (
    QuadratureSpec,
    asian_put_value_delta,
    basket_put_value_delta,
)
from chaoshedge.payoffs import AsianPut, BasketPut, EuropeanCall

DESK_W = np.array([1.0, -0.95])


def bm_config(**overrides):
    base = dict(
        model=BrownianMotion(dims=1),
        payoff=EuropeanCall(strike=-0.5),
        grid=TimeGrid(T=1.0, K=40),
        n_paths=300,
        orders=(0, 1, 2),
        m_n=6,
        hedge_stride=5,
        seeds=Seeds(paths=5, features=6),
    )
    base.update(overrides)
    return ExperimentConfig(**base)


def cev_config(**overrides):
    base = dict(
        model=Cev(x0=100.0, alpha=-0.02, sigma0=0.4),
        payoff=AsianPut(strike=102.0),
        grid=TimeGrid(T=1.0, K=40),
        n_paths=240,
        orders=(0, 1),
        m_n=6,
        hedge_stride=8,
        seeds=Seeds(paths=7, features=8),
    )
    base.update(overrides)
    return ExperimentConfig(**base)


def basket_config(**overrides):
    base = dict(
        model=sample_affine_model(2, 2025),
        payoff=BasketPut(strike=0.8, weights=DESK_W),
        grid=TimeGrid(T=1.0, K=40),
        n_paths=240,
        orders=(0, 1),
        m_n=6,
        hedge_stride=8,
        seeds=Seeds(paths=9, features=10, model_params=2025),
    )
    base.update(overrides)
    return ExperimentConfig(**base)


class TestExperimentConfig:
    def test_validation(self):
        with pytest.raises(ConfigError, match="ascending"):
            bm_config(orders=(2, 1))
        with pytest.raises(ConfigError, match="ascending"):
            bm_config(orders=(1, 1))
        with pytest.raises(ConfigError, match="non-negative"):
            bm_config(orders=(-1, 0))
        with pytest.raises(ConfigError, match="train_fraction"):
            bm_config(train_fraction=1.0)
        with pytest.raises(ConfigError, match="m_n"):
            bm_config(m_n=0)
        with pytest.raises(ConfigError, match="hedge_stride"):
            bm_config(hedge_stride=7)  # does not divide K=40
        with pytest.raises(ConfigError, match="n_paths"):
            bm_config(n_paths=1)
        with pytest.raises(ConfigError, match="ridge_lambda"):
            bm_config(ridge_lambda=-1.0)
        with pytest.raises(ConfigError, match="weights length"):
            basket_config(payoff=BasketPut(strike=0.8, weights=[1.0, -0.9, 0.8]))
        with pytest.raises(ConfigError, match="one-dimensional"):
            bm_config(model=BrownianMotion(dims=2))
        with pytest.raises(ConfigError, match="activation"):
            bm_config(activation="Sin")

    def test_prefix_split_sizes(self):
        cfg = bm_config(n_paths=5, orders=(0,), train_fraction=0.8)
        assert cfg.n_train == 4 and cfg.n_test == 1
        cfg = bm_config(n_paths=250, train_fraction=0.8)
        assert cfg.n_train == 200 and cfg.n_test == 50

    def test_json_round_trip(self):
        cfg = basket_config(
            ridge_lambda=1e-7,
            output_dir="/tmp/somewhere",
            quad=QuadratureSpec(u_max=60.0, n_nodes=129, rule="Simpson"),
            ode_steps=128,
            shared_bank=False,
            n_hedge_sample_paths=2,
        )
        doc = config_to_json(config_loads(config_dumps(cfg)))
        assert doc == config_to_json(cfg)
        text = config_dumps(cfg)
        assert json.loads(text)["seeds"]["model_params"] == 2025

    def test_missing_key_reported(self):
        doc = config_to_json(bm_config())
        del doc["orders"]
        with pytest.raises(ConfigError, match="orders"):
            config_loads(json.dumps(doc))

    def test_malformed_value_reported(self):
        doc = config_to_json(bm_config())
        doc["n_paths"] = "many"
        with pytest.raises(ConfigError, match="malformed"):
            config_loads(json.dumps(doc))
        doc = config_to_json(bm_config())
        doc["payoff"]["K"] = [0.0]
        with pytest.raises(ConfigError, match="malformed"):
            config_loads(json.dumps(doc))


class TestRunExperiment:
    def test_intercept_only_matches_variance(self):
        cfg = bm_config(orders=(0,))
        report = run_experiment(cfg)
        paths = simulate_paths(cfg.model, cfg.grid, cfg.n_paths, cfg.seeds.paths)
        y = np.maximum(paths.states[:, -1, 0] - cfg.payoff.strike, 0.0)
        y_train, y_test = y[: cfg.n_train], y[cfg.n_train :]
        row = report.orders[0]
        assert row.n_params == 1
        assert row.train_mse == pytest.approx(np.mean((y_train - y_train.mean()) ** 2), abs=1e-10)
        assert row.test_mse == pytest.approx(np.mean((y_test - y_train.mean()) ** 2), abs=1e-10)

    def test_nested_prefix_consistency(self):
        full = run_experiment(bm_config(orders=(0, 1, 2)))
        short = run_experiment(bm_config(orders=(0, 1)))
        for row_full, row_short in zip(full.orders, short.orders):
            assert row_full.order == row_short.order
            assert row_full.train_mse == pytest.approx(row_short.train_mse, abs=1e-10)
            assert row_full.test_mse == pytest.approx(row_short.test_mse, abs=1e-10)
        for (_, pred_full), (_, pred_short) in zip(
            full.payoff_sample.predictions, short.payoff_sample.predictions
        ):
            np.testing.assert_allclose(pred_full, pred_short, atol=1e-10)

    def test_deterministic_report(self):
        cfg = cev_config()
        doc1 = report_to_json(run_experiment(cfg))
        doc2 = report_to_json(run_experiment(cfg))
        for doc in (doc1, doc2):
            for row in doc["orders"]:
                row.pop("runtime_seconds")
        assert doc1 == doc2

    def test_report_fields(self):
        cfg = bm_config()
        report = run_experiment(cfg)
        assert [row.order for row in report.orders] == [0, 1, 2]
        for row in report.orders:
            assert row.n_params == 1 + row.order * cfg.m_n
            assert row.runtime_seconds > 0
            assert row.imse_test is not None
        assert report.n_train == 240 and report.n_test == 60
        assert report.oracle_available and report.oracle_note == ""
        assert report.hedge_stride == 1  # analytic reference: every node
        assert report.hedge_order == 2
        assert report.code_version
        sample = report.hedge_sample
        assert sample.theta_hat.shape == (4, 41, 1)
        assert sample.theta_ref.shape == (4, 41, 1)
        assert list(sample.path_ids) == [240, 241, 242, 243]
        assert report.payoff_sample.payoff_true.shape == (60,)

    def test_learning_improves_with_order(self):
        report = run_experiment(bm_config(n_paths=600, orders=(0, 1, 2)))
        mses = [row.test_mse for row in report.orders]
        imses = [row.imse_test for row in report.orders]
        assert mses[2] < mses[1] < mses[0]
        assert imses[2] < imses[1] < imses[0]

    def test_oracle_unavailable_pair(self):
        cfg = bm_config(payoff=AsianPut(strike=0.5), orders=(0, 1))
        assert not oracle_supported(cfg.model, cfg.payoff)
        report = run_experiment(cfg)
        assert not report.oracle_available
        assert report.oracle_note == "oracle unavailable"
        assert all(row.imse_test is None for row in report.orders)
        assert report.hedge_sample.theta_ref is None

    def test_fresh_banks_differ_from_shared(self):
        shared = run_experiment(bm_config())
        fresh = run_experiment(bm_config(shared_bank=False))
        assert fresh.orders[0].test_mse == pytest.approx(shared.orders[0].test_mse)
        assert fresh.orders[2].test_mse != shared.orders[2].test_mse
        assert fresh.orders[2].test_mse < fresh.orders[1].test_mse

    def test_empty_orders(self):
        report = run_experiment(bm_config(orders=()))
        assert report.orders == ()
        assert report.hedge_order is None and report.hedge_sample is None

    def test_cev_reference_hedge_in_report(self):
        report = run_experiment(cev_config())
        assert report.hedge_stride == 8
        assert report.orders[1].imse_test < report.orders[0].imse_test
        ref = report.hedge_sample.theta_ref
        assert ref.shape == (4, 41, 1)
        assert np.all(ref <= 1e-9) and np.all(ref >= -1.0 - 1e-9)
        assert np.all(ref[:, -1, :] == 0.0)


class TestReferenceHedge:
    def test_bm_call_levels(self):
        cfg = bm_config()
        grid = cfg.grid
        strike = cfg.payoff.strike
        levels = np.array([strike, strike + 10.0, strike - 10.0])
        states = np.tile(levels[:, None, None], (1, grid.K + 1, 1))
        paths = PathBatch(
            grid=grid,
            states=states,
            increments=np.zeros((3, grid.K, 1)),
            seed=0,
        )
        hedge = reference_hedge(cfg, paths)
        assert hedge.theta.shape == (3, grid.K + 1, 1)
        # at the money: Phi(0) = 1/2 at every node before maturity
        np.testing.assert_allclose(hedge.theta[0, :-1, 0], 0.5, atol=1e-15)
        np.testing.assert_allclose(hedge.theta[1, :-1, 0], 1.0, atol=1e-12)
        np.testing.assert_allclose(hedge.theta[2, :-1, 0], 0.0, atol=1e-12)
        # terminal node: the payoff indicator
        assert hedge.theta[1, -1, 0] == 1.0 and hedge.theta[2, -1, 0] == 0.0

    def test_cev_asian_matches_pointwise_oracle(self):
        cfg = cev_config(n_paths=12)
        paths = simulate_paths(cfg.model, cfg.grid, cfg.n_paths, cfg.seeds.paths)
        hedge = reference_hedge(cfg, paths, node_stride=cfg.grid.K)  # nodes 0 and K
        model_q = zero_drift(cfg.model)
        for m in range(4):
            _, delta = asian_put_value_delta(
                model_q, paths.states[m, 0, 0], 0.0, 0.0, 102.0, 1.0, cfg.quad, cfg.ode_steps
            )
            assert hedge.theta[m, 0, 0] == pytest.approx(delta, rel=1e-12, abs=1e-13)

    def test_basket_matches_pointwise_oracle_and_terminal_indicator(self):
        cfg = basket_config(n_paths=12)
        paths = simulate_paths(cfg.model, cfg.grid, cfg.n_paths, cfg.seeds.paths)
        hedge = reference_hedge(cfg, paths, node_stride=cfg.grid.K)
        model_q = zero_drift(cfg.model)
        for m in range(4):
            _, delta = basket_put_value_delta(
                model_q, paths.states[m, 0, :], 0.0, 0.8, DESK_W, 1.0, cfg.quad, cfg.ode_steps
            )
            np.testing.assert_allclose(hedge.theta[m, 0, :], delta, rtol=1e-12, atol=1e-13)
        terminal = paths.states[:, -1, :]
        expected = -DESK_W[None, :] * (terminal @ DESK_W < 0.8)[:, None]
        np.testing.assert_array_equal(hedge.theta[:, -1, :], expected)

    def test_unsupported_pair(self):
        cfg = bm_config(payoff=AsianPut(strike=0.5))
        paths = simulate_paths(cfg.model, cfg.grid, 3, 0)
        with pytest.raises(ConfigError, match="oracle unavailable"):
            reference_hedge(cfg, paths)

    def test_stride_must_divide(self):
        cfg = bm_config()
        paths = simulate_paths(cfg.model, cfg.grid, 3, 0)
        with pytest.raises(ConfigError, match="node_stride"):
            reference_hedge(cfg, paths, node_stride=7)

    def test_cev_late_slices_stable_under_refinement(self):
        # the inversion window auto-widens near maturity; doubling both the
        # quadrature and the ODE resolution must not move the deltas
        cfg = cev_config(n_paths=40)
        paths = simulate_paths(cfg.model, cfg.grid, cfg.n_paths, cfg.seeds.paths)
        base = reference_hedge(cfg, paths, node_stride=4)
        fine = reference_hedge(
            cfg.__class__(**{**_config_kwargs(cfg),
                             "quad": QuadratureSpec(u_max=80.0, n_nodes=512),
                             "ode_steps": 512}),
            paths,
            node_stride=4,
        )
        np.testing.assert_allclose(base.theta, fine.theta, atol=5e-8)

    def test_basket_slices_stable_under_refinement(self):
        cfg = basket_config(n_paths=40)
        paths = simulate_paths(cfg.model, cfg.grid, cfg.n_paths, cfg.seeds.paths)
        base = reference_hedge(cfg, paths, node_stride=4)
        fine = reference_hedge(
            cfg.__class__(**{**_config_kwargs(cfg),
                             "quad": QuadratureSpec(u_max=80.0, n_nodes=512),
                             "ode_steps": 512}),
            paths,
            node_stride=4,
        )
        np.testing.assert_allclose(base.theta, fine.theta, atol=5e-8)


def _config_kwargs(cfg: ExperimentConfig) -> dict:
    return dict(
        model=cfg.model,
        payoff=cfg.payoff,
        grid=cfg.grid,
        n_paths=cfg.n_paths,
        orders=cfg.orders,
        m_n=cfg.m_n,
        activation=cfg.activation,
        init=cfg.init,
        seeds=cfg.seeds,
        train_fraction=cfg.train_fraction,
        ridge_lambda=cfg.ridge_lambda,
        quad=cfg.quad,
        ode_steps=cfg.ode_steps,
        hedge_stride=cfg.hedge_stride,
        n_hedge_sample_paths=cfg.n_hedge_sample_paths,
        shared_bank=cfg.shared_bank,
        output_dir=cfg.output_dir,
    )


class TestEmitResults:
    def test_files_and_row_counts(self, tmp_path):
        cfg = bm_config(output_dir=str(tmp_path / "out"))
        report = run_and_emit(cfg)
        out = tmp_path / "out"
        names = {p.name for p in out.iterdir()}
        assert names == {"report.json", "learning_curve.csv", "payoff_scatter.csv", "hedge_paths.csv"}

        curve = (out / "learning_curve.csv").read_text().strip().splitlines()
        assert curve[0] == "N,n_params,train_mse,test_mse,imse_test,runtime_seconds"
        assert len(curve) == 1 + len(cfg.orders)
        assert curve[1].startswith("0,1,")

        scatter = (out / "payoff_scatter.csv").read_text().strip().splitlines()
        assert scatter[0] == "path_id,payoff_true,pred_N0,pred_N1,pred_N2"
        assert len(scatter) == 1 + report.n_test

        hedge = (out / "hedge_paths.csv").read_text().strip().splitlines()
        assert hedge[0] == "path_id,t,asset,theta_hat,theta_ref"
        assert len(hedge) == 1 + 4 * (cfg.grid.K + 1) * 1

        doc = json.loads((out / "report.json").read_text())
        assert doc["n_train"] == report.n_train
        assert [row["order"] for row in doc["orders"]] == [0, 1, 2]

    def test_header_only_when_no_orders(self, tmp_path):
        report = run_experiment(bm_config(orders=()))
        emit_results(report, tmp_path)
        curve = (tmp_path / "learning_curve.csv").read_text().strip().splitlines()
        assert curve == ["N,n_params,train_mse,test_mse,imse_test,runtime_seconds"]
        hedge = (tmp_path / "hedge_paths.csv").read_text().strip().splitlines()
        assert hedge == ["path_id,t,asset,theta_hat,theta_ref"]
        scatter = (tmp_path / "payoff_scatter.csv").read_text().strip().splitlines()
        assert scatter[0] == "path_id,payoff_true"
        assert len(scatter) == 1 + report.n_test

    def test_empty_theta_ref_when_no_oracle(self, tmp_path):
        report = run_experiment(bm_config(payoff=AsianPut(strike=0.5), orders=(0, 1)))
        emit_results(report, tmp_path)
        rows = (tmp_path / "hedge_paths.csv").read_text().strip().splitlines()
        assert rows[1].endswith(",")  # theta_ref column empty
        curve = (tmp_path / "learning_curve.csv").read_text().strip().splitlines()
        assert curve[1].split(",")[4] == ""  # imse_test column empty

    def test_no_output_dir_anywhere(self):
        report = run_experiment(bm_config(orders=(0,)))
        with pytest.raises(ConfigError, match="output directory"):
            emit_results(report)

    def test_emission_is_byte_stable(self, tmp_path):
        report = run_experiment(bm_config())
        emit_results(report, tmp_path / "a")
        emit_results(report, tmp_path / "b")
        for name in ("report.json", "learning_curve.csv", "payoff_scatter.csv", "hedge_paths.csv"):
            assert (tmp_path / "a" / name).read_bytes() == (tmp_path / "b" / name).read_bytes()


class TestReproduceConfigs:
    def test_names(self):
        with pytest.raises(ConfigError, match="unknown experiment"):
            reproduce_config("heston")

    def test_bm_scales(self):
        full = reproduce_config("bm")
        assert full.n_paths == 100_000 and full.grid.K == 500
        assert full.orders == (0, 1, 2, 3, 4, 5, 6) and full.m_n == 50
        desk = reproduce_config("bm", desk_scale=True)
        assert desk.n_paths == 20_000 and desk.grid.K == 250
        assert desk.orders == (0, 1, 2, 3, 4, 5, 6)
        assert isinstance(desk.model, BrownianMotion)
        assert desk.payoff == EuropeanCall(strike=-0.5)

    def test_cev_scales(self):
        full = reproduce_config("cev")
        assert full.model == Cev(x0=100.0, alpha=-0.02, sigma0=0.4)
        assert full.payoff == AsianPut(strike=102.0)
        assert full.orders == (0, 1, 2, 3, 4, 5, 6)
        desk = reproduce_config("cev", desk_scale=True)
        assert desk.orders == (0, 1, 2, 3, 4)

    def test_affine_scales(self):
        full = reproduce_config("affine")
        assert isinstance(full.model, AffineMultiD) and full.model.d == 10
        assert full.n_paths == 500_000 and full.m_n == 250
        assert full.payoff.strike == 4.0
        np.testing.assert_allclose(
            full.payoff.weights,
            [1.0, -0.95, 0.9, -0.85, 0.8, -0.75, 0.7, -0.65, 0.6, -0.55],
        )
        desk = reproduce_config("affine", desk_scale=True)
        assert desk.model.d == 2 and desk.payoff.strike == 0.8
        np.testing.assert_allclose(desk.payoff.weights, DESK_W)
        expected = sample_affine_model(2, 2025)
        np.testing.assert_array_equal(desk.model.alpha0, expected.alpha0)
        np.testing.assert_array_equal(desk.model.beta0, expected.beta0)

    def test_seed_overrides_paths_only(self):
        cfg = reproduce_config("bm", desk_scale=True, seed=77)
        base = reproduce_config("bm", desk_scale=True)
        assert cfg.seeds.paths == 77
        assert cfg.seeds.features == base.seeds.features

    def test_output_dir_passthrough(self):
        cfg = reproduce_config("cev", desk_scale=True, output_dir="/tmp/x")
        assert cfg.output_dir == "/tmp/x"
