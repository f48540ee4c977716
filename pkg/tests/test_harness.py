"""Experiment runner: config parsing, determinism, accounting, emission."""

import json

import numpy as np
import pytest

import topopriv as tp
from topopriv.errors import ConfigInvalid
from topopriv.harness import (
    ExperimentConfig,
    ExperimentReport,
    emit_outputs,
    parse_config,
    resolve_topology,
    resolve_x0,
    run_experiment,
    sweep_alpha,
)

TINY = dict(alphas=(0.0, 1.0), t_grid=(40, 80, 160), trials=4, base_seed=11)


class TestParseConfig:
    def test_full_round(self):
        text = """
        # comment line
        n = 5
        edge_prob = 0.6
        gamma = 0.5
        graph_seed = 3
        alphas = 0, 0.5, 1
        t_grid = 50, 100
        trials = 2
        x0_mode = zero
        base_seed = 9
        """
        cfg = parse_config(text)
        assert cfg.n == 5 and cfg.alphas == (0.0, 0.5, 1.0)
        assert cfg.resolved_t_grid() == (50, 100)

    def test_unknown_key(self):
        with pytest.raises(ConfigInvalid, match="unknown key"):
            parse_config("mystery = 1")

    def test_bad_value(self):
        with pytest.raises(ConfigInvalid, match="bad value"):
            parse_config("trials = many")

    def test_missing_equals(self):
        with pytest.raises(ConfigInvalid, match="expected"):
            parse_config("just a line")

    def test_log_spaced_grid(self):
        cfg = ExperimentConfig(t_min=100, t_max=1000, t_points=5, **{})
        grid = cfg.resolved_t_grid()
        assert grid[0] == 100 and grid[-1] == 1000 and len(grid) == 5

    @pytest.mark.parametrize(
        "kwargs",
        [
            dict(trials=0),
            dict(x0_mode="bogus"),
            dict(alphas=(-1.0,)),
            dict(t_grid=(100, 50)),
            dict(t_grid=(1, 50)),
            dict(lag_coeffs=(1.0, -0.5)),
        ],
    )
    def test_invalid_configs(self, kwargs):
        with pytest.raises((ConfigInvalid, tp.errors.InvalidLag)):
            ExperimentConfig(**kwargs)


class TestRunExperiment:
    def test_deterministic_replay_byte_identical(self):
        cfg = ExperimentConfig(**TINY)
        a = run_experiment(cfg).canonical_json()
        b = run_experiment(cfg).canonical_json()
        assert a == b

    def test_trial_accounting(self):
        cfg = ExperimentConfig(**TINY)
        rep = run_experiment(cfg)
        for cell in rep.cells:
            assert cell.trials_ok + cell.trials_failed == cfg.trials

    def test_cells_cover_grid(self):
        cfg = ExperimentConfig(**TINY)
        rep = run_experiment(cfg)
        assert len(rep.cells) == len(cfg.alphas) * len(cfg.resolved_t_grid())
        assert all(c.oracle_r_theta is not None for c in rep.cells)

    def test_dependent_noise_attaches_interval(self):
        cfg = ExperimentConfig(lag_coeffs=(1.0, -1.0), **TINY)
        rep = run_experiment(cfg)
        assert all(c.oracle_r_xi_center is not None for c in rep.cells)
        assert all(c.oracle_r_theta is None for c in rep.cells)

    def test_generic_lag_interval_within_dense_guard(self):
        cfg = ExperimentConfig(
            n=3, lag_coeffs=(1.0, 0.5, -1.5), alphas=(1.0,), t_grid=(20, 40),
            trials=3, base_seed=6,
        )
        rep = run_experiment(cfg)
        assert all(c.oracle_r_xi_center is not None for c in rep.cells)

    def test_x0_modes(self):
        n = 4
        cfg = ExperimentConfig(n=n, x0_mode="zero", **TINY)
        np.testing.assert_array_equal(resolve_x0(cfg, n), np.zeros(n))
        cfg = ExperimentConfig(n=n, x0_mode="uniform01", **TINY)
        x = resolve_x0(cfg, n)
        assert np.all((x >= 0) & (x <= 1))
        np.testing.assert_array_equal(x, resolve_x0(cfg, n))

    def test_x0_file(self, tmp_path):
        path = tmp_path / "x0.csv"
        path.write_text("0.1,0.2,0.3,0.4\n")
        cfg = ExperimentConfig(n=4, x0_mode="file", x0_file=str(path), **TINY)
        np.testing.assert_allclose(resolve_x0(cfg, 4), [0.1, 0.2, 0.3, 0.4])

    def test_w_file_loading(self, tmp_path, seven_node_w):
        path = tmp_path / "w.csv"
        path.write_text(seven_node_w.to_csv())
        cfg = ExperimentConfig(w_file=str(path), **TINY)
        W = resolve_topology(cfg)
        np.testing.assert_array_equal(W.W, seven_node_w.W)

    def test_json_round_trip_exact(self):
        cfg = ExperimentConfig(**TINY)
        rep = run_experiment(cfg)
        parsed = json.loads(rep.to_json())
        for cell, raw in zip(rep.cells, parsed["cells"]):
            assert raw["mean_error"] == cell.mean_error
            assert raw["T"] == cell.T

    def test_rate_fit_attached(self):
        # grid above the default burn-in so three points survive the fit
        cfg = ExperimentConfig(alphas=(0.0,), t_grid=(60, 120, 240), trials=4, base_seed=11)
        rep = run_experiment(cfg)
        fit = rep.rate_fits["0.0"]
        assert fit is not None and fit["points_used"] == 3

    def test_rate_fit_none_when_grid_below_burn_in(self):
        cfg = ExperimentConfig(**TINY)  # T = 40 falls below the burn-in
        rep = run_experiment(cfg)
        assert rep.rate_fits["0.0"] is None


class TestErrorCurveOrdering:
    def test_larger_alpha_decays_slower_below_optimum(self):
        cfg = ExperimentConfig(
            alphas=(0.0, 1.0, 2.0), t_min=100, t_max=1000, t_points=8,
            trials=6, base_seed=3,
        )
        rep = run_experiment(cfg)
        exps = [rep.rate_fits[str(a)]["exponent"] for a in (0.0, 1.0, 2.0)]
        assert exps[0] < exps[1] < exps[2]

    def test_scaled_matrix_file_fallback(self, tmp_path, seven_node_w):
        path = tmp_path / "w09.csv"
        scaled = 0.9 * seven_node_w.W
        path.write_text(
            "\n".join(",".join(f"{v:.17g}" for v in row) for row in scaled) + "\n"
        )
        cfg = ExperimentConfig(w_file=str(path), alphas=(0.0,), t_grid=(60, 120),
                               trials=2, base_seed=5)
        rep = run_experiment(cfg)
        assert all(c.mean_error is not None for c in rep.cells)


class TestSweepAlpha:
    def test_narrow_grid_rejected(self):
        with pytest.raises(ConfigInvalid):
            sweep_alpha(ExperimentConfig(alphas=(2.0,), t_grid=(50,), trials=1))
        with pytest.raises(ConfigInvalid):
            sweep_alpha(
                ExperimentConfig(alphas=(0.0, 0.5, 1.0, 1.5, 2.0), t_grid=(50,), trials=1)
            )

    def test_reports_argmax(self):
        cfg = ExperimentConfig(
            alphas=(0.0, 1.0, 2.0, 3.0, 4.0, 5.0), t_grid=(120,), trials=3, base_seed=5
        )
        rep = sweep_alpha(cfg)
        assert "120" in rep.argmax_alpha_per_T
        assert rep.argmax_alpha_per_T["120"] in cfg.alphas


class TestEmitOutputs:
    def test_header_only_for_empty_report(self, tmp_path):
        paths = emit_outputs(ExperimentReport(), ("csv",), str(tmp_path))
        text = (tmp_path / "errors.csv").read_text()
        assert text == "alpha,T,mean_error,stderr_error,trials_ok\n"
        assert len(paths) == 2

    def test_row_cardinality(self, tmp_path):
        cfg = ExperimentConfig(**TINY)  # 2 alphas x 3 T
        rep = run_experiment(cfg)
        emit_outputs(rep, ("csv",), str(tmp_path))
        lines = (tmp_path / "errors.csv").read_text().strip().split("\n")
        assert len(lines) == 1 + 6

    def test_json_numeric_fidelity(self, tmp_path):
        cfg = ExperimentConfig(**TINY)
        rep = run_experiment(cfg)
        emit_outputs(rep, ("json",), str(tmp_path))
        parsed = json.loads((tmp_path / "report.json").read_text())
        assert parsed["cells"][0]["mean_error"] == rep.cells[0].mean_error
        assert parsed["meta"]["config_hash"] == cfg.config_hash()

    def test_svg_emission(self, tmp_path):
        cfg = ExperimentConfig(**TINY)
        rep = run_experiment(cfg)
        paths = emit_outputs(rep, ("svg",), str(tmp_path))
        for p in paths:
            assert p.endswith(".svg")
            assert (tmp_path / p.split("/")[-1]).stat().st_size > 0

    def test_csv_line_endings(self, tmp_path):
        emit_outputs(ExperimentReport(), ("csv",), str(tmp_path))
        raw = (tmp_path / "errors.csv").read_bytes()
        assert b"\r" not in raw
