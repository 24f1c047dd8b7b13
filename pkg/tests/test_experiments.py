import json
import math

import numpy as np
import pytest

from bosonlab import bound_constants, mean_field_error_bound, vtilde
from bosonlab.experiments import (
    ConfigError,
    config_from_dict,
    count_violations,
    load_config,
    run_bbgky,
    run_bounds,
    run_convergence,
    run_corr,
    run_lr,
    write_plot_data,
    write_rows,
)

from .conftest import SX, SZ


def _pairs(matrix):
    mat = np.atleast_2d(np.asarray(matrix, dtype=complex))
    return [[[float(x.real), float(x.imag)] for x in row] for row in mat]


def base_config(**extra):
    cfg = {
        "scenario": "converge",
        "spec": {
            "d": 2,
            "max_order": 2,
            "terms": {
                "1": _pairs([[0.3, 0.2], [0.2, -0.3]]),
                "2": _pairs(0.25 * np.kron(SX, SX)),
            },
        },
        "n_values": [4, 8],
        "time_grid": [0.0, 0.4],
        "initial_phi": [[0.6, 0.0], [0.8, 0.0]],
    }
    cfg.update(extra)
    return cfg


class TestConfigParsing:
    def test_minimal_config_gets_defaults(self):
        config = config_from_dict(base_config())
        assert config.integrator_tol == 1e-9
        assert config.seed == 0
        assert config.vtilde_strategy == "canonical"
        assert config.output_path == "results.csv"
        assert (config.obs_m, config.obs_n, config.n_samples) == (1, 1, 16)
        assert config.bbgky_dt == 1e-3
        assert config.k_values == (1,)
        assert config.telescope_orders == (1, 2)
        assert config.vtilde_restarts == 8
        assert len(config.config_hash) == 16
        int(config.config_hash, 16)

    def test_one_body_term_optional(self):
        cfg = base_config()
        del cfg["spec"]["terms"]["1"]
        config = config_from_dict(cfg)
        assert config.spec.present_orders == (2,)

    def test_unknown_key_rejected(self):
        with pytest.raises(ConfigError, match="unknown config key"):
            config_from_dict(base_config(not_a_key=1))

    def test_asymmetric_potential_rejected(self):
        cfg = base_config()
        cfg["spec"]["terms"]["2"] = _pairs(np.kron(SX, SZ))
        with pytest.raises(ConfigError, match="not slot-permutation-symmetric"):
            config_from_dict(cfg)

    def test_unnormalized_phi_rejected(self):
        with pytest.raises(ConfigError, match="norm deviates"):
            config_from_dict(base_config(initial_phi=[[0.6, 0.0], [0.9, 0.0]]))

    def test_phi_length_must_match_d(self):
        phi = [[1.0, 0.0], [0.0, 0.0], [0.0, 0.0]]
        with pytest.raises(ConfigError, match="does not match spec.d"):
            config_from_dict(base_config(initial_phi=phi))

    def test_time_grid_must_increase(self):
        with pytest.raises(ConfigError, match="strictly increasing"):
            config_from_dict(base_config(time_grid=[0.0, 0.4, 0.4]))

    def test_scenario_must_be_known(self):
        with pytest.raises(ConfigError, match="not one of"):
            config_from_dict(base_config(scenario="warp"))

    def test_bad_seed_rejected(self):
        with pytest.raises(ConfigError, match="seed"):
            config_from_dict(base_config(seed=-1))
        with pytest.raises(ConfigError, match="seed"):
            config_from_dict(base_config(seed=2**64))

    def test_terms_key_must_be_integer(self):
        cfg = base_config()
        cfg["spec"]["terms"]["pair"] = cfg["spec"]["terms"].pop("2")
        with pytest.raises(ConfigError, match="integer order"):
            config_from_dict(cfg)

    def test_overrides_take_precedence(self):
        config = config_from_dict(base_config(), overrides={"seed": 99})
        assert config.seed == 99

    def test_output_path_not_hashed(self):
        a = config_from_dict(base_config(output_path="a.csv"))
        b = config_from_dict(base_config(output_path="b.csv"))
        assert a.config_hash == b.config_hash

    def test_seed_changes_hash(self):
        a = config_from_dict(base_config(seed=1))
        b = config_from_dict(base_config(seed=2))
        assert a.config_hash != b.config_hash

    def test_load_config_rejects_bad_json(self):
        with pytest.raises(ConfigError, match="not valid JSON"):
            load_config("{not json")

    def test_load_config_round_trip(self):
        config = load_config(json.dumps(base_config()))
        assert config.scenario == "converge"
        assert config.spec.d == 2


class TestConvergenceRunner:
    def test_rows_and_slope(self):
        config = config_from_dict(base_config())
        rows = run_convergence(config)
        points = [r for r in rows if r["kind"] == "point"]
        slopes = [r for r in rows if r["kind"] == "slope"]
        assert len(points) == len(config.n_values) * len(config.time_grid)
        assert len(slopes) == 1  # one per positive grid time
        for r in points:
            if r["t"] == 0.0:
                assert r["trace_distance"] < 1e-12
                assert r["mean_field_error_bound"] == 0.0
            assert r["violation"] == 0
            assert r["ratio"] == pytest.approx(r["trace_distance"] * r["N"])
        assert math.isfinite(slopes[0]["slope"])

    def test_free_evolution_matches_mean_field(self):
        cfg = base_config(time_grid=[0.0, 0.5, 1.0], n_values=[3, 5])
        cfg["spec"] = {"d": 2, "max_order": 1, "terms": {"1": _pairs([[0.4, 0.1], [0.1, -0.2]])}}
        rows = run_convergence(config_from_dict(cfg))
        for r in rows:
            if r["kind"] == "point":
                assert r["trace_distance"] < 1e-8


class TestLrRunner:
    def _config(self, **extra):
        return config_from_dict(
            base_config(scenario="lr", n_values=[4], n_samples=2, **extra)
        )

    def test_no_violations_and_zero_start(self):
        rows = run_lr(self._config())
        assert len(rows) == 2 * 2  # samples x times
        assert count_violations(rows) == 0
        for r in rows:
            if r["t"] == 0.0:
                assert r["lhs"] < 1e-12
            assert r["rhs"] >= 0.0

    def test_deterministic(self):
        config = self._config()
        assert run_lr(config) == run_lr(config)

    def test_support_must_fit(self):
        config = self._config(obs_m=3, obs_n=2)
        with pytest.raises(ValueError, match="exceeds N"):
            run_lr(config)


class TestCorrRunner:
    def test_rows_violations_and_slope(self):
        config = config_from_dict(
            base_config(scenario="corr", n_values=[4, 8], time_grid=[0.0, 0.5], n_samples=2)
        )
        rows = run_corr(config)
        points = [r for r in rows if r["kind"] == "point"]
        slopes = [r for r in rows if r["kind"] == "slope"]
        assert len(points) == 2 * 2 * 2 and len(slopes) == 1
        assert count_violations(rows) == 0
        for r in points:
            if r["t"] == 0.0:  # product state carries no correlations
                assert r["lhs"] < 1e-12


class TestBbgkyRunner:
    def test_residual_order_and_telescope(self):
        config = config_from_dict(
            base_config(
                scenario="bbgky",
                n_values=[4],
                time_grid=[0.0, 0.4],
                k_values=[1],
                telescope_orders=[1],
            )
        )
        rows = run_bbgky(config)
        orders = [r for r in rows if r["kind"] == "order"]
        residuals = [r for r in rows if r["kind"] == "residual"]
        telescopes = [r for r in rows if r["kind"] == "telescope"]
        assert len(orders) == 1  # k=1 at the single positive time
        assert 1.8 <= orders[0]["value"] <= 2.2
        assert len(residuals) == 2  # dt and dt/2
        assert residuals[0]["value"] > residuals[1]["value"] > 0
        assert len(telescopes) == 2  # both grid times
        for r in telescopes:
            assert r["value"] < 1e-12


class TestBoundsRunner:
    def test_constants_and_curves(self):
        config = config_from_dict(
            base_config(scenario="bounds", n_values=[10], time_grid=[0.0, 1.0])
        )
        rows = run_bounds(config)
        constants = {r["strategy"]: r for r in rows if r["kind"] == "constants"}
        curves = [r for r in rows if r["kind"] == "curve"]
        expected = bound_constants(config.spec, vtilde(config.spec, "canonical"))
        assert constants["canonical"]["sum_l1_v"] == pytest.approx(expected.sum_l1_v)
        assert constants["canonical"]["vtilde"] == pytest.approx(expected.vtilde)
        assert constants["search"]["vtilde"] >= constants["canonical"]["vtilde"] - 1e-12
        by_t = {r["t"]: r for r in curves}
        assert by_t[0.0]["mean_field_error_bound"] == 0.0
        assert by_t[1.0]["mean_field_error_bound"] == pytest.approx(
            mean_field_error_bound(expected, 10, 1.0)
        )


class TestOutputFiles:
    def _run(self):
        config = config_from_dict(base_config(time_grid=[0.0, 0.4], n_values=[4]))
        return config, run_convergence(config)

    def test_csv_layout(self, tmp_path):
        config, rows = self._run()
        out = tmp_path / "res.csv"
        write_rows(out, config, rows)
        text = out.read_text()
        lines = text.split("\n")
        assert lines[0] == f"# config_hash={config.config_hash} version=0.1.0"
        assert lines[1].startswith("config_hash,kind,N,t,trace_distance")
        assert "\r" not in text and text.endswith("\n")

    def test_float_cells_round_trip(self, tmp_path):
        config, rows = self._run()
        out = tmp_path / "res.csv"
        write_rows(out, config, rows)
        data = out.read_text().split("\n")[2].split(",")
        # column 4 is trace_distance of the first point row
        assert float(data[4]) == rows[0]["trace_distance"]

    def test_missing_columns_are_blank(self, tmp_path):
        config, rows = self._run()
        out = tmp_path / "res.csv"
        write_rows(out, config, rows)
        slope_line = out.read_text().rstrip("\n").split("\n")[-1]
        cells = slope_line.split(",")
        assert cells[1] == "slope" and cells[2] == "" and cells[4] == ""

    def test_rerun_is_byte_identical(self, tmp_path):
        config, _ = self._run()
        paths = []
        for name in ("a.csv", "b.csv"):
            out = tmp_path / name
            write_rows(out, config, run_convergence(config))
            paths.append(out.read_bytes())
        assert paths[0] == paths[1]

    def test_count_violations(self):
        rows = [{"violation": 0}, {"violation": 1}, {"kind": "slope"}, {"violation": 1}]
        assert count_violations(rows) == 2

    def test_plot_data_inventory(self, tmp_path):
        config, rows = self._run()
        out = tmp_path / "res.csv"
        written = write_plot_data(out, config, rows)
        names = {p.replace(str(tmp_path) + "/", "") for p in written}
        assert names == {
            "res.distance_vs_N.t0.dat",
            "res.bound_vs_N.t0.dat",
            "res.distance_vs_N.t1.dat",
            "res.bound_vs_N.t1.dat",
        }
        first = (tmp_path / "res.distance_vs_N.t1.dat").read_text().splitlines()
        assert len(first) == 1  # single N in this config
        x, y = first[0].split()
        assert float(x) == 4.0 and float(y) >= 0.0
