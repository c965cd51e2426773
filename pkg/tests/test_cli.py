from __future__ import annotations

import hashlib
import io
import json
import os

import pytest

from womops.cli import (config_to_dict, load_config, main, parse_config,
                        solution_from_dict)
from womops.errors import ConfigError


def run_cli(argv, capsys):
    code = main(argv)
    captured = capsys.readouterr()
    return code, captured.out, captured.err


def write_config(tmp_path, name="config.json", **overrides):
    doc = {"schema": 1}
    doc.update(overrides)
    path = tmp_path / name
    path.write_text(json.dumps(doc))
    return str(path)


def _hash(path) -> str:
    with open(path, "rb") as fh:
        return hashlib.sha256(fh.read()).hexdigest()


class TestSolveM1:
    def test_default_market_high_demand(self, capsys):
        code, out, _ = run_cli(["solve-m1", "--lambda-p", "450"], capsys)
        assert code == 0
        doc = json.loads(out)
        assert doc["case"] == "II"
        assert doc["policy"]["t3"] == pytest.approx(1.4907, abs=5e-5)
        assert doc["kkt_residual"] <= 1e-6

    def test_zero_demand_with_huge_shipment_cost(self, tmp_path, capsys):
        # The fast phase keeps amortizing a huge K (t1* stays below
        # 2K/(h*lam_r*tau)), so the cycle stretches instead of collapsing
        # onto the declared-time-only policy.
        cfg = write_config(tmp_path, market={"K": 1e6})
        code, out, _ = run_cli(["solve-m1", "--lambda-p", "0", "-c", cfg], capsys)
        assert code == 0
        doc = json.loads(out)
        assert doc["case"] == "III"
        assert doc["policy"]["t1"] > 0

    def test_malformed_config_exits_2_with_field_path(self, tmp_path, capsys):
        cfg = write_config(tmp_path, market={"r": -1})
        code, _, err = run_cli(["solve-m1", "--lambda-p", "10", "-c", cfg], capsys)
        assert code == 2
        assert "market" in err

    def test_non_numeric_field_named_in_error(self, tmp_path, capsys):
        cfg = write_config(tmp_path, market={"tau": "fast"})
        code, _, err = run_cli(["solve-m1", "--lambda-p", "10", "-c", cfg], capsys)
        assert code == 2
        assert "market.tau" in err


class TestSolveM2:
    def test_reference_row(self, tmp_path, capsys):
        cfg = write_config(tmp_path, market={"tau": 1.5})
        code, out, _ = run_cli(["solve-m2", "-c", cfg], capsys)
        assert code == 0
        doc = json.loads(out)
        assert doc["profit"] == pytest.approx(1346.67, abs=0.01)
        assert doc["lambda_p"] == pytest.approx(450.0, abs=1e-6)
        assert doc["equilibrium_residual"] <= 1e-6

    def test_insensitive_customers_fill_market(self, tmp_path, capsys):
        cfg = write_config(tmp_path, response={"c2": 0.0})
        code, out, _ = run_cli(["solve-m2", "-c", cfg], capsys)
        assert code == 0
        assert json.loads(out)["lambda_p"] == pytest.approx(450.0, abs=1e-6)

    def test_pinned_fee_uses_boundary_branch(self, tmp_path, capsys):
        cfg = write_config(tmp_path, market={"f_min": 10.0, "f_max": 10.0})
        code, out, _ = run_cli(["solve-m2", "-c", cfg], capsys)
        assert code == 0
        doc = json.loads(out)
        assert doc["fee"] == 10.0
        assert doc["branch"] == "numeric-boundary"

    def test_round_trip_through_result_schema(self, tmp_path, capsys):
        code, out, _ = run_cli(["solve-m2"], capsys)
        doc = json.loads(out)
        policy, fee, lam, profit = solution_from_dict(doc)
        assert policy.t3 == doc["policy"]["t3"]
        assert (fee, lam, profit) == (doc["fee"], doc["lambda_p"], doc["profit"])


class TestSimulate:
    def test_reference_trace_rows(self, capsys):
        code, out, err = run_cli(["simulate", "--seed-lambda", "450",
                                  "--iters", "10", "--tol", "0"], capsys)
        assert code == 0
        lines = out.strip().splitlines()
        assert lines[0] == "iter,lambda_p,t1,t2,t3,profit"
        assert len(lines) == 12
        assert lines[1].startswith("0,450.00,0.00,0.00,1.49")
        assert lines[2].startswith("1,335.41,0.00,0.00,1.73")
        assert "classification" in err

    def test_zero_iterations_seed_only(self, capsys):
        code, out, err = run_cli(["simulate", "--iters", "0"], capsys)
        assert code == 0
        assert len(out.strip().splitlines()) == 2
        assert "undetermined" in err

    def test_output_file(self, tmp_path, capsys):
        target = str(tmp_path / "trace.csv")
        code, out, _ = run_cli(["simulate", "--iters", "3", "--out", target],
                               capsys)
        assert code == 0 and out == ""
        assert open(target).readline().startswith("iter,")

    def test_flag_validation_is_a_usage_error(self, capsys):
        for argv in (["simulate", "--iters", "-1"],
                     ["simulate", "--seed-lambda", "9999"],
                     ["solve-m1", "--lambda-p", "-3"]):
            code, _, err = run_cli(argv, capsys)
            assert code == 2, argv
            assert "--" in err

    def test_solver_error_exits_3(self, tmp_path, capsys):
        cfg = write_config(tmp_path, market={"lambda_r": 0.0})
        code, _, err = run_cli(["solve-m1", "--lambda-p", "0", "-c", cfg],
                               capsys)
        assert code == 3
        assert "solver error" in err


class TestReproduce:
    def test_t3_summary_and_determinism(self, tmp_path, capsys):
        out_a = str(tmp_path / "a")
        out_b = str(tmp_path / "b")
        code, out, _ = run_cli(["reproduce", "--table", "T3", "--out", out_a],
                               capsys)
        assert code == 0
        assert "T3: rows matched 10/10 within tolerance" in out
        code, _, _ = run_cli(["reproduce", "--table", "T3", "--out", out_b],
                             capsys)
        assert code == 0
        for name in ("T3.csv", "T3_manifest.json"):
            assert _hash(os.path.join(out_a, name)) == \
                _hash(os.path.join(out_b, name))

    def test_t8_reports_cycle(self, tmp_path, capsys):
        code, out, _ = run_cli(["reproduce", "--table", "T8",
                                "--out", str(tmp_path)], capsys)
        assert code == 0
        assert "iterations matched 11/11" in out
        assert "cycle detected: True" in out

    def test_unknown_table_is_usage_error(self, capsys):
        code, _, err = run_cli(["reproduce", "--table", "T99"], capsys)
        assert code == 2


class TestConfig:
    def test_defaults_validate(self):
        cfg = parse_config({})
        assert cfg.market.tau == 2.0
        assert cfg.fee == 10.0

    def test_unknown_signal_kind(self):
        with pytest.raises(ConfigError) as exc:
            parse_config({"signal": {"kind": "VIBES"}})
        assert exc.value.path == "signal.kind"

    def test_weighted_signal_parses(self):
        cfg = parse_config({"signal": {"kind": "weighted",
                                       "weights": [["MDT", 0.5], ["NPS", 0.5]]}})
        assert len(cfg.signal.weights) == 2

    def test_fee_outside_domain(self):
        with pytest.raises(ConfigError) as exc:
            parse_config({"fee": 200.0})
        assert exc.value.path == "fee"

    def test_bad_schema_version(self):
        with pytest.raises(ConfigError):
            parse_config({"schema": 99})

    def test_missing_file(self):
        with pytest.raises(ConfigError):
            load_config("/nonexistent/config.json")

    def test_config_reserialization_stable(self, tmp_path):
        doc = {"schema": 1, "market": {"tau": 1.5}, "response": {"c2": 3}}
        path = tmp_path / "c.json"
        path.write_text(json.dumps(doc))
        a = load_config(str(path))
        b = load_config(str(path))
        assert a == b

    def test_config_round_trips_through_schema(self):
        doc = {"schema": 1, "market": {"tau": 1.5, "K": 3000.0},
               "response": {"c2": 0.2},
               "signal": {"kind": "weighted",
                          "weights": [["MDT", 0.25], ["NPS", 0.75]]}}
        cfg = parse_config(doc)
        again = parse_config(config_to_dict(cfg))
        assert again == cfg
