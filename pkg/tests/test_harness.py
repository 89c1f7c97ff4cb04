"""Experiment engine: configs, accounting, determinism, CSV, CLI."""

import csv
import json
from pathlib import Path

import numpy as np
import pytest

from ppmatch import (
    CSV_HEADER,
    ConfigError,
    ExperimentConfig,
    RunRecord,
    dump_config,
    emit_csv,
    emit_summary_csv,
    load_config,
    run_experiment,
    run_iter_sweep,
    run_refine,
    run_seed_sweep,
    run_sparsify_sweep,
    validate_config,
)
from ppmatch.cli import EXIT_CONFIG_ERROR, EXIT_OK, EXIT_RUNTIME_ERROR, main
from ppmatch.harness import sort_records


def tiny_config(**overrides) -> ExperimentConfig:
    base = dict(
        experiment="seed-sweep",
        n=64,
        sigma_grid=[0.3],
        mc_runs=2,
        master_seed=99,
        overlap_grid=[0.1, 0.5],
        record_timing=False,
    )
    base.update(overrides)
    return ExperimentConfig(**base)


class TestConfig:
    def test_round_trip(self, tmp_path):
        config = tiny_config()
        path = tmp_path / "config.json"
        dump_config(config, path)
        assert load_config(path) == config

    def test_unknown_key_is_an_error(self, tmp_path):
        path = tmp_path / "config.json"
        path.write_text(json.dumps({"experiment": "refine", "bogus": 1}))
        with pytest.raises(ConfigError, match="bogus"):
            load_config(path)

    def test_missing_experiment_is_an_error(self, tmp_path):
        path = tmp_path / "config.json"
        path.write_text(json.dumps({"n": 100}))
        with pytest.raises(ConfigError, match="experiment"):
            load_config(path)

    def test_malformed_json_is_an_error(self, tmp_path):
        path = tmp_path / "config.json"
        path.write_text("{not json")
        with pytest.raises(ConfigError):
            load_config(path)

    @pytest.mark.parametrize(
        "overrides",
        [
            {"experiment": "nope"},
            {"sigma_grid": []},
            {"sigma_grid": [1.0]},
            {"mc_runs": 0},
            {"methods": ["mystery"]},
            {"iterations": 0},
            {"iteration_grid": [0]},
            {"scheme_grid": ["nope"]},
            {"eta": 0.0},
            {"sparsify_density": 0.0},
            {"seed_overlap": 1.5},
            {"master_seed": -1},
        ],
    )
    def test_invalid_values_are_rejected(self, overrides):
        base = dict(experiment="refine")
        base.update(overrides)
        with pytest.raises(ConfigError):
            validate_config(ExperimentConfig(**base))

    def test_wrapper_checks_experiment_kind(self):
        with pytest.raises(ConfigError):
            run_refine(tiny_config())
        with pytest.raises(ConfigError):
            run_seed_sweep(tiny_config(experiment="refine"))
        with pytest.raises(ConfigError):
            run_iter_sweep(tiny_config())
        with pytest.raises(ConfigError):
            run_sparsify_sweep(tiny_config())


class TestAccounting:
    def test_refine_record_count_and_grid(self):
        config = ExperimentConfig(
            experiment="refine",
            n=40,
            sigma_grid=[0.2, 0.5],
            mc_runs=2,
            master_seed=5,
            methods=["umeyama", "umeyama+ppmgm", "ppmgm"],
            record_timing=False,
        )
        records = run_refine(config)
        assert len(records) == 3 * 2 * 2
        assert all(r.status == "ok" for r in records)
        assert {r.method for r in records} == {"umeyama", "umeyama+ppmgm", "ppmgm"}
        baseline_rows = [r for r in records if r.method == "umeyama"]
        assert all(r.iterations_run == 0 and r.param_value == 0 for r in baseline_rows)

    def test_seed_sweep_records_one_per_grid_point(self):
        records = run_seed_sweep(tiny_config())
        assert len(records) == 2 * 2  # overlaps x runs
        assert {r.param_value for r in records} == {0.1, 0.5}
        assert all(r.param_name == "seed_overlap" for r in records)
        assert all(0.0 <= r.result_overlap <= 1.0 for r in records)

    def test_iter_sweep_iterations_bounded_by_grid(self):
        config = ExperimentConfig(
            experiment="iter-sweep",
            n=48,
            sigma_grid=[0.2],
            mc_runs=2,
            master_seed=3,
            iteration_grid=[1, 3],
            early_stop_on_fixpoint=True,
            record_timing=False,
        )
        records = run_iter_sweep(config)
        assert len(records) == 4
        for r in records:
            assert r.iterations_run <= r.param_value

    def test_tau_heatmap_has_six_density_points(self):
        config = ExperimentConfig(
            experiment="tau-heatmap",
            n=64,
            sigma_grid=[0.2],
            mc_runs=2,
            master_seed=4,
            record_timing=False,
        )
        records = run_sparsify_sweep(config)
        assert len(records) == 6 * 2
        densities = sorted({r.param_value for r in records})
        assert densities == [0.042, 0.0444, 0.0468, 0.0492, 0.0516, 0.054]
        assert all(r.param_name == "density" for r in records)

    def test_sparsify_sweep_covers_all_schemes(self):
        config = ExperimentConfig(
            experiment="sparsify-sweep",
            n=64,
            sigma_grid=[0.4],
            mc_runs=2,
            master_seed=4,
            record_timing=False,
        )
        records = run_sparsify_sweep(config)
        assert len(records) == 4 * 2
        assert {r.param_value for r in records} == {"dense", "binarize", "hard-threshold", "top-k"}

    def test_failures_become_error_records_not_drops(self):
        # seed_overlap 0.95 at n=20 asks for exactly n-1 agreements: infeasible
        config = ExperimentConfig(
            experiment="iter-sweep",
            n=20,
            sigma_grid=[0.2],
            mc_runs=2,
            master_seed=6,
            iteration_grid=[1],
            seed_overlap=0.95,
            record_timing=False,
        )
        records = run_iter_sweep(config)
        assert len(records) == 2
        for r in records:
            assert r.status == "error:InfeasibleOverlapError"
            assert np.isnan(r.result_overlap)

    def test_overlap_monotone_in_seed_quality(self):
        config = ExperimentConfig(
            experiment="seed-sweep",
            n=300,
            sigma_grid=[0.3, 0.6],
            mc_runs=6,
            master_seed=14,
            overlap_grid=[0.04, 0.1],
            record_timing=False,
        )
        records = run_seed_sweep(config)
        for sigma in (0.3, 0.6):
            means = {}
            for fraction in (0.04, 0.1):
                vals = [
                    r.result_overlap
                    for r in records
                    if r.sigma == sigma and r.param_value == fraction
                ]
                means[fraction] = float(np.mean(vals))
            assert means[0.1] >= means[0.04]

    def test_binarize_at_full_density_is_uninformative(self):
        # density 1 keeps every entry: both inputs become all-ones matrices,
        # so the estimate carries no information and overlap sits at chance
        config = ExperimentConfig(
            experiment="sparsify-sweep",
            n=80,
            sigma_grid=[0.2],
            mc_runs=4,
            master_seed=8,
            scheme_grid=["binarize"],
            sparsify_density=1.0,
            record_timing=False,
        )
        records = run_sparsify_sweep(config)
        assert all(r.result_overlap <= 6 / 80 for r in records)

    def test_noiseless_refinement_recovers_exactly(self):
        config = ExperimentConfig(
            experiment="refine",
            n=500,
            sigma_grid=[0.0],
            mc_runs=25,
            master_seed=11,
            methods=["grampa+ppmgm", "umeyama+ppmgm"],
            record_timing=False,
        )
        records = run_refine(config)
        for method in ("grampa+ppmgm", "umeyama+ppmgm"):
            exact = sum(
                1 for r in records if r.method == method and r.result_overlap == 1.0
            )
            assert exact >= 24


class TestCsv:
    def test_header_only_for_empty_records(self, tmp_path):
        path = tmp_path / "empty.csv"
        emit_csv([], path)
        assert path.read_text() == CSV_HEADER + "\n"

    def test_exact_header(self):
        assert CSV_HEADER == (
            "experiment,method,n,sigma,param_name,param_value,run_index,"
            "result_overlap,iterations_run,wall_seconds,status"
        )

    def test_bytes_independent_of_record_order(self, tmp_path):
        records = run_seed_sweep(tiny_config())
        a, b = tmp_path / "a.csv", tmp_path / "b.csv"
        emit_csv(records, a)
        emit_csv(list(reversed(records)), b)
        assert a.read_bytes() == b.read_bytes()

    def test_bytes_identical_across_worker_counts(self, tmp_path):
        config = tiny_config(sigma_grid=[0.3, 0.6], mc_runs=3)
        rec_serial = run_experiment(config, workers=1)
        rec_pool = run_experiment(config, workers=2)
        a, b = tmp_path / "serial.csv", tmp_path / "pool.csv"
        emit_csv(rec_serial, a)
        emit_csv(rec_pool, b)
        assert a.read_bytes() == b.read_bytes()

    def test_sort_key_orders_numeric_params_numerically(self):
        def rec(value):
            return RunRecord(
                experiment="seed-sweep",
                method="ppmgm",
                n=10,
                sigma=0.1,
                param_name="seed_overlap",
                param_value=value,
                run_index=0,
                result_overlap=1.0,
                iterations_run=1,
                wall_seconds=0.0,
            )

        out = sort_records([rec(0.1), rec(0.02), rec(0.05)])
        assert [r.param_value for r in out] == [0.02, 0.05, 0.1]

    def test_summary_percentiles(self, tmp_path):
        records = [
            RunRecord(
                experiment="seed-sweep",
                method="ppmgm",
                n=10,
                sigma=0.1,
                param_name="seed_overlap",
                param_value=0.1,
                run_index=i,
                result_overlap=v,
                iterations_run=1,
                wall_seconds=0.0,
            )
            for i, v in enumerate([0.0, 0.5, 1.0])
        ]
        path = tmp_path / "summary.csv"
        emit_summary_csv(records, path)
        rows = list(csv.DictReader(path.open()))
        assert len(rows) == 1
        assert float(rows[0]["mean_overlap"]) == pytest.approx(0.5)
        assert float(rows[0]["p05_overlap"]) == pytest.approx(np.percentile([0, 0.5, 1], 5))
        assert rows[0]["mc_runs"] == "3"


class TestCli:
    def test_happy_path_writes_csv(self, tmp_path, capsys):
        out = tmp_path / "results.csv"
        code = main(
            [
                "seed-sweep",
                "--n", "64",
                "--sigma-grid", "0.3",
                "--runs", "2",
                "--seed", "7",
                "--overlap-grid", "0.1,0.5",
                "--out", str(out),
                "--no-timing",
            ]
        )
        assert code == EXIT_OK
        lines = out.read_text().splitlines()
        assert lines[0] == CSV_HEADER
        assert len(lines) == 1 + 4
        assert "wrote 4 records" in capsys.readouterr().out

    def test_config_file_plus_overrides(self, tmp_path):
        cfg_path = tmp_path / "cfg.json"
        dump_config(tiny_config(), cfg_path)
        out = tmp_path / "r.csv"
        summary = tmp_path / "s.csv"
        code = main(
            [
                "seed-sweep",
                "--config", str(cfg_path),
                "--runs", "1",
                "--out", str(out),
                "--summary-out", str(summary),
            ]
        )
        assert code == EXIT_OK
        assert len(out.read_text().splitlines()) == 1 + 2
        assert summary.exists()

    def test_experiment_mismatch_is_config_error(self, tmp_path, capsys):
        cfg_path = tmp_path / "cfg.json"
        dump_config(tiny_config(), cfg_path)
        code = main(["refine", "--config", str(cfg_path), "--out", str(tmp_path / "x.csv")])
        assert code == EXIT_CONFIG_ERROR
        assert "config error" in capsys.readouterr().err

    def test_invalid_value_is_config_error(self, tmp_path):
        code = main(
            ["seed-sweep", "--runs", "0", "--out", str(tmp_path / "x.csv"), "--n", "16"]
        )
        assert code == EXIT_CONFIG_ERROR

    def test_unwritable_output_is_runtime_error(self, tmp_path, capsys):
        code = main(
            [
                "seed-sweep",
                "--n", "16",
                "--sigma-grid", "0.2",
                "--runs", "1",
                "--overlap-grid", "0.5",
                "--out", str(tmp_path / "missing" / "x.csv"),
            ]
        )
        assert code == EXIT_RUNTIME_ERROR
        assert "error" in capsys.readouterr().err

    def test_workers_flag_matches_serial_output(self, tmp_path):
        args = [
            "seed-sweep",
            "--n", "48",
            "--sigma-grid", "0.4",
            "--runs", "2",
            "--seed", "21",
            "--overlap-grid", "0.25",
            "--no-timing",
        ]
        a, b = tmp_path / "a.csv", tmp_path / "b.csv"
        assert main(args + ["--out", str(a), "--workers", "1"]) == EXIT_OK
        assert main(args + ["--out", str(b), "--workers", "2"]) == EXIT_OK
        assert a.read_bytes() == b.read_bytes()
