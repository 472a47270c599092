import json
from pathlib import Path

import numpy as np
import pytest

from altest.errors import ConfigError
from altest.experiments import (
    CSV_HEADER,
    ExperimentConfig,
    ResultRow,
    preset_config,
    run_experiment,
    run_trial,
    summarize,
)
from oracles import grouped_stats


def tiny_config(tmp_path, **overrides):
    base = dict(
        p=12,
        s=2,
        m=2,
        rho=0.8,
        T=2,
        trials=2,
        n_grid=(6, 8),
        seed=99,
        out_dir=str(tmp_path / "out"),
    )
    base.update(overrides)
    return ExperimentConfig(**base)


def strip_wall_ms(csv_text: str) -> str:
    # wall_ms is real timing, the one column that legitimately varies between
    # identical runs
    return "\n".join(line.rsplit(",", 1)[0] for line in csv_text.splitlines())


class TestConfigValidation:
    def test_unknown_method(self, tmp_path):
        with pytest.raises(ConfigError, match="methods"):
            tiny_config(tmp_path, methods=("altest_resampled", "bogus"))

    def test_odd_sparsity(self, tmp_path):
        with pytest.raises(ConfigError, match="s:"):
            tiny_config(tmp_path, s=3)

    def test_odd_m_with_correlation(self, tmp_path):
        with pytest.raises(ConfigError, match="m:"):
            tiny_config(tmp_path, m=3)

    def test_odd_m_allowed_without_correlation(self, tmp_path):
        cfg = tiny_config(tmp_path, m=3, rho=0.0)
        assert cfg.grid() == [(6, 3), (8, 3)]

    def test_fig2_budget_constraint(self, tmp_path):
        with pytest.raises(ConfigError, match="mn_budget"):
            tiny_config(tmp_path, n_grid=None, mn_budget=30, m_grid=(2, 4), T=5)

    def test_fig2_grid_allocation(self, tmp_path):
        cfg = tiny_config(tmp_path, n_grid=None, mn_budget=480, m_grid=(2, 4, 8), T=2)
        assert cfg.grid() == [(240, 2), (120, 4), (60, 8)]

    def test_missing_grid(self, tmp_path):
        with pytest.raises(ConfigError, match="n_grid"):
            tiny_config(tmp_path, n_grid=None)

    def test_presets_are_paper_protocol(self):
        fig1 = preset_config("fig1")
        assert fig1.p == 500 and fig1.s == 20 and fig1.m == 10
        assert fig1.n_grid == (40, 50, 60, 70, 80, 90)
        assert fig1.T == 5 and fig1.trials == 100
        fig2 = preset_config("fig2")
        assert fig2.mn_budget == 500 and fig2.m_grid == (2, 4, 6, 8, 10)

    def test_preset_overrides(self):
        cfg = preset_config("fig1", trials=3, n_grid=(40,))
        assert cfg.trials == 3 and cfg.n_grid == (40,)


class TestRunTrial:
    def test_row_inventory(self, tmp_path):
        cfg = tiny_config(tmp_path)
        rows = run_trial(cfg, grid_index=0, trial=0)
        by_method = {}
        for row in rows:
            by_method.setdefault(row.method, []).append(row)
        assert sorted(by_method) == ["altest_practical", "altest_resampled", "oracle", "ordinary"]
        assert [r.iteration for r in by_method["altest_resampled"]] == [1, 2]
        assert [r.iteration for r in by_method["oracle"]] == [1]
        assert all(r.n == 6 and r.m == 2 for r in rows)
        assert all(r.err_l2 >= 0 for r in rows)

    def test_trials_are_deterministic(self, tmp_path):
        cfg = tiny_config(tmp_path)
        a = run_trial(cfg, 1, 1)
        b = run_trial(cfg, 1, 1)
        assert [r.to_csv().rsplit(",", 1)[0] for r in a] == [
            r.to_csv().rsplit(",", 1)[0] for r in b
        ]

    def test_distinct_trials_differ(self, tmp_path):
        cfg = tiny_config(tmp_path)
        a = run_trial(cfg, 0, 0)
        b = run_trial(cfg, 0, 1)
        assert a[0].err_l2 != b[0].err_l2


class TestRunExperiment:
    def test_csv_row_count_and_header(self, tmp_path):
        cfg = tiny_config(tmp_path)
        run_experiment(cfg)
        text = (Path(cfg.out_dir) / "results.csv").read_text()
        lines = text.splitlines()
        assert lines[0] == CSV_HEADER
        # per (grid, trial): 2 alternating methods x T + 2 baselines
        per_trial = 2 * cfg.T + 2
        assert len(lines) - 1 == len(cfg.grid()) * cfg.trials * per_trial

    def test_reproducible_modulo_wall_ms(self, tmp_path):
        cfg_a = tiny_config(tmp_path, out_dir=str(tmp_path / "a"))
        cfg_b = tiny_config(tmp_path, out_dir=str(tmp_path / "b"))
        run_experiment(cfg_a)
        run_experiment(cfg_b)
        text_a = (tmp_path / "a" / "results.csv").read_text()
        text_b = (tmp_path / "b" / "results.csv").read_text()
        assert strip_wall_ms(text_a) == strip_wall_ms(text_b)

    def test_parallel_equals_sequential(self, tmp_path):
        cfg_seq = tiny_config(tmp_path, out_dir=str(tmp_path / "seq"), jobs=1)
        cfg_par = tiny_config(tmp_path, out_dir=str(tmp_path / "par"), jobs=2)
        run_experiment(cfg_seq)
        run_experiment(cfg_par)
        text_seq = (tmp_path / "seq" / "results.csv").read_text()
        text_par = (tmp_path / "par" / "results.csv").read_text()
        assert strip_wall_ms(text_seq) == strip_wall_ms(text_par)

    def test_wall_time_accounting(self, tmp_path):
        cfg = tiny_config(tmp_path)
        summary = run_experiment(cfg)
        text = (Path(cfg.out_dir) / "results.csv").read_text()
        per_row = sum(
            float(line.rsplit(",", 1)[1]) for line in text.splitlines()[1:]
        )
        assert per_row <= summary["total_wall_ms"]

    def test_summary_files_written(self, tmp_path):
        cfg = tiny_config(tmp_path)
        run_experiment(cfg, gnuplot=True)
        out = Path(cfg.out_dir)
        assert (out / "summary.json").exists()
        assert (out / "summary.txt").exists()
        assert (out / "plot.gp").exists()
        loaded = json.loads((out / "summary.json").read_text())
        assert loaded["config"]["seed"] == 99
        assert loaded["groups"]


class TestSummarize:
    @staticmethod
    def write_csv(path, rows):
        with open(path, "w") as fh:
            fh.write(CSV_HEADER + "\n")
            for row in rows:
                fh.write(row.to_csv() + "\n")

    @staticmethod
    def row(trial=0, method="oracle", n=10, m=2, iteration=1, err=1.0, xi=0.5):
        return ResultRow(trial, method, n, m, iteration, err, xi, 0.2, True, 3.0)

    def test_single_row_flagged_by_count(self, tmp_path):
        path = tmp_path / "one.csv"
        self.write_csv(path, [self.row(err=0.7)])
        groups = summarize(path)["groups"]
        assert len(groups) == 1
        g = groups[0]
        assert g["count"] == 1
        assert g["err_mean"] == 0.7
        assert g["err_se"] == 0.0 and g["err_sd"] == 0.0

    def test_two_equal_rows_have_zero_se(self, tmp_path):
        path = tmp_path / "two.csv"
        self.write_csv(path, [self.row(trial=0, err=0.7), self.row(trial=1, err=0.7)])
        g = summarize(path)["groups"][0]
        assert g["count"] == 2
        assert g["err_se"] == 0.0

    def test_large_fixture_matches_independent_aggregation(self, tmp_path):
        rng = np.random.default_rng(17)
        rows = []
        for trial in range(250):
            for method in ("oracle", "ordinary"):
                for n in (10, 20):
                    rows.append(
                        self.row(
                            trial=trial,
                            method=method,
                            n=n,
                            err=float(rng.uniform(0.1, 2.0)),
                            xi=float(rng.uniform(0.2, 0.9)),
                        )
                    )
        path = tmp_path / "big.csv"
        self.write_csv(path, rows)
        groups = summarize(path)["groups"]
        oracle = grouped_stats(
            [row.__dict__ for row in rows],
            ("method", "n", "m", "iteration"),
            "err_l2",
        )
        assert len(groups) == len(oracle) == 4
        for g in groups:
            ref = oracle[(g["method"], g["n"], g["m"], g["iteration"])]
            assert g["count"] == ref["count"]
            assert g["err_mean"] == pytest.approx(ref["mean"], rel=1e-12)
            assert g["err_sd"] == pytest.approx(ref["sd"], rel=1e-12)
            assert g["err_se"] == pytest.approx(ref["se"], rel=1e-12)

    def test_header_mismatch_names_problem(self, tmp_path):
        path = tmp_path / "bad.csv"
        path.write_text("trial,method,n\n")
        with pytest.raises(ConfigError, match="header"):
            summarize(path)

    def test_bad_cell_names_column_and_line(self, tmp_path):
        path = tmp_path / "bad2.csv"
        path.write_text(CSV_HEADER + "\n" + "0,oracle,10,2,1,not_a_float,0.5,0.2,1,3.0\n")
        with pytest.raises(ConfigError, match="line 2.*err_l2"):
            summarize(path)

    def test_wrong_column_count_names_line(self, tmp_path):
        path = tmp_path / "bad3.csv"
        path.write_text(CSV_HEADER + "\n" + "0,oracle,10\n")
        with pytest.raises(ConfigError, match="line 2"):
            summarize(path)
