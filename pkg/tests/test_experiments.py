"""Experiment runner and CLI tests."""

import csv
import subprocess
import sys
from pathlib import Path

import pytest

from lerpa.cards import InputError
from lerpa.cli import main
from lerpa.experiments import (
    TUNE_GRID,
    ExperimentConfig,
    moving_average,
    run_coward,
    run_learn,
    run_mas,
    run_selftest,
    run_solve,
    run_tune,
)
from lerpa.table import load_predealt

BLUFF_DEMO = str(Path("src/lerpa/data/bluff_demo.predealt").resolve())


class TestMovingAverage:
    def test_block_means(self):
        assert moving_average([1, 2, 3, 4], 2) == [(0, 1.5), (1, 3.5)]

    def test_window_one_is_identity(self):
        assert moving_average([1.0, 2.0, 3.0], 1) == [(0, 1.0), (1, 2.0), (2, 3.0)]

    def test_partial_block_dropped(self):
        assert moving_average([1, 2, 3, 4, 5], 2) == [(0, 1.5), (1, 3.5)]

    def test_window_longer_than_series_rejected(self):
        with pytest.raises(InputError):
            moving_average([1, 2], 3)

    def test_sliding_mode(self):
        assert moving_average([1, 2, 3, 4], 2, smoothing="sliding") == \
            [(1, 1.5), (2, 2.5), (3, 3.5)]

    def test_unknown_mode_rejected(self):
        with pytest.raises(InputError):
            moving_average([1, 2], 1, smoothing="median")


class TestRunners:
    def test_learn_emits_four_series(self):
        config = ExperimentConfig(name="learn", hands=400, seed=1, window=40)
        log, series = run_learn(config)
        assert [s.label for s in series] == ["AI1", "R1", "R2", "R3"]
        for s in series:
            assert len(s.points) == 10
            assert s.xs == sorted(set(s.xs))

    def test_coward_with_courage_never_folds_early(self):
        config = ExperimentConfig(name="coward", hands=300, seed=2, window=5,
                                  courage=200)
        log, series = run_coward(config)
        first_200 = [rec.stage1_by_seat()[0].kind for rec in log.non_void_records()[:200]]
        assert all(kind == "K" for kind in first_200)
        assert series.points[0] == (0, 0.0)

    def test_coward_blocks_of_five(self):
        config = ExperimentConfig(name="coward", hands=100, seed=3, window=5, courage=0)
        _, series = run_coward(config)
        assert len(series.points) == 20

    def test_tune_ranking_contains_champion(self):
        config = ExperimentConfig(name="tune", hands=400, seed=4, window=30)
        log, series, ranking = run_tune(config)
        assert len(ranking) == 4
        assert {(e.alpha, e.lam, e.epsilon) for e in ranking} == \
            {(a, l, e) for _, a, l, e in TUNE_GRID}
        assert (0.1, 0.1, 0.01) in {(e.alpha, e.lam, e.epsilon) for e in ranking}
        assert [e.rank for e in ranking] == [1, 2, 3, 4]
        totals = [e.final_chips for e in ranking]
        assert totals == sorted(totals, reverse=True)

    def test_tune_warns_on_duplicate_grid(self):
        config = ExperimentConfig(name="tune", hands=60, seed=5, window=30)
        dup_grid = (("A", 0.1, 0.1, 0.01), ("B", 0.1, 0.1, 0.01),
                    ("C", 0.2, 0.1, 0.01), ("D", 0.3, 0.1, 0.01))
        with pytest.warns(UserWarning):
            run_tune(config, grid=dup_grid)

    def test_mas_emits_eight_rows(self):
        config = ExperimentConfig(name="mas", hands=400, seed=6)
        _, _, rows = run_mas(config)
        assert [r.agent for r in rows] == ["R1", "R2", "R3", "AI1",
                                           "AI2", "AI3", "AI4", "AI5"]
        assert [r.setting for r in rows] == ["vs_random"] * 4 + ["mutual"] * 4

    def test_solve_trivial_constant_play(self):
        spec = load_predealt(BLUFF_DEMO)
        config = ExperimentConfig(name="solve", hands=60, seed=7, window=30, courage=0)
        log, index = run_solve(config, spec)
        assert len(log.records) == 60
        if index is not None:
            assert 0 <= index <= 30


class TestSelftest:
    def test_clean_run_passes(self):
        ok, checks = run_selftest()
        assert ok
        assert len(checks) == 5
        for check in checks:
            assert check.passed, check.line()
            assert check.name in check.line()

    def test_corrupted_gradient_fails(self):
        ok, checks = run_selftest(corrupt_gradient=True)
        assert not ok
        failed = [c for c in checks if not c.passed]
        assert [c.name for c in failed] == ["gradient_check"]


class TestConfigFile:
    def test_file_values_and_cli_override(self, tmp_path, monkeypatch):
        monkeypatch.chdir(tmp_path)
        cfg = tmp_path / "exp.cfg"
        cfg.write_text("hands=120\nseed=9\nwindow=40\n# comment\nsmoothing=block\n")
        out = tmp_path / "a.csv"
        assert main(["learn", "--config", str(cfg), "--hands", "80",
                     "--window", "20", "--out", str(out), "--no-plot"]) == 0
        with open(out, newline="") as fh:
            rows = list(csv.reader(fh))
        # 80 hands (CLI) in blocks of 20 (CLI), not the file's 120/40.
        assert len(rows) == 1 + 4

    def test_missing_config_file(self, tmp_path):
        code = main(["learn", "--config", str(tmp_path / "nope.cfg"), "--no-plot"])
        assert code == 2

    def test_malformed_line(self, tmp_path):
        cfg = tmp_path / "exp.cfg"
        cfg.write_text("hands 120\n")
        assert main(["learn", "--config", str(cfg), "--no-plot"]) == 2


class TestCli:
    def test_predealt_required(self):
        assert main(["solve", "--no-plot"]) == 2
        assert main(["bluff", "--no-plot"]) == 2
        assert main(["adapt", "--no-plot"]) == 2

    def test_layout_writes_file(self, tmp_path):
        out = tmp_path / "layout.txt"
        assert main(["layout", "--out", str(out)]) == 0
        text = out.read_text()
        assert "hand0.suit_class" in text
        assert "trick2.winner" in text

    def test_selftest_exit_code(self):
        assert main(["selftest"]) == 0

    def test_learn_csv_and_figure(self, tmp_path, monkeypatch):
        monkeypatch.chdir(tmp_path)
        out = tmp_path / "learn.csv"
        assert main(["learn", "--hands", "80", "--window", "20", "--seed", "1",
                     "--out", str(out)]) == 0
        assert out.exists()
        assert (tmp_path / "learn.png").exists()
        with open(out, newline="") as fh:
            header = next(csv.reader(fh))
        assert header == ["block", "AI1", "R1", "R2", "R3"]

    def test_adapt_csv_one_row_per_repeat_and_seat(self, tmp_path, monkeypatch):
        monkeypatch.chdir(tmp_path)
        out = tmp_path / "adapt.csv"
        assert main(["adapt", "--predealt", BLUFF_DEMO, "--hands", "30",
                     "--seed", "1", "--out", str(out), "--no-plot"]) == 0
        with open(out, newline="") as fh:
            rows = list(csv.DictReader(fh))
        assert len(rows) == 30 * 4
        assert {(r["repeat"], r["seat"]) for r in rows} == \
            {(str(i), str(s)) for i in range(30) for s in range(4)}
        assert set(rows[0]) == {"repeat", "seat", "agent", "stage1", "forced",
                                "explore", "delta"}

    def test_bluff_csv_schema(self, tmp_path, monkeypatch):
        monkeypatch.chdir(tmp_path)
        out = tmp_path / "bluff.csv"
        assert main(["bluff", "--predealt", BLUFF_DEMO, "--hands", "40",
                     "--seed", "1", "--out", str(out), "--no-plot"]) == 0
        with open(out, newline="") as fh:
            header = next(csv.reader(fh))
        assert header == ["bluffer_seat", "bluffer", "victim_seat", "victim",
                          "epoch_index", "switch_index", "reentry_index"]
        assert (tmp_path / "bluff_hands.csv").exists()

    def test_module_entry_point(self, tmp_path):
        result = subprocess.run(
            [sys.executable, "-m", "lerpa", "layout"],
            capture_output=True, text=True, cwd=tmp_path)
        assert result.returncode == 0
        assert "field" in result.stdout

    def test_fold_update_flag_changes_behaviour(self, tmp_path, monkeypatch):
        monkeypatch.chdir(tmp_path)
        on = tmp_path / "on.csv"
        off = tmp_path / "off.csv"
        for path, flag in ((on, "on"), (off, "off")):
            assert main(["coward", "--hands", "600", "--seed", "2",
                         "--fold-update", flag, "--out", str(path),
                         "--no-plot"]) == 0
        assert on.read_bytes() != off.read_bytes()
