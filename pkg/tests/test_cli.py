"""End-to-end tests for the ``fluxjump`` command-line interface.

Every test drives :func:`fluxjump.cli.main` in process with an explicit
argument vector, so exit codes, printed output, and written files are all
exercised exactly as a shell user would see them.  Global flags precede the
subcommand; that ordering is part of the contract and is pinned below.
"""
from __future__ import annotations

import numpy as np
import pytest

from fluxjump import ExperimentReport, ParameterError, SampledSignal, signal_to_csv
from fluxjump import cli
from fluxjump.cli import (
    DEFAULTS,
    EXIT_CONFIG,
    EXIT_CONSTRUCTION,
    EXIT_FAILED,
    EXIT_INCONCLUSIVE,
    EXIT_OK,
    load_config,
    merge_config,
)

# Cheap overrides reused by the solver-facing tests.
SMALL_SOLVE = ["--set", "n_cells=200", "--set", "t_end=0.2"]
# Cheap overrides for the blow-up chain commands.
SMALL_CHAIN = ["--set", "n_points=5", "--set", "density=10.0"]


def run_cli(tmp_path, argv, subdir="out"):
    """Run ``fluxjump`` with an --out directory under ``tmp_path``."""
    out = tmp_path / subdir
    code = cli.main(["--out", str(out), *argv])
    return code, out


def write_staircase(tmp_path, values, name="signal.csv"):
    values = np.asarray(values, dtype=float)
    path = tmp_path / name
    signal_to_csv(SampledSignal(np.arange(values.size, dtype=float), values),
                  str(path))
    return str(path)


# -- configuration layer -----------------------------------------------------

class TestConfig:
    def test_load_config_skips_comments_and_strips(self, tmp_path):
        path = tmp_path / "run.cfg"
        path.write_text("# a comment\n\n  n_points = 5 \ndensity=10.0\n")
        assert load_config(str(path)) == {"n_points": "5", "density": "10.0"}

    def test_load_config_unknown_key(self, tmp_path):
        path = tmp_path / "run.cfg"
        path.write_text("bogus=1\n")
        with pytest.raises(ParameterError, match="unknown key"):
            load_config(str(path))

    def test_load_config_requires_assignment(self, tmp_path):
        path = tmp_path / "run.cfg"
        path.write_text("n_points\n")
        with pytest.raises(ParameterError, match="key=value"):
            load_config(str(path))

    def test_load_config_missing_file(self, tmp_path):
        with pytest.raises(ParameterError, match="cannot read config"):
            load_config(str(tmp_path / "absent.cfg"))

    def test_merge_precedence_defaults_file_overrides(self):
        cfg = merge_config({"s_values": "1.0", "p": "2.0"},
                           {"s_values": "0.25"})
        assert cfg["s_values"] == "0.25"
        assert cfg["p"] == "2.0"
        assert cfg["eps"] == DEFAULTS["eps"]

    def test_merge_rejects_unknown_override(self):
        with pytest.raises(ParameterError, match="unknown config key"):
            merge_config({}, {"bogus": "1"})

    def test_main_reports_config_file_errors(self, tmp_path, capsys):
        path = tmp_path / "run.cfg"
        path.write_text("bogus=1\n")
        code = cli.main(["--config", str(path), "--out", str(tmp_path),
                         "counterexample"])
        assert code == EXIT_CONFIG
        assert "configuration error" in capsys.readouterr().err

    def test_set_flag_requires_assignment(self, tmp_path, capsys):
        code, _ = run_cli(tmp_path, ["--set", "n_points", "counterexample"])
        assert code == EXIT_CONFIG
        assert "KEY=VALUE" in capsys.readouterr().err

    def test_set_flag_rejects_unknown_key(self, tmp_path, capsys):
        code, _ = run_cli(tmp_path, ["--set", "bogus=1", "counterexample"])
        assert code == EXIT_CONFIG
        assert "unknown config key" in capsys.readouterr().err


class TestParser:
    def test_subcommand_required(self):
        with pytest.raises(SystemExit) as exc:
            cli.main([])
        assert exc.value.code == 2

    def test_global_flags_precede_subcommand(self, tmp_path):
        # --seed after the subcommand is not recognised; this pins the
        # "global flags first" calling convention.
        path = write_staircase(tmp_path, [0.0, 1.0])
        with pytest.raises(SystemExit) as exc:
            cli.main(["tvs", "--seed", "1", path])
        assert exc.value.code == 2


# -- tvs ----------------------------------------------------------------------

class TestTvs:
    def test_staircase_golden_output(self, tmp_path, capsys):
        path = write_staircase(tmp_path, [0.0, 1.0, 0.0])
        code = cli.main(["tvs", path])
        assert code == EXIT_OK
        assert capsys.readouterr().out == (
            "s=0.5 tv=2 subdivision=3\n"
            "s=1 tv=2 subdivision=3\n")

    def test_classical_order_matches_absolute_sum(self, tmp_path, capsys):
        rng = np.random.default_rng(3)
        values = rng.uniform(-1.0, 1.0, size=40)
        path = write_staircase(tmp_path, values)
        code = cli.main(["--set", "s_values=1.0", "tvs", path])
        assert code == EXIT_OK
        line = capsys.readouterr().out.strip()
        tv = float(line.split()[1].removeprefix("tv="))
        assert tv == pytest.approx(np.abs(np.diff(values)).sum(), rel=1e-12)

    def test_signal_path_key_is_fallback(self, tmp_path, capsys):
        path = write_staircase(tmp_path, [0.0, 2.0])
        code = cli.main(["--set", f"signal_path={path}",
                         "--set", "s_values=1.0", "tvs"])
        assert code == EXIT_OK
        assert capsys.readouterr().out == "s=1 tv=2 subdivision=2\n"

    def test_missing_signal_is_config_error(self, capsys):
        assert cli.main(["tvs"]) == EXIT_CONFIG
        assert "no input signal" in capsys.readouterr().err

    def test_malformed_signal_is_config_error(self, tmp_path, capsys):
        path = tmp_path / "bad.csv"
        path.write_text("x,value\n1,2,3\n")
        assert cli.main(["tvs", str(path)]) == EXIT_CONFIG
        assert "configuration error" in capsys.readouterr().err

    def test_empty_s_values_rejected(self, tmp_path, capsys):
        path = write_staircase(tmp_path, [0.0, 1.0])
        code = cli.main(["--set", "s_values=", "tvs", path])
        assert code == EXIT_CONFIG
        assert "s_values" in capsys.readouterr().err


# -- solve --------------------------------------------------------------------

class TestSolve:
    def test_writes_snapshot_and_traces(self, tmp_path, capsys):
        code, out = run_cli(tmp_path, [*SMALL_SOLVE, "solve"])
        assert code == EXIT_OK
        assert sorted(p.name for p in out.iterdir()) == [
            "snapshot_000.csv", "traces.csv"]
        stdout = capsys.readouterr().out
        assert "mass defect" in stdout
        header = (out / "snapshot_000.csv").read_text().splitlines()
        assert "# seed=0" in header
        assert "# n_cells=200" in header
        assert header[header.index("# seed=0"):].count("x_center,value") == 1

    def test_snapshot_times_choose_frame_count(self, tmp_path):
        code, out = run_cli(
            tmp_path, [*SMALL_SOLVE, "--set", "snapshot_times=0.0,0.1,0.2",
                       "solve"])
        assert code == EXIT_OK
        names = sorted(p.name for p in out.iterdir())
        assert names == ["snapshot_000.csv", "snapshot_001.csv",
                         "snapshot_002.csv", "traces.csv"]

    def test_byte_determinism(self, tmp_path):
        _, out_a = run_cli(tmp_path, [*SMALL_SOLVE, "solve"], subdir="a")
        _, out_b = run_cli(tmp_path, [*SMALL_SOLVE, "solve"], subdir="b")
        for name in ("snapshot_000.csv", "traces.csv"):
            assert (out_a / name).read_bytes() == (out_b / name).read_bytes()

    def test_seed_changes_initial_data(self, tmp_path):
        _, out_a = run_cli(tmp_path, ["--seed", "0", *SMALL_SOLVE, "solve"],
                           subdir="a")
        _, out_b = run_cli(tmp_path, ["--seed", "7", *SMALL_SOLVE, "solve"],
                           subdir="b")
        assert (out_a / "traces.csv").read_bytes() != \
            (out_b / "traces.csv").read_bytes()

    def test_unstable_cfl_is_config_error(self, tmp_path, capsys):
        code, _ = run_cli(tmp_path, ["--set", "cfl=1.5", *SMALL_SOLVE,
                                     "solve"])
        assert code == EXIT_CONFIG
        assert "cfl" in capsys.readouterr().err

    def test_odd_cell_count_is_config_error(self, tmp_path, capsys):
        code, _ = run_cli(tmp_path, ["--set", "n_cells=7", "solve"])
        assert code == EXIT_CONFIG
        assert "n_cells" in capsys.readouterr().err


# -- counterexample and exact-eval ---------------------------------------------

class TestCounterexample:
    def test_writes_three_files(self, tmp_path, capsys):
        code, out = run_cli(tmp_path, [*SMALL_CHAIN, "counterexample"])
        assert code == EXIT_OK
        assert sorted(p.name for p in out.iterdir()) == [
            "initial_data.csv", "jump_series.csv", "profile_at_T.csv"]
        assert capsys.readouterr().out.count("wrote ") == 3

    def test_initial_data_layout(self, tmp_path):
        _, out = run_cli(tmp_path, [*SMALL_CHAIN, "counterexample"])
        lines = (out / "initial_data.csv").read_text().splitlines()
        k = int(lines[0].partition("k=")[2].split()[0])
        assert lines[1] == "left_edge,right_edge,value"
        rows = [ln.split(",") for ln in lines[2:]]
        assert len(rows) == 2 * k + 3
        assert rows[0][0] == "-inf" and rows[-1][1] == "inf"
        # consecutive rows share an edge
        for prev, cur in zip(rows, rows[1:]):
            assert prev[1] == cur[0]

    def test_jump_series_layout(self, tmp_path):
        _, out = run_cli(tmp_path, [*SMALL_CHAIN, "counterexample"])
        lines = (out / "profile_at_T.csv").read_text().splitlines()
        assert lines[0].startswith("# t=")
        lines = (out / "jump_series.csv").read_text().splitlines()
        assert lines[0] == "# s_crit=0.75 s_sub=0.5"
        assert lines[1] == "i,x_i,jump,partial_sum_crit,partial_sum_sub"
        rows = np.array([ln.split(",") for ln in lines[2:]], dtype=float)
        assert rows.shape[0] == 5
        np.testing.assert_array_equal(rows[:, 0], np.arange(10, 15))
        assert np.all(np.diff(rows[:, 3]) > 0)  # partial sums increase
        assert np.all(np.diff(rows[:, 1]) < 0)  # positions decrease

    def test_byte_determinism(self, tmp_path):
        _, out_a = run_cli(tmp_path, [*SMALL_CHAIN, "counterexample"],
                           subdir="a")
        _, out_b = run_cli(tmp_path, [*SMALL_CHAIN, "counterexample"],
                           subdir="b")
        for path in out_a.iterdir():
            assert path.read_bytes() == (out_b / path.name).read_bytes()

    def test_config_file_matches_set_flags(self, tmp_path):
        cfg = tmp_path / "chain.cfg"
        cfg.write_text("n_points=5\ndensity=10.0\n")
        out_a = tmp_path / "a"
        code = cli.main(["--config", str(cfg), "--out", str(out_a),
                         "counterexample"])
        assert code == EXIT_OK
        _, out_b = run_cli(tmp_path, [*SMALL_CHAIN, "counterexample"],
                           subdir="b")
        for path in out_a.iterdir():
            assert path.read_bytes() == (out_b / path.name).read_bytes()

    def test_greedy_horizon_exceeded_is_construction_error(self, tmp_path,
                                                           capsys):
        code, out = run_cli(tmp_path, ["--set", "n_points=12",
                                       "counterexample"])
        assert code == EXIT_CONSTRUCTION
        assert "infeasible construction at index 21" in capsys.readouterr().err
        assert not out.exists()  # failure precedes any file output

    def test_literal_mode_horizon_is_construction_error(self, tmp_path,
                                                        capsys):
        code, _ = run_cli(tmp_path, ["--set", "mode=literal",
                                     "--set", "n_points=100",
                                     "counterexample"])
        assert code == EXIT_CONSTRUCTION
        assert "index 14" in capsys.readouterr().err

    def test_unknown_mode_is_config_error(self, tmp_path, capsys):
        code, _ = run_cli(tmp_path, ["--set", "mode=magic", "counterexample"])
        assert code == EXIT_CONFIG


class TestExactEval:
    def test_writes_profile_csv(self, tmp_path):
        code, out = run_cli(tmp_path, [*SMALL_CHAIN, "--set", "x_count=64",
                                       "--set", "t_eval=0.5", "exact-eval"])
        assert code == EXIT_OK
        lines = (out / "exact_eval.csv").read_text().splitlines()
        assert lines[0] == "# t=0.5"
        assert lines[3] == "x,value"
        assert len(lines) == 4 + 64

    def test_degenerate_grid_is_config_error(self, tmp_path, capsys):
        code, _ = run_cli(tmp_path, [*SMALL_CHAIN, "--set", "x_count=1",
                                     "exact-eval"])
        assert code == EXIT_CONFIG
        code, _ = run_cli(tmp_path, [*SMALL_CHAIN, "--set", "x_min=2.0",
                                     "--set", "x_max=1.0", "exact-eval"])
        assert code == EXIT_CONFIG


# -- verify -------------------------------------------------------------------

class TestVerifyCommand:
    def test_holder_suite_passes(self, tmp_path, capsys):
        code, out = run_cli(tmp_path, ["verify", "holder"])
        assert code == EXIT_OK
        assert "holder: pass (" in capsys.readouterr().out
        assert sorted(p.name for p in out.iterdir()) == [
            "holder_series.csv", "holder_summary.txt"]

    def test_unknown_suite_is_config_error(self, tmp_path, capsys):
        code, _ = run_cli(tmp_path, ["verify", "moonshine"])
        assert code == EXIT_CONFIG
        assert "unknown suite" in capsys.readouterr().err

    def test_blowup_default_ladder_fails_honestly(self, tmp_path, capsys):
        # The default chain (p=1, eps=0.5) has a slowly decaying subcritical
        # tail; the suite reports that honestly as a failure.
        code, out = run_cli(tmp_path, ["verify", "blowup"])
        assert code == EXIT_FAILED
        assert "blowup: fail" in capsys.readouterr().out
        assert (out / "blowup_summary.txt").exists()

    def test_coarse_trace_grids_fail(self, tmp_path):
        code, _ = run_cli(tmp_path, ["--set", "verify_trace_grids=60,80",
                                     "--set", "t_end=0.8", "verify",
                                     "traces"])
        assert code == EXIT_FAILED

    def test_all_suites_with_thread_pool(self, tmp_path, capsys):
        code, out = run_cli(tmp_path, [
            "--jobs", "2",
            "--set", "verify_grid_list=300,600",
            "--set", "verify_t_list=0.25,0.5",
            "--set", "verify_trace_grids=200,400",
            "--set", "n_cells=400",
            "--set", "verify_eps_list=0.4,0.2,0.1",
            "--set", "t_end=0.8",
            "verify", "all"])
        assert code == EXIT_FAILED  # blowup's honest failure dominates
        stdout = capsys.readouterr().out
        assert len(stdout.strip().splitlines()) == 6
        names = sorted(p.name for p in out.iterdir())
        assert len(names) == 12  # one series + one summary per suite
        for suite in ("smoothing", "blowup", "traces", "outside",
                      "interface", "holder"):
            assert f"{suite}_series.csv" in names

    def _fake_report(self, name, verdict):
        return ExperimentReport(name=name, parameters={"a": "1"},
                                series={"x": np.array([1.0])},
                                coefficients={"c": 0.0}, verdict=verdict)

    def test_inconclusive_verdict_maps_to_exit_code(self, tmp_path,
                                                    monkeypatch, capsys):
        monkeypatch.setitem(cli._SUITE_RUNNERS, "holder",
                            lambda cfg: self._fake_report("holder",
                                                          "inconclusive"))
        code, _ = run_cli(tmp_path, ["verify", "holder"])
        assert code == EXIT_INCONCLUSIVE
        assert "holder: inconclusive" in capsys.readouterr().out

    def test_fail_outranks_inconclusive(self, tmp_path, monkeypatch):
        monkeypatch.setattr(cli, "_SUITE_RUNNERS", {
            "first": lambda cfg: self._fake_report("first", "inconclusive"),
            "second": lambda cfg: self._fake_report("second", "fail"),
            "third": lambda cfg: self._fake_report("third", "pass"),
        })
        code, _ = run_cli(tmp_path, ["verify", "all"])
        assert code == EXIT_FAILED
