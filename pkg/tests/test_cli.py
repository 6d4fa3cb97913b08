"""End-to-end command-line tests (no subprocesses: main() is called directly).

Output paths are also contracts here: several tests assert byte-identical
stdout across repeated runs, since reproducibility is part of the tool's
promise.
"""

import numpy as np
import pytest

from execsched import (load_prices, read_policy_csv, rollout,
                       solve_constrained)
from execsched.cli import main

from conftest import FIXTURE_CSV, REFERENCE_BLOCKS


def _run(capsys, *argv):
    code = main(list(argv))
    captured = capsys.readouterr()
    return code, captured.out, captured.err


# ---------------------------------------------------------------------------
# solve


def test_solve_reference_instance(capsys):
    code, out, err = _run(capsys, "solve", "--k", "1000", "--n", "10")
    assert code == 0 and err == ""
    lines = out.splitlines()
    assert lines[0] == "schedule (K=1000, N=10, rows of 10):"
    tokens = [int(t) for line in lines[1:3] for t in line.split()]
    assert tokens == [0] + REFERENCE_BLOCKS[10]
    assert "expected total cost: 1014.36" in out


def test_solve_is_byte_deterministic(capsys):
    _, out1, _ = _run(capsys, "solve", "--k", "200", "--n", "10")
    _, out2, _ = _run(capsys, "solve", "--k", "200", "--n", "10")
    assert out1 == out2


def test_solve_accepts_scientific_notation(capsys):
    _, out1, _ = _run(capsys, "solve", "--k", "1e3", "--n", "10")
    _, out2, _ = _run(capsys, "solve", "--k", "1000", "--n", "10")
    assert out1 == out2


def test_solve_zero_budget(capsys):
    code, out, _ = _run(capsys, "solve", "--k", "0", "--n", "3")
    assert code == 0
    assert [int(t) for t in out.splitlines()[1].split()] == [0, 0, 0, 0]
    assert "expected total cost: 0.00" in out


def test_solve_fiscal_prints_note_and_scales_price(capsys):
    code, out, _ = _run(capsys, "solve", "--k", "5", "--n", "2",
                        "--cost", "fiscal", "--x0", "10")
    assert code == 0
    assert "expected total cost: 50.00" in out
    assert "note: fiscal cost is schedule-indifferent" in out
    assert [int(t) for t in out.splitlines()[1].split()] == [0, 0, 5]


def test_solve_writes_policy_and_figure(tmp_path, capsys):
    out_csv = tmp_path / "policy.csv"
    fig = tmp_path / "schedule.png"
    code, out, _ = _run(capsys, "solve", "--k", "40", "--n", "5",
                        "--out", str(out_csv), "--figure", str(fig))
    assert code == 0
    assert f"policy table written to {out_csv}" in out
    assert f"figure written to {fig}" in out
    assert out_csv.read_text().splitlines()[0] == "k,r,u_opt,j_value"
    assert fig.read_bytes()[:8] == b"\x89PNG\r\n\x1a\n"


def test_solve_rollout_round_trip(tmp_path, capsys):
    out_csv = tmp_path / "policy.csv"
    code, solve_out, _ = _run(capsys, "solve", "--k", "60", "--n", "4",
                              "--out", str(out_csv))
    assert code == 0
    code, roll_out, _ = _run(capsys, "rollout", "--policy", str(out_csv),
                             "--k", "60")
    assert code == 0
    assert roll_out.splitlines()[1] == solve_out.splitlines()[1]
    # a smaller budget walks the same saved table
    code, small, _ = _run(capsys, "rollout", "--policy", str(out_csv),
                          "--k", "17")
    assert code == 0
    total = sum(int(t) for t in small.splitlines()[1].split())
    assert total == 17


# ---------------------------------------------------------------------------
# error reporting and exit codes


def test_invalid_parameters_exit_2_and_aggregate(capsys):
    code, out, err = _run(capsys, "solve", "--k", "-3", "--n", "10",
                          "--beta", "1.5")
    assert code == 2 and out == ""
    assert "invalid parameters:" in err
    assert "k must be" in err and "beta must lie in [0, 1)" in err


def test_resource_limit_exits_3(capsys):
    code, _, err = _run(capsys, "solve", "--k", "50000", "--n", "1000")
    assert code == 3
    assert "resource limit" in err


def test_missing_required_flag_exits_2(capsys):
    code, _, err = _run(capsys, "simulate", "--k", "10", "--n", "2")
    assert code == 2
    assert "--seed" in err


@pytest.mark.parametrize("argv", [
    ["--help"],
    ["solve", "--help"],
    ["rollout", "--help"],
    ["backtest", "--help"],
    ["simulate", "--help"],
    ["compare", "--help"],
])
def test_help_exits_zero(capsys, argv):
    code, out, _ = _run(capsys, *argv)
    assert code == 0
    assert "usage:" in out


def test_help_states_units(capsys):
    _, out, _ = _run(capsys, "solve", "--help")
    assert "(count)" in out and "(dimensionless)" in out and "(currency)" in out


# ---------------------------------------------------------------------------
# config files


def test_config_supplies_defaults_and_flags_win(tmp_path, capsys):
    cfg = tmp_path / "run.cfg"
    cfg.write_text("k = 1000\nn = 10  # horizon intervals\nbeta = 5e-5\n")
    code, from_cfg, _ = _run(capsys, "solve", "--config", str(cfg))
    assert code == 0
    _, direct, _ = _run(capsys, "solve", "--k", "1000", "--n", "10")
    assert from_cfg == direct
    # explicit flag beats the file
    code, out, _ = _run(capsys, "solve", "--config", str(cfg), "--k", "12")
    assert code == 0
    assert out.startswith("schedule (K=12, N=10")


def test_config_underscore_keys_map_to_dashes(tmp_path, capsys):
    cfg = tmp_path / "run.cfg"
    cfg.write_text("k=10\nn=2\nbatch_size=128\npaths=512\nseed=4\n")
    code, out, _ = _run(capsys, "simulate", "--config", str(cfg))
    assert code == 0
    assert "dp" in out


def test_malformed_config_reports_line(tmp_path, capsys):
    cfg = tmp_path / "run.cfg"
    cfg.write_text("k=10\nnot a pair\n")
    code, _, err = _run(capsys, "solve", "--config", str(cfg))
    assert code == 2
    assert "line 2" in err


def test_config_type_errors_go_through_argparse(tmp_path, capsys):
    cfg = tmp_path / "run.cfg"
    cfg.write_text("k=ten\nn=10\n")
    code, _, err = _run(capsys, "solve", "--config", str(cfg))
    assert code == 2
    assert "not a number" in err


# ---------------------------------------------------------------------------
# backtest


def test_backtest_fixture_report(capsys):
    code, out, err = _run(capsys, "backtest", "--prices", str(FIXTURE_CSV),
                          "--k", "1000")
    assert code == 0 and err == ""
    lines = out.splitlines()
    assert "# mode: historical" in lines
    assert "# baseline: bertsimas" in lines
    assert "# date_range: 2016-02-01..2016-06-17" in lines
    row = next(l for l in lines if l.startswith("bertsimas"))
    assert "103361.50" in row and row.rstrip().endswith("1.00000")
    mid = next(l for l in lines if l.startswith("onetime@50"))
    assert "102000.00" in mid


def test_backtest_writes_report_and_figures(tmp_path, capsys):
    report = tmp_path / "report.csv"
    figdir = tmp_path / "figs"
    code, out, _ = _run(capsys, "backtest", "--prices", str(FIXTURE_CSV),
                        "--k", "300", "--n", "20",
                        "--strategies", "bertsimas,onetime@0",
                        "--report", str(report), "--figures", str(figdir))
    assert code == 0
    assert report.read_text().splitlines()[0] == "strategy,total_cost,ratio_vs_baseline"
    for name in ("costs.png", "schedules.png", "prices.png"):
        assert (figdir / name).read_bytes()[:8] == b"\x89PNG\r\n\x1a\n"


def test_backtest_missing_file_exits_2(capsys):
    code, _, err = _run(capsys, "backtest", "--prices", "/no/such/file.csv",
                        "--k", "10")
    assert code == 2
    assert "/no/such/file.csv" in err


def test_backtest_n_larger_than_data_exits_2(capsys):
    code, _, err = _run(capsys, "backtest", "--prices", str(FIXTURE_CSV),
                        "--k", "10", "--n", "200")
    assert code == 2
    assert "201 prices" in err


def test_backtest_unknown_strategy_exits_2(capsys):
    code, _, err = _run(capsys, "backtest", "--prices", str(FIXTURE_CSV),
                        "--k", "10", "--strategies", "sorcery")
    assert code == 2
    assert "unknown strategy token" in err


# ---------------------------------------------------------------------------
# simulate / compare


def test_simulate_zero_noise_table(capsys):
    code, out, _ = _run(capsys, "simulate", "--k", "30", "--n", "6",
                        "--seed", "0", "--paths", "100",
                        "--strategies", "dp,bertsimas")
    assert code == 0
    lines = out.splitlines()
    assert lines[0].split() == ["strategy", "mean", "stderr", "paths", "seed"]
    dp_row = next(l for l in lines if l.startswith("dp")).split()
    assert dp_row[2] == "0"            # zero noise -> exact, stderr 0
    assert dp_row[3] == "100" and dp_row[4] == "0"


def test_simulate_workers_agree_bitwise(capsys):
    args = ["simulate", "--k", "30", "--n", "6", "--seed", "9",
            "--paths", "3000", "--noise", "pm:0.01", "--batch-size", "512"]
    _, out1, _ = _run(capsys, *args, "--workers", "1")
    _, out4, _ = _run(capsys, *args, "--workers", "4")
    assert out1 == out4


def test_simulate_rejects_bad_noise(capsys):
    code, _, err = _run(capsys, "simulate", "--k", "5", "--n", "2",
                        "--seed", "0", "--noise", "pm:0.9")
    assert code == 2
    assert "noise values" in err
    code, _, err = _run(capsys, "simulate", "--k", "5", "--n", "2",
                        "--seed", "0", "--noise", "0.1:0.5,0.2:0.5")
    assert code == 2
    assert "mean" in err


def test_compare_model_mode_report(tmp_path, capsys):
    report = tmp_path / "cmp.csv"
    code, out, _ = _run(capsys, "compare", "--k", "30", "--n", "6",
                        "--seed", "21", "--paths", "2000",
                        "--noise", "pm:0.01", "--report", str(report))
    assert code == 0
    assert "# mode: model" in out
    assert "# seed: 21" in out
    body = report.read_text().splitlines()
    assert body[0] == "strategy,total_cost,ratio_vs_baseline"
    assert len(body) == 3   # dp + bertsimas
    # dp beats the even split under the default barrier parameters
    dp_ratio = float(next(l for l in body[1:] if l.startswith("dp")).split(",")[2])
    assert dp_ratio < 1.0


def test_compare_custom_noise_support(capsys):
    # the --noise=SPEC form is required when the first value is negative
    # (a bare "-0.02:..." token would parse as a flag)
    code, out, _ = _run(capsys, "compare", "--k", "10", "--n", "3",
                        "--seed", "2", "--paths", "500",
                        "--noise=-0.02:0.25,0.0:0.5,0.02:0.25")
    assert code == 0
    assert "# mode: model" in out
