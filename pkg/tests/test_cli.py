import csv
import io
import json

import pytest

from greedy_power.cli import main

from conftest import EXAMPLE


@pytest.fixture
def example_csv(tmp_path):
    path = tmp_path / "k.csv"
    path.write_text("".join(",".join(map(str, row)) + "\n" for row in EXAMPLE))
    return path


def run(capsys, *argv):
    code = main([str(a) for a in argv])
    out = capsys.readouterr()
    return code, out.out, out.err


def test_solve_example(capsys, example_csv):
    code, out, _ = run(capsys, "solve", "--matrix", example_csv, "--select", 2, "--remove", 1,
                       "--branches", 3, "--power", 2, "--seed", 1)
    assert code == 0
    lines = dict(line.split(": ", 1) for line in out.splitlines())
    assert lines["selected"] == "0,2"
    assert float(lines["final_goal"]) == 14.0
    assert float(lines["baseline_goal"]) == 12.0
    assert lines["matched"] == "false"
    assert lines["seed"] == "1"


def test_solve_single_round_json(capsys, example_csv):
    code, out, _ = run(capsys, "solve", "--matrix", example_csv, "--select", 2, "--power", 1, "--format", "json")
    doc = json.loads(out)
    assert code == 0
    assert doc["matched"] is True and doc["final_goal"] == doc["baseline_goal"] == 12.0
    assert isinstance(doc["seed"], int)


def test_solve_infeasible(capsys, example_csv):
    code, _, err = run(capsys, "solve", "--matrix", example_csv, "--select", 4)
    assert code != 0 and "3 columns" in err


def test_solve_bad_matrix(capsys, tmp_path):
    bad = tmp_path / "bad.csv"
    bad.write_text("1,2\n3,oops\n")
    code, _, err = run(capsys, "solve", "--matrix", bad, "--select", 1)
    assert code != 0 and "row 1" in err and "column 1" in err


def test_solve_missing_matrix(capsys):
    code, _, err = run(capsys, "solve", "--select", 1)
    assert code == 2 and "--matrix" in err


def test_simulate_single_trajectory(capsys):
    code, out, err = run(capsys, "simulate", "--preset", "base-r1", "--trajectories", 1, "--seed", 3)
    assert code == 0
    rows = list(csv.DictReader(io.StringIO(out)))
    assert len(rows) == 3
    assert all(float(r["matched_pct"]) in (0.0, 100.0) for r in rows)
    assert "# seed: 3" in err


def test_simulate_conflict(capsys):
    code, _, err = run(capsys, "simulate", "--preset", "base-r1", "--rows", 10)
    assert code == 2 and "cannot be combined" in err


def test_simulate_needs_dimensions(capsys):
    code, _, err = run(capsys, "simulate", "--rows", 10)
    assert code == 2 and "missing" in err


def test_simulate_reproducible_and_roundtrips(capsys, tmp_path):
    first = tmp_path / "a.json"
    code, _, err = run(capsys, "simulate", "--rows", 8, "--cols", 40, "--select", 4, "--remove", 2,
                       "--trajectories", 25, "--repeats", 2, "--format", "json", "--output", first)
    assert code == 0
    seed = int(next(l for l in err.splitlines() if l.startswith("# seed:")).split(":")[1])
    doc = json.loads(first.read_text())
    assert doc["config"]["seed"] == seed

    again = tmp_path / "b.json"
    run(capsys, "simulate", "--config", first, "--format", "json", "--output", again)
    redo = json.loads(again.read_text())
    assert redo["rows"] == doc["rows"] and redo["config"] == doc["config"]

    # flags override the file
    run(capsys, "simulate", "--config", first, "--repeats", 1, "--format", "json", "--output", again)
    assert json.loads(again.read_text())["rows"] == doc["rows"][:1]


def test_simulate_config_file_with_preset(capsys, tmp_path):
    cfg = tmp_path / "c.json"
    cfg.write_text(json.dumps({"preset": "m10-r3", "trajectories": 5, "repeats": 1, "seed": 8}))
    code, out, _ = run(capsys, "simulate", "--config", cfg)
    assert code == 0 and len(out.splitlines()) == 2
    cfg.write_text(json.dumps({"bogus": 1}))
    code, _, err = run(capsys, "simulate", "--config", cfg)
    assert code == 2 and "bogus" in err


def test_simulate_workers_same_csv(capsys):
    args = ["simulate", "--rows", 8, "--cols", 30, "--select", 3, "--trajectories", 20, "--repeats", 2, "--seed", 5]
    _, one, _ = run(capsys, *args, "--workers", 1)
    _, two, _ = run(capsys, *args, "--workers", 2)
    assert one == two


@pytest.mark.parametrize("args", [("--rows", 5, "--cols", 4, "--select", 4), ("--rows", 1, "--cols", 10, "--select", 3)])
def test_oracle_check_trivial(capsys, args):
    code, out, _ = run(capsys, "oracle-check", *args, "--trajectories", 20, "--seed", 2, "--format", "json")
    doc = json.loads(out)
    assert code == 0
    assert doc["greedy_optimality_rate"] == doc["power_optimality_rate"] == 1.0


def test_oracle_check_default(capsys):
    code, out, _ = run(capsys, "oracle-check", "--seed", 0, "--format", "json")
    doc = json.loads(out)
    assert (doc["rows"], doc["cols"], doc["select"], doc["trajectories"]) == (10, 14, 4, 200)
    assert (doc["remove"], doc["branches"]) == (3, 4)
    assert doc["power_optimality_rate"] >= doc["greedy_optimality_rate"]
    assert doc["chain_violations"] == 0


def test_oracle_check_budget(capsys):
    code, _, err = run(capsys, "oracle-check", "--cols", 60, "--select", 8, "--trajectories", 1)
    assert code == 1 and "C(60,8)" in err


def test_split_prob(capsys):
    code, out, _ = run(capsys, "split-prob", "--select", 6, "--remove", 3, "--seed", 1, "--format", "json")
    doc = json.loads(out)
    assert code == 0 and doc["analytic"] == 0.6
    assert abs(doc["z_score"]) < 3
    code, _, _ = run(capsys, "split-prob", "--select", 3, "--remove", 3)
    assert code == 1


def test_same_seed_same_output(capsys, example_csv):
    args = ["solve", "--matrix", example_csv, "--select", 2, "--remove", 2, "--branches", 1, "--power", 0, "--seed", 42]
    _, a, _ = run(capsys, *args)
    _, b, _ = run(capsys, *args)
    assert a == b
