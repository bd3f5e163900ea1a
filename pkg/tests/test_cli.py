import copy

import pytest
import yaml

from hybridnav.cli import EXIT_FAILED, EXIT_INVALID, EXIT_OK, EXIT_TIMEOUT, main, parse_seeds
from hybridnav.scenario import bundled_dir

STRAIGHT = bundled_dir() / "straight_line.yaml"


def _write(tmp_path, doc, name="s.yaml"):
    p = tmp_path / name
    p.write_text(yaml.safe_dump(doc))
    return str(p)


def test_parse_seeds():
    assert list(parse_seeds("0..3")) == [0, 1, 2, 3]
    assert list(parse_seeds("7")) == [7]


def test_validate_ok_writes_nothing(tmp_path, monkeypatch):
    monkeypatch.chdir(tmp_path)
    assert main(["validate", "--scenario", str(STRAIGHT)]) == EXIT_OK
    assert list(tmp_path.iterdir()) == []


def test_validate_reports_fields(tmp_path, capsys):
    doc = yaml.safe_load(STRAIGHT.read_text())
    doc["sim"]["dt"] = 0
    del doc["agents"][0]["limits"]["U_max"]
    assert main(["validate", "--scenario", _write(tmp_path, doc)]) == EXIT_INVALID
    err = capsys.readouterr().err.splitlines()
    assert "sim.dt: must be positive" in err
    assert "agents[0].limits.U_max: required" in err


def test_simulate_straight_line(tmp_path, capsys):
    out = tmp_path / "run"
    assert main(["simulate", "--scenario", str(STRAIGHT), "--out", str(out), "--format", "summary"]) == EXIT_OK
    text = (out / "metrics.txt").read_text()
    vals = dict(line.split(": ", 1) for line in text.splitlines() if ": " in line and not line.startswith(" "))
    assert vals["status"] == "GoalReached"
    assert abs(float(vals["mission_time"]) - 2.5) <= 0.1
    assert (out / "trajectory_robot.csv").exists()
    assert "status: GoalReached" in capsys.readouterr().out


def test_simulate_svg_format(tmp_path):
    out = tmp_path / "svg"
    assert main(["simulate", "--scenario", str(STRAIGHT), "--out", str(out), "--format", "svg"]) == EXIT_OK
    assert (out / "plot_topdown.svg").exists() and (out / "plot_clearance.svg").exists()


def test_simulate_timeout_and_failure_codes(tmp_path):
    doc = yaml.safe_load(STRAIGHT.read_text())
    doc["sim"]["t_max"] = 1.0
    assert main(["simulate", "--scenario", _write(tmp_path, doc), "--out", str(tmp_path / "a")]) == EXIT_TIMEOUT
    bad = copy.deepcopy(doc)
    bad["sim"]["t_max"] = 10.0
    bad["world"]["bounds"] = [[-5, -8], [15, 8]]
    bad["world"]["obstacles"] = [{"type": "disc", "center": [10, 4], "radius": 1.5, "velocity": [0, -1.0]}]
    code = main(["simulate", "--scenario", _write(tmp_path, bad, "b.yaml"), "--out", str(tmp_path / "b")])
    assert code == EXIT_FAILED


def test_plan_prints_each_agent(tmp_path, capsys):
    scn = bundled_dir() / "case2_clutter.yaml"
    assert main(["plan", "--scenario", str(scn), "--out", str(tmp_path)]) == EXIT_OK
    out = capsys.readouterr().out
    assert "waypoints" in out
    assert list(tmp_path.glob("plan_*.csv"))


def test_batch_compare(tmp_path, capsys):
    scn = bundled_dir() / "class_simple.yaml"
    code = main(["batch", "--scenario", str(scn), "--seeds", "0..1", "--compare", "hybrid,reactive",
                 "--out", str(tmp_path)])
    assert code == EXIT_OK
    out = capsys.readouterr().out
    assert out.startswith("pairs: 2")
    assert "paired_win_rate" in out
    assert (tmp_path / "summary.txt").read_text() == out


def test_batch_plain(capsys):
    assert main(["batch", "--scenario", str(STRAIGHT), "--seeds", "0..1"]) == EXIT_OK
    assert capsys.readouterr().out.count("GoalReached") == 2


def test_fire_and_coverage(tmp_path, capsys):
    assert main(["fire", "--scenario", str(bundled_dir() / "fire_spread.yaml"), "--steps", "5",
                 "--out", str(tmp_path)]) == EXIT_OK
    lines = (tmp_path / "fire_extent.csv").read_text().splitlines()
    assert len(lines) == 7
    assert main(["coverage", "--scenario", str(bundled_dir() / "rescue_case3.yaml"), "--out", str(tmp_path)]) == EXIT_OK
    out = capsys.readouterr().out
    assert out.count("partition ") == 4
    assert main(["fire", "--scenario", str(STRAIGHT)]) == EXIT_INVALID
    assert main(["coverage", "--scenario", str(STRAIGHT)]) == EXIT_INVALID


def test_plot_missing_data(tmp_path):
    assert main(["plot", "--out", str(tmp_path)]) == EXIT_INVALID


def test_plot_after_simulate(tmp_path, capsys):
    main(["simulate", "--scenario", str(STRAIGHT), "--out", str(tmp_path)])
    assert main(["plot", "--out", str(tmp_path)]) == EXIT_OK
    assert "plot_clearance.svg" in capsys.readouterr().out


def test_unknown_subcommand_exits():
    with pytest.raises(SystemExit):
        main(["launch"])
