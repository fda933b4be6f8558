import json
import math

from covercount.cli import main


def run(args):
    return main(args)


def test_validate_fixture_exits_zero(capsys):
    assert run(["validate", "--group", "fixture:b"]) == 0
    out = capsys.readouterr().out
    assert "group ok" in out and "disk gap" in out


def test_validate_bad_group_reports(tmp_path, capsys):
    bad = tmp_path / "bad.json"
    bad.write_text(json.dumps({
        "model": "H2",
        "disks": [
            {"minus": {"center": [-3.0, 0.0], "radius": 5.0},
             "plus": {"center": [3.0, 0.0], "radius": 5.0}},
            {"minus": {"center": [-9.0, 0.0], "radius": 1.0},
             "plus": {"center": [9.0, 0.0], "radius": 1.0}},
        ],
        "homology_matrix": [[1, 0]],
    }))
    assert run(["validate", "--group", str(bad)]) == 1
    assert "overlap" in capsys.readouterr().err


def test_missing_file_is_config_error(capsys):
    assert run(["validate", "--group", "/nonexistent/g.json"]) == 3


def test_bad_arguments_config_error():
    assert run(["no-such-command"]) == 3


def test_delta_toy_prints_log2(tmp_path, capsys):
    assert run(["--out", str(tmp_path), "delta", "--group", "fixture:toy2"]) == 0
    out = capsys.readouterr().out
    assert "0.693147180560" in out
    run_dirs = list(tmp_path.glob("delta-*"))
    assert len(run_dirs) == 1
    manifest = json.loads((run_dirs[0] / "manifest.json").read_text())
    assert "summary.json" in manifest["files"]


def test_output_dir_created(tmp_path):
    target = tmp_path / "deep" / "nested"
    assert run(["--out", str(target), "delta", "--group", "fixture:toy2"]) == 0
    assert target.exists()


def test_clt_seed_partition(tmp_path, capsys):
    """Different seeds: sample blocks differ, delta/sigma blocks identical."""
    code = run(["--out", str(tmp_path / "a"), "clt", "--group", "fixture:toy2",
                "--traj", "64", "--steps", "400", "--seed", "1"])
    assert code == 0
    code = run(["--out", str(tmp_path / "b"), "clt", "--group", "fixture:toy2",
                "--traj", "64", "--steps", "400", "--seed", "2"])
    assert code == 0
    s1 = json.loads(next((tmp_path / "a").glob("clt-*/summary.json")).read_text())
    s2 = json.loads(next((tmp_path / "b").glob("clt-*/summary.json")).read_text())
    assert s1["delta"] == s2["delta"]
    assert s1["sigma"] == s2["sigma"]
    assert s1["sample_head"] != s2["sample_head"]


def test_clt_rerun_identical_manifest(tmp_path):
    for sub in ("x", "y"):
        assert run(["--out", str(tmp_path / sub), "clt", "--group", "fixture:toy2",
                    "--traj", "48", "--steps", "300", "--seed", "9"]) == 0
    m1 = json.loads(next((tmp_path / "x").glob("clt-*/manifest.json")).read_text())
    m2 = json.loads(next((tmp_path / "y").glob("clt-*/manifest.json")).read_text())
    assert m1["files"] == m2["files"]
    assert m1["config_hash"] == m2["config_hash"]


def test_scan_toy_control_flagged(tmp_path, capsys):
    assert run(["--out", str(tmp_path), "scan", "--group", "fixture:toy2",
                "--t-min", str(2 * math.pi), "--t-max", str(2 * math.pi),
                "--t-count", "1", "--v-count", "1"]) == 0
    out = capsys.readouterr().out
    assert "violations: 1" in out


def test_count_orbit_on_fixture(tmp_path, capsys):
    assert run(["--out", str(tmp_path), "count-orbit", "--group", "fixture:b",
                "--t-min", "4", "--t-max", "8", "--checkpoints", "6",
                "--classes", "0", "1", "-1"]) == 0
    out = capsys.readouterr().out
    assert "class (0,)" in out
    csv = next(tmp_path.glob("count-orbit-*/census.csv")).read_text()
    assert csv.splitlines()[0] == "checkpoint,class,count,predicted,ratio"


def test_holonomy_on_fixture(tmp_path, capsys):
    assert run(["--out", str(tmp_path), "holonomy", "--group", "fixture:d0",
                "--l-min", "6", "--l-max", "10", "--checkpoints", "4",
                "--p", "1", "2"]) == 0
    out = capsys.readouterr().out
    assert "p=1" in out and "p=2" in out


def test_config_file_merged_under_flags(tmp_path, capsys):
    cfg = tmp_path / "cfg.json"
    cfg.write_text(json.dumps({"group": "fixture:toy2", "traj": 32, "steps": 150}))
    code = run(["--out", str(tmp_path), "--config", str(cfg),
                "clt", "--seed", "3", "--steps", "200"])
    assert code == 0
    summary = json.loads(next(tmp_path.glob("clt-*/summary.json")).read_text())
    # flag overrides the config file; config supplies the rest
    dirs = list(tmp_path.glob("clt-*"))
    manifest = json.loads((dirs[0] / "manifest.json").read_text())
    assert manifest["config"]["steps"] == 200
    assert manifest["config"]["traj"] == 32


def test_bad_config_file(tmp_path):
    bad = tmp_path / "cfg.json"
    bad.write_text("{nope")
    assert run(["--config", str(bad), "validate", "--group", "fixture:b"]) == 3
