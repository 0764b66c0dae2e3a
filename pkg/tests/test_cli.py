import csv
import json

import pytest

from tiersim.cli import main
from tiersim.trace import WorkloadSpec, generate_workload

SPEC = {"sites": 6, "accesses": 20000, "site_bytes_min": 262144, "site_bytes_max": 2097152,
        "object_bytes": 32768}


@pytest.fixture
def workspace(tmp_path):
    trace = tmp_path / "w.trace"
    trace.write_text("\n".join(generate_workload(WorkloadSpec(**SPEC), 1)) + "\n")
    config = {
        "cost_model": {"interval_ns": 1e6, "promotion_threshold_bytes": 65536},
        "tier_config": {"fast_capacity_pct": 30},
        "policy": "online",
        "trace_path": str(trace),
        "output_prefix": str(tmp_path / "out" / "run"),
    }
    (tmp_path / "out").mkdir()
    path = tmp_path / "cfg.json"
    path.write_text(json.dumps(config))
    return tmp_path, path


def test_run_online(workspace, capsys):
    tmp, cfg = workspace
    assert main(["run", "--config", str(cfg)]) == 0
    names = {p.name for p in (tmp / "out").iterdir()}
    assert {"run.intervals.csv", "run.summary.json", "run.decisions.jsonl"} <= names
    summary = json.loads((tmp / "out" / "run.summary.json").read_text())
    assert summary["policy"] == "online" and summary["total_sim_ns"] > 0
    assert "online:" in capsys.readouterr().out


def test_offline_writes_profile_and_recs(workspace):
    tmp, cfg = workspace
    assert main(["offline", "--config", str(cfg)]) == 0
    recs = json.loads((tmp / "out" / "run.recs.json").read_text())
    profile = json.loads((tmp / "out" / "run.profile.json").read_text())
    assert profile["sites"] and isinstance(recs, (dict, list))


def test_missing_trace(workspace, capsys):
    tmp, cfg = workspace
    missing = tmp / "nope.trace"
    assert main(["run", "--config", str(cfg), "--trace", str(missing)]) != 0
    assert str(missing) in capsys.readouterr().err
    assert not any((tmp / "out").iterdir())


def test_invalid_heuristic_lists_valid_names(workspace, capsys):
    _, cfg = workspace
    assert main(["run", "--config", str(cfg), "--heuristic", "bogus"]) == 1
    err = capsys.readouterr().err
    assert "bogus" in err and "knapsack" in err and "thermos" in err


def test_bad_flag_is_usage_error(workspace, capsys):
    _, cfg = workspace
    assert main(["run", "--config", str(cfg), "--sample-period", "0"]) == 1
    assert main(["frobnicate"]) == 1


def test_corrupt_trace_is_runtime_error(workspace, capsys):
    tmp, cfg = workspace
    bad = tmp / "bad.trace"
    bad.write_text("A 0 1 10\nR 2 0\n")
    assert main(["run", "--config", str(cfg), "--trace", str(bad)]) == 2
    assert "line 2" in capsys.readouterr().err
    assert not any((tmp / "out").iterdir())


def read_sweep(path):
    with open(path) as fh:
        return list(csv.DictReader(fh))


def test_sweep_single_point(workspace):
    tmp, cfg = workspace
    assert main(["sweep", "--config", str(cfg), "--pcts", "50", "--policies", "first-touch"]) == 0
    rows = read_sweep(tmp / "out" / "run.sweep.csv")
    assert len(rows) == 1 and rows[0]["policy"] == "first-touch" and rows[0]["pct"] == "50"


def test_sweep_full_capacity_matches_baseline(workspace):
    tmp, cfg = workspace
    assert main(["sweep", "--config", str(cfg), "--pcts", "100", "--policies", "offline,first-touch"]) == 0
    for row in read_sweep(tmp / "out" / "run.sweep.csv"):
        assert float(row["relative_throughput"]) == pytest.approx(1.0, abs=0.01)


def test_sweep_empty_pcts(workspace, capsys):
    _, cfg = workspace
    assert main(["sweep", "--config", str(cfg), "--pcts", ""]) == 1
    assert "empty" in capsys.readouterr().err


def test_compare(workspace):
    tmp, cfg = workspace
    assert main(["compare", "--config", str(cfg), "--policies", "first-touch,hw-cache"]) == 0
    rows = read_sweep(tmp / "out" / "run.compare.csv")
    assert [r["policy"] for r in rows] == ["first-touch", "hw-cache"]


def test_gen(tmp_path):
    spec = tmp_path / "spec.json"
    spec.write_text(json.dumps({"sites": 3, "accesses": 500, "skew": "inf"}))
    out = tmp_path / "g.trace"
    assert main(["gen", "--spec", str(spec), "--seed", "4", "--out", str(out)]) == 0
    first = out.read_text()
    assert main(["gen", "--spec", str(spec), "--seed", "4", "--out", str(out)]) == 0
    assert out.read_text() == first
    spec.write_text(json.dumps({"sites": 0}))
    assert main(["gen", "--spec", str(spec), "--out", str(tmp_path / "x")]) == 1
    assert not (tmp_path / "x").exists()
