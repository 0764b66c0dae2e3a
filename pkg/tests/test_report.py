import pytest

from tiersim.driver import RunResult, run
from tiersim.model import CostModel, SimConfig
from tiersim.report import (
    IntervalRecord, Summary, compare, intervals_csv, parse_intervals_csv, record_interval, write_reports,
)
from tiersim.trace import Access, Alloc, Time


def test_record_interval_examples():
    recs = []
    assert record_interval(recs, 0, 10e9, 0, 0).est_bandwidth_bytes_per_s == 0
    assert record_interval(recs, 0, 10e9, 6 * 10**8, 4 * 10**8).est_bandwidth_bytes_per_s == 6.4e9
    assert record_interval(recs, 0, 1e9, 0, 0, pages_up=1024).bytes_migrated_up == 4 * 2**20
    assert len(recs) == 3


def test_csv_round_trip():
    recs = [IntervalRecord(1e6, 3, 4, 0, 8192, 448_000_000.0), IntervalRecord(2.5e6, 0, 1, 4096, 0, 42.123456789)]
    assert parse_intervals_csv(intervals_csv(recs)) == recs


def test_write_reports_empty_run(tmp_path):
    result = RunResult("first-touch")
    paths = write_reports(result, tmp_path / "empty")
    csv_text = (tmp_path / "empty.intervals.csv").read_text()
    assert csv_text == "interval_end_ns,fast_accesses,slow_accesses,bytes_up,bytes_down,bandwidth_bps\n"
    assert '"total_sim_ns": 0' in (tmp_path / "empty.summary.json").read_text()
    assert len(paths) == 2


def two_interval_run():
    cfg = SimConfig(cost=CostModel(interval_ns=1000), fast_capacity_pages=10)
    return run(cfg, [Alloc(0, 1, 10), Access(1, 0), Time(900), Access(1, 0), Time(900)])


def test_write_reports_rows_in_time_order(tmp_path):
    write_reports(two_interval_run(), tmp_path / "r")
    rows = parse_intervals_csv((tmp_path / "r.intervals.csv").read_text())
    assert [r.interval_end_ns for r in rows] == [1000, 2000]


def test_write_reports_deterministic(tmp_path):
    write_reports(two_interval_run(), tmp_path / "a")
    write_reports(two_interval_run(), tmp_path / "b")
    for suffix in (".intervals.csv", ".summary.json"):
        assert (tmp_path / ("a" + suffix)).read_bytes() == (tmp_path / ("b" + suffix)).read_bytes()


def test_write_reports_surfaces_path(tmp_path):
    with pytest.raises(OSError, match="missing"):
        write_reports(two_interval_run(), tmp_path / "missing" / "x")


def summary(ns, digest="h"):
    return Summary("p", ns, None, None, 0, {}, digest)


def test_compare_examples():
    assert compare(summary(100), summary(100)) == 1.0
    assert compare(summary(100), summary(50)) == 2.0
    assert compare(summary(100), summary(200)) < 1.0
    with pytest.raises(ValueError):
        compare(summary(100, "a"), summary(100, "b"))
