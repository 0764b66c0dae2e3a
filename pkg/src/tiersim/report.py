"""Per-interval metrics, run summaries and their on-disk formats."""

from __future__ import annotations

import csv
import io
import json
import os
import tempfile
from dataclasses import asdict, dataclass
from pathlib import Path

CSV_HEADER = ["interval_end_ns", "fast_accesses", "slow_accesses", "bytes_up", "bytes_down", "bandwidth_bps"]


@dataclass(frozen=True)
class IntervalRecord:
    interval_end_ns: float
    fast_accesses: int
    slow_accesses: int
    bytes_migrated_up: int
    bytes_migrated_down: int
    est_bandwidth_bytes_per_s: float

    def row(self) -> list:
        return [_num(self.interval_end_ns), self.fast_accesses, self.slow_accesses,
                self.bytes_migrated_up, self.bytes_migrated_down, _num(self.est_bandwidth_bytes_per_s)]


def _num(x: float):
    return int(x) if float(x).is_integer() else x


def record_interval(records: list[IntervalRecord], start_ns: float, end_ns: float,
                    fast_accesses: int, slow_accesses: int, pages_up: int = 0, pages_down: int = 0,
                    page_bytes: int = 4096, access_bytes: int = 64) -> IntervalRecord:
    seconds = (end_ns - start_ns) / 1e9
    accesses = fast_accesses + slow_accesses
    bandwidth = access_bytes * accesses / seconds if seconds > 0 else 0.0
    rec = IntervalRecord(end_ns, fast_accesses, slow_accesses,
                         pages_up * page_bytes, pages_down * page_bytes, bandwidth)
    records.append(rec)
    return rec


def intervals_csv(records: list[IntervalRecord]) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(CSV_HEADER)
    for rec in records:
        writer.writerow(rec.row())
    return buf.getvalue()


def parse_intervals_csv(text: str) -> list[IntervalRecord]:
    reader = csv.reader(io.StringIO(text))
    header = next(reader)
    if header != CSV_HEADER:
        raise ValueError(f"unexpected CSV header {header}")
    out = []
    for row in reader:
        end, fa, sa, up, down, bw = row
        out.append(IntervalRecord(float(end), int(fa), int(sa), int(up), int(down), float(bw)))
    return out


@dataclass(frozen=True)
class Summary:
    policy: str
    total_sim_ns: float
    relative_throughput: float | None
    baseline: str | None
    total_migration_bytes: int
    final_placements: dict
    trace_hash: str

    def to_json(self) -> str:
        return json.dumps(asdict(self), indent=1, sort_keys=True)


def compare(baseline: Summary, candidate: Summary) -> float:
    """Throughput of ``candidate`` relative to ``baseline`` (time ratio)."""
    if baseline.trace_hash != candidate.trace_hash:
        raise ValueError("summaries come from different traces")
    if candidate.total_sim_ns <= 0:
        return 1.0 if baseline.total_sim_ns <= 0 else float("inf")
    return baseline.total_sim_ns / candidate.total_sim_ns


def atomic_write(path: str | Path, text: str) -> None:
    path = Path(path)
    try:
        fd, tmp = tempfile.mkstemp(dir=path.parent or ".", prefix=path.name + ".", suffix=".tmp")
        with os.fdopen(fd, "w") as fh:
            fh.write(text)
        os.replace(tmp, path)
    except OSError as exc:
        raise OSError(f"cannot write {path}: {exc.strerror or exc}") from None


def write_reports(result, output_prefix: str | Path, baseline=None) -> list[Path]:
    """Write ``<prefix>.intervals.csv`` and ``<prefix>.summary.json``.

    Online runs also get ``<prefix>.decisions.jsonl``.  Files only appear
    once their content is complete.
    """
    prefix = str(output_prefix)
    summary = result.summary(baseline)
    outputs = [
        (Path(prefix + ".intervals.csv"), intervals_csv(result.intervals)),
        (Path(prefix + ".summary.json"), summary.to_json() + "\n"),
    ]
    if result.decisions:
        lines = "".join(json.dumps(d.to_dict(), sort_keys=True) + "\n" for d in result.decisions)
        outputs.append((Path(prefix + ".decisions.jsonl"), lines))
    for path, text in outputs:
        atomic_write(path, text)
    return [p for p, _ in outputs]
