"""Trace events, the text trace format, and a synthetic workload generator.

Trace lines (space separated, ``#`` starts a comment line)::

    T <delta_ns>
    A <thread> <site> <bytes>      # the N-th A line creates object N
    F <obj>
    R <obj> <offset>
    W <obj> <offset>
"""

from __future__ import annotations

import hashlib
import math
from dataclasses import asdict, dataclass, fields
from pathlib import Path
from typing import Iterable, NamedTuple

import numpy as np


class TraceError(ValueError):
    pass


class Time(NamedTuple):
    delta_ns: int


class Alloc(NamedTuple):
    thread_id: int
    site_id: int
    size_bytes: int


class Free(NamedTuple):
    object_id: int


class Access(NamedTuple):
    object_id: int
    offset: int
    is_write: bool = False


TraceEvent = Time | Alloc | Free | Access


def format_event(ev: TraceEvent) -> str:
    if type(ev) is Access:
        return f"{'W' if ev.is_write else 'R'} {ev.object_id} {ev.offset}"
    if type(ev) is Time:
        return f"T {ev.delta_ns}"
    if type(ev) is Alloc:
        return f"A {ev.thread_id} {ev.site_id} {ev.size_bytes}"
    return f"F {ev.object_id}"


def _ints(parts: list[str], n: int, lineno: int) -> list[int]:
    if len(parts) != n + 1:
        raise TraceError(f"line {lineno}: expected {n} field(s) after {parts[0]!r}")
    try:
        vals = [int(p) for p in parts[1:]]
    except ValueError:
        raise TraceError(f"line {lineno}: non-integer field in {' '.join(parts)!r}") from None
    if any(v < 0 for v in vals):
        raise TraceError(f"line {lineno}: negative field in {' '.join(parts)!r}")
    return vals


def parse_trace(lines: Iterable[str]) -> list[TraceEvent]:
    """Parse trace text, checking every object reference against live objects."""
    events: list[TraceEvent] = []
    sizes: dict[int, int] = {}
    next_obj = 1
    for lineno, raw in enumerate(lines, 1):
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        parts = line.split()
        op = parts[0]
        if op in ("R", "W"):
            obj, off = _ints(parts, 2, lineno)
            size = sizes.get(obj)
            if size is None:
                raise TraceError(f"line {lineno}: access to dead or unknown object {obj}")
            if off >= size:
                raise TraceError(f"line {lineno}: offset {off} outside object {obj} ({size} bytes)")
            events.append(Access(obj, off, op == "W"))
        elif op == "T":
            (delta,) = _ints(parts, 1, lineno)
            events.append(Time(delta))
        elif op == "A":
            thread, site, size = _ints(parts, 3, lineno)
            if size == 0:
                raise TraceError(f"line {lineno}: zero-byte allocation")
            if site == 0:
                raise TraceError(f"line {lineno}: site ids must be positive")
            sizes[next_obj] = size
            next_obj += 1
            events.append(Alloc(thread, site, size))
        elif op == "F":
            (obj,) = _ints(parts, 1, lineno)
            if sizes.pop(obj, None) is None:
                raise TraceError(f"line {lineno}: free of dead or unknown object {obj}")
            events.append(Free(obj))
        else:
            raise TraceError(f"line {lineno}: unknown event {op!r}")
    return events


def read_trace(path: str | Path) -> list[TraceEvent]:
    path = Path(path)
    try:
        with path.open() as fh:
            return parse_trace(fh)
    except FileNotFoundError:
        raise TraceError(f"trace file not found: {path}") from None


def write_trace(events: Iterable[TraceEvent], path: str | Path) -> None:
    with Path(path).open("w") as fh:
        for ev in events:
            fh.write(format_event(ev))
            fh.write("\n")


def trace_hash(events: Iterable[TraceEvent]) -> str:
    h = hashlib.sha256()
    for ev in events:
        h.update(format_event(ev).encode())
        h.update(b"\n")
    return h.hexdigest()


def peak_resident_pages(events: Iterable[TraceEvent], page_bytes: int = 4096) -> int:
    """Maximum simultaneously live pages over the trace."""
    pages: dict[int, int] = {}
    live = peak = 0
    next_obj = 1
    for ev in events:
        kind = type(ev)
        if kind is Alloc:
            n = -(-ev.size_bytes // page_bytes)
            pages[next_obj] = n
            next_obj += 1
            live += n
            if live > peak:
                peak = live
        elif kind is Free:
            live -= pages.pop(ev.object_id)
    return peak


# -- workload generation ----------------------------------------------------

@dataclass(frozen=True)
class WorkloadSpec:
    """Parameters of a synthetic multi-site workload.

    Every site allocates its footprint up front as ``object_bytes`` chunks,
    threads taking chunks round-robin.  Accesses are then issued in blocks;
    within a block each site receives its power-law share of accesses
    (largest-remainder apportionment), shuffled, followed by one compute
    gap.  Each phase re-draws which site holds which hotness rank.
    """

    sites: int = 20
    threads: int = 4
    site_bytes_min: int = 1 << 20
    site_bytes_max: int = 8 << 20
    object_bytes: int = 64 << 10
    skew: float = 1.2
    phases: int = 1
    accesses: int = 100_000
    block_accesses: int = 1000
    compute_ns_per_block: int = 0
    write_ratio: float = 0.25
    free_at_end: bool = True

    def validate(self) -> "WorkloadSpec":
        checks = [
            (self.sites >= 1, "sites must be ≥ 1"),
            (self.threads >= 1, "threads must be ≥ 1"),
            (self.site_bytes_min >= 1, "site_bytes_min must be ≥ 1"),
            (self.site_bytes_max >= self.site_bytes_min, "site_bytes_max must be ≥ site_bytes_min"),
            (self.object_bytes >= 1, "object_bytes must be ≥ 1"),
            (self.skew >= 0 and not math.isnan(self.skew), "skew must be ≥ 0"),
            (self.phases >= 1, "phases must be ≥ 1"),
            (self.accesses >= 0, "accesses must be ≥ 0"),
            (self.block_accesses >= 1, "block_accesses must be ≥ 1"),
            (self.compute_ns_per_block >= 0, "compute_ns_per_block must be ≥ 0"),
            (0 <= self.write_ratio <= 1, "write_ratio must be in [0, 1]"),
        ]
        for ok, msg in checks:
            if not ok:
                raise ValueError(msg)
        return self

    @classmethod
    def from_dict(cls, data: dict) -> "WorkloadSpec":
        known = {f.name for f in fields(cls)}
        unknown = sorted(set(data) - known)
        if unknown:
            raise ValueError(f"unknown workload key(s): {', '.join(unknown)}")
        data = dict(data)
        if data.get("skew") in ("inf", "infinity"):
            data["skew"] = math.inf
        return cls(**data)

    def to_dict(self) -> dict:
        return asdict(self)


def zipf_weights(n: int, skew: float) -> np.ndarray:
    if math.isinf(skew):
        w = np.zeros(n)
        w[0] = 1.0
        return w
    w = np.arange(1, n + 1, dtype=float) ** -skew
    return w / w.sum()


def apportion(weights: np.ndarray, total: int) -> np.ndarray:
    """Integer counts summing to ``total``, by largest remainder."""
    quota = weights * total
    counts = np.floor(quota).astype(np.int64)
    short = total - int(counts.sum())
    if short:
        order = np.lexsort((np.arange(len(weights)), -(quota - counts)))
        counts[order[:short]] += 1
    return counts


def site_sizes(spec: WorkloadSpec, rng: np.random.Generator) -> np.ndarray:
    lo, hi = math.log(spec.site_bytes_min), math.log(spec.site_bytes_max)
    return np.exp(rng.uniform(lo, hi, spec.sites)).astype(np.int64).clip(spec.site_bytes_min, spec.site_bytes_max)


def generate_events(spec: WorkloadSpec, seed: int) -> list[TraceEvent]:
    spec.validate()
    rng = np.random.default_rng(seed)
    sizes = site_sizes(spec, rng)
    events: list[TraceEvent] = []

    # site -> (first object id, chunk sizes)
    layout: list[tuple[int, list[int]]] = []
    next_obj = 1
    thread = 0
    for s in range(spec.sites):
        total = int(sizes[s])
        chunks = [spec.object_bytes] * (total // spec.object_bytes)
        if total % spec.object_bytes:
            chunks.append(total % spec.object_bytes)
        layout.append((next_obj, chunks))
        for c in chunks:
            events.append(Alloc(thread, s + 1, c))
            thread = (thread + 1) % spec.threads
            next_obj += 1

    weights = zipf_weights(spec.sites, spec.skew)
    bounds = [round(p * spec.accesses / spec.phases) for p in range(spec.phases + 1)]
    for phase in range(spec.phases):
        rank_to_site = rng.permutation(spec.sites)
        site_w = np.empty(spec.sites)
        site_w[rank_to_site] = weights
        remaining = bounds[phase + 1] - bounds[phase]
        while remaining > 0:
            n = min(spec.block_accesses, remaining)
            remaining -= n
            counts = apportion(site_w, n)
            who = np.repeat(np.arange(spec.sites), counts)
            rng.shuffle(who)
            pos = (rng.random(n) * sizes[who]).astype(np.int64)
            writes = rng.random(n) < spec.write_ratio
            for s, p, w in zip(who.tolist(), pos.tolist(), writes.tolist()):
                first, chunks = layout[s]
                idx = p // spec.object_bytes
                events.append(Access(first + idx, p - idx * spec.object_bytes, w))
            if spec.compute_ns_per_block:
                events.append(Time(spec.compute_ns_per_block))

    if spec.free_at_end:
        events.extend(Free(i) for i in range(1, next_obj))
    return events


def generate_workload(spec: WorkloadSpec, seed: int) -> list[str]:
    """Deterministic trace text (one line per event) for ``spec`` and ``seed``."""
    header = [f"# tiersim workload seed={seed} " + " ".join(f"{k}={v}" for k, v in spec.to_dict().items())]
    return header + [format_event(ev) for ev in generate_events(spec, seed)]
