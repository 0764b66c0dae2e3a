"""Trace-driven simulation of the placement policies on a two-tier memory."""

from __future__ import annotations

import math
from dataclasses import dataclass, field, replace
from typing import Callable, Sequence

from .arenas import ArenaRuntime, Strategy
from .engine import Clock, MigrationDecision, TieringEngine
from .model import CapacityError, CostModel, SimConfig, Tier, TierConfig
from .profiler import AccessProfiler, ProfileSnapshot
from .recommender import TierRecommendation, recommend
from .report import IntervalRecord, Summary, compare, record_interval
from .trace import Access, Alloc, Free, Time, TraceError, TraceEvent, peak_resident_pages, trace_hash


@dataclass
class RunResult:
    policy: str
    total_sim_ns: float = 0
    intervals: list[IntervalRecord] = field(default_factory=list)
    final_placements: dict = field(default_factory=dict)
    peak_rss_pages: int = 0
    fast_capacity_pages: int = 0
    fast_accesses: int = 0
    slow_accesses: int = 0
    pages_up: int = 0
    pages_down: int = 0
    migration_ns: float = 0
    trace_hash: str = ""
    decisions: list[MigrationDecision] = field(default_factory=list)
    profile: ProfileSnapshot | None = None
    recommendations: TierRecommendation | None = None
    page_bytes: int = 4096

    @property
    def accesses(self) -> int:
        return self.fast_accesses + self.slow_accesses

    @property
    def migration_bytes(self) -> int:
        return (self.pages_up + self.pages_down) * self.page_bytes

    def summary(self, baseline: "RunResult | Summary | None" = None) -> Summary:
        s = Summary(self.policy, self.total_sim_ns, None, None, self.migration_bytes,
                    self.final_placements, self.trace_hash)
        if baseline is None:
            return s
        base = baseline.summary() if isinstance(baseline, RunResult) else baseline
        return replace(s, relative_throughput=compare(base, s), baseline=base.policy)


def measure_peak_rss(events: Sequence[TraceEvent], page_bytes: int = 4096) -> int:
    return peak_resident_pages(events, page_bytes)


class DirectMappedPageCache:
    """Fast tier used as a direct-mapped, page-granular cache of the slow tier."""

    def __init__(self, frames: int, cost: CostModel):
        self.frames = frames
        self.slots = [-1] * frames
        self.hit_ns = cost.fast_read_ns
        self.miss_ns = cost.slow_read_ns + cost.hw_page_fill_ns
        self.hits = self.misses = 0

    def hw_cache_access(self, page: int) -> tuple[bool, float]:
        if self.frames:
            frame = page % self.frames
            if self.slots[frame] == page:
                self.hits += 1
                return True, self.hit_ns
            self.slots[frame] = page
        self.misses += 1
        return False, self.miss_ns

    def occupancy(self) -> int:
        return sum(1 for p in self.slots if p >= 0)


Placer = Callable[[int, int, int], "Tier | None"]


class Simulation:
    """One isolated run: arena runtime, virtual clock and optional profiler/engine."""

    def __init__(self, config: SimConfig, tiers: TierConfig, strategy: Strategy,
                 policy: str, profile: bool = False, online: bool = False, hw_cache: bool = False):
        self.config = config
        self.cost = config.cost
        self.tiers = tiers
        self.policy = policy
        self.strategy = strategy
        self.clock = Clock()
        runtime_tiers = TierConfig(0, tiers.slow_capacity_pages) if hw_cache else tiers
        self.runtime = ArenaRuntime(self.cost, runtime_tiers)
        self.cache = DirectMappedPageCache(tiers.fast_capacity_pages, self.cost) if hw_cache else None
        self.profiler = None
        if profile or online:
            self.profiler = AccessProfiler(self.runtime, self.cost.sample_period, config.sampling,
                                           config.reads_only, config.seed)
        self.engine = None
        if online:
            self.engine = TieringEngine(self.runtime, self.profiler, self.cost, config.heuristic, self.clock)
        self.placer: Placer = self.first_touch_place
        if hw_cache:
            self.placer = self._slow_only
        elif online:
            self.placer = lambda thread, site, pages: None

    def first_touch_place(self, thread_id: int, site_id: int, size_pages: int) -> Tier:
        return self.runtime.first_touch_tier(size_pages)

    def _slow_only(self, thread_id: int, site_id: int, size_pages: int) -> Tier:
        if self.runtime.fits(Tier.SLOW, size_pages):
            return Tier.SLOW
        raise CapacityError(f"slow tier cannot hold {size_pages} more pages")

    def guided_placer(self, recs: TierRecommendation) -> Placer:
        """Allocation-time placement from per-site recommendations."""
        runtime = self.runtime
        site_fast: dict[int, int] = {}
        self._site_fast = site_fast

        def place(thread_id: int, site_id: int, pages: int) -> Tier:
            rec = recs.get(site_id)
            if rec is None:
                tier = runtime.first_touch_tier(pages)
            else:
                tier = Tier.SLOW
                if rec.tier is Tier.FAST:
                    budget = math.inf if rec.granted_pages is None else rec.granted_pages - site_fast.get(site_id, 0)
                    if pages <= budget and runtime.fits(Tier.FAST, pages):
                        tier = Tier.FAST
                if not runtime.fits(tier, pages):
                    tier = tier.other
                    if not runtime.fits(tier, pages):
                        raise CapacityError(f"both tiers exhausted: cannot place {pages} pages")
            if tier is Tier.FAST:
                site_fast[site_id] = site_fast.get(site_id, 0) + pages
            return tier

        return place

    def run(self, events: Sequence[TraceEvent]) -> RunResult:
        cost = self.cost
        pb = cost.page_bytes
        fast_ns, slow_ns = cost.fast_read_ns, cost.slow_read_ns
        runtime = self.runtime
        objects = runtime.objects
        profiler = self.profiler
        record = profiler.record_access if profiler is not None else None
        cache = self.cache
        engine = self.engine
        clock = self.clock
        strategy = self.strategy
        placer = self.placer
        site_fast = getattr(self, "_site_fast", None)
        interval = cost.interval_ns

        result = RunResult(self.policy, fast_capacity_pages=self.tiers.fast_capacity_pages, page_bytes=pb)
        records = result.intervals
        next_boundary = interval
        last_end = 0
        fa = sa = 0
        total_fast = total_slow = 0

        for ev in events:
            kind = type(ev)
            if kind is Access:
                obj = objects.get(ev.object_id)
                if obj is None:
                    raise TraceError(f"access to dead or unknown object {ev.object_id}")
                if cache is not None:
                    hit, ns = cache.hw_cache_access(obj.base_page + ev.offset // pb)
                    clock.now += ns
                    if hit:
                        fa += 1
                    else:
                        sa += 1
                elif ev.offset // pb < obj.fast_pages:
                    clock.now += fast_ns
                    fa += 1
                else:
                    clock.now += slow_ns
                    sa += 1
                if record is not None:
                    record(obj, ev.is_write)
            elif kind is Time:
                clock.now += ev.delta_ns
            elif kind is Alloc:
                pages = -(-ev.size_bytes // pb)
                tier = placer(ev.thread_id, ev.site_id, pages)
                runtime.allocate(ev.thread_id, ev.site_id, ev.size_bytes, strategy, tier)
            elif kind is Free:
                obj = objects.get(ev.object_id)
                if obj is None:
                    raise TraceError(f"free of dead or unknown object {ev.object_id}")
                if site_fast is not None and obj.fast_pages:
                    site_fast[obj.site_id] -= obj.fast_pages
                runtime.free(ev.object_id)
            else:
                raise TraceError(f"unknown event {ev!r}")

            while clock.now >= next_boundary:
                up = down = 0
                if engine is not None:
                    decision = engine.online_step(next_boundary)
                    up, down = decision.pages_up, decision.pages_down
                    result.pages_up += up
                    result.pages_down += down
                    result.migration_ns += (up + down) * cost.ns_per_page_moved
                record_interval(records, last_end, next_boundary, fa, sa, up, down, pb, cost.access_bytes)
                total_fast += fa
                total_slow += sa
                fa = sa = 0
                last_end = next_boundary
                next_boundary += interval

        if fa or sa or clock.now > last_end:
            record_interval(records, last_end, clock.now, fa, sa, 0, 0, pb, cost.access_bytes)
            total_fast += fa
            total_slow += sa

        result.total_sim_ns = clock.now
        result.fast_accesses = total_fast
        result.slow_accesses = total_slow
        result.peak_rss_pages = runtime.peak_pages
        result.final_placements = self.final_placements()
        if engine is not None:
            result.decisions = engine.decisions
            result.profile = profiler.snapshot_profile(clock.now)
        return result

    def final_placements(self) -> dict:
        out = {}
        for site, (fast, slow) in self.runtime.site_pages().items():
            entry = {"fast_pages": fast, "slow_pages": slow}
            arena = self.runtime.shared_arena(site)
            if arena is not None:
                entry["tier"] = arena.current_tier.value
            out[str(site)] = entry
        return out


def resolve_tiers(config: SimConfig, events: Sequence[TraceEvent]) -> TierConfig:
    peak = None
    if config.fast_capacity_pages is None:
        peak = measure_peak_rss(events, config.cost.page_bytes)
    return config.tier_config(peak)


def _finish(result: RunResult, events: Sequence[TraceEvent], digest: str | None) -> RunResult:
    result.trace_hash = digest if digest is not None else trace_hash(events)
    return result


def run(config: SimConfig, events: Sequence[TraceEvent], *, digest: str | None = None) -> RunResult:
    """Simulate ``events`` under ``config.policy``.

    For the offline policy this runs both passes and returns the guided one.
    """
    config.validate()
    if config.policy == "offline":
        return run_offline_pair(config, events, digest=digest)[1]
    tiers = resolve_tiers(config, events)
    if config.policy == "first-touch":
        sim = Simulation(config, tiers, Strategy.PER_THREAD_TIER, "first-touch")
    elif config.policy == "online":
        sim = Simulation(config, tiers, Strategy.HYBRID, "online", online=True)
    else:
        sim = Simulation(config, tiers, Strategy.PER_THREAD_TIER, "hw-cache", hw_cache=True)
    return _finish(sim.run(events), events, digest)


def run_offline_pair(config: SimConfig, events: Sequence[TraceEvent], *,
                     digest: str | None = None) -> tuple[RunResult, RunResult]:
    """Profile pass with per-site arenas, then a guided pass with per-thread-per-tier arenas."""
    config.validate()
    tiers = resolve_tiers(config, events)
    digest = digest if digest is not None else trace_hash(events)

    sim1 = Simulation(config, tiers, Strategy.PER_SITE, "offline-profile", profile=True)
    first = sim1.run(events)
    profile = sim1.profiler.snapshot_profile(sim1.clock.now, pages="peak")
    recs = recommend(profile, config.heuristic, tiers.fast_capacity_pages)
    first.profile, first.recommendations = profile, recs

    sim2 = Simulation(config, tiers, Strategy.PER_THREAD_TIER, "offline")
    sim2.placer = sim2.guided_placer(recs)
    second = sim2.run(events)
    second.profile, second.recommendations = profile, recs
    return _finish(first, events, digest), _finish(second, events, digest)


def run_guided(config: SimConfig, events: Sequence[TraceEvent], recs: TierRecommendation,
               *, digest: str | None = None) -> RunResult:
    """Guided pass only, from recommendations produced elsewhere."""
    config.validate()
    tiers = resolve_tiers(config, events)
    sim = Simulation(config, tiers, Strategy.PER_THREAD_TIER, "offline")
    sim.placer = sim.guided_placer(recs)
    result = sim.run(events)
    result.recommendations = recs
    return _finish(result, events, digest)


def run_all_fast(config: SimConfig, events: Sequence[TraceEvent], *, digest: str | None = None) -> RunResult:
    """Baseline with every byte on the fast tier."""
    peak = measure_peak_rss(events, config.cost.page_bytes)
    cfg = replace(config, policy="first-touch", fast_capacity_pages=peak, fast_capacity_pct=None)
    result = run(cfg, events, digest=digest)
    result.policy = "all-fast"
    return result
