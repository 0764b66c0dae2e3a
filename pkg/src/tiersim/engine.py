"""Online guided tiering: rent-or-buy migration decisions at fixed intervals."""

from __future__ import annotations

from dataclasses import asdict, dataclass, field

from .arenas import ArenaRuntime
from .model import CostModel, Tier
from .profiler import AccessProfiler, ProfileSnapshot
from .recommender import Placement, TierRecommendation, recommend


class Clock:
    __slots__ = ("now",)

    def __init__(self, now: float = 0):
        self.now = now


@dataclass
class MigrationDecision:
    time_ns: float
    rental_cost_ns: float
    purchase_cost_ns: float
    migrate: bool
    pages_up: int = 0
    pages_down: int = 0
    shortfall_pages: int = 0
    fast_sites: list[int] = field(default_factory=list)

    def to_dict(self) -> dict:
        return asdict(self)


def _rec_tier(site: int, recs: TierRecommendation) -> Tier:
    placement = recs.get(site)
    return Tier.SLOW if placement is None else placement.tier


def get_rental_cost(prof: ProfileSnapshot, recs: TierRecommendation, cost: CostModel) -> float:
    a = b = 0
    for p in prof.sites:
        rec = _rec_tier(p.site_id, recs)
        if p.tier is Tier.SLOW and rec is Tier.FAST:
            a += p.samples * prof.sample_period
        elif p.tier is Tier.FAST and rec is Tier.SLOW:
            b += p.samples * prof.sample_period
    if a > b:
        return (a - b) * cost.extra_ns_per_slower_access
    return 0


def get_purchase_cost(prof: ProfileSnapshot, recs: TierRecommendation, cost: CostModel) -> float:
    pages = 0
    for p in prof.sites:
        placement = recs.get(p.site_id, Placement(Tier.SLOW))
        if p.tier is Tier.FAST and placement.tier is Tier.SLOW:
            pages += p.pages
        elif p.tier is Tier.SLOW and placement.tier is Tier.FAST:
            pages += placement.fast_pages(p.pages)
    return pages * cost.ns_per_page_moved


class TieringEngine:
    def __init__(self, runtime: ArenaRuntime, profiler: AccessProfiler, cost: CostModel,
                 heuristic: str = "thermos", clock: Clock | None = None):
        self.runtime = runtime
        self.profiler = profiler
        self.cost = cost
        self.heuristic = heuristic
        self.clock = clock or Clock()
        self.side_table: dict[int, Tier] = {}
        self.decisions: list[MigrationDecision] = []

    def enforce_tier_recs(self, recs: TierRecommendation, prof: ProfileSnapshot | None = None) -> tuple[int, int, int]:
        """Demote cold arenas first, then promote warm ones hottest-first.

        Returns ``(pages_down, pages_up, shortfall)``.
        """
        runtime = self.runtime
        values = {}
        if prof is not None:
            values = {p.site_id: p.samples * prof.sample_period for p in prof.sites}
        down = up = shortfall = 0
        wanted = []
        for arena in runtime.shared_arenas():
            site = arena.owner
            placement = recs.get(site, Placement(Tier.SLOW))
            target_fast = placement.fast_pages(arena.resident_pages)
            if arena.resident_pages_fast > target_fast:
                moved, _ = runtime.remap_arena(arena.id, Tier.SLOW, arena.resident_pages_fast - target_fast)
                down += moved
            if placement.tier is Tier.SLOW:
                arena.current_tier = Tier.SLOW
            elif arena.resident_pages_fast < target_fast:
                wanted.append((arena, target_fast))
            else:
                arena.current_tier = Tier.FAST
        wanted.sort(key=lambda aw: (-values.get(aw[0].owner, 0) / max(aw[0].resident_pages, 1),
                                    -values.get(aw[0].owner, 0), aw[0].owner))
        for arena, target_fast in wanted:
            moved, short = runtime.remap_arena(arena.id, Tier.FAST, target_fast - arena.resident_pages_fast)
            up += moved
            shortfall += short
        for arena in runtime.shared_arenas():
            self.side_table[arena.owner] = arena.current_tier
        return down, up, shortfall

    def fast_sites(self) -> list[int]:
        return sorted(a.owner for a in self.runtime.shared_arenas() if a.current_tier is Tier.FAST)

    def maybe_migrate(self, now: float) -> MigrationDecision:
        prof = self.profiler.snapshot_profile(now)
        recs = recommend(prof, self.heuristic, self.runtime.tiers.fast_capacity_pages)
        rental = get_rental_cost(prof, recs, self.cost)
        purchase = get_purchase_cost(prof, recs, self.cost)
        decision = MigrationDecision(now, rental, purchase, rental > purchase)
        if decision.migrate:
            down, up, short = self.enforce_tier_recs(recs, prof)
            decision.pages_down, decision.pages_up, decision.shortfall_pages = down, up, short
        decision.fast_sites = self.fast_sites()
        return decision

    def online_step(self, now: float) -> MigrationDecision:
        decision = self.maybe_migrate(now)
        self.profiler.reweight_profile(self.cost.decay_factor)
        moved = decision.pages_up + decision.pages_down
        if moved:
            self.clock.now += moved * self.cost.ns_per_page_moved
        self.decisions.append(decision)
        return decision
