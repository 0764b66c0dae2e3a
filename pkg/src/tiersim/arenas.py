"""Arena allocation under the per-site, per-thread-per-tier and hybrid strategies.

Objects live in page-granular arenas.  Each object keeps a count of its
pages resident on the fast tier; pages ``[0, fast_pages)`` of the object are
fast, the rest slow.  Arena and tier occupancy counters are kept in step with
every allocate/free/remap so reads are O(1).
"""

from __future__ import annotations

from dataclasses import dataclass, field
from enum import Enum

from .model import CapacityError, CostModel, Tier, TierConfig


class ArenaKind(str, Enum):
    THREAD_PRIVATE = "THREAD_PRIVATE"
    SITE_SHARED = "SITE_SHARED"
    THREAD_TIER = "THREAD_TIER"


class Strategy(str, Enum):
    PER_SITE = "PER_SITE"
    PER_THREAD_TIER = "PER_THREAD_TIER"
    HYBRID = "HYBRID"


class ArenaError(KeyError):
    def __str__(self):
        return self.args[0] if self.args else "arena error"


@dataclass(eq=False)
class ObjectRecord:
    object_id: int
    site_id: int
    size_bytes: int
    arena: int
    first_page: int
    page_count: int
    fast_pages: int = 0
    shared: bool = False
    # global virtual page number of page 0, used by the hardware cache model
    base_page: int = 0

    @property
    def slow_pages(self) -> int:
        return self.page_count - self.fast_pages

    def tier_of_page(self, page_index: int) -> Tier:
        return Tier.FAST if page_index < self.fast_pages else Tier.SLOW


@dataclass(eq=False)
class Arena:
    id: int
    kind: ArenaKind
    owner: int
    current_tier: Tier
    bound_tier: Tier | None = None
    resident_pages_fast: int = 0
    resident_pages_slow: int = 0
    next_page: int = 0
    objects: dict[int, ObjectRecord] = field(default_factory=dict)

    @property
    def resident_pages(self) -> int:
        return self.resident_pages_fast + self.resident_pages_slow


@dataclass(frozen=True)
class AllocationEvent:
    object_id: int
    site_id: int
    thread_id: int
    prior_active_bytes: int
    arena: int
    kind: ArenaKind


class ArenaRuntime:
    def __init__(self, cost: CostModel, tiers: TierConfig):
        self.cost = cost
        self.tiers = tiers
        self.page_bytes = cost.page_bytes
        self.threshold = cost.promotion_threshold_bytes
        self.arenas: list[Arena] = []
        self.objects: dict[int, ObjectRecord] = {}
        self.site_bytes: dict[int, int] = {}
        self.site_shared_pages_peak: dict[int, int] = {}
        self.used = {Tier.FAST: 0, Tier.SLOW: 0}
        self.private_fast_pages = 0
        self.peak_pages = 0
        self.allocation_log: list[AllocationEvent] = []
        self._next_object = 1
        self._next_global_page = 0
        self._shared: dict[int, int] = {}
        self._private: dict[int, int] = {}
        self._thread_tier: dict[tuple[int, Tier], int] = {}
        self._freed: set[int] = set()

    # -- capacity ----------------------------------------------------------
    def free_pages(self, tier: Tier) -> float:
        return self.tiers.capacity(tier) - self.used[tier]

    def fits(self, tier: Tier, pages: int) -> bool:
        return self.free_pages(tier) >= pages

    def first_touch_tier(self, pages: int) -> Tier:
        if self.fits(Tier.FAST, pages):
            return Tier.FAST
        if self.fits(Tier.SLOW, pages):
            return Tier.SLOW
        raise CapacityError(f"both tiers exhausted: cannot place {pages} pages")

    # -- arena lookup ------------------------------------------------------
    def _new_arena(self, kind: ArenaKind, owner: int, tier: Tier, bound: Tier | None = None) -> Arena:
        arena = Arena(len(self.arenas), kind, owner, tier, bound)
        self.arenas.append(arena)
        return arena

    def arena(self, arena_id: int) -> Arena:
        if not 0 <= arena_id < len(self.arenas):
            raise ArenaError(f"unknown arena {arena_id}")
        return self.arenas[arena_id]

    def shared_arena(self, site_id: int) -> Arena | None:
        idx = self._shared.get(site_id)
        return None if idx is None else self.arenas[idx]

    def shared_arenas(self) -> list[Arena]:
        return [self.arenas[i] for i in self._shared.values()]

    # -- operations --------------------------------------------------------
    def route(self, thread_id: int, site_id: int, strategy: Strategy) -> ArenaKind:
        if strategy is Strategy.PER_SITE:
            return ArenaKind.SITE_SHARED
        if strategy is Strategy.PER_THREAD_TIER:
            return ArenaKind.THREAD_TIER
        # promotion is judged on bytes live *before* this request
        if self.site_bytes.get(site_id, 0) > self.threshold:
            return ArenaKind.SITE_SHARED
        return ArenaKind.THREAD_PRIVATE

    def allocate(self, thread_id: int, site_id: int, size_bytes: int,
                 strategy: Strategy, placement_tier: Tier | None = None) -> ObjectRecord:
        """Place a new object and map all of its pages.

        ``placement_tier`` of None lets the runtime choose: private arenas
        are pinned fast when room allows, an existing shared arena receives
        pages on its current tier, anything else is first-touch.
        """
        if size_bytes <= 0:
            raise ValueError("size_bytes must be > 0")
        pages = -(-size_bytes // self.page_bytes)
        prior = self.site_bytes.get(site_id, 0)
        kind = self.route(thread_id, site_id, strategy)

        if kind is ArenaKind.SITE_SHARED:
            arena = self.shared_arena(site_id)
            if placement_tier is None:
                if arena is not None and self.fits(arena.current_tier, pages):
                    placement_tier = arena.current_tier
                else:
                    placement_tier = self.first_touch_tier(pages)
            if arena is None:
                arena = self._new_arena(kind, site_id, placement_tier)
                self._shared[site_id] = arena.id
        elif kind is ArenaKind.THREAD_PRIVATE:
            if placement_tier is None:
                placement_tier = self.first_touch_tier(pages)
            idx = self._private.get(thread_id)
            if idx is None:
                arena = self._new_arena(kind, thread_id, Tier.FAST)
                self._private[thread_id] = arena.id
            else:
                arena = self.arenas[idx]
        else:
            if placement_tier is None:
                placement_tier = self.first_touch_tier(pages)
            key = (thread_id, placement_tier)
            idx = self._thread_tier.get(key)
            if idx is None:
                arena = self._new_arena(kind, thread_id, placement_tier, placement_tier)
                self._thread_tier[key] = arena.id
            else:
                arena = self.arenas[idx]

        if not self.fits(placement_tier, pages):
            raise CapacityError(f"{placement_tier.value} tier cannot hold {pages} more pages")

        obj = ObjectRecord(
            object_id=self._next_object,
            site_id=site_id,
            size_bytes=size_bytes,
            arena=arena.id,
            first_page=arena.next_page,
            page_count=pages,
            fast_pages=pages if placement_tier is Tier.FAST else 0,
            shared=kind is ArenaKind.SITE_SHARED,
            base_page=self._next_global_page,
        )
        self._next_object += 1
        self._next_global_page += pages
        arena.next_page += pages
        arena.objects[obj.object_id] = obj
        self.objects[obj.object_id] = obj
        self._add_pages(arena, obj.fast_pages, obj.slow_pages)
        self.site_bytes[site_id] = prior + size_bytes
        if obj.shared:
            peak = self.site_shared_pages_peak.get(site_id, 0)
            if arena.resident_pages > peak:
                self.site_shared_pages_peak[site_id] = arena.resident_pages
        total = self.used[Tier.FAST] + self.used[Tier.SLOW]
        if total > self.peak_pages:
            self.peak_pages = total
        self.allocation_log.append(AllocationEvent(obj.object_id, site_id, thread_id, prior, arena.id, kind))
        return obj

    def free(self, object_id: int) -> int:
        obj = self.objects.pop(object_id, None)
        if obj is None:
            if object_id in self._freed:
                raise ArenaError(f"double free of object {object_id}")
            raise ArenaError(f"unknown object {object_id}")
        self._freed.add(object_id)
        arena = self.arenas[obj.arena]
        del arena.objects[object_id]
        self._add_pages(arena, -obj.fast_pages, -obj.slow_pages)
        self.site_bytes[obj.site_id] -= obj.size_bytes
        return obj.page_count

    def _add_pages(self, arena: Arena, fast: int, slow: int) -> None:
        arena.resident_pages_fast += fast
        arena.resident_pages_slow += slow
        self.used[Tier.FAST] += fast
        self.used[Tier.SLOW] += slow
        if arena.kind is ArenaKind.THREAD_PRIVATE:
            self.private_fast_pages += fast

    def remap_arena(self, arena_id: int, target: Tier, max_pages: int | None = None) -> tuple[int, int]:
        """Move resident pages of an arena onto ``target``.

        Returns ``(moved, shortfall)``: the shortfall counts requested pages
        that did not fit on the target tier.
        """
        arena = self.arena(arena_id)
        off_target = arena.resident_pages_slow if target is Tier.FAST else arena.resident_pages_fast
        wanted = off_target if max_pages is None else min(off_target, max(0, max_pages))
        room = self.free_pages(target)
        budget = int(min(wanted, room))
        moved = 0
        if target is Tier.FAST:
            for obj in arena.objects.values():
                if moved >= budget:
                    break
                step = min(obj.slow_pages, budget - moved)
                obj.fast_pages += step
                moved += step
            self._add_pages(arena, moved, -moved)
        else:
            for obj in reversed(list(arena.objects.values())):
                if moved >= budget:
                    break
                step = min(obj.fast_pages, budget - moved)
                obj.fast_pages -= step
                moved += step
            self._add_pages(arena, -moved, moved)
        if moved or wanted == 0:
            arena.current_tier = target
        return moved, wanted - moved

    def rss_pages(self, arena_id: int) -> tuple[int, int]:
        arena = self.arena(arena_id)
        return arena.resident_pages_fast, arena.resident_pages_slow

    def active_site_bytes(self, site_id: int) -> int:
        return self.site_bytes.get(site_id, 0)

    def live_pages(self) -> int:
        return self.used[Tier.FAST] + self.used[Tier.SLOW]

    def site_pages(self) -> dict[int, tuple[int, int]]:
        """Live (fast, slow) pages per site across every arena."""
        out: dict[int, list[int]] = {}
        for obj in self.objects.values():
            acc = out.setdefault(obj.site_id, [0, 0])
            acc[0] += obj.fast_pages
            acc[1] += obj.slow_pages
        return {site: (f, s) for site, (f, s) in sorted(out.items())}
