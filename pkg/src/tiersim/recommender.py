"""Profile-to-tier heuristics: knapsack, hotset and thermos."""

from __future__ import annotations

import json
import math
from dataclasses import dataclass
from typing import Iterable, NamedTuple

from .model import ConfigError, Tier
from .profiler import ProfileSnapshot

# knapsack weights are bucketed to this many pages per capacity unit
KNAPSACK_UNIT_PAGES = 256


@dataclass(frozen=True)
class SiteItem:
    site_id: int
    value: float
    weight: int


class Placement(NamedTuple):
    tier: Tier
    granted_pages: int | None = None  # None means the whole site

    def fast_pages(self, resident: int) -> int:
        if self.tier is Tier.SLOW:
            return 0
        return resident if self.granted_pages is None else min(resident, self.granted_pages)


TierRecommendation = dict  # site_id -> Placement


def density(item: SiteItem) -> float:
    return item.value / max(item.weight, 1)


def _hot_order(items: Iterable[SiteItem]) -> list[SiteItem]:
    return sorted(items, key=lambda it: (-density(it), -it.value, it.site_id))


def knapsack(items: list[SiteItem], capacity_units: int) -> set[int]:
    """Exact 0/1 knapsack by dynamic programming over integer weights.

    Among optimal subsets the lexicographically smallest list of site ids is
    returned; zero-value items are never selected.
    """
    cands = sorted((it for it in items if it.value > 0), key=lambda it: it.site_id)
    n = len(cands)
    cap = max(0, int(capacity_units))
    # best[i][c]: optimum using cands[i:] within capacity c
    best = [[0] * (cap + 1) for _ in range(n + 1)]
    for i in range(n - 1, -1, -1):
        w, v = cands[i].weight, cands[i].value
        nxt, row = best[i + 1], best[i]
        for c in range(cap + 1):
            keep = nxt[c]
            if w <= c:
                take = v + nxt[c - w]
                if take > keep:
                    keep = take
            row[c] = keep
    chosen: set[int] = set()
    c = cap
    for i, it in enumerate(cands):
        if best[i][c] == 0:
            break
        if it.weight <= c and it.value + best[i + 1][c - it.weight] == best[i][c]:
            chosen.add(it.site_id)
            c -= it.weight
    return chosen


def hotset(items: list[SiteItem], capacity_units: int) -> set[int]:
    """Select by density until the cumulative weight is just past capacity."""
    chosen: set[int] = set()
    total = 0
    for it in _hot_order(items):
        chosen.add(it.site_id)
        total += it.weight
        if total > capacity_units:
            break
    return chosen


def thermos(items: list[SiteItem], capacity_units: int) -> TierRecommendation:
    """Density-ordered packing that never over-provisions the fast tier.

    A site that does not fit is granted the remaining free pages only if its
    pro-rated value over those pages beats the value of admitted sites it
    would push out.  Free pages push nothing out, so once capacity is
    exhausted every later site stays slow.
    """
    recs: TierRecommendation = {}
    remaining = max(0, capacity_units)
    for it in _hot_order(items):
        if it.weight <= remaining:
            recs[it.site_id] = Placement(Tier.FAST)
            remaining -= it.weight
            continue
        prorated = it.value * remaining / it.weight
        displaced = 0.0
        if prorated > displaced:
            recs[it.site_id] = Placement(Tier.FAST, remaining)
            remaining = 0
        else:
            recs[it.site_id] = Placement(Tier.SLOW)
    return recs


def site_items(snapshot: ProfileSnapshot) -> list[SiteItem]:
    return [SiteItem(p.site_id, p.samples * snapshot.sample_period, p.pages) for p in snapshot.sites]


def recommend(snapshot: ProfileSnapshot, heuristic: str, fast_capacity_pages: int) -> TierRecommendation:
    capacity = max(0, fast_capacity_pages - snapshot.reserved_pages)
    items = site_items(snapshot)
    hot = [it for it in items if it.value > 0]
    recs: TierRecommendation = {it.site_id: Placement(Tier.SLOW) for it in items}
    if heuristic == "knapsack":
        units = [SiteItem(it.site_id, it.value, math.ceil(it.weight / KNAPSACK_UNIT_PAGES)) for it in hot]
        for site in knapsack(units, capacity // KNAPSACK_UNIT_PAGES):
            recs[site] = Placement(Tier.FAST)
    elif heuristic == "hotset":
        for site in hotset(hot, capacity):
            recs[site] = Placement(Tier.FAST)
    elif heuristic == "thermos":
        recs.update(thermos(hot, capacity))
    else:
        raise ConfigError(f"unknown heuristic {heuristic!r}; valid: knapsack, hotset, thermos")
    return dict(sorted(recs.items()))


def fast_sites(recs: TierRecommendation) -> set[int]:
    return {site for site, p in recs.items() if p.tier is Tier.FAST and p.granted_pages != 0}


def recs_to_json(recs: TierRecommendation) -> str:
    doc = {
        str(site): {"tier": p.tier.value, "granted_pages": "ALL" if p.granted_pages is None else p.granted_pages}
        for site, p in sorted(recs.items())
    }
    return json.dumps(doc, indent=1)


def recs_from_json(text: str) -> TierRecommendation:
    doc = json.loads(text)
    recs = {}
    for site, entry in doc.items():
        granted = entry.get("granted_pages", "ALL")
        recs[int(site)] = Placement(Tier(entry["tier"]), None if granted == "ALL" else int(granted))
    return dict(sorted(recs.items()))
