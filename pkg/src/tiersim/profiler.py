"""Sampled access profiling of shared arenas, keyed by allocation site."""

from __future__ import annotations

import json
import math
import random
from dataclasses import dataclass

from .arenas import ArenaRuntime, ObjectRecord
from .model import Tier


@dataclass(frozen=True)
class SiteProfile:
    site_id: int
    tier: Tier
    samples: int
    pages: int


@dataclass(frozen=True)
class ProfileSnapshot:
    sites: tuple[SiteProfile, ...]
    sample_period: int
    snapshot_time: float = 0
    # fast pages held by thread-private arenas, reserved off the fast tier
    reserved_pages: int = 0

    def to_json(self) -> str:
        doc = {
            "sample_period": self.sample_period,
            "snapshot_time": self.snapshot_time,
            "reserved_pages": self.reserved_pages,
            "sites": [
                {"site": p.site_id, "tier": p.tier.value, "samples": p.samples, "pages": p.pages}
                for p in self.sites
            ],
        }
        return json.dumps(doc, indent=1, sort_keys=True)

    @classmethod
    def from_json(cls, text: str) -> "ProfileSnapshot":
        doc = json.loads(text)
        sites = tuple(
            SiteProfile(int(e["site"]), Tier(e["tier"]), int(e["samples"]), int(e["pages"]))
            for e in doc["sites"]
        )
        return cls(sites, int(doc["sample_period"]), doc.get("snapshot_time", 0), int(doc.get("reserved_pages", 0)))


def estimated_accesses(profile: SiteProfile, sample_period: int) -> int:
    return profile.samples * sample_period


class AccessProfiler:
    """Emulates sampled profiling of last-level-cache misses.

    ``mode`` selects the sampling stride:

    * ``site``   -- every ``sample_period``-th shared-arena access of each site
    * ``global`` -- every ``sample_period``-th access of the whole program
    * ``random`` -- each access sampled with probability ``1/sample_period``

    Accesses to thread-private arenas are never attributed to a site.
    """

    def __init__(self, runtime: ArenaRuntime, sample_period: int, mode: str = "site",
                 reads_only: bool = False, seed: int = 0):
        if sample_period < 1:
            raise ValueError("sample_period must be ≥ 1")
        if mode not in ("site", "global", "random"):
            raise ValueError(f"unknown sampling mode {mode!r}")
        self.runtime = runtime
        self.sample_period = sample_period
        self.mode = mode
        self.reads_only = reads_only
        self.samples: dict[int, int] = {}
        self.true_accesses: dict[int, int] = {}
        self.counter = 0
        self._site_counter: dict[int, int] = {}
        self._rng = random.Random(seed)

    def record_access(self, obj: ObjectRecord, is_write: bool = False) -> bool:
        if self.reads_only and is_write:
            return False
        site = obj.site_id
        if obj.shared:
            self.true_accesses[site] = self.true_accesses.get(site, 0) + 1
        if self.mode == "site":
            if not obj.shared:
                return False
            n = self._site_counter.get(site, 0) + 1
            self._site_counter[site] = n
            hit = n % self.sample_period == 0
        elif self.mode == "global":
            self.counter += 1
            hit = obj.shared and self.counter % self.sample_period == 0
        else:
            hit = obj.shared and self._rng.random() * self.sample_period < 1
        if hit:
            self.samples[site] = self.samples.get(site, 0) + 1
        return hit

    def estimated_accesses(self, profile: SiteProfile) -> int:
        return estimated_accesses(profile, self.sample_period)

    def snapshot_profile(self, now: float = 0, pages: str = "live") -> ProfileSnapshot:
        """Copy the per-site profile of every shared arena.

        ``pages="peak"`` reports each site's peak shared-arena footprint
        instead of its live one (used for whole-run offline profiles).
        """
        runtime = self.runtime
        entries = []
        for arena in sorted(runtime.shared_arenas(), key=lambda a: a.owner):
            site = arena.owner
            n_pages = arena.resident_pages
            if pages == "peak":
                n_pages = runtime.site_shared_pages_peak.get(site, n_pages)
            entries.append(SiteProfile(site, arena.current_tier, self.samples.get(site, 0), n_pages))
        return ProfileSnapshot(tuple(entries), self.sample_period, now, runtime.private_fast_pages)

    def reweight_profile(self, factor: float) -> None:
        if not (0 <= factor <= 1) or math.isnan(factor):
            raise ValueError("reweight factor must be in [0, 1]")
        if factor == 1:
            return
        for site, n in self.samples.items():
            self.samples[site] = math.floor(n * factor)
