"""Shared vocabulary: tiers, sites, cost constants and simulator configuration."""

from __future__ import annotations

import json
import math
from dataclasses import asdict, dataclass, field, fields, replace
from enum import Enum
from pathlib import Path
from typing import Any


class ConfigError(ValueError):
    """A configuration value violates one of its invariants."""


class CapacityError(RuntimeError):
    """Neither tier can hold a requested set of pages."""


class Tier(str, Enum):
    FAST = "FAST"
    SLOW = "SLOW"

    @property
    def other(self) -> "Tier":
        return Tier.SLOW if self is Tier.FAST else Tier.FAST


@dataclass(frozen=True)
class AllocationSite:
    site_id: int
    context_depth: int = 1

    def __post_init__(self):
        if self.site_id < 1:
            raise ConfigError("site_id must be positive")
        if not 1 <= self.context_depth <= 4:
            raise ConfigError("context_depth must be in [1, 4]")


@dataclass(frozen=True)
class CostModel:
    extra_ns_per_slower_access: float = 300
    ns_per_page_moved: float = 2000
    fast_read_ns: float = 100
    slow_read_ns: float | None = None
    hw_page_fill_ns: float = 1000
    page_bytes: int = 4096
    sample_period: int = 512
    interval_ns: float = 10e9
    promotion_threshold_bytes: int = 4 * 2**20
    decay_factor: float = 1.0
    # bytes credited per access when computing interval bandwidth
    access_bytes: int = 64

    def __post_init__(self):
        if self.slow_read_ns is None:
            object.__setattr__(self, "slow_read_ns", self.fast_read_ns + self.extra_ns_per_slower_access)


UNBOUNDED = None


@dataclass(frozen=True)
class TierConfig:
    fast_capacity_pages: int
    slow_capacity_pages: int | None = UNBOUNDED

    def capacity(self, tier: Tier) -> float:
        if tier is Tier.FAST:
            return self.fast_capacity_pages
        return math.inf if self.slow_capacity_pages is None else self.slow_capacity_pages


def _is_number(x) -> bool:
    return isinstance(x, (int, float)) and not isinstance(x, bool) and math.isfinite(x)


def validate_config(cost: CostModel, tiers: TierConfig) -> tuple[CostModel, TierConfig]:
    """Return the pair unchanged, or raise ConfigError naming the first broken invariant."""
    for name in ("extra_ns_per_slower_access", "ns_per_page_moved", "fast_read_ns",
                 "slow_read_ns", "hw_page_fill_ns"):
        value = getattr(cost, name)
        if not _is_number(value) or value <= 0:
            raise ConfigError(f"{name} must be > 0")
    pb = cost.page_bytes
    if not isinstance(pb, int) or isinstance(pb, bool) or pb <= 0 or pb & (pb - 1):
        raise ConfigError("page_bytes must be a power of two")
    if not isinstance(cost.sample_period, int) or isinstance(cost.sample_period, bool) or cost.sample_period < 1:
        raise ConfigError("sample_period must be ≥ 1")
    if not _is_number(cost.interval_ns) or cost.interval_ns <= 0:
        raise ConfigError("interval_ns must be > 0")
    if not _is_number(cost.promotion_threshold_bytes) or cost.promotion_threshold_bytes < 0:
        raise ConfigError("promotion_threshold_bytes must be ≥ 0")
    if not _is_number(cost.decay_factor) or not 0 <= cost.decay_factor <= 1:
        raise ConfigError("decay_factor must be in [0, 1]")
    if not isinstance(cost.access_bytes, int) or cost.access_bytes < 1:
        raise ConfigError("access_bytes must be ≥ 1")
    if not isinstance(tiers.fast_capacity_pages, int) or tiers.fast_capacity_pages < 0:
        raise ConfigError("fast_capacity_pages must be ≥ 0")
    if tiers.slow_capacity_pages is not None and (
        not isinstance(tiers.slow_capacity_pages, int) or tiers.slow_capacity_pages < 0
    ):
        raise ConfigError("slow_capacity_pages must be ≥ 0")
    return cost, tiers


POLICIES = ("first-touch", "offline", "online", "hw-cache")
HEURISTICS = ("knapsack", "hotset", "thermos")
SAMPLING_MODES = ("site", "global", "random")


@dataclass(frozen=True)
class SimConfig:
    """Everything one simulation run needs besides the trace itself.

    The fast tier is sized either in pages or as a percentage of the
    trace's peak resident set (resolved by the driver).
    """

    cost: CostModel = field(default_factory=CostModel)
    fast_capacity_pages: int | None = None
    fast_capacity_pct: float | None = None
    slow_capacity_pages: int | None = UNBOUNDED
    policy: str = "first-touch"
    heuristic: str = "thermos"
    seed: int = 0
    trace_path: str | None = None
    output_prefix: str | None = None
    sampling: str = "site"
    reads_only: bool = False

    def validate(self) -> "SimConfig":
        if self.policy not in POLICIES:
            raise ConfigError(f"unknown policy {self.policy!r}; valid: {', '.join(POLICIES)}")
        if self.heuristic not in HEURISTICS:
            raise ConfigError(f"unknown heuristic {self.heuristic!r}; valid: {', '.join(HEURISTICS)}")
        if self.sampling not in SAMPLING_MODES:
            raise ConfigError(f"unknown sampling mode {self.sampling!r}; valid: {', '.join(SAMPLING_MODES)}")
        if self.fast_capacity_pages is None and self.fast_capacity_pct is None:
            raise ConfigError("tier_config needs fast_capacity_pages or fast_capacity_pct")
        if self.fast_capacity_pct is not None and (
            not _is_number(self.fast_capacity_pct) or self.fast_capacity_pct < 0
        ):
            raise ConfigError("fast_capacity_pct must be ≥ 0")
        validate_config(self.cost, TierConfig(self.fast_capacity_pages or 0, self.slow_capacity_pages))
        return self

    def with_overrides(self, **changes) -> "SimConfig":
        cost_changes = {k: changes.pop(k) for k in list(changes) if k in _COST_FIELDS}
        cfg = replace(self, **changes)
        if cost_changes:
            cfg = replace(cfg, cost=replace(cfg.cost, **cost_changes))
        return cfg

    def tier_config(self, peak_rss_pages: int | None = None) -> TierConfig:
        if self.fast_capacity_pages is not None:
            fast = self.fast_capacity_pages
        else:
            if peak_rss_pages is None:
                raise ConfigError("fast_capacity_pct needs the trace's peak RSS")
            fast = int(math.floor(self.fast_capacity_pct / 100 * peak_rss_pages))
        return TierConfig(fast, self.slow_capacity_pages)

    def to_dict(self) -> dict[str, Any]:
        cost = asdict(self.cost)
        tier = {"slow_capacity_pages": self.slow_capacity_pages}
        if self.fast_capacity_pages is not None:
            tier["fast_capacity_pages"] = self.fast_capacity_pages
        if self.fast_capacity_pct is not None:
            tier["fast_capacity_pct"] = self.fast_capacity_pct
        return {
            "cost_model": cost,
            "tier_config": tier,
            "policy": self.policy,
            "heuristic": self.heuristic,
            "seed": self.seed,
            "trace_path": self.trace_path,
            "output_prefix": self.output_prefix,
            "profiler": {"sampling": self.sampling, "reads_only": self.reads_only},
        }


_COST_FIELDS = {f.name for f in fields(CostModel)}
_TOP_KEYS = {"cost_model", "tier_config", "policy", "heuristic", "seed", "trace_path",
             "output_prefix", "profiler"}
_TIER_KEYS = {"fast_capacity_pages", "fast_capacity_pct", "slow_capacity_pages"}
_PROFILER_KEYS = {"sampling", "reads_only"}


def _check_keys(section: str, given: dict, allowed: set[str]) -> None:
    if not isinstance(given, dict):
        raise ConfigError(f"{section} must be an object")
    unknown = sorted(set(given) - allowed)
    if unknown:
        raise ConfigError(f"unknown key(s) in {section}: {', '.join(unknown)}")


def config_from_dict(data: dict[str, Any]) -> SimConfig:
    _check_keys("config", data, _TOP_KEYS)
    cost_data = data.get("cost_model", {})
    _check_keys("cost_model", cost_data, _COST_FIELDS)
    tier_data = data.get("tier_config", {})
    _check_keys("tier_config", tier_data, _TIER_KEYS)
    prof_data = data.get("profiler", {})
    _check_keys("profiler", prof_data, _PROFILER_KEYS)
    try:
        cost = CostModel(**cost_data)
    except TypeError as exc:
        raise ConfigError(str(exc)) from None
    cfg = SimConfig(
        cost=cost,
        fast_capacity_pages=tier_data.get("fast_capacity_pages"),
        fast_capacity_pct=tier_data.get("fast_capacity_pct"),
        slow_capacity_pages=tier_data.get("slow_capacity_pages"),
        policy=data.get("policy", "first-touch"),
        heuristic=data.get("heuristic", "thermos"),
        seed=data.get("seed", 0),
        trace_path=data.get("trace_path"),
        output_prefix=data.get("output_prefix"),
        sampling=prof_data.get("sampling", "site"),
        reads_only=prof_data.get("reads_only", False),
    )
    return cfg


def load_config(path: str | Path) -> SimConfig:
    path = Path(path)
    try:
        text = path.read_text()
    except OSError as exc:
        raise ConfigError(f"cannot read config {path}: {exc.strerror}") from None
    try:
        data = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ConfigError(f"{path}: invalid JSON ({exc})") from None
    return config_from_dict(data)
