"""Guided data tiering simulator for two-tier heterogeneous memory."""

from .arenas import ArenaKind, ArenaRuntime, Strategy
from .driver import RunResult, measure_peak_rss, run, run_all_fast, run_offline_pair
from .engine import MigrationDecision, TieringEngine, get_purchase_cost, get_rental_cost
from .model import CostModel, SimConfig, Tier, TierConfig, validate_config
from .profiler import AccessProfiler, ProfileSnapshot, SiteProfile
from .recommender import Placement, SiteItem, hotset, knapsack, recommend, thermos
from .trace import WorkloadSpec, generate_workload, parse_trace

__all__ = [
    "AccessProfiler", "ArenaKind", "ArenaRuntime", "CostModel", "MigrationDecision", "Placement",
    "ProfileSnapshot", "RunResult", "SimConfig", "SiteItem", "SiteProfile", "Strategy", "Tier",
    "TierConfig", "TieringEngine", "WorkloadSpec", "generate_workload", "get_purchase_cost",
    "get_rental_cost", "hotset", "knapsack", "measure_peak_rss", "parse_trace", "recommend", "run",
    "run_all_fast", "run_offline_pair", "thermos", "validate_config",
]
