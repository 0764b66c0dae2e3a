import json

import pytest

from tiersim.model import (
    AllocationSite, ConfigError, CostModel, SimConfig, Tier, TierConfig, config_from_dict,
    load_config, validate_config,
)


def test_defaults_match_platform_constants():
    cost = CostModel()
    assert cost.extra_ns_per_slower_access == 300
    assert cost.ns_per_page_moved == 2000
    assert cost.page_bytes == 4096
    assert cost.interval_ns == 10e9
    assert cost.sample_period == 512
    assert cost.promotion_threshold_bytes == 4 * 2**20
    assert cost.decay_factor == 1
    assert cost.slow_read_ns == cost.fast_read_ns + 300


def test_defaults_validate():
    cost, tiers = CostModel(), TierConfig(100)
    assert validate_config(cost, tiers) == (cost, tiers)


@pytest.mark.parametrize("change, message", [
    ({"sample_period": 0}, "sample_period must be ≥ 1"),
    ({"page_bytes": 3000}, "page_bytes must be a power of two"),
    ({"interval_ns": 0}, "interval_ns must be > 0"),
    ({"decay_factor": 1.5}, "decay_factor must be in [0, 1]"),
    ({"fast_read_ns": -1}, "fast_read_ns must be > 0"),
])
def test_invariant_violations_are_named(change, message):
    with pytest.raises(ConfigError, match=message.replace("[", r"\[").replace("]", r"\]")):
        validate_config(CostModel(**change), TierConfig(10))


def test_negative_capacity_rejected():
    with pytest.raises(ConfigError, match="fast_capacity_pages"):
        validate_config(CostModel(), TierConfig(-1))
    with pytest.raises(ConfigError, match="slow_capacity_pages"):
        validate_config(CostModel(), TierConfig(1, -5))


def test_tier_other():
    assert Tier.FAST.other is Tier.SLOW and Tier.SLOW.other is Tier.FAST
    assert Tier.FAST != Tier.SLOW


def test_allocation_site_bounds():
    AllocationSite(3, 4)
    with pytest.raises(ConfigError):
        AllocationSite(0)
    with pytest.raises(ConfigError):
        AllocationSite(1, 5)


def test_unknown_keys_rejected():
    with pytest.raises(ConfigError, match="polcy"):
        config_from_dict({"polcy": "online"})
    with pytest.raises(ConfigError, match="cost_model.*sample_perod"):
        config_from_dict({"cost_model": {"sample_perod": 4}})


def test_config_round_trip(tmp_path):
    cfg = SimConfig(cost=CostModel(interval_ns=1e6), fast_capacity_pct=20, policy="online",
                    heuristic="hotset", seed=3, trace_path="t.txt", output_prefix="out")
    path = tmp_path / "c.json"
    path.write_text(json.dumps(cfg.to_dict()))
    assert load_config(path) == cfg


def test_validate_lists_valid_names():
    with pytest.raises(ConfigError, match="knapsack, hotset, thermos"):
        SimConfig(fast_capacity_pages=1, heuristic="greedy").validate()
    with pytest.raises(ConfigError, match="fast_capacity"):
        SimConfig().validate()


def test_pct_resolution():
    cfg = SimConfig(fast_capacity_pct=20)
    assert cfg.tier_config(1000).fast_capacity_pages == 200
    assert cfg.tier_config(999).fast_capacity_pages == 199


def test_overrides_reach_cost_model():
    cfg = SimConfig(fast_capacity_pages=1).with_overrides(sample_period=8, policy="online")
    assert cfg.cost.sample_period == 8 and cfg.policy == "online"
