"""Small scenario builders shared across test modules."""

from __future__ import annotations

from aflsim.market_model import (
    DataOwnerProfile,
    FederationConfig,
    MarketConfig,
    OracleConfig,
    Scenario,
    validate_scenario,
)
from aflsim.money import to_micros


def make_fed(
    total: float = 20.0,
    horizon: int = 10,
    thresholds: tuple[float, ...] | None = None,
    value_weight: float = 0.000001,
    energy_weight: float = 0.0,
    **overrides,
) -> FederationConfig:
    """Federation config with harmless defaults; energy cost off unless asked."""
    fields = dict(
        total_budget=to_micros(total),
        horizon=horizon,
        value_weight=to_micros(value_weight),
        reputation_threshold=0.7,
        improvement_thresholds=
        thresholds if thresholds is not None else (0.0,) * horizon,
        energy_weight=energy_weight,
        comm_norm=1.0,
        global_model_bits=10**6,
        subchannel_count=1,
        subchannel_bandwidth=1e6,
        noise=1.0,
        cpu_freq=1e9,
        cycles_per_update=10,
        capacitance=1e-28,
        train_window=1,
        revenue_scale=100.0,
        target_performance=1.0,
    )
    fields.update(overrides)
    return FederationConfig(**fields)


def make_owner(i: int, cost: float, quality: float = 0.5, **overrides) -> DataOwnerProfile:
    fields = dict(
        id=i,
        private_cost=to_micros(cost),
        latent_quality=quality,
        update_size_bits=10**6,
        channel_gain=1.0,
        uplink_power=10.0,
    )
    fields.update(overrides)
    return DataOwnerProfile(**fields)


def make_scenario(
    config: FederationConfig,
    owners: list[DataOwnerProfile],
    oracle: OracleConfig | None = None,
    market: MarketConfig | None = None,
) -> Scenario:
    if oracle is None:
        # quiet, slow-learning, deterministic oracle
        oracle = OracleConfig(xi_max=0.99, gain=0.01, sat=0.1, noise_sd=0.0, initial_perf=0.0)
    if market is None:
        # unit markup: valuations equal private costs exactly
        market = MarketConfig(
            adjust_rate=0.5, markup_low=1.0, markup_high=1.0,
            reputation_discount=1.0, oort_k=2,
        )
    return validate_scenario(config, owners, oracle, market)
