"""Shared domain types and scenario configuration for the marketplace.

A scenario bundles an immutable federation configuration, the fixed candidate
set of data owners, the surrogate-training oracle parameters, and the bidding
dynamics. Scenarios are validated once and never mutated afterwards, so they
are safe to share across replications.

All money-typed fields are stored as fixed-point micro-units (see
:mod:`aflsim.money`); scenario files carry plain decimal currency amounts.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any

from .money import format_money, to_micros


class ScenarioError(ValueError):
    """Raised when a scenario violates its type invariants.

    Collects every violation found, not just the first.
    """

    def __init__(self, problems: list[str]):
        self.problems = problems
        super().__init__("invalid scenario:\n  " + "\n  ".join(problems))


@dataclass(frozen=True)
class DataOwnerProfile:
    """A bidder: private participation cost, hidden skill, and channel parameters.

    Attributes:
        id: unique integer identity within a scenario.
        private_cost: per-round cost of participating, micro-units.
        latent_quality: skill in [0, 1]; hidden from the federation, drives
            the surrogate training oracle.
        update_size_bits: size of one local model update in bits.
        channel_gain: uplink channel gain.
        uplink_power: uplink transmit power.
    """

    id: int
    private_cost: int
    latent_quality: float
    update_size_bits: int
    channel_gain: float
    uplink_power: float


@dataclass(frozen=True)
class FederationConfig:
    """Immutable per-run configuration of the hiring federation.

    Attributes:
        total_budget: overall hiring budget for the whole run, micro-units.
        horizon: number of rounds T.
        value_weight: utility-emphasis weight V of the hiring controller,
            micro-units (it is subtracted from money quantities).
        reputation_threshold: score needed to count as reputable, in (0, 1).
        improvement_thresholds: per-round improvement targets, length `horizon`.
        energy_weight: money charged per joule of execution energy.
        comm_norm: normalization constant of the uplink energy model.
        global_model_bits: size of the global model in bits.
        subchannel_count: number of orthogonal uplink sub-channels.
        subchannel_bandwidth: bandwidth per sub-channel, Hz.
        noise: channel noise power.
        cpu_freq: aggregation-server CPU frequency, Hz.
        cycles_per_update: CPU cycles needed per update bit.
        capacitance: effective load capacitance of the aggregation server.
        train_window: seconds of each round spent training/uploading.
        revenue_scale: money earned per unit of model performance.
        target_performance: performance level at which the task completes early.
    """

    total_budget: int
    horizon: int
    value_weight: int
    reputation_threshold: float
    improvement_thresholds: tuple[float, ...]
    energy_weight: float
    comm_norm: float
    global_model_bits: int
    subchannel_count: int
    subchannel_bandwidth: float
    noise: float
    cpu_freq: float
    cycles_per_update: int
    capacitance: float
    train_window: int
    revenue_scale: float
    target_performance: float


@dataclass(frozen=True)
class OracleConfig:
    """Parameters of the surrogate training oracle (see :mod:`aflsim.surrogate_fl`)."""

    xi_max: float = 0.99
    gain: float = 0.05
    sat: float = 0.5
    noise_sd: float = 0.003
    initial_perf: float = 0.0


@dataclass(frozen=True)
class MarketConfig:
    """Marketplace dynamics outside the federation's own ledger.

    Initial valuations are drawn as `private_cost * Uniform(markup_low,
    markup_high)`; losers then walk their valuation toward the announced
    winning bid at rate `adjust_rate`. `reputation_discount` is the
    per-round freshness discount of the feedback ledger, and `oort_k` the
    cohort size of the bandit baseline.
    """

    adjust_rate: float = 0.5
    markup_low: float = 1.0
    markup_high: float = 1.03
    reputation_discount: float = 1.0
    oort_k: int = 6


@dataclass(frozen=True)
class Scenario:
    """A validated, immutable experiment configuration."""

    federation: FederationConfig
    owners: tuple[DataOwnerProfile, ...]
    oracle: OracleConfig = field(default_factory=OracleConfig)
    market: MarketConfig = field(default_factory=MarketConfig)


@dataclass
class RoundBidBook:
    """Per-round bid vector plus the selection and settlement outcome.

    `winning_bid` is the announced marginal price: the maximum paid bid among
    winners, or None when the round had no winners.
    """

    round: int
    bids: dict[int, int] = field(default_factory=dict)
    winners: list[int] = field(default_factory=list)
    payments: dict[int, int] = field(default_factory=dict)
    winning_bid: int | None = None


def validate_scenario(
    config: FederationConfig,
    owners: list[DataOwnerProfile],
    oracle: OracleConfig | None = None,
    market: MarketConfig | None = None,
) -> Scenario:
    """Check every type invariant and return the immutable scenario.

    Raises:
        ScenarioError: listing all violations found.
    """
    problems: list[str] = []
    if config.total_budget <= 0:
        problems.append("total_budget must be > 0")
    if config.horizon < 1:
        problems.append("horizon must be ≥ 1")
    if not (0.0 < config.reputation_threshold < 1.0):
        problems.append("reputation_threshold must be in (0, 1)")
    if config.value_weight <= 0:
        problems.append("value_weight must be > 0")
    if len(config.improvement_thresholds) != config.horizon:
        problems.append(
            f"improvement_thresholds has {len(config.improvement_thresholds)} "
            f"entries, expected horizon={config.horizon}"
        )
    if any(thr < 0 for thr in config.improvement_thresholds):
        problems.append("improvement_thresholds entries must be ≥ 0")
    if config.energy_weight < 0:
        problems.append("energy_weight must be ≥ 0")
    for name in ("comm_norm", "subchannel_bandwidth", "cpu_freq"):
        if getattr(config, name) <= 0:
            problems.append(f"{name} must be > 0")
    if config.global_model_bits <= 0:
        problems.append("global_model_bits must be > 0")
    if config.subchannel_count < 1:
        problems.append("subchannel_count must be ≥ 1")
    if config.noise <= 0:
        problems.append("noise must be > 0")
    if config.cycles_per_update <= 0:
        problems.append("cycles_per_update must be > 0")
    if config.capacitance < 0:
        problems.append("capacitance must be ≥ 0")
    if config.train_window <= 0:
        problems.append("train_window must be > 0")
    if not (0.0 < config.target_performance <= 1.0):
        problems.append("target_performance must be in (0, 1]")

    seen: set[int] = set()
    for owner in owners:
        if owner.id in seen:
            problems.append(f"duplicate owner id {owner.id}")
        seen.add(owner.id)
        if owner.private_cost < 0:
            problems.append(f"owner {owner.id}: private_cost must be ≥ 0")
        if not (0.0 <= owner.latent_quality <= 1.0):
            problems.append(f"owner {owner.id}: latent_quality must be in [0, 1]")
        if owner.update_size_bits <= 0:
            problems.append(f"owner {owner.id}: update_size_bits must be > 0")
        if owner.channel_gain <= 0:
            problems.append(f"owner {owner.id}: channel_gain must be > 0")
        if owner.uplink_power <= 0:
            problems.append(f"owner {owner.id}: uplink_power must be > 0")

    oracle = oracle if oracle is not None else OracleConfig()
    if not (0.0 < oracle.xi_max <= 1.0):
        problems.append("oracle.xi_max must be in (0, 1]")
    if oracle.gain <= 0:
        problems.append("oracle.gain must be > 0")
    if oracle.sat <= 0:
        problems.append("oracle.sat must be > 0")
    if oracle.noise_sd < 0:
        problems.append("oracle.noise_sd must be ≥ 0")
    if not (0.0 <= oracle.initial_perf <= oracle.xi_max):
        problems.append("oracle.initial_perf must be in [0, xi_max]")

    market = market if market is not None else MarketConfig()
    if not (0.0 <= market.adjust_rate <= 1.0):
        problems.append("market.adjust_rate must be in [0, 1]")
    if not (1.0 <= market.markup_low <= market.markup_high):
        problems.append("market markups must satisfy 1 ≤ markup_low ≤ markup_high")
    if not (0.0 < market.reputation_discount <= 1.0):
        problems.append("market.reputation_discount must be in (0, 1]")
    if market.oort_k < 1:
        problems.append("market.oort_k must be ≥ 1")

    if problems:
        raise ScenarioError(problems)
    return Scenario(
        federation=config,
        owners=tuple(sorted(owners, key=lambda o: o.id)),
        oracle=oracle,
        market=market,
    )


def base_round_budget(config: FederationConfig) -> int:
    """Per-round base budget: total budget split evenly, rounded down."""
    return config.total_budget // config.horizon


def base_budget_schedule(config: FederationConfig) -> tuple[int, ...]:
    """Per-round base budgets whose sum is exactly the total budget.

    Even division rounds down in fixed point; the remainder is added to the
    final round so no budget is created or destroyed.
    """
    base = config.total_budget // config.horizon
    remainder = config.total_budget - base * config.horizon
    schedule = [base] * config.horizon
    schedule[-1] += remainder
    return tuple(schedule)


# --- scenario (de)serialization -------------------------------------------

_MONEY_FIELDS_FED = {"total_budget", "value_weight"}
_MONEY_FIELDS_OWNER = {"private_cost"}

_FED_FIELDS = {
    "total_budget", "horizon", "value_weight", "reputation_threshold",
    "improvement_thresholds", "energy_weight", "comm_norm",
    "global_model_bits", "subchannel_count", "subchannel_bandwidth", "noise",
    "cpu_freq", "cycles_per_update", "capacitance", "train_window",
    "revenue_scale", "target_performance",
}
_OWNER_FIELDS = {
    "id", "private_cost", "latent_quality", "update_size_bits",
    "channel_gain", "uplink_power",
}
_ORACLE_FIELDS = {"xi_max", "gain", "sat", "noise_sd", "initial_perf"}
_MARKET_FIELDS = {
    "adjust_rate", "markup_low", "markup_high", "reputation_discount", "oort_k",
}


def _check_keys(section: str, given: dict[str, Any], allowed: set[str], required: set[str]) -> None:
    unknown = set(given) - allowed
    if unknown:
        raise ScenarioError([f"unknown key(s) in {section}: {sorted(unknown)}"])
    missing = required - set(given)
    if missing:
        raise ScenarioError([f"missing key(s) in {section}: {sorted(missing)}"])


def scenario_from_dict(doc: dict[str, Any]) -> Scenario:
    """Build and validate a scenario from a parsed JSON document.

    Unknown keys anywhere are a hard error so config typos cannot silently
    fall back to defaults.
    """
    _check_keys("scenario", doc, {"federation", "owners", "oracle", "market"},
                {"federation", "owners"})
    fed_doc = dict(doc["federation"])
    _check_keys("federation", fed_doc, _FED_FIELDS, _FED_FIELDS)
    for key in _MONEY_FIELDS_FED:
        fed_doc[key] = to_micros(fed_doc[key])
    fed_doc["improvement_thresholds"] = tuple(float(x) for x in fed_doc["improvement_thresholds"])
    config = FederationConfig(**fed_doc)

    owners = []
    for owner_doc in doc["owners"]:
        owner_doc = dict(owner_doc)
        _check_keys(f"owner {owner_doc.get('id', '?')}", owner_doc, _OWNER_FIELDS, _OWNER_FIELDS)
        for key in _MONEY_FIELDS_OWNER:
            owner_doc[key] = to_micros(owner_doc[key])
        owners.append(DataOwnerProfile(**owner_doc))

    oracle = None
    if "oracle" in doc:
        oracle_doc = dict(doc["oracle"])
        _check_keys("oracle", oracle_doc, _ORACLE_FIELDS, set())
        oracle = OracleConfig(**oracle_doc)

    market = None
    if "market" in doc:
        market_doc = dict(doc["market"])
        _check_keys("market", market_doc, _MARKET_FIELDS, set())
        market = MarketConfig(**market_doc)

    return validate_scenario(config, owners, oracle, market)


def scenario_to_dict(scenario: Scenario) -> dict[str, Any]:
    """Serialize a scenario to a JSON-ready document (round-trip identity)."""
    fed = scenario.federation
    fed_doc: dict[str, Any] = {
        "total_budget": format_money(fed.total_budget),
        "horizon": fed.horizon,
        "value_weight": format_money(fed.value_weight),
        "reputation_threshold": fed.reputation_threshold,
        "improvement_thresholds": list(fed.improvement_thresholds),
        "energy_weight": fed.energy_weight,
        "comm_norm": fed.comm_norm,
        "global_model_bits": fed.global_model_bits,
        "subchannel_count": fed.subchannel_count,
        "subchannel_bandwidth": fed.subchannel_bandwidth,
        "noise": fed.noise,
        "cpu_freq": fed.cpu_freq,
        "cycles_per_update": fed.cycles_per_update,
        "capacitance": fed.capacitance,
        "train_window": fed.train_window,
        "revenue_scale": fed.revenue_scale,
        "target_performance": fed.target_performance,
    }
    owners_doc = [
        {
            "id": o.id,
            "private_cost": format_money(o.private_cost),
            "latent_quality": o.latent_quality,
            "update_size_bits": o.update_size_bits,
            "channel_gain": o.channel_gain,
            "uplink_power": o.uplink_power,
        }
        for o in scenario.owners
    ]
    orc = scenario.oracle
    mkt = scenario.market
    return {
        "federation": fed_doc,
        "owners": owners_doc,
        "oracle": {
            "xi_max": orc.xi_max,
            "gain": orc.gain,
            "sat": orc.sat,
            "noise_sd": orc.noise_sd,
            "initial_perf": orc.initial_perf,
        },
        "market": {
            "adjust_rate": mkt.adjust_rate,
            "markup_low": mkt.markup_low,
            "markup_high": mkt.markup_high,
            "reputation_discount": mkt.reputation_discount,
            "oort_k": mkt.oort_k,
        },
    }


def load_scenario(path: str | Path) -> Scenario:
    """Load and validate a scenario JSON file."""
    with open(path, encoding="utf-8") as fh:
        return scenario_from_dict(json.load(fh))


def save_scenario(scenario: Scenario, path: str | Path) -> None:
    """Write a scenario as pretty-printed JSON."""
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(scenario_to_dict(scenario), fh, indent=2)
        fh.write("\n")
