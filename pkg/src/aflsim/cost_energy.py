"""Energy accounting for one training round and its money cost.

Communication energy covers uplink transfer of the global model to each
selected owner over OFDMA sub-channels; computation energy covers server-side
aggregation of the selected updates. The round's execution cost is the total
energy priced at `energy_weight` money per joule.

Per-owner energies are converted to money individually (round-half-even into
fixed point) and summed, so the round's charge decomposes exactly across
owners — the same per-owner weights the winner-determination step uses when
it enforces the overall budget.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

from .market_model import DataOwnerProfile, FederationConfig
from .money import to_micros


@dataclass(frozen=True)
class EnergyBreakdown:
    """Energy (joules) and money cost of executing one round's cohort.

    Attributes:
        comm_energy: total uplink communication energy.
        cmp_energy: total aggregation computation energy.
        total: comm_energy + cmp_energy.
        exe_cost: money charge, micro-units (sum of per-owner charges).
        per_owner_comm: communication energy per selected owner.
    """

    comm_energy: float
    cmp_energy: float
    total: float
    exe_cost: int
    per_owner_comm: dict[int, float]


def per_owner_comm_energy(
    owner: DataOwnerProfile, config: FederationConfig, window: int | None = None
) -> float:
    """Uplink energy (joules) to deliver the global model to one owner.

    comm_norm · M / (U · window · W · log2(1 + power·gain/noise)), with every
    sub-channel carrying the same fixed upload window.

    Raises:
        ValueError: when the achievable rate is zero ("unreachable owner").
    """
    if window is None:
        window = config.train_window
    if window <= 0:
        raise ValueError(f"window must be > 0, got {window}")
    snr = owner.uplink_power * owner.channel_gain / config.noise
    rate = (
        config.subchannel_count
        * window
        * config.subchannel_bandwidth
        * math.log2(1.0 + snr)
    )
    if rate <= 0.0:
        raise ValueError(f"unreachable owner {owner.id}: zero uplink rate")
    return config.comm_norm * config.global_model_bits / rate


def round_comm_energy(
    selected: list[DataOwnerProfile], config: FederationConfig
) -> float:
    """Total uplink energy over the selected cohort (empty cohort: 0)."""
    return sum(per_owner_comm_energy(owner, config) for owner in selected)


def aggregation_energy(
    selected: list[DataOwnerProfile], config: FederationConfig
) -> float:
    """Server energy (joules) to aggregate the selected updates.

    Each update of M_n bits costs M_n · cycles_per_update · capacitance ·
    cpu_freq².
    """
    per_bit = config.cycles_per_update * config.capacitance * config.cpu_freq**2
    return sum(owner.update_size_bits * per_bit for owner in selected)


def per_owner_exe_cost(owner: DataOwnerProfile, config: FederationConfig) -> int:
    """Money charge (micro-units) for including one owner in a round's cohort."""
    energy = per_owner_comm_energy(owner, config) + (
        owner.update_size_bits
        * config.cycles_per_update
        * config.capacitance
        * config.cpu_freq**2
    )
    return to_micros(config.energy_weight * energy)


def execution_cost(
    selected: list[DataOwnerProfile], config: FederationConfig
) -> EnergyBreakdown:
    """Full energy breakdown and money cost for a round's cohort."""
    per_owner = {o.id: per_owner_comm_energy(o, config) for o in selected}
    comm = sum(per_owner.values())
    cmp_ = aggregation_energy(selected, config)
    cost = sum(per_owner_exe_cost(o, config) for o in selected)
    return EnergyBreakdown(
        comm_energy=comm,
        cmp_energy=cmp_,
        total=comm + cmp_,
        exe_cost=cost,
        per_owner_comm=per_owner,
    )
