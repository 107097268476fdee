"""Energy model and the joules-to-money execution charge."""

import pytest
from hypothesis import given
from hypothesis import strategies as st

from aflsim.cost_energy import (
    aggregation_energy,
    execution_cost,
    per_owner_comm_energy,
    per_owner_exe_cost,
    round_comm_energy,
)
from helpers import make_fed, make_owner

# one sub-channel at 500 Hz, a 2 s window, SNR 3 → rate term log2(4) = 2,
# so a 2000-bit model costs 2000 / (2·500·2) = 1 J exactly
NARROW = make_fed(
    energy_weight=2.0,
    global_model_bits=2000,
    subchannel_bandwidth=500.0,
    train_window=2,
)
SNR3 = dict(channel_gain=3.0, uplink_power=1.0)


def test_comm_energy_hand_computed():
    owner = make_owner(1, 1.0, **SNR3)
    assert per_owner_comm_energy(owner, NARROW) == pytest.approx(1.0, abs=1e-15)


def test_comm_energy_linear_in_model_size():
    owner = make_owner(1, 1.0, **SNR3)
    double = make_fed(
        energy_weight=2.0, global_model_bits=4000,
        subchannel_bandwidth=500.0, train_window=2,
    )
    assert per_owner_comm_energy(owner, double) == pytest.approx(2.0, abs=1e-15)


def test_longer_window_cuts_energy_proportionally():
    owner = make_owner(1, 1.0, **SNR3)
    assert per_owner_comm_energy(owner, NARROW, window=6) == pytest.approx(1 / 3)


def test_unreachable_owner_is_an_error():
    owner = make_owner(1, 1.0, channel_gain=1e-300, uplink_power=1e-300)
    with pytest.raises(ValueError, match="unreachable owner 1"):
        per_owner_comm_energy(owner, NARROW)
    with pytest.raises(ValueError, match="window"):
        per_owner_comm_energy(make_owner(1, 1.0, **SNR3), NARROW, window=0)


def test_round_comm_energy_is_additive():
    owners = [make_owner(1, 1.0, **SNR3), make_owner(2, 1.0, **SNR3)]
    assert round_comm_energy([], NARROW) == 0.0
    assert round_comm_energy(owners, NARROW) == pytest.approx(2.0, abs=1e-15)


def test_aggregation_energy_powers_of_ten():
    # 10⁶ bits · 10 cycles/bit · 10⁻²⁸ F · (10⁹ Hz)² = 10⁻³ J
    config = make_fed()
    owner = make_owner(1, 1.0)
    assert aggregation_energy([owner], config) == pytest.approx(1e-3, rel=1e-12)
    assert aggregation_energy([], config) == 0.0


def test_execution_cost_breakdown():
    # comm 1 J + aggregation 0.0005 J, priced at 2 money/J → 2.001000
    owner = make_owner(1, 1.0, update_size_bits=500_000, **SNR3)
    breakdown = execution_cost([owner], NARROW)
    assert breakdown.comm_energy == pytest.approx(1.0, abs=1e-15)
    assert breakdown.cmp_energy == pytest.approx(5e-4, rel=1e-12)
    assert breakdown.total == breakdown.comm_energy + breakdown.cmp_energy
    assert breakdown.exe_cost == 2_001_000
    assert breakdown.per_owner_comm == {1: pytest.approx(1.0)}


def test_zero_energy_weight_means_free_execution():
    config = make_fed(energy_weight=0.0)
    owners = [make_owner(i, 1.0) for i in range(5)]
    assert execution_cost(owners, config).exe_cost == 0


def test_exe_cost_is_per_owner_additive():
    config = make_fed(energy_weight=0.724)
    owners = [make_owner(i, 1.0, quality=0.1 * i) for i in range(6)]
    total = execution_cost(owners, config).exe_cost
    assert total == sum(per_owner_exe_cost(o, config) for o in owners)
    first, rest = owners[:2], owners[2:]
    assert (
        execution_cost(first, config).exe_cost + execution_cost(rest, config).exe_cost
        == total
    )


@given(n=st.integers(0, 12))
def test_exe_cost_monotone_in_cohort_size(n):
    config = make_fed(energy_weight=0.5)
    owners = [make_owner(i, 1.0) for i in range(n)]
    costs = [execution_cost(owners[:k], config).exe_cost for k in range(n + 1)]
    assert costs == sorted(costs)
    assert costs[0] == 0


def test_default_market_charge_level():
    # the bundled scenarios price a winner's execution at about 0.21 money
    config = make_fed(energy_weight=0.724)
    assert per_owner_exe_cost(make_owner(0, 0.72), config) == 210_007
