"""One reverse-auction round: bidding, winner determination, settlement.

Winners are the lowest bidders that fit under the round's hiring cap
(ties broken by ascending owner id), optionally restricted to owners passing
a reputation filter and jointly capped so hiring plus execution charges stay
within the remaining budget. Settlement is pay-as-bid; the announced
"winning bid" is the highest accepted bid — the marginal price losers react
to when they adjust their asking prices for the next round.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable, Iterable

import numpy as np

from .market_model import DataOwnerProfile, RoundBidBook
from .selection import budget_prefix

#: payment rules understood by settle(); "uniform_winning_bid" (every winner
#: paid the announced marginal price) exists only so the truthfulness audit
#: can prove it would catch a broken mechanism.
PAYMENT_RULES = ("pay_as_bid", "uniform_winning_bid")


@dataclass
class BidderAgent:
    """A data owner acting as a bidder.

    `valuation` is the current asking price, never below `profile.private_cost`
    (a rational seller does not ask less than cost). Truthful agents bid
    exactly their valuation; `bid_override` lets the truthfulness audit probe
    a single unilateral deviation.
    """

    profile: DataOwnerProfile
    valuation: int
    adjust_rate: float
    bid_override: int | None = None

    def current_bid(self) -> int:
        return self.bid_override if self.bid_override is not None else self.valuation


@dataclass(frozen=True)
class SelectionOutcome:
    """Result of winner determination for one round.

    Attributes:
        winners: owner ids in admission order (ascending bid, then id).
        spend: sum of winning bids, micro-units; never exceeds the cap.
        rejected: (owner id, reason) pairs; reason is "filtered" for owners
            failing the eligibility predicate, "over_cap" otherwise.
    """

    winners: tuple[int, ...]
    spend: int
    rejected: tuple[tuple[int, str], ...] = field(default_factory=tuple)


def collect_bids(agents: Iterable[BidderAgent], round: int) -> RoundBidBook:
    """Open a round's bid book from every agent's current bid."""
    return RoundBidBook(round=round, bids={a.profile.id: a.current_bid() for a in agents})


def select_lowest_within_budget(
    book: RoundBidBook,
    cap: int,
    eligible: Callable[[int], bool] | None = None,
    exe_costs: dict[int, int] | None = None,
    total_cap: int | None = None,
    backend: str | None = None,
) -> SelectionOutcome:
    """Admit the cheapest eligible bidders that fit under the caps.

    Bidders passing the filter are considered in ascending (bid, id) order
    and admitted while the cumulative bid sum stays within `cap` and — when
    `exe_costs`/`total_cap` are given — the cumulative bid+execution sum
    stays within `total_cap`. A cap of 0 yields an empty outcome.

    Args:
        book: the round's bids.
        cap: hiring cap on the sum of winning bids, micro-units.
        eligible: optional predicate on owner id; failures are rejected as
            "filtered" and never considered.
        exe_costs: per-owner execution charge incurred by admitting them.
        total_cap: cap on hiring plus execution spend combined.
        backend: selection backend override (see :mod:`aflsim.selection`).
    """
    candidate_ids = []
    filtered = []
    for owner_id in book.bids:
        if eligible is None or eligible(owner_id):
            candidate_ids.append(owner_id)
        else:
            filtered.append((owner_id, "filtered"))

    if not candidate_ids:
        return SelectionOutcome(winners=(), spend=0, rejected=tuple(filtered))

    ids = np.array(candidate_ids, dtype=np.int64)
    bids = np.array([book.bids[i] for i in candidate_ids], dtype=np.int64)
    if exe_costs is None:
        exe = None
    else:
        exe = np.array([exe_costs[i] for i in candidate_ids], dtype=np.int64)
    positions = budget_prefix(bids, ids, exe, cap, total_cap, backend=backend)

    winners = tuple(int(ids[p]) for p in positions)
    spend = int(bids[positions].sum()) if positions.size else 0
    winner_set = set(winners)
    rejected = filtered + [
        (owner_id, "over_cap") for owner_id in candidate_ids if owner_id not in winner_set
    ]
    return SelectionOutcome(winners=winners, spend=spend, rejected=tuple(rejected))


def settle(
    book: RoundBidBook,
    outcome: SelectionOutcome,
    payment_rule: str = "pay_as_bid",
) -> RoundBidBook:
    """Record winners and payments in the book and announce the marginal price.

    Pay-as-bid: each winner is paid exactly its bid. The announced
    winning_bid is the maximum payment among winners (None when no winners).

    Raises:
        ValueError: on double settlement or an unknown payment rule.
    """
    if book.payments or book.winners:
        raise ValueError(f"round {book.round} already settled")
    if payment_rule not in PAYMENT_RULES:
        raise ValueError(f"unknown payment rule {payment_rule!r}")
    book.winners = list(outcome.winners)
    if outcome.winners:
        marginal = max(book.bids[w] for w in outcome.winners)
        if payment_rule == "pay_as_bid":
            book.payments = {w: book.bids[w] for w in outcome.winners}
        else:
            book.payments = {w: marginal for w in outcome.winners}
        book.winning_bid = marginal
    return book


def winner_utilities(
    book: RoundBidBook, profiles: dict[int, DataOwnerProfile]
) -> dict[int, int]:
    """Realized per-owner utility: payment minus private cost for winners."""
    return {
        w: book.payments[w] - profiles[w].private_cost for w in book.winners
    }


def update_agents_after_announcement(
    agents: Iterable[BidderAgent], book: RoundBidBook
) -> None:
    """Losers walk their asking price toward the announced marginal price.

    v ← max(cost, v − rate·(v − b_win)), with the decrement clamped at 0 so
    an announcement never raises anyone's valuation. Winners, and every
    agent in a round with no winners, keep their valuation.
    """
    if book.winning_bid is None:
        return
    winner_set = set(book.winners)
    for agent in agents:
        if agent.profile.id in winner_set:
            continue
        decrement = agent.adjust_rate * (agent.valuation - book.winning_bid)
        if decrement <= 0:
            continue
        new_valuation = agent.valuation - int(round(decrement))
        agent.valuation = max(agent.profile.private_cost, new_valuation)
