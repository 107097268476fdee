"""Alternative selection policies, run under the identical market and accounting.

Three comparators to the regret-queue policy:

* greedy percentile — hire everyone bidding at or below the nearest-rank
  percentile threshold, with no budget cap at all;
* reputable fill — hire as many reputable bidders as the flat per-round
  budget affords (cheapest first), with no rollover of leftovers;
* bandit top-k — UCB1 over observed local improvements, no budget cap.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

from .auction_engine import SelectionOutcome, select_lowest_within_budget
from .market_model import RoundBidBook
from .reputation import is_reputable

POLICIES = ("gps", "greedy", "rrafl", "oort")


def greedy_select(book: RoundBidBook, percentile: float = 15.0) -> SelectionOutcome:
    """Select every bid at or below the nearest-rank percentile threshold.

    No budget cap: the whole at-or-below-threshold group wins, however large.
    """
    if not book.bids:
        return SelectionOutcome(winners=(), spend=0)
    ordered = sorted(book.bids.items(), key=lambda item: (item[1], item[0]))
    rank = max(1, math.ceil(percentile / 100.0 * len(ordered)))
    threshold = ordered[rank - 1][1]
    winners = tuple(owner for owner, bid in ordered if bid <= threshold)
    spend = sum(book.bids[w] for w in winners)
    rejected = tuple((owner, "over_cap") for owner, bid in ordered if bid > threshold)
    return SelectionOutcome(winners=winners, spend=spend, rejected=rejected)


def rrafl_select(
    book: RoundBidBook,
    scores: dict[int, float],
    threshold: float,
    budget: int,
    exe_costs: dict[int, int] | None = None,
    backend: str | None = None,
) -> SelectionOutcome:
    """Fill the flat per-round budget with the cheapest reputable bidders.

    Admitting cheapest-first maximizes how many reputable participants the
    budget buys. The policy is defined by spending its budget on
    participation every round, so when the reputable group cannot absorb at
    least half of it — the cold start, when every score sits at 0.5, or
    after the freshness discount has decayed everyone below threshold — it
    widens to the full bidder set rather than sitting idle.
    """
    eligible = {owner for owner in book.bids if is_reputable(scores[owner], threshold)}
    if eligible:
        outcome = select_lowest_within_budget(
            book,
            budget,
            eligible=eligible.__contains__,
            exe_costs=exe_costs,
            total_cap=budget,
            backend=backend,
        )
        if 2 * outcome.spend >= budget:
            return outcome
    return select_lowest_within_budget(
        book,
        budget,
        exe_costs=exe_costs,
        total_cap=budget,
        backend=backend,
    )


@dataclass
class BanditStats:
    """Per-owner running statistics for the UCB policy."""

    improvement_sum: dict[int, float] = field(default_factory=dict)
    times_selected: dict[int, int] = field(default_factory=dict)

    def update(self, owner: int, improvement: float) -> None:
        self.improvement_sum[owner] = self.improvement_sum.get(owner, 0.0) + improvement
        self.times_selected[owner] = self.times_selected.get(owner, 0) + 1


def oort_select(
    book: RoundBidBook, stats: BanditStats, round: int, cohort_size: int
) -> SelectionOutcome:
    """Pick the top-k bidders by UCB1 utility, ignoring bids and budget.

    utility = mean observed local improvement + sqrt(2·ln t / max(1, s)),
    where s counts prior selections. Ties (including the all-zero cold
    start at t=1) resolve by ascending owner id.
    """
    if not book.bids:
        return SelectionOutcome(winners=(), spend=0)

    def utility(owner: int) -> float:
        s = stats.times_selected.get(owner, 0)
        mean = stats.improvement_sum.get(owner, 0.0) / s if s else 0.0
        return mean + math.sqrt(2.0 * math.log(round) / max(1, s))

    ranked = sorted(book.bids, key=lambda owner: (-utility(owner), owner))
    winners = tuple(ranked[:cohort_size])
    spend = sum(book.bids[w] for w in winners)
    rejected = tuple((owner, "over_cap") for owner in ranked[cohort_size:])
    return SelectionOutcome(winners=winners, spend=spend, rejected=rejected)
