"""Regret-queue hiring controller and round orchestration.

The federation tracks a nonnegative regret queue Q. Whenever a round's
performance improvement falls short of that round's threshold, the queue
absorbs the counterfactual cost of a reputable-only cohort (c_opt); actual
hiring spend drains it. A positive queue switches the next round from plain
lowest-bid selection under the base per-round budget to reputable-only
selection under the closed-form cap min(max(0, Q + c_opt − V), θ_t), spending
down the accumulated regret while never exceeding the rolled-over budget.

All money quantities are fixed-point micro-units; every feasibility
comparison here is exact integer arithmetic.
"""

from __future__ import annotations

from dataclasses import dataclass, field

from .auction_engine import (
    BidderAgent,
    collect_bids,
    select_lowest_within_budget,
    settle,
    update_agents_after_announcement,
    winner_utilities,
)
from .cost_energy import execution_cost, per_owner_exe_cost
from .market_model import FederationConfig, RoundBidBook, base_budget_schedule
from .reputation import (
    ReputationLedger,
    feedback_from_performance,
    is_reputable,
    record_feedback,
    score,
)


@dataclass
class SchedulerState:
    """Mutable controller state for one run.

    Attributes:
        queue: regret queue Q, micro-units, ≥ 0.
        round_budget: budget θ available this round (base + rollover), ≥ 0.
        round: 1-based index of the round about to execute.
        last_perf: global performance after the previous round.
        spent_hire_history: per-round hiring spend.
        spent_exe_history: per-round execution spend.
        c_opt_history: per-round counterfactual reputable-cohort cost.
    """

    queue: int
    round_budget: int
    round: int = 1
    last_perf: float = 0.0
    spent_hire_history: list[int] = field(default_factory=list)
    spent_exe_history: list[int] = field(default_factory=list)
    c_opt_history: list[int] = field(default_factory=list)


@dataclass(frozen=True)
class RoundMetrics:
    """Everything one round emits, for CSV rows, traces, and audits.

    `queue` is the post-update, post-clamp value; `queue_start` is the value
    that drove this round's branch choice.
    """

    round: int
    xi: float
    revenue: int
    c_hire: int
    c_exe: int
    utility: int
    queue: int
    theta_t: int
    c_opt: int
    n_selected: int
    branch: str
    queue_start: int
    improvement: float
    threshold: float
    indicator: bool
    winners: tuple[int, ...]
    winner_utilities: dict[int, int]
    winner_scores: dict[int, float]
    bids: dict[int, int]
    eligible: tuple[int, ...] | None
    cap: int


def make_scheduler_state(config: FederationConfig, initial_perf: float = 0.0) -> SchedulerState:
    """Fresh state at round 1: empty queue, first base budget, no history."""
    return SchedulerState(
        queue=0,
        round_budget=base_budget_schedule(config)[0],
        round=1,
        last_perf=initial_perf,
    )


def compute_c_opt(
    book: RoundBidBook,
    scores: dict[int, float],
    threshold: float,
    base_budget: int,
    backend: str | None = None,
) -> int:
    """Counterfactual spend of filling the base budget with reputable bidders.

    Runs winner determination restricted to reputable bidders under the base
    per-round budget and returns what it would have cost. No selection
    actually happens; with no reputable bidders the reference cost is 0.
    """
    outcome = select_lowest_within_budget(
        book,
        base_budget,
        eligible=lambda owner_id: is_reputable(scores[owner_id], threshold),
        backend=backend,
    )
    return outcome.spend


def update_queue(
    state: SchedulerState,
    c_opt: int,
    hire_spent: int,
    improvement: float,
    threshold: float,
) -> SchedulerState:
    """Advance the regret queue: Q ← max(0, Q + c_opt·I − hire_spent).

    The indicator I is 1 exactly when the realized improvement fell short of
    the round's threshold.
    """
    indicator = 1 if improvement < threshold else 0
    state.queue = max(0, state.queue + c_opt * indicator - hire_spent)
    state.c_opt_history.append(c_opt)
    return state


def hire_budget(queue: int, c_opt: int, value_weight: int, round_budget: int) -> int:
    """Closed-form hiring cap for a positive-queue round.

    min(max(0, Q + c_opt − V), θ_t): spend down the regret backlog plus the
    reputable-cohort reference cost, discounted by the utility-emphasis
    weight, but never more than the budget actually available.
    """
    return min(max(0, queue + c_opt - value_weight), round_budget)


def rollover(
    state: SchedulerState, hire_spent: int, exe_spent: int, next_base: int
) -> SchedulerState:
    """Carry unspent budget forward: θ(t+1) = next_base + (θ(t) − spend).

    Overspend is impossible by construction; finding any here is a bug, so
    it fails hard rather than being reported as a recoverable error.
    """
    remaining = state.round_budget - hire_spent - exe_spent
    assert remaining >= 0, (
        f"round {state.round}: spend {hire_spent}+{exe_spent} exceeds "
        f"budget {state.round_budget}"
    )
    state.spent_hire_history.append(hire_spent)
    state.spent_exe_history.append(exe_spent)
    state.round_budget = next_base + remaining
    return state


def run_round(
    state: SchedulerState,
    agents: list[BidderAgent],
    ledger: ReputationLedger,
    oracle,
    config: FederationConfig,
    exe_costs: dict[int, int] | None = None,
    schedule: tuple[int, ...] | None = None,
    backend: str | None = None,
) -> tuple[SchedulerState, RoundMetrics]:
    """Execute one full round under the regret-queue policy.

    Bid collection → branch on the queue sign (base-budget lowest-bid vs
    reputable-only under the closed-form cap) → winner determination with the
    joint hiring+execution budget cap → pay-as-bid settlement → surrogate
    training and reputation feedback → queue update → budget rollover →
    price announcement to losing bidders.
    """
    t = state.round
    if schedule is None:
        schedule = base_budget_schedule(config)
    base = schedule[t - 1]
    profiles = {agent.profile.id: agent.profile for agent in agents}
    if exe_costs is None:
        exe_costs = {i: per_owner_exe_cost(p, config) for i, p in profiles.items()}

    book = collect_bids(agents, t)
    scores = {owner_id: score(ledger, owner_id, t) for owner_id in book.bids}
    c_opt = compute_c_opt(book, scores, config.reputation_threshold, base, backend=backend)

    queue_start = state.queue
    if queue_start <= 0:
        cap = min(base, state.round_budget)
        eligible_ids = None
        eligible = None
        branch = "base"
    else:
        cap = hire_budget(queue_start, c_opt, config.value_weight, state.round_budget)
        eligible_ids = tuple(
            owner_id
            for owner_id in sorted(book.bids)
            if is_reputable(scores[owner_id], config.reputation_threshold)
        )
        eligible = set(eligible_ids).__contains__
        branch = "reputable"

    outcome = select_lowest_within_budget(
        book,
        cap,
        eligible,
        exe_costs=exe_costs,
        total_cap=state.round_budget,
        backend=backend,
    )
    settle(book, outcome)

    noise = oracle.round_noise(t)
    position = {owner_id: pos for pos, owner_id in enumerate(sorted(book.bids))}
    prev_global = oracle.cur_perf
    local_perfs = {
        w: oracle.local_performance(profiles[w].latent_quality, noise[position[w]])
        for w in outcome.winners
    }
    total_quality = sum(profiles[w].latent_quality for w in outcome.winners)
    xi = oracle.advance_global(total_quality, noise[-1])
    for w in outcome.winners:
        record_feedback(
            ledger, w, t, feedback_from_performance(local_perfs[w], prev_global)
        )

    breakdown = execution_cost([profiles[w] for w in outcome.winners], config)
    c_hire = outcome.spend
    c_exe = breakdown.exe_cost
    revenue = oracle.revenue(config.revenue_scale)

    improvement = xi - prev_global
    threshold = config.improvement_thresholds[t - 1]
    theta_start = state.round_budget
    update_queue(state, c_opt, c_hire, improvement, threshold)
    next_base = schedule[t] if t < config.horizon else 0
    rollover(state, c_hire, c_exe, next_base)
    update_agents_after_announcement(agents, book)

    state.round = t + 1
    state.last_perf = xi
    metrics = RoundMetrics(
        round=t,
        xi=xi,
        revenue=revenue,
        c_hire=c_hire,
        c_exe=c_exe,
        utility=revenue - c_hire - c_exe,
        queue=state.queue,
        theta_t=theta_start,
        c_opt=c_opt,
        n_selected=len(outcome.winners),
        branch=branch,
        queue_start=queue_start,
        improvement=improvement,
        threshold=threshold,
        indicator=improvement < threshold,
        winners=outcome.winners,
        winner_utilities=winner_utilities(book, profiles),
        winner_scores={w: scores[w] for w in outcome.winners},
        bids=dict(book.bids),
        eligible=eligible_ids,
        cap=cap,
    )
    return state, metrics


def drift_bound_audit(rows: list[RoundMetrics]) -> dict:
    """Check the quadratic-backlog drift bound at every completed round.

    For each round, with q = queue at round start, g = c_opt·indicator and
    c = hiring spend, verifies (in exact doubled-integer arithmetic)

        q'² − q² ≤ 2q(g − c) + g² − 2gc + c²

    where q' = max(0, q + g − c) — always true because clamping can only
    shrink the left side. Also reports the backlog ½q² per round and the
    empirical mean one-step drift.
    """
    ok: list[bool] = []
    backlog: list[float] = []
    for row in rows:
        q = row.queue_start
        g = row.c_opt * (1 if row.indicator else 0)
        c = row.c_hire
        lhs = row.queue**2 - q**2
        rhs = 2 * q * (g - c) + g * g - 2 * g * c + c * c
        ok.append(lhs <= rhs)
        backlog.append(0.5 * q * q)
    if rows:
        backlog.append(0.5 * rows[-1].queue ** 2)
    drifts = [b1 - b0 for b0, b1 in zip(backlog, backlog[1:])]
    return {
        "ok": ok,
        "all_ok": all(ok),
        "backlog": backlog,
        "mean_drift": sum(drifts) / len(drifts) if drifts else 0.0,
    }
