"""Discounted Beta reputation scoring.

Each interaction leaves a binary feedback tuple — positive when a selected
owner's local performance at least matched the previous global performance,
negative otherwise. The score is the Beta-posterior mean over feedback
counts, with older feedback geometrically discounted by `discount` per round
of age at query time. An owner with no history scores exactly 0.5 and stays
biddable (cold start is not exclusion).
"""

from __future__ import annotations

from dataclasses import dataclass, field


@dataclass
class ReputationLedger:
    """Per-owner feedback history with freshness discounting.

    Attributes:
        discount: per-round geometric discount in (0, 1]; 1 means no fading.
        history: owner id -> ordered list of (round, alpha, beta) records,
            each record either ⟨1,0⟩ (positive) or ⟨0,1⟩ (negative).
    """

    discount: float
    history: dict[int, list[tuple[int, int, int]]] = field(default_factory=dict)

    def __post_init__(self) -> None:
        if not (0.0 < self.discount <= 1.0):
            raise ValueError(f"discount must be in (0, 1], got {self.discount}")


def feedback_from_performance(local_perf: float, prev_global_perf: float) -> tuple[int, int]:
    """Feedback tuple for one interaction: ⟨1,0⟩ iff the local model kept up.

    Equality counts as positive — matching the previous global performance
    is not a failure.
    """
    if local_perf >= prev_global_perf:
        return (1, 0)
    return (0, 1)


def record_feedback(
    ledger: ReputationLedger, owner: int, round: int, tuple_: tuple[int, int]
) -> None:
    """Append one feedback record to an owner's history.

    Raises:
        ValueError: on an out-of-order round or a malformed tuple.
    """
    alpha, beta = tuple_
    if (alpha, beta) not in ((1, 0), (0, 1)):
        raise ValueError(f"feedback tuple must be (1,0) or (0,1), got {tuple_}")
    records = ledger.history.setdefault(owner, [])
    if records and round <= records[-1][0]:
        raise ValueError(
            f"owner {owner}: feedback round {round} not after last round {records[-1][0]}"
        )
    records.append((round, alpha, beta))


def score(ledger: ReputationLedger, owner: int, now: int) -> float:
    """Discounted Beta-posterior mean for an owner at query round `now`.

    (sum_i d^(now-i)·alpha_i + 1) / (sum_i d^(now-i)·alpha_i + sum_i
    d^(now-i)·beta_i + 2), where i runs over the owner's feedback rounds.
    An unknown owner has empty sums and scores exactly 0.5 (cold start).

    Raises:
        ValueError: if `now` precedes a recorded feedback round.
    """
    pos = 0.0
    neg = 0.0
    for rnd, alpha, beta in ledger.history.get(owner, ()):
        if rnd > now:
            raise ValueError(f"owner {owner}: score at {now} predates feedback at {rnd}")
        weight = ledger.discount ** (now - rnd)
        pos += weight * alpha
        neg += weight * beta
    return (pos + 1.0) / (pos + neg + 2.0)


def is_reputable(score_value: float, threshold: float) -> bool:
    """Whether a score clears the reputability threshold (inclusive)."""
    return score_value >= threshold
