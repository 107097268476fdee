"""Surrogate for the federated training step.

Real local training and aggregation are replaced by a stochastic performance
oracle over a scalar global performance ξ ∈ [0, xi_max]. A selected cohort
with total latent quality S advances ξ by gain·(xi_max − ξ)·S/(S + sat) plus
Gaussian noise — diminishing returns both in current performance and in
cohort size. Each owner's local performance moves ξ by its own quality alone,
and its comparison against the previous global ξ is what generates
reputation feedback.

Noise is drawn from a per-round substream derived from (seed, round), one
draw per owner (in ascending owner order) plus one for the global update.
Every policy replaying the same seed therefore sees identical noise
regardless of which cohort it selects — runs are paired.
"""

from __future__ import annotations

import csv
from pathlib import Path

import numpy as np

from .market_model import OracleConfig
from .money import to_micros

_NOISE_STREAM = 0x0AC1E


class PerformanceOracle:
    """Seeded stochastic learning-curve model.

    Attributes:
        cur_perf: current global performance ξ.
    """

    def __init__(self, config: OracleConfig, seed: int, n_owners: int):
        self.xi_max = config.xi_max
        self.gain = config.gain
        self.sat = config.sat
        self.noise_sd = config.noise_sd
        self.cur_perf = config.initial_perf
        self._seed = seed
        self._n_owners = n_owners

    def round_noise(self, round: int) -> np.ndarray:
        """Standard-normal draws for one round: one per owner, plus one global.

        Owner draws are indexed by the owner's position in ascending-id
        order; the final entry drives the global update.
        """
        rng = np.random.default_rng(
            np.random.SeedSequence((self._seed, _NOISE_STREAM, round))
        )
        return rng.standard_normal(self._n_owners + 1)

    def _clamp(self, value: float) -> float:
        return min(max(value, 0.0), self.xi_max)

    def local_performance(self, quality: float, eps: float) -> float:
        """One owner's local model performance this round.

        clamp(ξ + gain·(xi_max − ξ)·quality + noise_sd·eps).
        """
        return self._clamp(
            self.cur_perf
            + self.gain * (self.xi_max - self.cur_perf) * quality
            + self.noise_sd * eps
        )

    def advance_global(self, total_quality: float, eps: float) -> float:
        """Aggregate the round: move ξ by the cohort's saturated quality mass.

        An empty cohort (total_quality 0) contributes no deterministic
        improvement. Returns and stores the new ξ.
        """
        lift = total_quality / (total_quality + self.sat) if total_quality > 0 else 0.0
        self.cur_perf = self._clamp(
            self.cur_perf
            + self.gain * (self.xi_max - self.cur_perf) * lift
            + self.noise_sd * eps
        )
        return self.cur_perf

    def revenue(self, revenue_scale: float) -> int:
        """Money earned from the current performance level (micro-units)."""
        return to_micros(revenue_scale * self.cur_perf)


class TraceOracle:
    """Replay externally measured learning curves instead of the model above.

    Driven by a CSV with columns ``round`` and ``dxi_per_unit_s``: in round t
    the global performance rises by dxi_per_unit_s[t] · S for cohort quality
    mass S (an owner's local performance rises by its own quality instead).
    Deterministic; rounds missing from the table contribute no improvement.
    """

    def __init__(
        self,
        rates: dict[int, float],
        n_owners: int,
        xi_max: float = 0.99,
        initial_perf: float = 0.0,
    ):
        self.rates = rates
        self.xi_max = xi_max
        self.cur_perf = initial_perf
        self._n_owners = n_owners
        self._round = 0

    @classmethod
    def from_csv(
        cls,
        path: str | Path,
        n_owners: int,
        xi_max: float = 0.99,
        initial_perf: float = 0.0,
    ) -> "TraceOracle":
        rates: dict[int, float] = {}
        with open(path, newline="", encoding="utf-8") as fh:
            for row in csv.DictReader(fh):
                rates[int(row["round"])] = float(row["dxi_per_unit_s"])
        return cls(rates, n_owners, xi_max=xi_max, initial_perf=initial_perf)

    def round_noise(self, round: int) -> np.ndarray:
        self._round = round
        # Deterministic mode: the draws exist to satisfy the oracle protocol.
        return np.zeros(self._n_owners + 1)

    def _clamp(self, value: float) -> float:
        return min(max(value, 0.0), self.xi_max)

    def local_performance(self, quality: float, eps: float = 0.0) -> float:
        return self._clamp(self.cur_perf + self.rates.get(self._round, 0.0) * quality)

    def advance_global(self, total_quality: float, eps: float = 0.0) -> float:
        self.cur_perf = self._clamp(
            self.cur_perf + self.rates.get(self._round, 0.0) * total_quality
        )
        return self.cur_perf

    def revenue(self, revenue_scale: float) -> int:
        return to_micros(revenue_scale * self.cur_perf)
