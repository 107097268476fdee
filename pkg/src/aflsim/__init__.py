"""Deterministic simulator of a budget-feasible reverse-auction FL marketplace.

A federation recruits data owners over a fixed horizon through a pay-as-bid
reverse auction. Hiring spend is governed by a regret-queue controller with
per-round budget rollover, eligibility by a discounted Beta reputation
system, and training itself by a surrogate performance oracle. Baseline
selection policies and property-audit commands run under the identical
market and accounting.
"""

__version__ = "0.1.0"
