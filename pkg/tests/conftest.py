"""Shared fixtures: bundled scenarios and the expensive seeded sweeps.

The 100-seed sweep and the 50-seed paired policy runs are session-scoped so
the feasibility, rationality, branch-behavior, and ordinal-comparison tests
all read the same data instead of re-simulating it.
"""

from __future__ import annotations

import time

import pytest

from aflsim import harness
from aflsim.market_model import load_scenario

ACCEPTANCE_RESULTS: list[tuple[int, str, bool, str]] = []


def record_acceptance(number: int, name: str, ok: bool, detail: str = "") -> None:
    ACCEPTANCE_RESULTS.append((number, name, ok, detail))


@pytest.fixture(scope="session")
def default_scenario():
    return load_scenario(harness.bundled_scenario_path("default"))


@pytest.fixture(scope="session")
def small_scenario():
    return load_scenario(harness.bundled_scenario_path("small_market"))


@pytest.fixture(scope="session")
def sweep100(default_scenario):
    """100 seeded controller runs on the default scenario, plus wall time."""
    start = time.monotonic()
    results = [
        harness.run_episode(default_scenario, "gps", seed) for seed in range(1, 101)
    ]
    return results, time.monotonic() - start


@pytest.fixture(scope="session")
def paired50(default_scenario):
    """Policy → 50 seeded runs, identical seeds across policies."""
    seeds = range(1, 51)
    return {
        policy: [harness.run_episode(default_scenario, policy, s) for s in seeds]
        for policy in ("gps", "rrafl", "greedy")
    }


def pytest_terminal_summary(terminalreporter, exitstatus, config):
    if not ACCEPTANCE_RESULTS:
        return
    terminalreporter.section("acceptance criteria")
    for number, name, ok, detail in sorted(ACCEPTANCE_RESULTS):
        verdict = "PASS" if ok else "FAIL"
        suffix = f" ({detail})" if detail else ""
        terminalreporter.write_line(f"[{verdict}] criterion {number}: {name}{suffix}")
