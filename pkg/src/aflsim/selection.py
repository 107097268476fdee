"""Winner-determination backends and dispatch.

Three interchangeable implementations of budget-capped prefix selection:

``compiled``
    Cython extension (:mod:`aflsim._kernel`), expected linear time.
``python``
    numpy implementation of the same partitioning algorithm
    (:mod:`aflsim._kernel_py`), used automatically when the extension was
    not built.
``sorted``
    Full lexsort + cumulative-sum scan. Asymptotically slower but obviously
    correct; kept as the reference the other two are tested against.

All three return the identical winner set — the longest (bid, id)-ascending
prefix satisfying both budget caps — which is unique, so backend choice can
never change simulation results, only speed.

The default backend is the compiled kernel when available; override with the
``AFLSIM_BACKEND`` environment variable or the ``backend=`` argument.
"""

from __future__ import annotations

import os

import numpy as np

from . import _kernel_py

try:
    from . import _kernel  # type: ignore[attr-defined]
except ImportError:  # pragma: no cover - depends on build environment
    _kernel = None

#: backend name -> select_prefix callable
BACKENDS = {
    "python": _kernel_py.select_prefix,
    "sorted": None,  # filled in below
}
if _kernel is not None:
    BACKENDS["compiled"] = _kernel.select_prefix

DEFAULT_BACKEND = "compiled" if _kernel is not None else "python"


def _select_prefix_sorted(
    bids: np.ndarray,
    ids: np.ndarray,
    exe: np.ndarray,
    hire_cap: int,
    total_cap: int,
) -> np.ndarray:
    """Reference implementation: full sort, then walk the prefix."""
    if bids.shape[0] == 0 or hire_cap < 0 or total_cap < 0:
        return np.empty(0, dtype=np.int64)
    order = np.lexsort((ids, bids))
    cum_bid = np.cumsum(bids[order])
    cum_tot = cum_bid + np.cumsum(exe[order])
    ok = (cum_bid <= hire_cap) & (cum_tot <= total_cap)
    # Both cumulative sums are nondecreasing, so feasibility is a prefix
    # property: the first violation ends the admitted range.
    stop = int(ok.size) if bool(ok.all()) else int(np.argmin(ok))
    return order[:stop].astype(np.int64)


BACKENDS["sorted"] = _select_prefix_sorted


def resolve_backend(backend: str | None = None) -> str:
    """Resolve a backend name: explicit argument, else env var, else default."""
    name = backend or os.environ.get("AFLSIM_BACKEND") or DEFAULT_BACKEND
    if name not in BACKENDS:
        raise ValueError(
            f"unknown selection backend {name!r}; available: {sorted(BACKENDS)}"
        )
    return name


def budget_prefix(
    bids: np.ndarray,
    ids: np.ndarray,
    exe: np.ndarray | None,
    hire_cap: int,
    total_cap: int | None = None,
    backend: str | None = None,
) -> np.ndarray:
    """Select the longest affordable (bid, id)-ascending prefix.

    Args:
        bids: int64 bid amounts in micro-units, all ≥ 0.
        ids: int64 distinct owner ids (tie-break key).
        exe: optional int64 per-candidate execution charges; None means 0.
        hire_cap: cap on the cumulative bid sum.
        total_cap: cap on cumulative bid+exe; defaults to no extra cap.
        backend: one of ``compiled``/``python``/``sorted``; None picks the
            import-time default (or AFLSIM_BACKEND).

    Returns:
        Positions into the input arrays of the admitted candidates,
        sorted ascending by (bid, id).
    """
    bids = np.ascontiguousarray(bids, dtype=np.int64)
    ids = np.ascontiguousarray(ids, dtype=np.int64)
    if exe is None:
        exe = np.zeros_like(bids)
    else:
        exe = np.ascontiguousarray(exe, dtype=np.int64)
    if total_cap is None:
        # No separate total cap: make it non-binding.
        total_cap = int(bids.sum() + exe.sum())
    fn = BACKENDS[resolve_backend(backend)]
    positions = fn(bids, ids, exe, int(hire_cap), int(total_cap))
    if positions.size > 1:
        positions = positions[np.lexsort((ids[positions], bids[positions]))]
    return positions
