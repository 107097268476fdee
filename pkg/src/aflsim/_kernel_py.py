"""Pure-Python (numpy) budget-capped prefix selection.

Fallback implementation of the winner-determination kernel, used when the
compiled extension is unavailable. Same algorithm as the C version: iterative
threshold partitioning over (bid, id) keys with bulk admission of feasible
blocks, giving expected linear time without a full sort. A depth guard falls
back to sorting the remaining range, bounding the worst case at O(n log n).

The selected set is the longest prefix, in ascending (bid, id) order, whose
cumulative bid sum stays within `hire_cap` and whose cumulative bid+exe sum
stays within `total_cap`. Both cumulative sums are nondecreasing (all inputs
are nonnegative), so a block whose total fits is feasible at every
intermediate prefix — that is what makes bulk admission sound.
"""

from __future__ import annotations

import numpy as np

_SMALL = 32


def select_prefix(
    bids: np.ndarray,
    ids: np.ndarray,
    exe: np.ndarray,
    hire_cap: int,
    total_cap: int,
) -> np.ndarray:
    """Return positions (into the input arrays) of the admitted candidates.

    Args:
        bids: int64 bid amounts, micro-units, all ≥ 0.
        ids: int64 owner ids, pairwise distinct (they break bid ties).
        exe: int64 per-candidate execution charge, micro-units, all ≥ 0.
        hire_cap: cap on the cumulative bid sum.
        total_cap: cap on the cumulative bid+exe sum.

    Returns:
        int64 array of admitted positions, in no particular order.
    """
    n = int(bids.shape[0])
    if n == 0 or hire_cap < 0 or total_cap < 0:
        return np.empty(0, dtype=np.int64)

    active = np.arange(n, dtype=np.int64)
    admitted: list[np.ndarray] = []
    acc_bid = 0
    acc_exe = 0
    depth = 0
    max_depth = 2 * int(np.log2(n)) + 24 if n > 1 else 1

    while active.size:
        if active.size <= _SMALL or depth > max_depth:
            order = active[np.lexsort((ids[active], bids[active]))]
            cum_bid = acc_bid + np.cumsum(bids[order])
            cum_tot = cum_bid + acc_exe + np.cumsum(exe[order])
            ok = (cum_bid <= hire_cap) & (cum_tot <= total_cap)
            stop = int(ok.size) if bool(ok.all()) else int(np.argmin(ok))
            admitted.append(order[:stop])
            break
        depth += 1

        a_bids = bids[active]
        a_ids = ids[active]
        pivot_pos = _median_of_three(a_bids, a_ids)
        pivot_bid = int(a_bids[pivot_pos])
        pivot_id = int(a_ids[pivot_pos])

        left_mask = (a_bids < pivot_bid) | ((a_bids == pivot_bid) & (a_ids < pivot_id))
        left = active[left_mask]
        left_bid = int(bids[left].sum())
        left_exe = int(exe[left].sum())

        if (
            acc_bid + left_bid <= hire_cap
            and acc_bid + left_bid + acc_exe + left_exe <= total_cap
        ):
            admitted.append(left)
            acc_bid += left_bid
            acc_exe += left_exe
            new_bid = acc_bid + pivot_bid
            new_tot = new_bid + acc_exe + int(exe[active[pivot_pos]])
            if new_bid <= hire_cap and new_tot <= total_cap:
                admitted.append(active[pivot_pos : pivot_pos + 1])
                acc_bid = new_bid
                acc_exe += int(exe[active[pivot_pos]])
                right_mask = ~left_mask
                right_mask[pivot_pos] = False
                active = active[right_mask]
            else:
                # The pivot is the first infeasible candidate in sorted
                # order; everything keyed above it is rejected too.
                break
        else:
            active = left

    if not admitted:
        return np.empty(0, dtype=np.int64)
    return np.concatenate(admitted)


def _median_of_three(bids: np.ndarray, ids: np.ndarray) -> int:
    """Position of the (bid, id)-median of the first, middle, and last entries."""
    last = bids.shape[0] - 1
    mid = last // 2
    a = (int(bids[0]), int(ids[0]), 0)
    b = (int(bids[mid]), int(ids[mid]), mid)
    c = (int(bids[last]), int(ids[last]), last)
    return sorted((a, b, c))[1][2]
