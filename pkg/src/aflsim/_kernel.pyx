# cython: boundscheck=False, wraparound=False, cdivision=True, language_level=3
"""Compiled budget-capped prefix selection.

Winner determination for the reverse auction: admit candidates in ascending
(bid, id) order while the cumulative bid sum stays within `hire_cap` and the
cumulative bid+exe sum stays within `total_cap`. Implemented as iterative
threshold partitioning (quickselect-style) with bulk admission of feasible
blocks, so the expected cost is linear in the number of candidates; a depth
guard falls back to heapsort for an O(n log n) worst case.

Mirrors aflsim._kernel_py.select_prefix; both return the same set.
"""

import numpy as np

cimport numpy as cnp

cnp.import_array()


cdef inline bint _key_lt(cnp.int64_t b1, cnp.int64_t i1,
                         cnp.int64_t b2, cnp.int64_t i2) nogil:
    return b1 < b2 or (b1 == b2 and i1 < i2)


cdef void _sift_down(cnp.int64_t[::1] idx, cnp.int64_t[:] bids,
                     cnp.int64_t[:] ids, Py_ssize_t lo, Py_ssize_t start,
                     Py_ssize_t end) nogil:
    # Max-heap over idx[lo:end) keyed by (bid, id); `start` is heap-relative.
    cdef Py_ssize_t root = start, child
    cdef cnp.int64_t tmp
    while 2 * root + 1 < end - lo:
        child = 2 * root + 1
        if child + 1 < end - lo and _key_lt(
            bids[idx[lo + child]], ids[idx[lo + child]],
            bids[idx[lo + child + 1]], ids[idx[lo + child + 1]],
        ):
            child += 1
        if _key_lt(bids[idx[lo + root]], ids[idx[lo + root]],
                   bids[idx[lo + child]], ids[idx[lo + child]]):
            tmp = idx[lo + root]
            idx[lo + root] = idx[lo + child]
            idx[lo + child] = tmp
            root = child
        else:
            return


cdef void _heapsort_range(cnp.int64_t[::1] idx, cnp.int64_t[:] bids,
                          cnp.int64_t[:] ids, Py_ssize_t lo,
                          Py_ssize_t hi) nogil:
    cdef Py_ssize_t count = hi - lo
    cdef Py_ssize_t start, end
    cdef cnp.int64_t tmp
    if count < 2:
        return
    for start in range(count // 2 - 1, -1, -1):
        _sift_down(idx, bids, ids, lo, start, hi)
    for end in range(count - 1, 0, -1):
        tmp = idx[lo]
        idx[lo] = idx[lo + end]
        idx[lo + end] = tmp
        _sift_down(idx, bids, ids, lo, 0, lo + end)


def select_prefix(cnp.int64_t[:] bids, cnp.int64_t[:] ids,
                  cnp.int64_t[:] exe, long long hire_cap,
                  long long total_cap):
    """Return positions of the admitted candidates as an int64 array.

    Semantics identical to aflsim._kernel_py.select_prefix.
    """
    cdef Py_ssize_t n = bids.shape[0]
    if n == 0 or hire_cap < 0 or total_cap < 0:
        return np.empty(0, dtype=np.int64)

    idx_arr = np.arange(n, dtype=np.int64)
    cdef cnp.int64_t[::1] idx = idx_arr
    cdef Py_ssize_t lo = 0, hi = n
    cdef long long acc_bid = 0, acc_exe = 0
    cdef long long left_bid, left_exe, new_bid, new_tot
    cdef Py_ssize_t mid, store, k, pivot_final
    cdef cnp.int64_t pivot, tmp
    cdef cnp.int64_t pb, pid
    cdef int depth = 0, max_depth = 24
    cdef Py_ssize_t m = n
    cdef bint stopped = False

    while m > 1:
        max_depth += 2
        m >>= 1

    with nogil:
        while hi > lo and not stopped:
            if hi - lo <= 32 or depth > max_depth:
                _heapsort_range(idx, bids, ids, lo, hi)
                while lo < hi:
                    new_bid = acc_bid + bids[idx[lo]]
                    new_tot = new_bid + acc_exe + exe[idx[lo]]
                    if new_bid > hire_cap or new_tot > total_cap:
                        break
                    acc_bid = new_bid
                    acc_exe += exe[idx[lo]]
                    lo += 1
                break
            depth += 1

            # Median-of-three pivot, moved to the end of the range.
            mid = lo + (hi - lo) // 2
            if _key_lt(bids[idx[mid]], ids[idx[mid]], bids[idx[lo]], ids[idx[lo]]):
                tmp = idx[lo]; idx[lo] = idx[mid]; idx[mid] = tmp
            if _key_lt(bids[idx[hi - 1]], ids[idx[hi - 1]], bids[idx[lo]], ids[idx[lo]]):
                tmp = idx[lo]; idx[lo] = idx[hi - 1]; idx[hi - 1] = tmp
            if _key_lt(bids[idx[hi - 1]], ids[idx[hi - 1]], bids[idx[mid]], ids[idx[mid]]):
                tmp = idx[mid]; idx[mid] = idx[hi - 1]; idx[hi - 1] = tmp
            pivot = idx[hi - 1]
            pb = bids[pivot]
            pid = ids[pivot]

            # Partition, accumulating the left block's sums on the fly.
            store = lo
            left_bid = 0
            left_exe = 0
            for k in range(lo, hi - 1):
                if _key_lt(bids[idx[k]], ids[idx[k]], pb, pid):
                    tmp = idx[k]; idx[k] = idx[store]; idx[store] = tmp
                    left_bid += bids[idx[store]]
                    left_exe += exe[idx[store]]
                    store += 1
            tmp = idx[hi - 1]; idx[hi - 1] = idx[store]; idx[store] = tmp
            pivot_final = store

            if (acc_bid + left_bid <= hire_cap
                    and acc_bid + left_bid + acc_exe + left_exe <= total_cap):
                # Whole left block fits (cumulative sums are monotone, so
                # every prefix of it fits too); advance past it.
                acc_bid += left_bid
                acc_exe += left_exe
                lo = pivot_final
                new_bid = acc_bid + pb
                new_tot = new_bid + acc_exe + exe[pivot]
                if new_bid <= hire_cap and new_tot <= total_cap:
                    acc_bid = new_bid
                    acc_exe += exe[pivot]
                    lo = pivot_final + 1
                else:
                    # Pivot is the first infeasible candidate in sorted
                    # order; everything keyed above it is rejected too.
                    stopped = True
            else:
                hi = pivot_final

    return idx_arr[:lo].copy()
