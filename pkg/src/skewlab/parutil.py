"""Order-preserving process parallelism with scheduling-independent results.

Work items carry their own derived seeds, so the output of parallel_map is
a pure function of the item list: running with 1 worker or 16 yields the
same list in the same order.
"""

from __future__ import annotations

from concurrent.futures import ProcessPoolExecutor


def parallel_map(fn, items: list, threads: int = 1) -> list:
    """Map fn over items, in order, with at most `threads` worker processes."""
    items = list(items)
    if threads <= 1 or len(items) <= 1:
        return [fn(item) for item in items]
    with ProcessPoolExecutor(max_workers=min(threads, len(items))) as pool:
        return list(pool.map(fn, items))
