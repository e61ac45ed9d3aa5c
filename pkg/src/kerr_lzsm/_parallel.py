from __future__ import annotations

import os
from concurrent.futures import ProcessPoolExecutor


def default_jobs() -> int:
    try:
        return len(os.sched_getaffinity(0))
    except AttributeError:  # pragma: no cover - non-Linux
        return os.cpu_count() or 1


def parallel_map(func, items, jobs: int | None = None):
    """Ordered map over independent work items.

    Workers pull items one at a time from a shared queue, so slow grid points
    do not stall a pre-assigned chunk.  Results always come back in input
    order.  ``jobs <= 1`` runs in-process.
    """
    items = list(items)
    jobs = default_jobs() if jobs is None else int(jobs)
    if jobs <= 1 or len(items) <= 1:
        return [func(item) for item in items]
    with ProcessPoolExecutor(max_workers=min(jobs, len(items))) as pool:
        return list(pool.map(func, items, chunksize=1))
