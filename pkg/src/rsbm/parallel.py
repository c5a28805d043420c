"""Deterministic fan-out of independent work items across worker threads.

The RSBM_THREADS environment variable caps the worker count (default 1,
i.e. sequential).  Work is always partitioned into the same chunks and
reassembled in order, so results are identical for any worker count.
"""
from __future__ import annotations

import os
from concurrent.futures import ThreadPoolExecutor

__all__ = ["worker_count", "map_ordered"]


def worker_count() -> int:
    raw = os.environ.get("RSBM_THREADS", "")
    try:
        return max(1, int(raw))
    except ValueError:
        return 1


def map_ordered(fn, items):
    """Apply fn to every item, in order, fanning out when RSBM_THREADS > 1."""
    items = list(items)
    workers = min(worker_count(), len(items))
    if workers <= 1:
        return [fn(it) for it in items]
    with ThreadPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(fn, items))
