"""Deterministic worker-pool helpers.

TORIC_THREADS caps the worker count (default: machine parallelism).  Parallel
maps always merge results in submission order, so output never depends on
scheduling.
"""

from __future__ import annotations

import os
from concurrent.futures import ThreadPoolExecutor
from typing import Callable, Sequence


def worker_count() -> int:
    raw = os.environ.get("TORIC_THREADS", "")
    if raw:
        try:
            return max(1, int(raw))
        except ValueError:
            pass
    return max(1, os.cpu_count() or 1)


def pmap_chunks(fn: Callable[[Sequence], list], items: Sequence, min_chunk: int = 8) -> list:
    """Apply `fn` to contiguous chunks of `items` and concatenate in order.

    `fn` receives a sub-sequence and returns a list; the concatenation equals
    fn(items) for any chunk-additive fn.
    """
    workers = worker_count()
    if workers == 1 or len(items) <= min_chunk:
        return fn(items)
    chunk = max(min_chunk, (len(items) + workers - 1) // workers)
    chunks = [items[i : i + chunk] for i in range(0, len(items), chunk)]
    with ThreadPoolExecutor(max_workers=workers) as pool:
        parts = list(pool.map(fn, chunks))
    out: list = []
    for part in parts:
        out.extend(part)
    return out
