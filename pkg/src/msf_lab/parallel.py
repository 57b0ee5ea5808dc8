"""Replicate fan-out. Results always come back in replicate order."""

from __future__ import annotations

import os
from concurrent.futures import ProcessPoolExecutor
from typing import Callable, Sequence, TypeVar

T = TypeVar("T")
R = TypeVar("R")

THREADS_ENV = "MSF_LAB_THREADS"


def worker_count(requested: int | None = None) -> int:
    """Workers to use: explicit request, else ``MSF_LAB_THREADS``, else 1. 0 means all cores."""
    if requested is None:
        raw = os.environ.get(THREADS_ENV, "").strip()
        requested = int(raw) if raw else 1
    if requested < 0:
        raise ValueError(f"{THREADS_ENV} must be >= 0, got {requested}")
    return requested or (os.cpu_count() or 1)


def map_replicates(fn: Callable[[T], R], items: Sequence[T], workers: int | None = None) -> list[R]:
    workers = worker_count(workers)
    if workers <= 1 or len(items) <= 1:
        return [fn(x) for x in items]
    chunk = max(1, len(items) // (4 * workers))
    with ProcessPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(fn, items, chunksize=chunk))
