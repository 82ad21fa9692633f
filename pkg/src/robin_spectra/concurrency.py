"""Ordered fan-out of independent solves.

``ROBIN_SPECTRA_THREADS`` caps the worker count (default 1, i.e. serial).
Results always come back in input order, so reports do not depend on
scheduling.
"""

from __future__ import annotations

import os
from concurrent.futures import ThreadPoolExecutor


def max_workers() -> int:
    raw = os.environ.get("ROBIN_SPECTRA_THREADS", "1")
    try:
        n = int(raw)
    except ValueError:
        raise ValueError(f"ROBIN_SPECTRA_THREADS must be an integer, got {raw!r}") from None
    return max(n, 1)


def ordered_map(func, items, workers: int | None = None) -> list:
    items = list(items)
    workers = max_workers() if workers is None else max(int(workers), 1)
    if workers == 1 or len(items) < 2:
        return [func(x) for x in items]
    with ThreadPoolExecutor(max_workers=min(workers, len(items))) as pool:
        return list(pool.map(func, items))
