"""Thread-pool helper capped by the ``RMB_THREADS`` environment variable."""
from __future__ import annotations

import os
from concurrent.futures import ThreadPoolExecutor
from typing import Callable, Iterable, TypeVar

T = TypeVar("T")
R = TypeVar("R")


def thread_count() -> int:
    """Worker count: ``RMB_THREADS`` if set, else the CPU count."""
    raw = os.environ.get("RMB_THREADS", "").strip()
    if raw:
        try:
            n = int(raw)
        except ValueError as exc:
            raise ValueError(f"RMB_THREADS must be a positive integer, got {raw!r}") from exc
        if n < 1:
            raise ValueError(f"RMB_THREADS must be a positive integer, got {raw!r}")
        return n
    return os.cpu_count() or 1


def ordered_map(fn: Callable[[T], R], items: Iterable[T]) -> list[R]:
    """``[fn(x) for x in items]`` spread over threads; output keeps input order."""
    items = list(items)
    workers = min(thread_count(), len(items))
    if workers <= 1:
        return [fn(x) for x in items]
    with ThreadPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(fn, items))
