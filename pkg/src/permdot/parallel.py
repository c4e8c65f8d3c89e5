"""Worker pool sizing. PERMDOT_THREADS caps the worker count; 0 or unset means one per CPU."""
from __future__ import annotations

import os
from concurrent.futures import ThreadPoolExecutor
from typing import Callable, Iterable, TypeVar

T = TypeVar("T")
R = TypeVar("R")


def worker_count() -> int:
    raw = os.environ.get("PERMDOT_THREADS", "0").strip() or "0"
    try:
        requested = int(raw)
    except ValueError:
        raise ValueError(f"PERMDOT_THREADS must be an integer, got {raw!r}") from None
    if requested < 0:
        raise ValueError("PERMDOT_THREADS must be >= 0")
    return requested or (os.cpu_count() or 1)


def ordered_map(fn: Callable[[T], R], items: Iterable[T], workers: int | None = None) -> list[R]:
    """``list(map(fn, items))``, possibly on threads; output order always follows input order."""
    items = list(items)
    workers = worker_count() if workers is None else workers
    if workers <= 1 or len(items) <= 1:
        return [fn(x) for x in items]
    with ThreadPoolExecutor(max_workers=min(workers, len(items))) as ex:
        return list(ex.map(fn, items))
