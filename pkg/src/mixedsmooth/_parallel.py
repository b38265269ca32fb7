"""Concurrency helper honoring the MIXED_SMOOTH_THREADS environment variable.

Results are always collected in submission order, so parallel execution
cannot change any output; 0 (or unset) means auto, 1 disables threading.
"""

from __future__ import annotations

import os
from concurrent.futures import ThreadPoolExecutor
from typing import Callable, Sequence, TypeVar

T = TypeVar("T")

ENV_VAR = "MIXED_SMOOTH_THREADS"


def thread_count() -> int:
    raw = os.environ.get(ENV_VAR, "0")
    try:
        n = int(raw)
    except ValueError:
        return 1
    if n == 0:
        return min(8, os.cpu_count() or 1)
    return max(1, n)


def run_tasks(tasks: Sequence[Callable[[], T]]) -> list[T]:
    """Run independent thunks, returning results in task order."""
    n = thread_count()
    if n <= 1 or len(tasks) <= 1:
        return [t() for t in tasks]
    with ThreadPoolExecutor(max_workers=min(n, len(tasks))) as pool:
        futures = [pool.submit(t) for t in tasks]
        return [f.result() for f in futures]
