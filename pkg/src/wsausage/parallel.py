"""Deterministic fan-out over path indices."""
from __future__ import annotations

import os
from concurrent.futures import ProcessPoolExecutor
from typing import Callable, Optional, Sequence

import numpy as np

WORKERS_ENV = "WSAUSAGE_WORKERS"


def resolve_workers(workers: Optional[int] = None) -> int:
    """Flag value, else the environment variable, else the CPU count."""
    if workers is not None:
        n = int(workers)
    elif os.environ.get(WORKERS_ENV):
        n = int(os.environ[WORKERS_ENV])
    else:
        n = os.cpu_count() or 1
    if n < 1:
        raise ValueError("worker count must be >= 1")
    return n


def _run_chunk(job):
    fn, common, indices = job
    return [fn(common, int(i)) for i in indices]


def map_indices(fn: Callable, common, indices: Sequence[int],
                workers: Optional[int] = None) -> list:
    """``[fn(common, i) for i in indices]``, possibly across processes.

    Results come back in index order whatever the worker count, so any
    reduction over them is bitwise reproducible.
    """
    indices = list(indices)
    nw = min(resolve_workers(workers), max(1, len(indices)))
    if nw == 1:
        return [fn(common, i) for i in indices]
    chunks = [c for c in np.array_split(np.asarray(indices), 4 * nw) if c.size]
    with ProcessPoolExecutor(nw) as ex:
        parts = ex.map(_run_chunk, [(fn, common, c) for c in chunks])
        return [r for part in parts for r in part]
