"""Order-preserving parallel map.

Work items are always split the same way regardless of the worker count, and
every item carries its own seed stream, so results are identical for any pool
size.
"""

from __future__ import annotations

from concurrent.futures import ProcessPoolExecutor
from typing import Callable, Iterable, Sequence, TypeVar

import numpy as np

T = TypeVar("T")
R = TypeVar("R")


def pmap(func: Callable[[T], R], items: Iterable[T], workers: int = 1) -> list[R]:
    seq = list(items)
    if workers <= 1 or len(seq) <= 1:
        return [func(x) for x in seq]
    with ProcessPoolExecutor(max_workers=min(workers, len(seq))) as pool:
        return list(pool.map(func, seq))


def rng_for(seed: int, *stream: int) -> np.random.Generator:
    """Independent generator for one (seed, stream...) coordinate."""
    return np.random.default_rng([int(seed) & (2**63 - 1), *(int(s) for s in stream)])


def chunks(count: int, size: int) -> list[tuple[int, int]]:
    return [(start, min(count, start + size)) for start in range(0, count, size)]


def split_evenly(seq: Sequence[T], size: int) -> list[Sequence[T]]:
    return [seq[a:b] for a, b in chunks(len(seq), size)]
