"""Deterministic chunked evaluation.

Work is cut into chunks whose boundaries depend only on the problem size,
never on the number of workers, and the per-chunk partial sums are combined
by a fixed pairwise tree.  The floating point result is therefore the same
bit pattern for any ``workers`` value.
"""

from __future__ import annotations

from concurrent.futures import ThreadPoolExecutor
from typing import Callable, Sequence, TypeVar

T = TypeVar("T")


def chunk_ranges(n: int, size: int) -> list[tuple[int, int]]:
    size = max(1, int(size))
    return [(a, min(a + size, n)) for a in range(0, n, size)]


def tree_sum(parts: Sequence[T]) -> T:
    """Pairwise reduction in a fixed order."""
    if not parts:
        raise ValueError("nothing to sum")
    level = list(parts)
    while len(level) > 1:
        nxt = [level[i] + level[i + 1] for i in range(0, len(level) - 1, 2)]
        if len(level) % 2:
            nxt.append(level[-1])
        level = nxt
    return level[0]


def map_chunks(fn: Callable[[int, int], T], ranges: Sequence[tuple[int, int]],
               workers: int = 1) -> list[T]:
    """``[fn(a, b) for a, b in ranges]``, optionally on a thread pool."""
    if workers <= 1 or len(ranges) <= 1:
        return [fn(a, b) for a, b in ranges]
    with ThreadPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(lambda r: fn(*r), ranges))


def chunked_sum(fn: Callable[[int, int], T], n: int, size: int, workers: int = 1) -> T:
    return tree_sum(map_chunks(fn, chunk_ranges(n, size), workers))
