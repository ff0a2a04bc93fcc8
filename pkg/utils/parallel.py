"""Seeded, order-preserving parallel map used by every Monte-Carlo loop."""

from __future__ import annotations

from concurrent.futures import ProcessPoolExecutor
from typing import Any, Callable, Sequence, TypeVar

import numpy as np

T = TypeVar("T")
U = TypeVar("U")


def spawn_seeds(
    seed: int | np.random.SeedSequence | np.random.Generator | None,
    count: int,
) -> list[np.random.SeedSequence]:
    """
    Pre-assign independent child streams.

    Args:
        seed: Integer seed, SeedSequence, or Generator to split
        count: Number of children

    Returns:
        List of SeedSequence children, one per task
    """
    if isinstance(seed, np.random.Generator):
        base = seed.bit_generator.seed_seq
    elif isinstance(seed, np.random.SeedSequence):
        base = seed
    else:
        base = np.random.SeedSequence(seed)
    return base.spawn(count)


def map_ordered(
    func: Callable[[Any, U], T],
    context: Any,
    items: Sequence[U],
    threads: int = 1,
) -> list[T]:
    """
    Apply ``func(context, item)`` to every item, returning results in input order.

    ``func`` must be a module-level function and ``context`` picklable when
    ``threads > 1``.
    """
    if threads <= 1 or len(items) <= 1:
        return [func(context, item) for item in items]

    chunksize = max(1, len(items) // (threads * 8))
    with ProcessPoolExecutor(max_workers=threads) as executor:
        return list(executor.map(func, [context] * len(items), items, chunksize=chunksize))


def map_seeded(
    func: Callable[[Any, np.random.SeedSequence], T],
    context: Any,
    seeds: Sequence[np.random.SeedSequence],
    threads: int = 1,
) -> list[T]:
    """
    Run one task per pre-spawned seed.

    Output order follows ``seeds`` regardless of worker count, so downstream
    reductions do not depend on scheduling.
    """
    return map_ordered(func, context, seeds, threads)
