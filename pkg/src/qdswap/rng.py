"""Deterministic random streams keyed by (seed, block index).

Sample ``i`` always lives in block ``i // BLOCK_SIZE`` and is drawn at a
fixed offset of that block's stream, so the values a sample receives depend
only on the seed and its index, never on worker count or execution order.
"""

from __future__ import annotations

import os
from concurrent.futures import ThreadPoolExecutor

import numpy as np

BLOCK_SIZE = 1 << 16


def check_seed(seed: int) -> int:
    seed = int(seed)
    if not 0 <= seed < 2**64:
        raise ValueError("seed must be an unsigned 64-bit integer")
    return seed


def block_rng(seed: int, block: int, stream: int = 0) -> np.random.Generator:
    ss = np.random.SeedSequence(check_seed(seed), spawn_key=(stream, block))
    return np.random.Generator(np.random.PCG64(ss))


def blocks(n: int, block_size: int = BLOCK_SIZE):
    """Yield ``(block_index, start, stop)`` covering ``range(n)``."""
    for k, start in enumerate(range(0, n, block_size)):
        yield k, start, min(start + block_size, n)


def default_workers() -> int:
    """Worker count, capped by the ``QDSWAP_THREADS`` environment variable."""
    n = os.cpu_count() or 1
    cap = os.environ.get("QDSWAP_THREADS")
    if cap:
        n = min(n, max(1, int(cap)))
    return n


def map_blocks(fn, n: int, workers: int | None = None, block_size: int = BLOCK_SIZE) -> list:
    """Apply ``fn(block_index, start, stop)`` to every block; results in block order."""
    spans = list(blocks(n, block_size))
    workers = default_workers() if workers is None else max(1, int(workers))
    if workers == 1 or len(spans) == 1:
        return [fn(*span) for span in spans]
    with ThreadPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(lambda span: fn(*span), spans))
