"""Counter-based random streams and deterministic chunked parallelism.

Every draw in the package is addressed by ``(seed, stream_id, *subkeys)``.
Subkeys name the quantity being drawn and the chunk index, so the sample
sequence does not depend on how many workers process the chunks.
"""

from __future__ import annotations

import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from typing import Callable, Iterable, Sequence, TypeVar

import numpy as np

T = TypeVar("T")

CHUNK_SIZE = 1 << 16
_MASK64 = (1 << 64) - 1

_max_workers = 1


def set_threads(n: int) -> None:
    """Cap the number of worker threads used by chunked computations."""
    global _max_workers
    if n < 1:
        raise ValueError("thread count must be >= 1")
    _max_workers = int(n)


def get_threads() -> int:
    return _max_workers


@dataclass(frozen=True)
class RngStream:
    seed: int
    stream_id: int = 0

    def __post_init__(self):
        if not (0 <= self.seed <= _MASK64) or not (0 <= self.stream_id <= _MASK64):
            raise ValueError("seed and stream_id must be 64-bit unsigned integers")

    def generator(self, *subkeys: int) -> np.random.Generator:
        """A Philox generator keyed by this stream and ``subkeys``."""
        ss = np.random.SeedSequence(self.seed, spawn_key=(self.stream_id, *subkeys))
        return np.random.Generator(np.random.Philox(ss))

    def substream(self, stream_id: int) -> "RngStream":
        return RngStream(self.seed, stream_id & _MASK64)


def default_seed() -> int:
    return int(os.environ.get("SECRECY_LAB_SEED", "0"))


def chunk_sizes(n: int, chunk: int = CHUNK_SIZE) -> list[int]:
    full, rest = divmod(n, chunk)
    return [chunk] * full + ([rest] if rest else [])


def parallel_map(fn: Callable[[T], object], items: Sequence[T] | Iterable[T]) -> list:
    """Ordered map over ``items``; uses threads when more than one is allowed."""
    items = list(items)
    if _max_workers <= 1 or len(items) <= 1:
        return [fn(x) for x in items]
    with ThreadPoolExecutor(max_workers=_max_workers) as pool:
        return list(pool.map(fn, items))
