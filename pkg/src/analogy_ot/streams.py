"""Seeded random streams.

Every stochastic step in the package draws from a generator keyed by
``(seed, *stream_id)``. Two streams with different ids are independent for
practical purposes, and the sequence of a stream never depends on how many
workers are running or in which order jobs finish.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

# Stream-id namespaces. The first element of a stream key identifies the
# consumer so that, say, replicate 3 of the bootstrap never shares draws with
# projection 3 of a sliced distance.
SLICED = 1
BOOTSTRAP = 2
GAUSSIAN = 3
BLOBS = 4
PAIRS = 5
JITTER = 6

_MASK64 = (1 << 64) - 1


@dataclass(frozen=True)
class SeededStream:
    seed: int
    stream_id: tuple[int, ...] = ()

    def __post_init__(self):
        if not isinstance(self.seed, (int, np.integer)) or isinstance(self.seed, bool):
            raise TypeError(f"seed must be an integer, got {type(self.seed).__name__}")
        if not 0 <= int(self.seed) <= _MASK64:
            raise ValueError("seed must lie in [0, 2**64)")

    def child(self, *key: int) -> "SeededStream":
        return SeededStream(self.seed, self.stream_id + tuple(int(k) for k in key))

    def generator(self) -> np.random.Generator:
        """Fresh PCG64 generator; identical for identical (seed, stream_id)."""
        ss = np.random.SeedSequence(entropy=int(self.seed), spawn_key=self.stream_id)
        return np.random.Generator(np.random.PCG64(ss))


def rng(seed: int, *stream_id: int) -> np.random.Generator:
    return SeededStream(seed, tuple(int(s) for s in stream_id)).generator()
