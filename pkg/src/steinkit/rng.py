"""Seeded, splittable random streams.

A stream is identified by ``(seed, stream_id)``. Substreams are derived with
:class:`numpy.random.SeedSequence` spawn keys, so that replications of a
Monte Carlo study can run in any order or on any number of workers and still
produce identical draws.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

__all__ = ["RngStream", "as_stream"]

_MASK64 = (1 << 64) - 1


@dataclass(frozen=True)
class RngStream:
    """Deterministic PCG64 stream keyed by ``(seed, stream_id)``.

    Parameters
    ----------
    seed : int
        Master seed (reduced modulo 2**64).
    stream_id : int
        Stream identifier (reduced modulo 2**64).
    path : tuple of int
        Spawn path below the stream; empty for the root stream.
    """

    seed: int
    stream_id: int = 0
    path: tuple = ()

    def __post_init__(self):
        object.__setattr__(self, "seed", int(self.seed) & _MASK64)
        object.__setattr__(self, "stream_id", int(self.stream_id) & _MASK64)
        object.__setattr__(self, "path", tuple(int(p) for p in self.path))

    def seed_sequence(self) -> np.random.SeedSequence:
        return np.random.SeedSequence(entropy=self.seed, spawn_key=(self.stream_id,) + self.path)

    def generator(self) -> np.random.Generator:
        """Fresh generator positioned at the start of the stream."""
        return np.random.Generator(np.random.PCG64(self.seed_sequence()))

    def substream(self, i: int) -> "RngStream":
        """Child stream number ``i``; disjoint from siblings and from the parent."""
        return RngStream(self.seed, self.stream_id, self.path + (int(i),))


def as_stream(rng) -> np.random.Generator:
    """Coerce an :class:`RngStream`, ``Generator``, int seed or ``None`` to a Generator."""
    if isinstance(rng, RngStream):
        return rng.generator()
    if isinstance(rng, np.random.Generator):
        return rng
    return np.random.default_rng(rng)
