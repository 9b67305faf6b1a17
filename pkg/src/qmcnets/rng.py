"""Deterministic, splittable random streams.

A stream is a seed plus an algorithm label.  Independent substreams are
derived from a key tuple (for instance ``(dimension, role)``) so results do
not depend on the order in which substreams are consumed.
"""

from dataclasses import dataclass

import numpy as np

__all__ = ["RngStream", "fresh_seed"]


def fresh_seed():
    """Draw a 63-bit seed from OS entropy (to be recorded by the caller)."""
    return int(np.random.SeedSequence().generate_state(1, dtype=np.uint64)[0] >> 1)


@dataclass(frozen=True)
class RngStream:
    seed: int
    algorithm: str = "PCG64"

    def __post_init__(self):
        if self.algorithm != "PCG64":
            raise ValueError(f"unsupported RNG algorithm {self.algorithm!r}")
        object.__setattr__(self, "seed", int(self.seed) & (2**64 - 1))

    def generator(self, *key):
        """A fresh numpy Generator for the substream named by ``key``."""
        ss = np.random.SeedSequence(self.seed, spawn_key=tuple(int(k) for k in key))
        return np.random.Generator(np.random.PCG64(ss))

    def child(self, *key):
        """A new RngStream whose seed is derived from this one and ``key``."""
        ss = np.random.SeedSequence(self.seed, spawn_key=tuple(int(k) for k in key))
        return RngStream(int(ss.generate_state(1, dtype=np.uint64)[0]), self.algorithm)
