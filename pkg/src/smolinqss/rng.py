"""Seeded, splittable random streams.

Streams are Philox (counter-based) generators keyed by a 64-bit master seed
and a path of names. ``Rng(seed).split("alice")`` always yields the same
stream, independent of how much any sibling stream has been consumed, so a
whole session replays bit-exactly from one seed.
"""

from __future__ import annotations

import zlib

import numpy as np

from .errors import InvalidParameterError

_U64 = (1 << 64) - 1


def _name_key(name: str) -> int:
    return zlib.crc32(name.encode("utf-8"))


class Rng:
    def __init__(self, seed: int, path: tuple[str, ...] = ()):
        seed = int(seed)
        if not 0 <= seed <= _U64:
            raise InvalidParameterError(f"seed must be an unsigned 64-bit integer, got {seed}")
        self.seed = seed
        self.path = tuple(path)
        seq = np.random.SeedSequence(entropy=seed, spawn_key=tuple(_name_key(p) for p in self.path))
        self.generator = np.random.Generator(np.random.Philox(seq))

    def split(self, name: str) -> "Rng":
        """Child stream identified by ``name``; does not advance this stream."""
        return Rng(self.seed, self.path + (name,))

    def __repr__(self):
        return f"Rng(seed={self.seed}, path={'/'.join(self.path) or '<root>'})"

    def random(self, size=None):
        return self.generator.random(size)

    def integers(self, low, high=None, size=None):
        return self.generator.integers(low, high, size=size)

    def choice(self, a, size=None, replace=True, p=None):
        return self.generator.choice(a, size=size, replace=replace, p=p)

    def categorical(self, probs: np.ndarray, size: int) -> np.ndarray:
        """Draw ``size`` indices distributed according to ``probs``.

        Uses inverse-CDF sampling on uniforms so the consumption of the
        stream depends only on ``size``.
        """
        cdf = np.cumsum(np.asarray(probs, dtype=float))
        cdf /= cdf[-1]
        u = self.generator.random(size)
        return np.minimum(np.searchsorted(cdf, u, side="right"), len(cdf) - 1)
