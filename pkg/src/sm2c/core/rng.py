"""Deterministic randomness with named substreams.

Built on numpy's Philox counter-based bit generator. A stream is identified
by (seed, path); `child()` derives an independent substream from a name, so
components that are toggled off consume nothing from the streams of the
components that stay on. The same seed and the same sequence of draw calls
reproduce bit-identical values on any platform.
"""

from __future__ import annotations

import hashlib

import numpy as np


def _path_words(path: tuple) -> tuple[int, ...]:
    words: list[int] = []
    for part in path:
        if isinstance(part, (int, np.integer)):
            words.append(int(part) & 0xFFFFFFFF)
        else:
            digest = hashlib.blake2s(str(part).encode("utf-8"), digest_size=8).digest()
            words.append(int.from_bytes(digest[:4], "little"))
            words.append(int.from_bytes(digest[4:], "little"))
    return tuple(words)


class RngState:
    """Seeded random stream; `counter` counts draw calls consumed."""

    def __init__(self, seed: int, _path: tuple = ()):
        self.seed = int(seed)
        self.path = tuple(_path)
        self.counter = 0
        seq = np.random.SeedSequence(entropy=self.seed, spawn_key=_path_words(self.path))
        self._gen = np.random.Generator(np.random.Philox(seq))

    def __repr__(self):
        return f"RngState(seed={self.seed}, path={self.path}, counter={self.counter})"

    def child(self, *parts) -> "RngState":
        """Derive an independent substream; does not consume parent draws."""
        return RngState(self.seed, self.path + tuple(parts))

    def uniform(self, low: float = 0.0, high: float = 1.0, size=None):
        self.counter += 1
        return self._gen.uniform(low, high, size=size)

    def normal(self, loc: float = 0.0, scale: float = 1.0, size=None):
        self.counter += 1
        return self._gen.normal(loc, scale, size=size)

    def integers(self, low: int, high: int, size=None):
        """Draw integers from [low, high) like numpy's Generator.integers."""
        self.counter += 1
        return self._gen.integers(low, high, size=size)

    def choice(self, n: int, size: int, replace: bool = False) -> np.ndarray:
        self.counter += 1
        return self._gen.choice(n, size=size, replace=replace)

    def permutation(self, n: int) -> np.ndarray:
        self.counter += 1
        return self._gen.permutation(n)

    def bernoulli(self, p: float) -> bool:
        self.counter += 1
        return bool(self._gen.uniform() < p)
