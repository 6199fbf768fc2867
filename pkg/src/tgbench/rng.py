"""Deterministic random number generation for every sampled artifact.

All sampling in the harness flows through :class:`SeededRng`, which pins the
bit generator to Philox — a counter-based algorithm whose stream depends only
on the seed, not on the platform, word size or global interpreter state.  Two
processes given the same seed therefore draw identical sequences.
"""

from __future__ import annotations

import numpy as np


class SeededRng:
    """A Philox-backed generator addressed by an explicit 64-bit seed."""

    def __init__(self, seed: int):
        seed = int(seed)
        if not 0 <= seed < 2 ** 64:
            raise ValueError("seed must fit in an unsigned 64-bit integer")
        self.seed = seed
        self._gen = np.random.Generator(np.random.Philox(seed))

    def integers(self, low, high=None, size=None):
        return self._gen.integers(low, high=high, size=size)

    def uniform(self, low=0.0, high=1.0, size=None):
        return self._gen.uniform(low, high, size=size)

    def choice_without_replacement(self, values, k: int) -> np.ndarray:
        """Draw `k` distinct elements of `values`, uniformly."""
        values = np.asarray(values)
        if k > len(values):
            raise ValueError(f"cannot draw {k} items from a pool of {len(values)}")
        return self._gen.choice(values, size=k, replace=False, shuffle=False)

    def spawn(self, stream: int) -> "SeededRng":
        """A child generator for a named sub-stream (repeat index, epoch, ...)."""
        return SeededRng((self.seed * 0x9E3779B97F4A7C15 + stream + 1) % 2 ** 64)
