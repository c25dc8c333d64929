"""Reproducible, independent random streams.

Each stream is a Philox (counter-based) generator keyed by a seed sequence
built from ``(master_seed, stream_index, *sub)``, so any path of an ensemble
can be regenerated on its own, in any order, on any thread.
"""

from __future__ import annotations

import math

import numpy as np


class RngStream:
    def __init__(self, master_seed: int, stream_index: int = 0, sub: tuple = ()):
        if master_seed < 0 or master_seed >= 2**64:
            raise ValueError("master_seed must be an unsigned 64-bit integer")
        if stream_index < 0:
            raise ValueError("stream_index must be >= 0")
        self.master_seed = int(master_seed)
        self.stream_index = int(stream_index)
        self.sub = tuple(int(k) for k in sub)
        seq = np.random.SeedSequence(
            self.master_seed, spawn_key=(self.stream_index, *self.sub)
        )
        self.generator = np.random.Generator(np.random.Philox(seq))

    def __repr__(self):
        return f"RngStream({self.master_seed}, {self.stream_index}, sub={self.sub})"

    def substream(self, k: int) -> "RngStream":
        """Fresh independent stream; does not consume draws from ``self``."""
        return RngStream(self.master_seed, self.stream_index, self.sub + (k,))

    def brownian_increments(self, n: int, dt: float) -> np.ndarray:
        return math.sqrt(dt) * self.generator.standard_normal(n)
