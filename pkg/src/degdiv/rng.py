"""Reproducible random streams.

Every randomized operation in the package draws from a Philox4x64 counter-based
generator keyed by (seed, *path) through numpy's SeedSequence. numpy guarantees
the Philox bit stream is identical across platforms and releases, so any result
is pinned by its seed and the documented path labels alone. Concurrent workers
must take their own `stream(seed, ...)` with distinct paths; generators are
never shared between threads.
"""

from __future__ import annotations

import hashlib

import numpy as np

_MOD = 1 << 64


def _component(value) -> int:
    if isinstance(value, (int, np.integer)):
        return int(value) % _MOD
    if isinstance(value, str):
        digest = hashlib.sha256(value.encode("utf8")).digest()
        return int.from_bytes(digest[:8], "little")
    if isinstance(value, float):
        # floats key by their exact bit pattern, not a rounded repr
        return int(np.float64(value).view(np.uint64))
    raise TypeError(f"unsupported stream path component: {value!r}")


def stream(seed: int, *path) -> np.random.Generator:
    """Return a Philox generator determined by the seed and path labels."""
    entropy = [_component(seed)] + [_component(p) for p in path]
    return np.random.Generator(np.random.Philox(np.random.SeedSequence(entropy)))


class ForcedStream:
    """Test hook standing in for a Generator with scripted draws.

    Samplers only ever call uniform() and random(); queue the arrays those
    calls should return, in order. Shapes are broadcast to the requested size
    so a scalar can force a whole batch.
    """

    def __init__(self, *draws):
        self._queue = [np.asarray(d, dtype=float) for d in draws]

    def _next(self, size):
        if not self._queue:
            raise RuntimeError("ForcedStream exhausted")
        value = self._queue.pop(0)
        if size is None:
            return float(value)
        return np.broadcast_to(value, size).astype(float).copy()

    def uniform(self, low=0.0, high=1.0, size=None):
        out = self._next(size)
        lo, hi = float(low), float(high)
        if np.any(out < lo) or np.any(out > hi):
            raise ValueError(f"forced draw outside [{lo}, {hi}]")
        return out

    def random(self, size=None):
        return self._next(size)
