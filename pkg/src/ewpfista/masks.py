"""Seeded k-space undersampling masks.

Randomness comes from the raw 64-bit output stream of ``PCG64`` seeded
through ``SeedSequence(seed)``; both are stable across numpy releases and
platforms. Bounded integers use rejection sampling on that stream and
subsets are drawn with a partial Fisher-Yates shuffle, so masks do not
depend on numpy's higher-level sampling routines.
"""

from __future__ import annotations

import math

import numpy as np

from .core import GridError, SamplingMask

__all__ = [
    "DEFAULT_CENTER_FRACTION",
    "SeededStream",
    "cartesian_mask",
    "random2d_mask",
    "round_half_up",
]

DEFAULT_CENTER_FRACTION = 0.04
_U64 = 1 << 64


def round_half_up(v: float) -> int:
    return int(math.floor(v + 0.5))


class SeededStream:
    """Deterministic integer source over PCG64's raw 64-bit words."""

    def __init__(self, seed: int):
        if not 0 <= seed < _U64:
            raise ValueError(f"seed must be an unsigned 64-bit integer, got {seed}")
        self._bits = np.random.PCG64(seed)

    def next_u64(self) -> int:
        return int(self._bits.random_raw())

    def below(self, n: int) -> int:
        """Uniform integer in ``[0, n)``."""
        if n <= 0:
            raise ValueError("n must be positive")
        limit = _U64 - (_U64 % n)
        while True:
            r = self.next_u64()
            if r < limit:
                return r % n

    def sample(self, population: np.ndarray, k: int) -> np.ndarray:
        """``k`` distinct elements of ``population`` (partial Fisher-Yates)."""
        pool = np.asarray(population).tolist()
        n = len(pool)
        if not 0 <= k <= n:
            raise ValueError(f"cannot draw {k} items from {n}")
        for i in range(k):
            j = i + self.below(n - i)
            pool[i], pool[j] = pool[j], pool[i]
        return np.array(pool[:k], dtype=np.int64)


def _center_block(n: int, count: int) -> slice:
    start = n // 2 - count // 2
    return slice(start, start + count)


def cartesian_mask(
    height: int,
    width: int,
    acceleration: float,
    center_fraction: float = DEFAULT_CENTER_FRACTION,
    seed: int = 0,
) -> SamplingMask:
    """Phase-encode (column) undersampling.

    Keeps ``round(width / acceleration)`` full columns: the central
    ``ceil(center_fraction * width)`` plus a uniformly random complement.
    """
    if height < 1 or width < 1:
        raise GridError("mask dimensions must be positive")
    if not acceleration >= 1.0:
        raise ValueError(f"acceleration must be >= 1, got {acceleration}")
    if not 0.0 <= center_fraction < 1.0:
        raise ValueError("center_fraction must be in [0, 1)")
    n_center = math.ceil(center_fraction * width)
    budget = min(width, round_half_up(width / acceleration))
    if budget < n_center:
        raise ValueError(f"line budget {budget} smaller than center block {n_center}")
    if budget < 1:
        raise ValueError("acceleration leaves no columns to sample")

    cols = np.zeros(width, dtype=bool)
    cols[_center_block(width, n_center)] = True
    rest = np.flatnonzero(~cols)
    cols[SeededStream(seed).sample(rest, budget - n_center)] = True
    cells = np.broadcast_to(cols, (height, width))
    kind = "full" if budget == width else "cartesian1d"
    return SamplingMask(cells, kind=kind, seed=seed, nominal_rate=1.0 / acceleration)


def random2d_mask(
    height: int,
    width: int,
    rate: float,
    center_fraction: float = DEFAULT_CENTER_FRACTION,
    seed: int = 0,
) -> SamplingMask:
    """Point-wise random mask with exactly ``floor(rate * height * width)`` samples.

    A central square of side ``ceil(center_fraction * min(height, width))``
    is always sampled.
    """
    if height < 1 or width < 1:
        raise GridError("mask dimensions must be positive")
    if not 0.0 < rate <= 1.0:
        raise ValueError(f"rate must be in (0, 1], got {rate}")
    if not 0.0 <= center_fraction < 1.0:
        raise ValueError("center_fraction must be in [0, 1)")
    side = math.ceil(center_fraction * min(height, width))
    budget = math.floor(rate * height * width)
    if budget < side * side:
        raise ValueError(f"point budget {budget} smaller than center block {side * side}")
    if budget < 1:
        raise ValueError("rate leaves no points to sample")

    cells = np.zeros((height, width), dtype=bool)
    cells[_center_block(height, side), _center_block(width, side)] = True
    flat = cells.reshape(-1)
    rest = np.flatnonzero(~flat)
    flat[SeededStream(seed).sample(rest, budget - side * side)] = True
    kind = "full" if budget == height * width else "random2d"
    return SamplingMask(cells, kind=kind, seed=seed, nominal_rate=rate)
