"""Seeded per-iteration random streams (SplitMix64) and uniform sampling.

Every iteration of an ensemble gets its own stream derived directly from
``(master_seed, iteration)``, so any iteration can be regenerated without
replaying the ones before it.
"""

from __future__ import annotations

import math
from collections.abc import Sequence

import numpy as np

__all__ = [
    "GOLDEN_GAMMA",
    "RngError",
    "RngStream",
    "splitmix64_mix",
    "derive_stream",
    "next_u64",
    "sample_int_uniform",
    "sample_float_uniform",
]

MASK64 = (1 << 64) - 1
GOLDEN_GAMMA = 0x9E3779B97F4A7C15
_MUL1 = 0xBF58476D1CE4E5B9
_MUL2 = 0x94D049BB133111EB
_TWO64 = 1 << 64
_INV_2_53 = 2.0**-53


class RngError(ValueError):
    def __init__(self, kind: str, message: str):
        super().__init__(f"{kind}: {message}")
        self.kind = kind


def _finalize(z: int) -> int:
    z = ((z ^ (z >> 30)) * _MUL1) & MASK64
    z = ((z ^ (z >> 27)) * _MUL2) & MASK64
    return z ^ (z >> 31)


def splitmix64_mix(x: int) -> int:
    """Output of one SplitMix64 ``next()`` call made from state ``x``."""
    return _finalize((x + GOLDEN_GAMMA) & MASK64)


def _finalize_array(z: np.ndarray) -> np.ndarray:
    z = (z ^ (z >> np.uint64(30))) * np.uint64(_MUL1)
    z = (z ^ (z >> np.uint64(27))) * np.uint64(_MUL2)
    return z ^ (z >> np.uint64(31))


class RngStream:
    """SplitMix64 generator state. Copy it to fork; never share between workers."""

    __slots__ = ("state",)

    def __init__(self, state: int = 0):
        self.state = state & MASK64

    def __repr__(self) -> str:
        return f"RngStream(0x{self.state:016x})"

    def __eq__(self, other: object) -> bool:
        return isinstance(other, RngStream) and other.state == self.state

    def copy(self) -> RngStream:
        return RngStream(self.state)

    def next_u64(self) -> int:
        self.state = (self.state + GOLDEN_GAMMA) & MASK64
        return _finalize(self.state)

    def u64_array(self, n: int) -> np.ndarray:
        """The next ``n`` outputs as a uint64 array, identical to ``n`` calls of :meth:`next_u64`."""
        steps = np.arange(1, n + 1, dtype=np.uint64)
        with np.errstate(over="ignore"):
            states = np.uint64(self.state) + steps * np.uint64(GOLDEN_GAMMA)
            out = _finalize_array(states)
        self.state = (self.state + n * GOLDEN_GAMMA) & MASK64
        return out

    def next_float(self) -> float:
        """Uniform double in [0, 1) from the top 53 bits."""
        return (self.next_u64() >> 11) * _INV_2_53

    def int_uniform(self, low: int, high: int, shape: Sequence[int]) -> np.ndarray:
        """Inclusive range ``[low, high]``; unbiased by rejection, row-major fill."""
        if low > high:
            raise RngError("empty-range", f"int_uniform low={low} > high={high}")
        shape = tuple(shape)
        n = math.prod(shape)
        span = high - low + 1
        if span >= _TWO64:
            raw = self.u64_array(n)
            values = [low + int(u) for u in raw]
            return np.array(values, dtype=np.int64).reshape(shape)
        limit = _TWO64 - (_TWO64 % span)
        # Fast path: draw n at once; rewind and go draw-by-draw from the first rejection.
        start = self.state
        raw = self.u64_array(n)
        if limit == _TWO64:
            rejected = np.zeros(n, dtype=bool)
        else:
            rejected = raw >= np.uint64(limit)
        if rejected.any():
            first = int(np.argmax(rejected))
            self.state = (start + first * GOLDEN_GAMMA) & MASK64
            tail = []
            for _ in range(n - first):
                u = self.next_u64()
                while u >= limit:
                    u = self.next_u64()
                tail.append(u)
            raw = np.concatenate([raw[:first], np.array(tail, dtype=np.uint64)])
        if span < (1 << 63):
            values = (raw % np.uint64(span)).astype(np.int64) + np.int64(low)
        else:
            values = np.array([low + int(u) % span for u in raw], dtype=np.int64)
        return values.reshape(shape)

    def float_uniform(self, low: float, high: float, shape: Sequence[int]) -> np.ndarray:
        """Half-open range ``[low, high)``, row-major fill."""
        low, high = float(low), float(high)
        if not (math.isfinite(low) and math.isfinite(high)) or not low < high:
            raise RngError("invalid-range", f"float_uniform needs finite low < high, got [{low}, {high})")
        width = high - low
        if not math.isfinite(width):
            raise RngError("invalid-range", f"float_uniform range [{low}, {high}) overflows")
        shape = tuple(shape)
        u = (self.u64_array(math.prod(shape)) >> np.uint64(11)).astype(np.float64) * _INV_2_53
        values = low + u * width
        # low + u*width can round up to high when width is a few ulps.
        values = np.where(values < high, values, np.nextafter(high, low))
        return values.reshape(shape)


def derive_stream(master_seed: int, iteration: int) -> RngStream:
    """Stream for one iteration; no draws from other iterations are involved."""
    inner = splitmix64_mix((iteration & MASK64) ^ GOLDEN_GAMMA)
    return RngStream(splitmix64_mix((master_seed & MASK64) ^ inner))


def next_u64(stream: RngStream) -> int:
    return stream.next_u64()


def sample_int_uniform(stream: RngStream, low: int, high: int, shape: Sequence[int]) -> np.ndarray:
    return stream.int_uniform(low, high, shape)


def sample_float_uniform(stream: RngStream, low: float, high: float, shape: Sequence[int]) -> np.ndarray:
    return stream.float_uniform(low, high, shape)
