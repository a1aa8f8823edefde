"""Seeded Monte Carlo estimation.

Every draw in the package flows through a :class:`RandomStream`, a
``(seed, stream_id)`` pair backed by a PCG64 generator whose seed sequence
carries ``stream_id`` as its spawn key.  Two streams with the same pair
replay the same draws; streams that differ only in ``stream_id`` are
statistically independent, which is what lets sweep points run on separate
workers without changing any output.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np

Sampler = Callable[["RandomStream", int], np.ndarray]

# draws per chunk; bounds memory for n = 1e6 with several factors
CHUNK = 1 << 17


@dataclass
class RandomStream:
    seed: int
    stream_id: int = 0
    generator: np.random.Generator = field(init=False, repr=False, compare=False)

    def __post_init__(self) -> None:
        if not (0 <= self.seed < 2**64 and 0 <= self.stream_id < 2**64):
            raise ValueError("seed and stream_id must be unsigned 64-bit integers")
        seq = np.random.SeedSequence(entropy=self.seed, spawn_key=(self.stream_id,))
        self.generator = np.random.Generator(np.random.PCG64(seq))

    def substream(self, stream_id: int) -> "RandomStream":
        """Fresh stream sharing this seed; used to fan sweep points out."""
        return RandomStream(self.seed, stream_id)


def as_generator(rng) -> np.random.Generator:
    if isinstance(rng, RandomStream):
        return rng.generator
    if isinstance(rng, np.random.Generator):
        return rng
    raise TypeError(f"expected RandomStream or numpy Generator, got {type(rng).__name__}")


@dataclass(frozen=True)
class McEstimate:
    value: float
    stderr: float
    n: int


def _binomial(hits: int, n: int) -> McEstimate:
    p = hits / n
    return McEstimate(p, math.sqrt(p * (1.0 - p) / n), n)


def estimate_probability(
    event: Callable[[np.ndarray], np.ndarray],
    sampler: Sampler,
    n: int,
    rng: RandomStream,
) -> McEstimate:
    """Fraction of ``n`` draws for which ``event`` holds, with binomial stderr.

    ``sampler(rng, k)`` returns ``k`` draws and ``event`` maps an array of
    draws to a boolean array.  Draws are generated in chunks so memory stays
    flat for large ``n``.
    """
    if n < 1:
        raise ValueError("n must be at least 1")
    hits = 0
    done = 0
    while done < n:
        k = min(CHUNK, n - done)
        hits += int(np.count_nonzero(event(sampler(rng, k))))
        done += k
    return _binomial(hits, n)


def estimate_cdf_curve(
    sampler: Sampler,
    grid: Sequence[float],
    n: int,
    rng: RandomStream,
) -> list[McEstimate]:
    """Empirical CDF at every grid point from one pass of ``n`` draws."""
    if n < 1:
        raise ValueError("n must be at least 1")
    grid = np.asarray(grid, dtype=float)
    order = np.argsort(grid)
    counts = np.zeros(grid.size, dtype=np.int64)
    done = 0
    while done < n:
        k = min(CHUNK, n - done)
        draws = np.sort(sampler(rng, k))
        # draws <= g, counted for all thresholds at once
        counts[order] += np.searchsorted(draws, grid[order], side="right")
        done += k
    return [_binomial(int(c), n) for c in counts]


def estimate_mean(
    statistic: Callable[[np.ndarray], np.ndarray],
    sampler: Sampler,
    n: int,
    rng: RandomStream,
) -> McEstimate:
    """Sample mean of ``statistic(draws)`` with its standard error."""
    if n < 1:
        raise ValueError("n must be at least 1")
    total = 0.0
    total_sq = 0.0
    done = 0
    while done < n:
        k = min(CHUNK, n - done)
        vals = np.asarray(statistic(sampler(rng, k)), dtype=float)
        total += float(vals.sum())
        total_sq += float(np.dot(vals, vals))
        done += k
    mean = total / n
    var = max(total_sq / n - mean * mean, 0.0)
    return McEstimate(mean, math.sqrt(var / n), n)
