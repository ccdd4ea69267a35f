"""Forward Monte Carlo of the Galton-Watson process.

Every trial draws from its own counter-based stream derived from
``(seed, trial index)``; trials are grouped in fixed-size blocks and block
results are always combined in block order, so the thread count affects
speed only.
"""
from __future__ import annotations

from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from . import kernels
from .offspring import OffspringLaw
from .rng import root_key

BLOCK = 1 << 15


@lru_cache(maxsize=32)
def _tables(law: OffspringLaw):
    prob, alias, tail_start = law.sampler_tables()
    return prob, alias, float(tail_start), int(law.code), float(law.alpha)


def sampler_args(law: OffspringLaw):
    return _tables(law)


def sample(law: OffspringLaw, count: int, seed: int = 0, start: int = 0) -> np.ndarray:
    """``count`` exact offspring draws; draw i uses the stream of index start + i."""
    return kernels.sample_block(root_key(seed), start, count, *sampler_args(law))


@dataclass(frozen=True)
class Trajectory:
    z: np.ndarray
    overflow: bool = False

    @property
    def absorbed_at(self) -> int | None:
        zero = np.nonzero(self.z == 0)[0]
        return int(zero[0]) if zero.size else None


@dataclass(frozen=True)
class ReducedCounts:
    """Z(m, n) for all m = 0..n and the MRCA distance d(n) = n - beta(n)."""

    counts: np.ndarray
    mrca_distance: int | None

    def at(self, m: int) -> int:
        return int(self.counts[m])


def simulate_trajectory(law: OffspringLaw, n: int, seed: int = 0, trial: int = 0) -> Trajectory:
    if n < 0:
        raise ValueError("n must be nonnegative")
    z, overflow = kernels.trajectory(root_key(seed), trial, n, *sampler_args(law))
    return Trajectory(z=z, overflow=bool(overflow))


def simulate_reduced(law: OffspringLaw, n: int, seed: int = 0, trial: int = 0) -> tuple[Trajectory, ReducedCounts]:
    """Family tree to depth n; returns the generation sizes and the reduced counts."""
    if n < 0:
        raise ValueError("n must be nonnegative")
    level, reduced, ok = kernels.genealogy_one(root_key(seed), trial, n, *sampler_args(law))
    d = None
    if ok and level[n] > 0 and n > 0:
        beta = max(m for m in range(n) if reduced[m] == 1)
        d = n - beta
    return Trajectory(z=level, overflow=not ok), ReducedCounts(counts=reduced, mrca_distance=d)


def run_blocks(fn, first_block: int, n_blocks: int, threads: int = 1, block: int = BLOCK):
    """Apply ``fn(t0, count)`` to consecutive trial blocks; results in block order."""
    starts = [(first_block + b) * block for b in range(n_blocks)]
    if threads <= 1 or n_blocks == 1:
        return [fn(t0, block) for t0 in starts]
    with ThreadPoolExecutor(max_workers=threads) as ex:
        return list(ex.map(lambda t0: fn(t0, block), starts))


def final_sizes(law: OffspringLaw, n: int, trials: int, seed: int = 0, threads: int = 1) -> np.ndarray:
    """Z(n) for trials 0..trials-1 (-1 marks an overflowed trial)."""
    key = root_key(seed)
    args = sampler_args(law)
    n_blocks = -(-trials // BLOCK)
    parts = run_blocks(lambda t0, c: kernels.generation_block(key, t0, c, n, *args), 0, n_blocks, threads)
    return np.concatenate(parts)[:trials]
