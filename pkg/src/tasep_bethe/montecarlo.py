"""Event-driven simulation of the periodic TASEP.

A particle on site j hops to j+1 (mod M) at rate 1 when that site is empty,
the same convention as the sector generator.  Samples are advanced in
vectorised blocks; each block draws from its own Philox stream keyed by
(seed, block index), so results do not depend on how blocks are scheduled.
"""
from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import asdict, dataclass

import numpy as np

from .combinat import RingShape

BLOCK = 4096


@dataclass(frozen=True)
class McConfig:
    shape: RingShape
    samples: int
    t: float
    m: int
    seed: int = 0

    def __post_init__(self):
        if self.samples < 1:
            raise ValueError("samples must be >= 1")
        if not self.t >= 0:
            raise ValueError("t must be non-negative")
        if not 1 <= self.m <= self.shape.M:
            raise ValueError(f"m must lie in [1, {self.shape.M}]")
        if not 0 <= self.seed < 2**64:
            raise ValueError("seed must be a 64-bit unsigned integer")


@dataclass(frozen=True)
class McEstimate:
    mean: float
    std_error: float
    samples: int

    def to_json(self) -> dict:
        return asdict(self)


def block_rng(seed: int, block: int) -> np.random.Generator:
    return np.random.Generator(np.random.Philox(np.random.SeedSequence([seed, block])))


def uniform_configurations(shape: RingShape, n: int, rng) -> np.ndarray:
    """n configurations drawn uniformly from the sector, as (n, M) booleans."""
    keys = rng.random((n, shape.M))
    sites = np.argsort(keys, axis=1)[:, : shape.N]
    occ = np.zeros((n, shape.M), dtype=bool)
    np.put_along_axis(occ, sites, True, axis=1)
    return occ


def advance(occ: np.ndarray, t: float, rng) -> np.ndarray:
    """Run every row of ``occ`` forward by time t, in place."""
    n, M = occ.shape
    clock = np.zeros(n)
    live = np.arange(n)
    while live.size:
        sub = occ[live]
        mobile = sub & ~np.roll(sub, -1, axis=1)
        k = mobile.sum(axis=1)
        jammed = k == 0
        clock[live[jammed]] = np.inf
        clock[live] += rng.exponential(1.0, live.size) / np.maximum(k, 1)
        go = clock[live] <= t
        live, mobile, k = live[go], mobile[go], k[go]
        if not live.size:
            break
        pick = np.floor(rng.random(live.size) * k).astype(np.int64)
        # column of the pick-th mobile particle in each row
        j = np.argmax(np.cumsum(mobile, axis=1) > pick[:, None], axis=1)
        occ[live, j] = False
        occ[live, (j + 1) % M] = True
    return occ


def _block(cfg: McConfig, index: int, size: int) -> np.ndarray:
    rng = block_rng(cfg.seed, index)
    occ = uniform_configurations(cfg.shape, size, rng)
    before = ~occ[:, cfg.m - 1]
    advance(occ, cfg.t, rng)
    return before & ~occ[:, 0]


def estimate_correlation(cfg: McConfig, threads: int = 1) -> McEstimate:
    """Sample mean of [site m empty at 0] * [site 1 empty at t] in the steady state."""
    shape = cfg.shape
    if shape.N == 0 or shape.N == shape.M:
        value = 1.0 if shape.N == 0 else 0.0
        return McEstimate(value, 0.0, cfg.samples)
    sizes = [BLOCK] * (cfg.samples // BLOCK)
    if cfg.samples % BLOCK:
        sizes.append(cfg.samples % BLOCK)
    if threads > 1:
        with ThreadPoolExecutor(threads) as pool:
            hits = list(pool.map(lambda a: _block(cfg, *a), enumerate(sizes)))
    else:
        hits = [_block(cfg, i, s) for i, s in enumerate(sizes)]
    count = int(sum(int(h.sum()) for h in hits))
    n = cfg.samples
    mean = count / n
    # indicators: sample variance with ddof=1 in closed form
    var = (count - n * mean * mean) / (n - 1) if n > 1 else 0.0
    return McEstimate(mean, math.sqrt(max(var, 0.0) / n), n)


def simulate_configurations(shape: RingShape, start_mask: int, t: float,
                            samples: int, seed: int = 0) -> np.ndarray:
    """Bitmasks reached at time t from a fixed start, one per sample."""
    bits = np.array([(start_mask >> i) & 1 for i in range(shape.M)], dtype=bool)
    if bits.sum() != shape.N:
        raise ValueError("start configuration has the wrong particle number")
    occ = np.tile(bits, (samples, 1))
    advance(occ, t, block_rng(seed, 0))
    return occ.astype(np.int64) @ (1 << np.arange(shape.M, dtype=np.int64))
