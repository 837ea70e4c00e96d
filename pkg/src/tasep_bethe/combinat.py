"""Configurations of N hard-core particles on an M-site ring.

Site labels run 1..M and site ``j`` is stored in bit ``j - 1`` of an integer
bitmask.  The descending labelling M, M-1, ..., 1 used when drawing the ring
right-to-left is purely presentational; nothing here depends on it.

Configurations of a sector are ranked colexicographically, which coincides
with ascending numeric order of the bitmasks.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache

import numpy as np

# bitmask sectors are stored in int64 arrays
MAX_SITES = 62


def binomial(n: int, k: int) -> int:
    """Exact binomial coefficient C(n, k); zero outside 0 <= k <= n."""
    if n < 0:
        raise ValueError(f"binomial requires n >= 0, got n={n}")
    if k < 0 or k > n:
        return 0
    return math.comb(n, k)


@dataclass(frozen=True)
class RingShape:
    M: int
    N: int

    def __post_init__(self):
        if self.M < 1:
            raise ValueError(f"ring needs at least one site, got M={self.M}")
        if not 0 <= self.N <= self.M:
            raise ValueError(f"need 0 <= N <= M, got M={self.M}, N={self.N}")
        if self.M > MAX_SITES:
            raise ValueError(f"M={self.M} exceeds the bitmask limit {MAX_SITES}")

    @property
    def dim(self) -> int:
        return binomial(self.M, self.N)

    @property
    def density(self) -> float:
        return self.N / self.M


def popcount(mask: int) -> int:
    return bin(mask).count("1")


def mask_from_sites(sites, M: int) -> int:
    mask = 0
    for s in sites:
        if not 1 <= s <= M:
            raise ValueError(f"site {s} outside [1, {M}]")
        mask |= 1 << (s - 1)
    return mask


def sites_from_mask(mask: int) -> list[int]:
    return [i + 1 for i in range(mask.bit_length()) if mask >> i & 1]


def rank(config: int, shape: RingShape) -> int:
    """Colexicographic rank of an occupied-site bitmask within its sector."""
    if config < 0 or config >> shape.M:
        raise ValueError(f"bitmask {config:#b} does not fit on {shape.M} sites")
    if popcount(config) != shape.N:
        raise ValueError(
            f"bitmask {config:#b} has {popcount(config)} particles, expected {shape.N}"
        )
    r = 0
    i = 0
    for pos in range(shape.M):
        if config >> pos & 1:
            i += 1
            r += binomial(pos, i)
    return r


def unrank(r: int, shape: RingShape) -> int:
    """Inverse of :func:`rank`."""
    if not 0 <= r < shape.dim:
        raise ValueError(f"rank {r} outside [0, {shape.dim})")
    mask = 0
    pos = shape.M - 1
    for i in range(shape.N, 0, -1):
        while binomial(pos, i) > r:
            pos -= 1
        mask |= 1 << pos
        r -= binomial(pos, i)
        pos -= 1
    return mask


@lru_cache(maxsize=64)
def _sector(M: int, N: int) -> np.ndarray:
    out = []
    # Gosper's hack walks the sector in ascending (colex) order
    if N == 0:
        out.append(0)
    else:
        c = (1 << N) - 1
        limit = 1 << M
        while c < limit:
            out.append(c)
            lowest = c & -c
            ripple = c + lowest
            c = (((ripple ^ c) >> 2) // lowest) | ripple
    arr = np.array(out, dtype=np.int64)
    arr.setflags(write=False)
    return arr


def configurations(shape: RingShape) -> np.ndarray:
    """All bitmasks of the sector, indexed by colex rank (read-only)."""
    return _sector(shape.M, shape.N)


def rank_array(masks, shape: RingShape) -> np.ndarray:
    """Vectorised rank for bitmasks known to lie in the sector."""
    return np.searchsorted(configurations(shape), np.asarray(masks, dtype=np.int64))


def occupation(shape: RingShape, site: int) -> np.ndarray:
    """0/1 vector: is ``site`` occupied in each configuration."""
    if not 1 <= site <= shape.M:
        raise ValueError(f"site {site} outside [1, {shape.M}]")
    return ((configurations(shape) >> (site - 1)) & 1).astype(float)


def empty_mask(shape: RingShape, site: int) -> np.ndarray:
    """Diagonal of the projector s_site (1 where the site is empty)."""
    return 1.0 - occupation(shape, site)


def steady_state_vector(shape: RingShape) -> np.ndarray:
    """Unnormalised stationary vector: every configuration has weight one."""
    return np.ones(shape.dim)


def apply_projector(vec, site: int, shape: RingShape) -> np.ndarray:
    vec = np.asarray(vec)
    if vec.shape[0] != shape.dim:
        raise ValueError(f"vector length {vec.shape[0]} != sector dimension {shape.dim}")
    return vec * empty_mask(shape, site)
