"""Brute-force ground truth in a fixed particle-number sector.

H acts on column vectors; -H is the Markov generator, so probability
vectors evolve as P(t) = exp(-tH) P(0) and every column of H sums to zero.
A particle at site j hops to j + 1 (site M + 1 is site 1) at rate one.
"""
from __future__ import annotations

import logging
from dataclasses import dataclass

import numpy as np
from scipy import sparse
from scipy.stats import poisson

from .combinat import RingShape, binomial, configurations, empty_mask, rank_array

log = logging.getLogger(__name__)

DEFAULT_MAX_DIM = 20_000
SPECTRAL_ATOL = 1e-8
POISSON_TAIL = 1e-14


@dataclass(frozen=True, eq=False)
class MarkovGenerator:
    shape: RingShape
    matrix: sparse.csr_array
    lambda_max: float

    def dense(self) -> np.ndarray:
        return self.matrix.toarray()

    @property
    def dim(self) -> int:
        return self.matrix.shape[0]


@dataclass(frozen=True)
class SpectrumReport:
    eigenvalues: np.ndarray
    zero_index: int
    gap: float


def hop_moves(shape: RingShape):
    """Yield (source_rank, target_rank) arrays for every allowed hop j -> j+1."""
    M = shape.M
    confs = configurations(shape)
    for j in range(M):
        k = (j + 1) % M
        if k == j:
            continue
        movable = ((confs >> j) & 1).astype(bool) & ~((confs >> k) & 1).astype(bool)
        src = np.nonzero(movable)[0]
        dst = rank_array(confs[src] ^ ((1 << j) | (1 << k)), shape)
        yield src, dst


def build_generator(shape: RingShape, max_dim: int = DEFAULT_MAX_DIM) -> MarkovGenerator:
    dim = shape.dim
    if dim > max_dim:
        raise MemoryError(
            f"sector dimension C({shape.M},{shape.N}) = {dim} exceeds max_dim={max_dim}"
        )
    rows, cols = [], []
    diag = np.zeros(dim, dtype=np.int64)
    for src, dst in hop_moves(shape):
        rows.append(dst)
        cols.append(src)
        np.add.at(diag, src, 1)
    rows = np.concatenate(rows) if rows else np.zeros(0, dtype=np.int64)
    cols = np.concatenate(cols) if cols else np.zeros(0, dtype=np.int64)
    # column sums are checked in integers before the cast to float
    colsum = diag.copy()
    np.subtract.at(colsum, cols, 1)
    assert not colsum.any(), "generator columns must sum to zero"
    H = sparse.coo_array(
        (
            np.concatenate([-np.ones(len(rows)), diag.astype(float)]),
            (np.concatenate([rows, np.arange(dim)]), np.concatenate([cols, np.arange(dim)])),
        ),
        shape=(dim, dim),
    ).tocsr()
    H.sum_duplicates()
    return MarkovGenerator(shape, H, float(diag.max(initial=0)))


def expected_trace(shape: RingShape) -> int:
    """Number of (occupied j, empty j+1) pairs summed over the sector."""
    if shape.M < 2:
        return 0
    return shape.M * binomial(shape.M - 2, shape.N - 1)


class EigensolverError(RuntimeError):
    pass


def spectrum(gen: MarkovGenerator, atol: float = SPECTRAL_ATOL) -> SpectrumReport:
    H = gen.dense()
    try:
        ev = np.linalg.eigvals(H)
    except np.linalg.LinAlgError as exc:
        raise EigensolverError(f"eigvals failed for matrix\n{H!r}") from exc
    ev = ev.astype(complex)
    # exact zeros for values that are zero to rounding
    ev.real[np.abs(ev.real) < 1e-13] = 0.0
    ev.imag[np.abs(ev.imag) < 1e-13] = 0.0
    ev = ev[np.lexsort((ev.imag, ev.real))]
    zeros = np.nonzero(np.abs(ev) < atol)[0]
    if len(zeros) != 1:
        raise EigensolverError(
            f"expected exactly one zero eigenvalue, found {len(zeros)}: {ev[zeros]}"
        )
    positive = ev.real[np.abs(ev) >= atol]
    gap = float(positive.min()) if len(positive) else float("inf")
    return SpectrumReport(ev, int(zeros[0]), gap)


def poisson_window(rate_t: float, tail: float = POISSON_TAIL):
    """Truncation window [lo, hi] and normalised Poisson weights on it."""
    if rate_t == 0:
        return 0, np.ones(1)
    lo = int(poisson.ppf(tail / 2, rate_t))
    hi = int(poisson.isf(tail / 2, rate_t)) + 1
    k = np.arange(lo, hi + 1)
    w = poisson.pmf(k, rate_t)
    return lo, w / w.sum()


def evolve(gen: MarkovGenerator, vec, t: float) -> np.ndarray:
    """exp(-tH) vec by uniformisation.

    With L the largest exit rate, exp(-tH) = sum_k Pois(k; Lt) (I - H/L)^k,
    truncated where the Poisson tail mass falls below 1e-14.
    """
    if t < 0:
        raise ValueError("evolve needs t >= 0; pass |t|")
    vec = np.asarray(vec, dtype=float)
    if vec.shape[0] != gen.dim:
        raise ValueError(f"vector length {vec.shape[0]} != sector dimension {gen.dim}")
    lam = gen.lambda_max
    if t == 0 or lam == 0:
        return vec.copy()
    lo, weights = poisson_window(lam * t)
    P = sparse.identity(gen.dim, format="csr") - gen.matrix / lam
    x = vec.copy()
    for _ in range(lo):
        x = P @ x
    out = weights[0] * x
    for wk in weights[1:]:
        x = P @ x
        out += wk * x
    return out


def direct_correlation(
    shape: RingShape, m: int, t: float, gen: MarkovGenerator | None = None, k: int = 1
) -> float:
    """Z^-1 <S| s_k exp(-tH) s_{k+m-1} |S>; the default k = 1 is the usual form."""
    if not 1 <= m <= shape.M:
        raise ValueError(f"m={m} outside [1, {shape.M}]")
    if gen is None:
        gen = build_generator(shape)
    target = (k - 1 + m - 1) % shape.M + 1
    right = empty_mask(shape, target)
    left = empty_mask(shape, (k - 1) % shape.M + 1)
    return float(left @ evolve(gen, right, t)) / shape.dim
