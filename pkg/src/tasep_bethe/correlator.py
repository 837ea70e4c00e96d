"""Spectral sum for the stationary two-time correlation of empty sites.

    <s_1(t) s_m(0)> = ((M-N)/M)^2
        + Z^-1 sum_u e^{-tE} U^{-2N} prod_j (u_j^2-1) u_j^2 (1-u_j^-2)^{1-m}
                 det V~^(M-1) det V^(M-1) / det Q~

The sum runs over the nontrivial Bethe solutions.  Every factor is written
in w = u^-2; the Vandermonde-type prefactors of the two form factors and the
norm cancel and never enter.
"""
from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, field

import numpy as np

from .bethe import SolutionCatalog, check_catalog
from .combinat import RingShape, binomial
from .detforms import lu_det, qtilde_matrix, v_matrix, vtilde_matrix

IMAG_LEAK_TOL = 1e-8


class CatalogError(ValueError):
    pass


@dataclass
class CorrelationResult:
    m: int
    t: float
    value: float
    stationary_term: float
    terms: list = field(default_factory=list)  # (solution index, complex term)
    imag_leak: float = 0.0

    def to_json(self) -> dict:
        return {
            "m": self.m,
            "t": self.t,
            "value": self.value,
            "stationary_term": self.stationary_term,
            "imag_leak": self.imag_leak,
            "terms": [[i, [z.real, z.imag]] for i, z in self.terms],
        }


def translation_factor(sol, m: int) -> complex:
    """prod_j (1 - w_j)^{1-m}, i.e. the shift eigenvalue to the power m-1."""
    if m < 1:
        raise ValueError("m must be >= 1")
    w = np.asarray(getattr(sol, "w", sol), dtype=complex)
    if np.any(w == 1):
        raise ZeroDivisionError("w = 1 is a pole of the translation factor")
    return complex(np.prod(1.0 / (1.0 - w))) ** (m - 1)


def amplitude(sol, shape: RingShape) -> complex:
    """Time- and m-independent part of one term (the m = 1 weight at t = 0)."""
    M, N = shape.M, shape.N
    w = np.asarray(sol.w, dtype=complex)
    det_vt, _ = lu_det(vtilde_matrix(w, M - 1), warn=False)
    det_v, _ = lu_det(v_matrix(w, M - 1), warn=False)
    det_q, _ = lu_det(qtilde_matrix(w, M), warn=False)
    pre = np.prod(w) ** N * np.prod((1.0 - w) / (w * w))
    return complex(pre * det_vt * det_v / det_q) / binomial(M, N)


def stationary_term(shape: RingShape) -> float:
    return ((shape.M - shape.N) / shape.M) ** 2


def _reduce_m(m: int, M: int) -> int:
    r = (m - 1) % M + 1
    if r != m:
        warnings.warn(f"m={m} reduced to {r} (period {M})", stacklevel=3)
    return r


def _validated(shape, catalog):
    if catalog is None:
        from .bethe import solve_all

        return solve_all(shape)
    if catalog.shape != shape:
        raise CatalogError(f"catalog is for {catalog.shape}, not {shape}")
    problems = check_catalog(catalog)
    if problems:
        raise CatalogError("invalid catalog: " + "; ".join(problems[:5]))
    return catalog


def correlation(
    shape: RingShape, m: int, t: float, catalog: SolutionCatalog | None = None,
    *, _amplitudes=None,
) -> CorrelationResult:
    if t < 0:
        raise ValueError("t must be non-negative")
    m = _reduce_m(int(m), shape.M)
    stat = stationary_term(shape)
    if shape.N == 0 or shape.N == shape.M:
        return CorrelationResult(m, float(t), stat, stat, [], 0.0)
    catalog = _validated(shape, catalog)
    amps = _amplitudes if _amplitudes is not None else [amplitude(s, shape) for s in catalog.solutions]

    terms = []
    for i, (sol, a) in enumerate(zip(catalog.solutions, amps)):
        z = a * np.exp(-t * sol.energy) * translation_factor(sol, m)
        terms.append((i, complex(z)))
    terms.sort(key=lambda item: -abs(item[1]))
    re = math.fsum([stat] + [z.real for _, z in terms])
    leak = abs(math.fsum(z.imag for _, z in terms))
    if leak > IMAG_LEAK_TOL:
        raise ArithmeticError(
            f"imaginary part {leak:.2e} survives the sum; a conjugate solution is missing"
        )
    return CorrelationResult(m, float(t), re, stat, terms, leak)


def correlation_grid(shape: RingShape, ms, ts, catalog: SolutionCatalog | None = None):
    """Many (m, t) points sharing one catalog and one set of amplitudes."""
    if shape.N == 0 or shape.N == shape.M:
        return [correlation(shape, m, t) for m in ms for t in ts]
    catalog = _validated(shape, catalog)
    amps = [amplitude(s, shape) for s in catalog.solutions]
    return [correlation(shape, m, t, catalog, _amplitudes=amps) for m in ms for t in ts]


def sum_rule_t0(shape: RingShape, m: int, catalog: SolutionCatalog | None = None):
    """(spectral value at t = 0, static counting value)."""
    M, N = shape.M, shape.N
    lhs = correlation(shape, m, 0.0, catalog).value
    m = (m - 1) % M + 1
    if m == 1:
        rhs = (M - N) / M
    else:
        rhs = binomial(M - 2, N) / binomial(M, N) if M >= 2 else 0.0
    return lhs, rhs
