"""Determinant representations of scalar products, overlaps and norms.

Entries of V and V~ are written in w = u^-2 with exact integer binomials.
The antisymmetric prefactors are accumulated as complex logarithms and
combined with log|det| before a single exponentiation.
"""
from __future__ import annotations

import cmath
import warnings
from dataclasses import dataclass

import numpy as np
from scipy.linalg import LinAlgWarning, lu_factor

from .combinat import RingShape, binomial

COND_WARN = 1e-8
ON_SHELL_TOL = 1e-10


class ConditioningWarning(RuntimeWarning):
    pass


@dataclass
class DetForm:
    kind: str  # "Q", "Qtilde", "V" or "Vtilde"
    order: int
    lattice_M: int
    matrix: np.ndarray
    log_prefactor: complex = 0j
    cond: float = 1.0

    @property
    def prefactor(self) -> complex:
        return cmath.exp(self.log_prefactor)

    def det(self) -> complex:
        return lu_det(self.matrix)[0]

    def value(self) -> complex:
        """prefactor * det, combined in log form."""
        det, cond = lu_det(self.matrix)
        self.cond = cond
        if det == 0:
            return 0j
        return cmath.exp(cmath.log(det) + self.log_prefactor)


def lu_det(matrix: np.ndarray, warn: bool = True) -> tuple[complex, float]:
    """Determinant by LU with partial pivoting, plus a 1-norm condition number.

    An exactly singular matrix returns 0 quietly: a vanishing overlap is a
    legitimate value, not a numerical accident.
    """
    matrix = np.asarray(matrix, dtype=complex)
    n = matrix.shape[0]
    if n == 0:
        return 1.0 + 0j, 1.0
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", LinAlgWarning)
        lu, piv = lu_factor(matrix, check_finite=True)
    swaps = np.count_nonzero(piv != np.arange(n))
    det = complex(np.prod(np.diag(lu)) * (-1) ** swaps)
    if det == 0:
        return 0j, np.inf
    # row scaling changes the determinant by an exact factor, so the
    # equilibrated condition number is the one that bounds its relative error
    scale = np.abs(matrix).max(axis=1)
    scale[scale == 0] = 1.0
    cond = float(np.abs(np.linalg.cond(matrix / scale[:, None], 1)))
    if warn and cond * np.finfo(float).eps > COND_WARN:
        warnings.warn(
            f"{n}x{n} determinant has condition {cond:.2e}; "
            f"relative error may exceed {COND_WARN:g}",
            ConditioningWarning,
            stacklevel=3,
        )
    return det, cond


def _poly(coeffs, x):
    """Horner evaluation, coefficients highest degree first."""
    acc = np.zeros_like(x)
    for c in coeffs:
        acc = acc * x + c
    return acc


def _as_w(u_set=None, w_set=None) -> np.ndarray:
    if (u_set is None) == (w_set is None):
        raise ValueError("pass exactly one of u_set / w_set")
    if w_set is not None:
        w = np.asarray(w_set, dtype=complex)
    else:
        u = np.asarray(u_set, dtype=complex)
        if np.any(u == 0):
            raise ZeroDivisionError("rapidities must be nonzero")
        w = 1.0 / (u * u)
    if np.any(w == 0):
        raise ZeroDivisionError("w = 0 (u = infinity) needs the stationary limit")
    return w


def _check_distinct(x, what):
    d = np.abs(np.subtract.outer(x, x)) + np.diag(np.full(len(x), np.inf))
    if len(x) > 1 and d.min() == 0:
        raise ValueError(f"coinciding {what}; use norm_squared for the diagonal case")


def v_matrix(w, lattice_M: int) -> np.ndarray:
    """V^(K) in w-variables, K = lattice_M.

    Rows j < N: sum_{n=0}^{j-1} (-1)^n C(K,n) u^{2(j-1-n)}.
    Row N:     -sum_{n=N}^{K} (-1)^n C(K,n) u^{-2(n-N+1)}.
    Starting the last row at n = N-1 instead would add a constant, which the
    all-ones first row removes for N >= 2 but which is wrong for N = 1, where
    the overlap must vanish at the Bethe root.  The sum starts at n = N.
    """
    w = np.asarray(w, dtype=complex)
    N, K = len(w), lattice_M
    V = np.zeros((N, N), dtype=complex)
    x = 1.0 / w
    for j in range(1, N):
        V[j - 1] = _poly([(-1) ** n * binomial(K, n) for n in range(j)], x)
    tail = [(-1) ** n * binomial(K, n) for n in range(K, N - 1, -1)]
    V[N - 1] = -w * _poly(tail, w) if tail else 0
    return V


def vtilde_matrix(w, lattice_M: int) -> np.ndarray:
    """V~^(K): rows j >= 2 sum_{n=0}^{N-j} (-1)^n C(K,n) u^{2(N-j-n)};
    row 1 -sum_{n=N}^{K} (-1)^n C(K,n) u^{-2(n-N+1)}."""
    w = np.asarray(w, dtype=complex)
    N, K = len(w), lattice_M
    V = np.zeros((N, N), dtype=complex)
    x = 1.0 / w
    for j in range(2, N + 1):
        V[j - 1] = _poly([(-1) ** n * binomial(K, n) for n in range(N - j + 1)], x)
    tail = [(-1) ** n * binomial(K, n) for n in range(K, N - 1, -1)]
    V[0] = -w * _poly(tail, w) if tail else 0
    return V


def q_matrix(v_set, u_set, M: int) -> np.ndarray:
    v = np.asarray(v_set, dtype=complex)
    u = np.asarray(u_set, dtype=complex)
    N = len(u)
    x = u[None, :] / v[:, None]
    a = v[:, None] ** M * (u[None, :] - 1 / u[None, :]) ** M * x ** (N - 1)
    b = u[None, :] ** M * (v[:, None] - 1 / v[:, None]) ** M * x ** (1 - N)
    return (a - b) / (x - 1 / x)


def qtilde_matrix(w, M: int) -> np.ndarray:
    w = np.asarray(w, dtype=complex)
    N = len(w)
    Q = -np.ones((N, N), dtype=complex)
    Q[np.diag_indices(N)] = (N - 1 + (M - N + 1) * w) / (1 - w)
    return Q


def _log_vandermonde(x, lower_first: bool) -> complex:
    """sum over pairs of log(1/(x_l - x_n)) with l > n (or l < n)."""
    total = 0j
    for l in range(len(x)):
        for n in range(l):
            d = x[l] - x[n] if lower_first else x[n] - x[l]
            total -= cmath.log(d)
    return total


def scalar_product_form(v_set, u_set, M: int) -> DetForm:
    v = np.asarray(v_set, dtype=complex)
    u = np.asarray(u_set, dtype=complex)
    if len(v) != len(u):
        raise ValueError("v_set and u_set must have equal length")
    if np.any(v == 0) or np.any(u == 0):
        raise ZeroDivisionError("rapidities must be nonzero")
    _check_distinct(u * u, "u^2 values")
    _check_distinct(v * v, "v^2 values")
    if len(u) and np.min(np.abs(np.subtract.outer(v * v, u * u))) == 0:
        raise ValueError("v_j^2 = u_k^2 collision; the scalar product needs disjoint sets")
    N = len(u)
    logp = -(M - 1) * sum(cmath.log(z) for z in np.concatenate([v, u]))
    for j in range(N):
        for k in range(j):
            logp += cmath.log(v[j] * v[k] / (v[k] ** 2 - v[j] ** 2))
            logp += cmath.log(u[j] * u[k] / (u[j] ** 2 - u[k] ** 2))
    return DetForm("Q", N, M, q_matrix(v, u, M), logp)


def scalar_product(v_set, u_set, M: int) -> complex:
    """<Psi(v)|Psi(u)> on M sites for disjoint parameter sets."""
    if len(u_set) == 0:
        return 1.0 + 0j
    return scalar_product_form(v_set, u_set, M).value()


def steady_overlap_right(u_set=None, M: int = None, *, w_set=None, lattice_M=None) -> complex:
    """<S_N|Psi(u)> = prod u^2 prod_{l>n} 1/(u_l^2 - u_n^2) det V^(M)."""
    return _overlap(u_set, w_set, M, "V", 0, lattice_M)


def steady_overlap_left(u_set=None, M: int = None, *, w_set=None, lattice_M=None) -> complex:
    """<Psi(u)|S_N> = prod u^2 prod_{n>l} 1/(u_l^2 - u_n^2) det V~^(M)."""
    return _overlap(u_set, w_set, M, "Vtilde", 0, lattice_M)


def _overlap(u_set, w_set, M, kind, shift, lattice_M=None) -> complex:
    if (u_set is not None and len(u_set) == 0) or (w_set is not None and len(w_set) == 0):
        return 1.0 + 0j
    w = _as_w(u_set, w_set)
    _check_distinct(w, "u^2 values")
    K = M if lattice_M is None else lattice_M
    u2 = 1.0 / w
    if kind == "V":
        mat = v_matrix(w, K)
        logp = _log_vandermonde(u2, lower_first=True)
    else:
        mat = vtilde_matrix(w, K)
        logp = _log_vandermonde(u2, lower_first=False)
    if shift:
        logp += sum(cmath.log(z - 1) for z in u2)
    else:
        logp += sum(cmath.log(z) for z in u2)
    return DetForm(kind, len(w), K, mat, logp).value()


def form_factor_s1(
    M: int, u_set=None, *, w_set=None, v_set=None, side: str = "right"
) -> complex:
    """Matrix elements of the empty-site projector s_1.

    right:   <S_N|s_1|Psi(u)> = prod (u^2-1) prod_{l>n} 1/(u_l^2-u_n^2) det V^(M-1)
    left:    <Psi(u)|s_1|S_N> = prod u^2 prod_{n>l} 1/(u_l^2-u_n^2) det V~^(M-1)
    generic: <Psi(v)|s_1|Psi(u)> = prod (1 - u^-2) <Psi(v)|Psi(u)>_(M-1)
    """
    if side == "right":
        return _overlap(u_set, w_set, M, "V", 1, lattice_M=M - 1)
    if side == "left":
        return _overlap(u_set, w_set, M, "Vtilde", 0, lattice_M=M - 1)
    if side == "generic":
        if v_set is None or u_set is None:
            raise ValueError("generic form factor needs explicit v_set and u_set")
        u = np.asarray(u_set, dtype=complex)
        return complex(np.prod(1 - 1 / (u * u))) * scalar_product(v_set, u_set, M - 1)
    raise ValueError(f"side must be 'left', 'right' or 'generic', got {side!r}")


def norm_form(w, M: int) -> DetForm:
    w = np.asarray(w, dtype=complex)
    N = len(w)
    u2 = 1.0 / w
    logp = N * sum(cmath.log(z) for z in u2)
    logp += _log_vandermonde(u2, True) + _log_vandermonde(u2, False)
    return DetForm("Qtilde", N, M, qtilde_matrix(w, M), logp)


def norm_squared(sol, shape: RingShape, tol: float = ON_SHELL_TOL) -> complex:
    """<Psi(u)|Psi(u)> = U^{2N} prod_{l!=n} 1/(u_l^2-u_n^2) det Q~, valid on-shell only."""
    from .bethe import residual

    w = np.asarray(getattr(sol, "w", sol), dtype=complex)
    if np.any(w == 1):
        raise ZeroDivisionError("w = 1 is a pole of the norm")
    r = residual(w, shape)
    if not r < tol:
        raise ValueError(f"norm formula needs a Bethe solution; residual {r:.2e} >= {tol:.0e}")
    return norm_form(w, shape.M).value()


def stationary_norm_squared(shape: RingShape) -> int:
    """Norm of the u = infinity state, the number of configurations Z_N."""
    return binomial(shape.M, shape.N)
