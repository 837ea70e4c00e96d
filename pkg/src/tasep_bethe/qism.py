"""Quantum-inverse-scattering objects on the full 2^M spin space.

This module only exists to validate the determinant formulas, so it favours
clarity over speed and refuses rings larger than ``MAX_M`` sites.

Conventions: basis state index = occupation bitmask (site j is bit j-1);
|0> (spin up) is an empty site, |1> (spin down) an occupied one.  sigma^-
creates a particle, sigma^+ removes one, s = (1 + sigma^z)/2 projects on an
empty site.  Operator entries of 2x2 auxiliary matrices are stored as
(A, B, C, D) = ((0,0), (0,1), (1,0), (1,1)).
"""
from __future__ import annotations

from typing import NamedTuple

import numpy as np
from scipy import sparse

from .combinat import RingShape, configurations

MAX_M = 10
RTT_ATOL = 1e-12
DERIV_STEP = 1e-5


class Blocks(NamedTuple):
    A: sparse.csr_array
    B: sparse.csr_array
    C: sparse.csr_array
    D: sparse.csr_array

    def entry(self, a: int, b: int):
        return self[2 * a + b]


def _check_M(M: int):
    if not 1 <= M <= MAX_M:
        raise ValueError(f"qism is capped at M <= {MAX_M}, got M={M}")


def _check_site(n: int, M: int):
    if not 1 <= n <= M:
        raise ValueError(f"site {n} outside [1, {M}]")


def identity(M: int) -> sparse.csr_array:
    return sparse.identity(1 << M, dtype=complex, format="csr")


def s_op(n: int, M: int) -> sparse.csr_array:
    """Empty-site projector s_n."""
    _check_site(n, M)
    idx = np.arange(1 << M)
    return sparse.diags_array((~idx >> (n - 1) & 1).astype(complex), format="csr")


def sigma_minus(n: int, M: int) -> sparse.csr_array:
    """Creates a particle at site n."""
    _check_site(n, M)
    bit = 1 << (n - 1)
    src = np.nonzero(~np.arange(1 << M) & bit)[0]
    return sparse.csr_array(
        (np.ones(len(src), complex), (src | bit, src)), shape=(1 << M, 1 << M)
    )


def sigma_plus(n: int, M: int) -> sparse.csr_array:
    return sigma_minus(n, M).T.tocsr()


def sigma_z(n: int, M: int) -> sparse.csr_array:
    return 2 * s_op(n, M) - identity(M)


def build_L(n: int, u: complex, M: int) -> Blocks:
    """L(n|u) = [[u s_n, sigma_n^-], [sigma_n^+, u - s_n/u]]."""
    _check_M(M)
    if u == 0:
        raise ZeroDivisionError("L-operator is singular at u = 0")
    s = s_op(n, M)
    return Blocks(
        (u * s).tocsr(),
        sigma_minus(n, M),
        sigma_plus(n, M),
        (u * identity(M) - s / u).tocsr(),
    )


def _block_mul(X: Blocks, Y: Blocks) -> Blocks:
    return Blocks(
        (X.A @ Y.A + X.B @ Y.C).tocsr(),
        (X.A @ Y.B + X.B @ Y.D).tocsr(),
        (X.C @ Y.A + X.D @ Y.C).tocsr(),
        (X.C @ Y.B + X.D @ Y.D).tocsr(),
    )


def build_monodromy(u: complex, M: int) -> Blocks:
    """T(u) = L(M|u) L(M-1|u) ... L(1|u)."""
    T = build_L(M, u, M)
    for n in range(M - 1, 0, -1):
        T = _block_mul(T, build_L(n, u, M))
    return T


def f_fn(v: complex, u: complex) -> complex:
    """f(v, u) = u^2 / (u^2 - v^2)."""
    if u * u == v * v:
        raise ZeroDivisionError("R-matrix pole at u^2 = v^2")
    return u * u / (u * u - v * v)


def g_fn(v: complex, u: complex) -> complex:
    """g(v, u) = u v / (u^2 - v^2)."""
    if u * u == v * v:
        raise ZeroDivisionError("R-matrix pole at u^2 = v^2")
    return u * v / (u * u - v * v)


def r_matrix(u: complex, v: complex) -> np.ndarray:
    """Crystal-base R(u, v) in the (11, 12, 21, 22) auxiliary basis."""
    f, g = f_fn(v, u), g_fn(v, u)
    return np.array(
        [[f, 0, 0, 0], [0, g, 1, 0], [0, 0, g, 0], [0, 0, 0, f]], dtype=complex
    )


def _tensor(X: Blocks, Y: Blocks):
    # (X (x) Y)_{(a,b),(c,d)} = X_ac Y_bd
    return [
        [X.entry(a, c) @ Y.entry(b, d) for c in range(2) for d in range(2)]
        for a in range(2)
        for b in range(2)
    ]


def _max_abs(op) -> float:
    op = sparse.csr_array(op)
    return float(np.abs(op.data).max(initial=0.0))


def intertwining_residual(
    R: np.ndarray, X: Blocks, Y: Blocks, Xs: Blocks, Ys: Blocks, relative: bool = True
) -> float:
    """max |R (X (x) Y) - (Xs (x) Ys) R| over the 16 operator entries.

    With ``relative`` the result is divided by max|R| times the largest
    entry of either tensor product, so roundoff on entries that grow like
    |u|^(2M) does not read as a violation.
    """
    lhs, rhs = _tensor(X, Y), _tensor(Xs, Ys)
    worst = 0.0
    for i in range(4):
        for j in range(4):
            diff = sum(R[i, k] * lhs[k][j] for k in range(4)) - sum(
                rhs[i][k] * R[k, j] for k in range(4)
            )
            worst = max(worst, _max_abs(diff))
    if relative:
        scale = np.abs(R).max() * max(_max_abs(op) for row in lhs + rhs for op in row)
        worst /= max(scale, np.finfo(float).tiny)
    return worst


def rtt_residual(u: complex, v: complex, M: int) -> float:
    if u == 0 or v == 0:
        raise ZeroDivisionError("u and v must be nonzero")
    R = r_matrix(u, v)
    Tu, Tv = build_monodromy(u, M), build_monodromy(v, M)
    return intertwining_residual(R, Tu, Tv, Tv, Tu)


def rll_residual(u: complex, v: complex, n: int, M: int) -> float:
    R = r_matrix(u, v)
    Lu, Lv = build_L(n, u, M), build_L(n, v, M)
    return intertwining_residual(R, Lu, Lv, Lv, Lu)


def transfer_matrix(u: complex, M: int) -> sparse.csr_array:
    """tau(u) = u^-M (A(u) + D(u))."""
    T = build_monodromy(u, M)
    return ((T.A + T.D) / u**M).tocsr()


def vacuum(M: int) -> np.ndarray:
    out = np.zeros(1 << M, dtype=complex)
    out[0] = 1.0
    return out


# Matrix-free action of single monodromy entries on vectors.  An auxiliary
# column (phi_0, phi_1) is pushed through L(1), L(2), ..., L(M) in turn.


def _apply_L_col(phi0, phi1, n, u, M):
    bit = 1 << (n - 1)
    idx = np.arange(1 << M)
    empty = (idx & bit) == 0
    s0 = np.where(empty, phi0, 0)
    s1 = np.where(empty, phi1, 0)
    # sigma^- phi: move amplitude from empty-at-n states to occupied-at-n states
    sm1 = np.zeros_like(phi1)
    sm1[idx[empty] | bit] = phi1[empty]
    sp0 = np.zeros_like(phi0)
    sp0[idx[~empty] ^ bit] = phi0[~empty]
    return u * s0 + sm1, sp0 + u * phi1 - s1 / u


def _apply_L_row(chi0, chi1, n, u, M):
    # row vector times L: chi_b' = sum_a chi_a L_ab
    bit = 1 << (n - 1)
    idx = np.arange(1 << M)
    empty = (idx & bit) == 0
    # (chi sigma^+)[c] = chi[c ^ bit] for occupied c
    ch_sp = np.zeros_like(chi1)
    ch_sp[~empty] = chi1[idx[~empty] ^ bit]
    # (chi sigma^-)[c] = chi[c | bit] for empty c
    ch_sm = np.zeros_like(chi0)
    ch_sm[empty] = chi0[idx[empty] | bit]
    return u * np.where(empty, chi0, 0) + ch_sp, ch_sm + u * chi1 - np.where(empty, chi1, 0) / u


def apply_B(u: complex, vec: np.ndarray, M: int) -> np.ndarray:
    """B(u) vec without forming the operator."""
    phi0, phi1 = np.zeros_like(vec), vec.astype(complex)
    for n in range(1, M + 1):
        phi0, phi1 = _apply_L_col(phi0, phi1, n, u, M)
    return phi0


def apply_C_left(u: complex, row: np.ndarray, M: int) -> np.ndarray:
    """row C(u) for a bra given as an array of components."""
    chi0, chi1 = np.zeros_like(row), row.astype(complex)
    for n in range(M, 0, -1):
        chi0, chi1 = _apply_L_row(chi0, chi1, n, u, M)
    return chi0


def build_state(u_set, side: str, M: int) -> np.ndarray:
    """|Psi(u)> = prod B~(u_i)|Omega> (right) or <Omega| prod C~(u_i) (left).

    B~(u) = u^-(M-1) B(u) and likewise for C.  The left state is returned as
    the array of bra components.
    """
    _check_M(M)
    out = vacuum(M)
    for u in u_set:
        if u == 0:
            raise ZeroDivisionError("state vectors need u != 0")
        if side == "right":
            out = apply_B(u, out, M) / u ** (M - 1)
        elif side == "left":
            out = apply_C_left(u, out, M) / u ** (M - 1)
        else:
            raise ValueError(f"side must be 'left' or 'right', got {side!r}")
    return out


def restrict(vec: np.ndarray, shape: RingShape) -> np.ndarray:
    """Components of a full-space vector on the sector basis (colex order)."""
    return vec[configurations(shape)]


def sector_indices(shape: RingShape) -> np.ndarray:
    return np.asarray(configurations(shape))


def steady_state_full(shape: RingShape) -> np.ndarray:
    out = np.zeros(1 << shape.M, dtype=complex)
    out[sector_indices(shape)] = 1.0
    return out


def P_right(M: int) -> sparse.csr_array:
    """sum_k s_M ... s_{k+1} sigma_k^-."""
    total = sparse.csr_array((1 << M, 1 << M), dtype=complex)
    for k in range(1, M + 1):
        op = sigma_minus(k, M)
        for j in range(k + 1, M + 1):
            op = s_op(j, M) @ op
        total = total + op
    return total.tocsr()


def P_left(M: int) -> sparse.csr_array:
    """sum_k sigma_k^+ s_{k-1} ... s_1."""
    total = sparse.csr_array((1 << M, 1 << M), dtype=complex)
    for k in range(1, M + 1):
        op = sigma_plus(k, M)
        for j in range(k - 1, 0, -1):
            op = op @ s_op(j, M)
        total = total + op
    return total.tocsr()


def permutation_op(m: int, n: int, M: int) -> sparse.csr_array:
    """Pi_mn: swaps the states of sites m and n."""
    idx = np.arange(1 << M)
    bm, bn = (idx >> (m - 1)) & 1, (idx >> (n - 1)) & 1
    swapped = idx ^ ((bm ^ bn) << (m - 1)) ^ ((bm ^ bn) << (n - 1))
    return sparse.csr_array(
        (np.ones(1 << M, complex), (swapped, idx)), shape=(1 << M, 1 << M)
    )


def shift_operator(M: int) -> sparse.csr_array:
    """tau = Pi_12 Pi_23 ... Pi_{M-1,M}; moves site j to site j+1."""
    _check_M(M)
    out = identity(M)
    for m in range(1, M):
        out = out @ permutation_op(m, m + 1, M)
    return out.tocsr()


def hamiltonian_pauli(M: int) -> sparse.csr_array:
    """H = -sum_j [sigma_{j+1}^- sigma_j^+ + (sigma_{j+1}^z sigma_j^z - 1)/4]."""
    _check_M(M)
    H = sparse.csr_array((1 << M, 1 << M), dtype=complex)
    for j in range(1, M + 1):
        k = j % M + 1
        hop = sigma_minus(k, M) @ sigma_plus(j, M)
        zz = sigma_z(k, M) @ sigma_z(j, M)
        H = H - hop - (zz - identity(M)) / 4
    return H.tocsr()


def hamiltonian_from_transfer(M: int, h: float = DERIV_STEP) -> np.ndarray:
    """H = -1/2 tau(1)^-1 d tau/du at u = 1.

    The derivative is a central difference with one Richardson step, which
    cancels the O(h^2) term.  tau(1) is a permutation, so its inverse is its
    transpose.
    """
    _check_M(M)

    def central(step):
        return (transfer_matrix(1 + step, M) - transfer_matrix(1 - step, M)) / (2 * step)

    deriv = (4 * central(h / 2) - central(h)) / 3
    tau1 = transfer_matrix(1.0, M)
    return (-0.5 * (tau1.T @ deriv)).toarray()
