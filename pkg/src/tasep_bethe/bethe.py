"""All solutions of the periodic TASEP Bethe equations for a given sector.

Working variable: w = u^-2.  In it the Bethe equations read

    w_n^N = B (1 - w_n)^M,    B = (-1)^(N-1) prod_j w_j,

so every solution is an N-subset of the M roots of P_B(w) = w^N - B(1-w)^M
whose product reproduces B.  The stationary solution (all w = 0, B = 0) is
handled analytically and never appears in a catalog.

Enumeration is algebraic.  The N-th exterior power of the companion matrix
of P_B has the N-subset root products as eigenvalues, and because B enters
the monic companion matrix through a single rank-one term, that exterior
power is X0 + X1/B exactly.  The constants B are therefore the eigenvalues
of the monic quadratic problem (-1)^(N-1) B^2 x = B X0 x + X1 x.  Each B is
mapped back to a labelled subset of roots, refined self-consistently, and
polished with a multivariate Newton step.
"""
from __future__ import annotations

import itertools
import json
import logging
from dataclasses import dataclass, field

import numpy as np
from scipy.optimize import linear_sum_assignment

from .combinat import RingShape, binomial

log = logging.getLogger(__name__)

DEFAULT_TOL = 1e-10
STATIONARY_B = 1e-6
CLUSTER_RTOL = 1e-6
COLLISION_ATOL = 1e-6


class BetheSolverError(RuntimeError):
    def __init__(self, message: str, diagnostics: dict | None = None):
        super().__init__(message)
        self.diagnostics = diagnostics or {}


@dataclass(frozen=True, eq=False)
class BetheSolution:
    w: np.ndarray
    B_const: complex
    energy: complex
    U2: complex
    theta1: complex
    residual: float
    subset_id: tuple

    @property
    def u_squared(self) -> np.ndarray:
        return 1.0 / self.w

    @property
    def u(self) -> np.ndarray:
        """Principal square roots of u^2; the branch is fixed here once."""
        return np.sqrt(1.0 / self.w)

    def to_json(self) -> dict:
        return {
            "w": [[float(z.real), float(z.imag)] for z in self.w],
            "B": [float(self.B_const.real), float(self.B_const.imag)],
            "E": [float(self.energy.real), float(self.energy.imag)],
            "residual": float(self.residual),
        }


@dataclass(eq=False)
class SolutionCatalog:
    shape: RingShape
    solutions: list
    includes_stationary: bool = True
    diagnostics: dict = field(default_factory=dict)

    def __len__(self):
        return len(self.solutions)

    def energies(self, with_stationary: bool = True) -> np.ndarray:
        E = [s.energy for s in self.solutions]
        if with_stationary and self.includes_stationary:
            E.append(0j)
        return np.array(E, dtype=complex)

    @property
    def total_count(self) -> int:
        return len(self.solutions) + int(self.includes_stationary)

    @property
    def max_residual(self) -> float:
        return max((s.residual for s in self.solutions), default=0.0)

    def to_json(self) -> dict:
        return {
            "M": self.shape.M,
            "N": self.shape.N,
            "includes_stationary": self.includes_stationary,
            "solutions": [s.to_json() for s in self.solutions],
        }

    def dumps(self, **kw) -> str:
        return json.dumps(self.to_json(), **kw)

    @classmethod
    def from_json(cls, payload: dict) -> "SolutionCatalog":
        shape = RingShape(payload["M"], payload["N"])
        sols = []
        for item in payload["solutions"]:
            w = np.array([complex(re, im) for re, im in item["w"]])
            sols.append(make_solution(w, shape, subset_id=()))
        return cls(shape, sols, payload.get("includes_stationary", True))


def make_solution(w, shape: RingShape, subset_id=(), B=None) -> BetheSolution:
    w = np.asarray(w, dtype=complex)
    prod = np.prod(w)
    if B is None:
        B = (-1) ** (shape.N - 1) * prod
    return BetheSolution(
        w=w,
        B_const=complex(B),
        energy=complex(energy(w)),
        U2=complex(1.0 / prod),
        theta1=complex(np.prod(1.0 / (1.0 - w))),
        residual=residual(w, shape),
        subset_id=tuple(subset_id),
    )


def energy(w) -> complex:
    """E = -sum 1/(u^2 - 1) = sum w/(w - 1)."""
    w = np.asarray(w, dtype=complex)
    return complex(np.sum(w / (w - 1.0)))


def residual(sol, shape: RingShape) -> float:
    """Largest relative violation of w_n^N (1-w_n)^-M = (-1)^(N-1) prod w."""
    w = np.asarray(getattr(sol, "w", sol), dtype=complex)
    M, N = shape.M, shape.N
    if np.any(w == 0) or np.any(w == 1):
        return float("inf")
    rhs = (-1) ** (N - 1) * np.prod(w)
    lhs = w**N * (1.0 - w) ** (-M)
    scale = np.maximum(np.abs(lhs), abs(rhs))
    return float(np.max(np.abs(lhs - rhs) / scale))


def transfer_eigenvalue(sol, v: complex, M: "int | RingShape") -> complex:
    """Theta_N(v) = prod u^2/(u^2 - v^2) + (1 - v^-2)^M prod v^2/(v^2 - u^2).

    Written in w = u^-2, so ``sol`` may also be a bare array of w values;
    w = 0 entries (u = infinity) are allowed.
    """
    M = getattr(M, "M", M)
    w = np.asarray(getattr(sol, "w", sol), dtype=complex)
    v2 = complex(v) ** 2
    den = 1.0 - v2 * w
    if np.any(np.abs(den) == 0):
        raise ZeroDivisionError("transfer eigenvalue pole at v^2 = u_j^2")
    first = np.prod(1.0 / den)
    second = (1.0 - 1.0 / v2) ** M * np.prod(-v2 * w / den)
    return complex(first + second)


# ---------------------------------------------------------------- polynomials


def bethe_polynomial(B: complex, M: int, N: int) -> np.ndarray:
    """Coefficients (highest degree first) of w^N - B (1 - w)^M."""
    coeffs = np.zeros(M + 1, dtype=complex)
    for k in range(M + 1):
        coeffs[M - k] -= B * binomial(M, k) * (-1) ** k
    coeffs[M - N] += 1.0
    return coeffs


def _newton_roots(w, B, M, N, iters=6):
    for _ in range(iters):
        f = w**N - B * (1 - w) ** M
        fp = N * w ** (N - 1) + B * M * (1 - w) ** (M - 1)
        step = f / fp
        w = w - step
        if np.all(np.abs(step) <= 1e-16 * np.abs(w)):
            break
    return w


def polynomial_roots(B: complex, M: int, N: int) -> np.ndarray:
    """The M roots of P_B in canonical label order.

    Companion-matrix eigenvalues, one Newton polish each, then sorted by
    principal argument with ties broken by modulus.
    """
    w = np.roots(bethe_polynomial(B, M, N))
    w = _newton_roots(w, B, M, N)
    order = np.lexsort((np.abs(w), np.round(np.angle(w), 12)))
    return w[order]


def _companion(M: int, N: int, beta: float) -> np.ndarray:
    # monic form of P_B: (w - 1)^M + (-1)^(M+1) beta w^N with beta = 1/B
    c = np.zeros(M + 1)
    for k in range(M + 1):
        c[M - k] += binomial(M, k) * (-1) ** (M - k)
    c[M - N] += (-1) ** (M + 1) * beta
    K = np.zeros((M, M))
    K[0, :] = -c[1:]
    K[1:, :-1] = np.eye(M - 1)
    return K


def _exterior_power(A: np.ndarray, N: int) -> np.ndarray:
    idx = np.array(list(itertools.combinations(range(A.shape[0]), N)))
    return np.linalg.det(A[idx[:, None, :, None], idx[None, :, None, :]])


def bethe_constants(shape: RingShape) -> np.ndarray:
    """All eigenvalues B of the quadratic problem, stationary zeros included."""
    M, N = shape.M, shape.N
    X0 = _exterior_power(_companion(M, N, 0.0), N)
    X1 = _exterior_power(_companion(M, N, 1.0), N) - X0
    D = X0.shape[0]
    sign = (-1) ** (N - 1)
    lin = np.zeros((2 * D, 2 * D))
    lin[:D, D:] = np.eye(D)
    lin[D:, :D] = X1 * sign
    lin[D:, D:] = X0 * sign
    return np.linalg.eigvals(lin)


def _cluster(values, rtol):
    groups = []
    for B in sorted(values, key=lambda z: (z.real, z.imag)):
        for g in groups:
            if abs(g[0] - B) <= rtol * max(1.0, abs(B)):
                g.append(B)
                break
        else:
            groups.append([B])
    return groups


def _subset_mismatch(w, B, N):
    subsets = np.array(list(itertools.combinations(range(len(w)), N)))
    prods = (-1) ** (N - 1) * np.prod(w[subsets], axis=1)
    return subsets, np.abs(prods - B) / abs(B)


def _track(prev, new):
    """Reorder ``new`` so that entry i continues entry i of ``prev``."""
    cost = np.abs(prev[:, None] - new[None, :])
    _, cols = linear_sum_assignment(cost)
    return new[cols]


def refine_constant(B, labels, M, N, max_iter=50):
    """Scalar Newton on F(B) = B - (-1)^(N-1) prod_{S} w(B), labels by continuity."""
    roots = polynomial_roots(B, M, N)
    sign = (-1) ** (N - 1)
    S = list(labels)
    for _ in range(max_iter):
        ws = roots[S]
        F = B - sign * np.prod(ws)
        dw = (1 - ws) ** M / (N * ws ** (N - 1) + B * M * (1 - ws) ** (M - 1))
        dF = 1 - sign * np.prod(ws) * np.sum(dw / ws)
        step = F / dF
        # keep each move small so the root labels can be followed
        if abs(step) > 0.1 * abs(B):
            step *= 0.1 * abs(B) / abs(step)
        B_new = B - step
        roots = _track(roots, _newton_roots(np.roots(bethe_polynomial(B_new, M, N)), B_new, M, N))
        B = B_new
        if abs(step) <= 1e-15 * abs(B):
            break
    return B, roots[S]


def polish(w, shape: RingShape, max_iter=50):
    """Damped Newton on exp(g_n) - 1 = 0, g_n = N ln w_n - M ln(1-w_n) - ln((-1)^(N-1) prod w)."""
    M, N = shape.M, shape.N
    sign = (-1) ** (N - 1)
    w = np.array(w, dtype=complex)

    def F(w):
        return w**N * (1 - w) ** (-M) / (sign * np.prod(w)) - 1.0

    f = F(w)
    for _ in range(max_iter):
        r = np.max(np.abs(f))
        if r < 1e-15:
            break
        J = -(1.0 + f)[:, None] / w[None, :]
        J[np.diag_indices(N)] += (1.0 + f) * (N / w + M / (1 - w))
        try:
            step = np.linalg.solve(J, -f)
        except np.linalg.LinAlgError:
            break
        lam = 1.0
        while lam > 1e-4:
            trial = w + lam * step
            ft = F(trial)
            if np.max(np.abs(ft)) < r:
                w, f = trial, ft
                break
            lam /= 2
        else:
            break
    return w


def multiset_distance(a, b) -> float:
    """Largest gap under the best pairing of two equal-size complex multisets.

    Sorting is not enough: ties in the real part are broken by rounding noise.
    """
    cost = np.abs(np.subtract.outer(np.asarray(a), np.asarray(b)))
    rows, cols = linear_sum_assignment(cost)
    return float(cost[rows, cols].max(initial=0.0))


def _distinct(key, accepted, tol):
    return all(multiset_distance(key, other) > 10 * tol for other in accepted)


def solve_all(shape: RingShape, tol: float = DEFAULT_TOL) -> SolutionCatalog:
    M, N = shape.M, shape.N
    if N == 0 or N == M:
        return SolutionCatalog(shape, [], True, {"note": "stationary solution only"})

    eig = bethe_constants(shape)
    mags = np.abs(eig)
    nontrivial = eig[mags > STATIONARY_B]
    diagnostics = {
        "largest_rejected_B": float(mags[mags <= STATIONARY_B].max(initial=0.0)),
        "smallest_accepted_B": float(np.abs(nontrivial).min(initial=np.inf)),
        "collisions": [],
        "failures": [],
    }

    solutions, keys = [], []
    for group in _cluster(nontrivial, CLUSTER_RTOL):
        B0 = complex(np.mean(group))
        roots = polynomial_roots(B0, M, N)
        gaps = np.abs(roots[:, None] - roots[None, :])
        np.fill_diagonal(gaps, np.inf)
        if gaps.min() < COLLISION_ATOL:
            diagnostics["collisions"].append([B0.real, B0.imag])
        subsets, mismatch = _subset_mismatch(roots, B0, N)
        wanted, found = len(group), 0
        # walk the subsets by mismatch until the cluster is filled
        for i in np.argsort(mismatch, kind="stable")[: wanted + 4]:
            if found == wanted:
                break
            labels = tuple(int(k) for k in subsets[i])
            B, ws = refine_constant(B0, labels, M, N)
            ws = polish(ws, shape)
            r = residual(ws, shape)
            key = np.sort_complex(ws)
            if r < tol and _distinct(key, keys, tol):
                final_roots = polynomial_roots((-1) ** (N - 1) * np.prod(ws), M, N)
                sid = tuple(sorted(int(np.argmin(np.abs(final_roots - z))) for z in ws))
                solutions.append(make_solution(ws, shape, sid))
                keys.append(key)
                found += 1
        if found < wanted:
            diagnostics["failures"].append(
                {"B": [B0.real, B0.imag], "multiplicity": wanted, "found": found}
            )

    solutions.sort(key=lambda s: (round(s.energy.real, 12), round(s.energy.imag, 12),
                                  [(z.real, z.imag) for z in np.sort_complex(s.w)]))
    catalog = SolutionCatalog(shape, solutions, True, diagnostics)
    expected = binomial(M, N) - 1
    if len(solutions) != expected:
        raise BetheSolverError(
            f"found {len(solutions)} nontrivial solutions for M={M}, N={N}, expected {expected}",
            diagnostics,
        )
    return catalog


def check_catalog(catalog: SolutionCatalog, tol: float = DEFAULT_TOL) -> list[str]:
    """Invariant violations of a catalog; an empty list means it is sound."""
    shape = catalog.shape
    problems = []
    if catalog.total_count != binomial(shape.M, shape.N):
        problems.append(f"count {catalog.total_count} != Z_N = {binomial(shape.M, shape.N)}")
    keys = [np.sort_complex(s.w) for s in catalog.solutions]
    for s, key in zip(catalog.solutions, keys):
        if s.residual >= tol:
            problems.append(f"residual {s.residual:.2e} >= {tol:.0e}")
        if abs(s.theta1**shape.M - 1) > 1e-8:
            problems.append(f"theta1^M = {s.theta1**shape.M} != 1")
        if s.energy.real < -1e-8:
            problems.append(f"negative relaxation rate {s.energy}")
        if np.any(np.abs(s.w) == 0) or np.any(np.abs(s.w - 1) == 0):
            problems.append("w in {0, 1}")
        conj = np.conj(s.w)
        if not any(multiset_distance(conj, k) < 1e-7 for k in keys):
            problems.append(f"conjugate of solution with E={s.energy} missing")
    for i in range(len(keys)):
        for j in range(i):
            if multiset_distance(keys[i], keys[j]) <= 10 * tol:
                problems.append(f"duplicate solutions {j} and {i}")
    return problems
