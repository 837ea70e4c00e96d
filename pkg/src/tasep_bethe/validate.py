"""Invariant suites run by ``tasep-bethe selftest``.

Each suite returns a list of Check records.  ``fault`` injects a known
defect into the production path so the harness itself can be tested.
"""
from __future__ import annotations

import contextlib
import time
import warnings
from dataclasses import dataclass

import numpy as np

from . import correlator, detforms, qism
from .bethe import check_catalog, solve_all
from .combinat import RingShape, binomial
from .oracle import build_generator, direct_correlation, spectrum

T_GRID = (0.0, 0.1, 0.5, 1.0, 2.0, 5.0)
FAULTS = ("none", "det-sign", "drop-solution", "missing-norm")


@dataclass
class Check:
    suite: str
    name: str
    passed: bool
    worst: float
    tol: float
    seconds: float = 0.0

    def row(self) -> str:
        mark = "PASS" if self.passed else "FAIL"
        return f"{mark}  {self.suite:<10} {self.name:<34} worst={self.worst:.2e}  tol={self.tol:.0e}  {self.seconds:6.2f}s"


def _check(suite, name, worst, tol, t0):
    worst = float(worst)
    return Check(suite, name, bool(worst < tol), worst, tol, time.perf_counter() - t0)


@contextlib.contextmanager
def injected(fault: str):
    """Temporarily corrupt the spectral sum."""
    if fault not in FAULTS:
        raise ValueError(f"unknown fault {fault!r}; choose from {FAULTS}")
    original = correlator.amplitude
    if fault == "det-sign":
        correlator.amplitude = lambda sol, shape: -original(sol, shape)
    elif fault == "missing-norm":
        correlator.amplitude = lambda sol, shape: original(sol, shape) * binomial(shape.M, shape.N)
    try:
        yield
    finally:
        correlator.amplitude = original


def _sectors(max_M):
    return [RingShape(M, N) for M in range(2, max_M + 1) for N in range(1, M)]


def qism_suite(max_M: int, rng) -> list[Check]:
    out = []
    top = min(max_M, 6)
    t0 = time.perf_counter()
    worst = 0.0
    for M in range(1, top + 1):
        for _ in range(10):
            u, v = rng.normal(size=2) + 1j * rng.normal(size=2)
            worst = max(worst, qism.rtt_residual(u, v, M))
    out.append(_check("qism", "RTT residual", worst, qism.RTT_ATOL, t0))

    t0 = time.perf_counter()
    worst = 0.0
    for M in range(1, top + 1):
        tau = qism.shift_operator(M)
        power = qism.identity(M)
        for _ in range(M):
            power = power @ tau
        # exact: count entries that differ at all
        worst = max(worst, (power != qism.identity(M)).nnz)
    out.append(_check("qism", "tau^M = I (differing entries)", worst, 0.5, t0))

    t0 = time.perf_counter()
    worst = 0.0
    for M in range(2, top + 1):
        H = qism.hamiltonian_from_transfer(M)
        worst = max(worst, np.abs(H - qism.hamiltonian_pauli(M).toarray()).max())
        for N in range(M + 1):
            sh = RingShape(M, N)
            idx = qism.sector_indices(sh)
            gen = build_generator(sh).dense()
            worst = max(worst, np.abs(H[np.ix_(idx, idx)] - gen).max())
    out.append(_check("qism", "H from transfer matrix", worst, 1e-8, t0))
    return out


def detforms_suite(max_M: int, rng) -> list[Check]:
    out = []
    top = min(max_M, 8)
    errs = {"scalar product": 0.0, "steady overlap right": 0.0, "steady overlap left": 0.0,
            "form factor right": 0.0, "form factor left": 0.0, "form factor generic": 0.0}
    t0 = time.perf_counter()
    for M in range(2, top + 1):
        s1 = qism.s_op(1, M)
        for N in range(1, min(3, M - 1) + 1):
            S = qism.steady_state_full(RingShape(M, N))
            for _ in range(4):
                u = rng.normal(size=N) + 1j * rng.normal(size=N)
                v = rng.normal(size=N) + 1j * rng.normal(size=N)
                right = qism.build_state(u, "right", M)
                left_v = qism.build_state(v, "left", M)
                left_u = qism.build_state(u, "left", M)
                pairs = {
                    "scalar product": (detforms.scalar_product(v, u, M), left_v @ right),
                    "steady overlap right": (detforms.steady_overlap_right(u, M), S @ right),
                    "steady overlap left": (detforms.steady_overlap_left(u, M), left_u @ S),
                    "form factor right": (detforms.form_factor_s1(M, u, side="right"), S @ (s1 @ right)),
                    "form factor left": (detforms.form_factor_s1(M, u, side="left"), left_u @ (s1 @ S)),
                    "form factor generic": (
                        detforms.form_factor_s1(M, u, v_set=v, side="generic"), left_v @ (s1 @ right)),
                }
                for key, (got, exact) in pairs.items():
                    errs[key] = max(errs[key], abs(got - exact) / max(abs(exact), 1.0))
    for key, worst in errs.items():
        out.append(_check("detforms", key, worst, 1e-10, t0))

    t0 = time.perf_counter()
    worst = 0.0
    for sh in _sectors(top):
        for sol in solve_all(sh).solutions:
            u = sol.u
            exact = qism.build_state(u, "left", sh.M) @ qism.build_state(u, "right", sh.M)
            worst = max(worst, abs(detforms.norm_squared(sol, sh) - exact) / max(abs(exact), 1.0))
    out.append(_check("detforms", "on-shell norm", worst, 1e-8, t0))
    return out


def bethe_suite(max_M: int, fault: str = "none") -> list[Check]:
    t0 = time.perf_counter()
    count_err = res = energy_err = 0.0
    problems = 0
    for sh in _sectors(max_M):
        cat = solve_all(sh)
        if fault == "drop-solution":
            cat.solutions = cat.solutions[:-1]
        count_err = max(count_err, abs(cat.total_count - binomial(sh.M, sh.N)))
        res = max(res, cat.max_residual)
        problems += len(check_catalog(cat))
        energy_err = max(energy_err, energy_mismatch(cat.energies(), spectrum(build_generator(sh)).eigenvalues))
    return [
        _check("bethe", "count = C(M,N)", count_err, 0.5, t0),
        _check("bethe", "residuals", res, 1e-10, t0),
        _check("bethe", "catalog invariants", problems, 0.5, t0),
        _check("bethe", "energies vs generator spectrum", energy_err, 1e-8, t0),
    ]


def energy_mismatch(bethe, oracle) -> float:
    """Largest gap under the best one-to-one pairing; inf on a count mismatch."""
    from scipy.optimize import linear_sum_assignment

    bethe, oracle = np.asarray(bethe), np.asarray(oracle)
    if len(bethe) != len(oracle):
        return float("inf")
    cost = np.abs(np.subtract.outer(bethe, oracle))
    r, c = linear_sum_assignment(cost)
    return float(cost[r, c].max(initial=0.0))


def correlator_suite(max_M: int, fault: str = "none") -> list[Check]:
    t0 = time.perf_counter()
    worst = rule = 0.0
    for sh in _sectors(min(max_M, 8)):
        cat = solve_all(sh)
        if fault == "drop-solution":
            cat.solutions = cat.solutions[:-1]
        gen = build_generator(sh)
        with injected(fault if fault != "drop-solution" else "none"):
            try:
                results = correlator.correlation_grid(sh, range(1, sh.M + 1), T_GRID, cat)
            except (ArithmeticError, ValueError):
                # the catalog guard or the imaginary-leak check caught it
                worst = np.inf
                continue
        for r in results:
            worst = max(worst, abs(r.value - direct_correlation(sh, r.m, r.t, gen=gen)))
            if r.t == 0.0:
                M, N = sh.M, sh.N
                exact = (M - N) / M if r.m == 1 else binomial(M - 2, N) / binomial(M, N)
                rule = max(rule, abs(r.value - exact))
    return [
        _check("correlator", "spectral sum vs generator", worst, 1e-8, t0),
        _check("correlator", "t = 0 sum rule", rule, 1e-8, t0),
    ]


def run_all(max_M: int = 6, fault: str = "none", seed: int = 0) -> list[Check]:
    if not 2 <= max_M <= 10:
        raise ValueError("max_M must lie in [2, 10]")
    rng = np.random.default_rng(seed)
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", detforms.ConditioningWarning)
        checks = qism_suite(max_M, rng) + detforms_suite(max_M, rng)
        checks += bethe_suite(max_M, fault) + correlator_suite(max_M, fault)
    return checks
