import json

import numpy as np
import pytest

from tasep_bethe.bethe import (
    SolutionCatalog, check_catalog, make_solution, multiset_distance, polynomial_roots,
    residual, solve_all, transfer_eigenvalue,
)
from tasep_bethe.combinat import RingShape, binomial
from tasep_bethe.oracle import build_generator, expected_trace, spectrum
from tasep_bethe.validate import energy_mismatch

OMEGA = np.exp(2j * np.pi / 3)


def test_m2_n1(catalog):
    cat = catalog(2, 1)
    assert len(cat) == 1
    sol = cat.solutions[0]
    assert np.allclose(sol.w, [2.0]) and sol.energy == pytest.approx(2.0)


def test_m3_n1(catalog):
    cat = catalog(3, 1)
    ws = sorted(cat.solutions, key=lambda s: s.w[0].imag)
    assert np.allclose([s.w[0] for s in ws], sorted([1 - OMEGA, 1 - OMEGA**2], key=lambda z: z.imag))
    assert np.allclose(sorted(cat.energies(False), key=lambda z: z.imag),
                       sorted([1 - OMEGA**2, 1 - OMEGA], key=lambda z: z.imag))


def test_m4_n2_count(catalog):
    assert catalog(4, 2).total_count == 6


@pytest.mark.parametrize("M,N", [(1, 1), (5, 0), (5, 5)])
def test_degenerate_sectors(M, N):
    cat = solve_all(RingShape(M, N))
    assert len(cat) == 0 and cat.total_count == 1


def test_residual_examples():
    sh = RingShape(2, 1)
    assert residual(np.array([2.0]), sh) < 1e-15
    assert residual(np.array([1 - OMEGA]), RingShape(3, 1)) < 1e-14
    r = residual(np.array([2.0 + 1e-6]), sh)
    assert 1e-7 < r < 1e-5
    assert residual(np.array([1.0]), sh) == np.inf
    assert residual(np.array([0.0]), sh) == np.inf


def test_transfer_eigenvalue_examples():
    w = np.array([1 - OMEGA])
    theta = transfer_eigenvalue(w, 1.0, RingShape(3, 1))
    assert theta == pytest.approx(OMEGA**2)
    assert theta**3 == pytest.approx(1.0)
    for v in [0.3, 1.7 + 0.4j]:
        assert transfer_eigenvalue(np.zeros(3), v, 7) == pytest.approx(1.0)
    with pytest.raises(ZeroDivisionError):
        transfer_eigenvalue(np.array([0.25]), 2.0, 3)


def test_transfer_eigenvalue_against_qism(catalog):
    from tasep_bethe import qism

    M, N = 5, 2
    for sol in catalog(M, N).solutions[:4]:
        psi = qism.build_state(sol.u, "right", M)
        v = 0.8 + 0.3j
        lhs = qism.transfer_matrix(v, M) @ psi
        assert np.allclose(lhs, transfer_eigenvalue(sol, v, M) * psi, atol=1e-10 * np.abs(psi).max())


def test_polynomial_roots_are_roots():
    B = 0.37 - 0.2j
    w = polynomial_roots(B, 7, 3)
    assert len(w) == 7
    assert np.abs(w**3 - B * (1 - w) ** 7).max() < 1e-12
    args = np.angle(w)
    assert np.all(np.diff(args) >= -1e-12)


@pytest.mark.parametrize("M", range(2, 9))
def test_completeness_and_spectrum(catalog, M):
    for N in range(1, M):
        sh = RingShape(M, N)
        cat = catalog(M, N)
        assert len(cat) == binomial(M, N) - 1
        assert cat.max_residual < 1e-10
        assert check_catalog(cat) == []
        assert energy_mismatch(cat.energies(), spectrum(build_generator(sh)).eigenvalues) < 1e-8
        total = cat.energies().sum()
        assert abs(total - expected_trace(sh)) <= 1e-6 * max(1, expected_trace(sh))
        for s in cat.solutions:
            assert abs(s.theta1**M - 1) < 1e-8
            assert np.all(s.w != 0) and np.all(s.w != 1)


def test_catalog_sorted_and_deterministic(catalog):
    a = solve_all(RingShape(7, 3))
    b = catalog(7, 3)
    assert a.dumps() == b.dumps()
    keys = [(round(s.energy.real, 12), round(s.energy.imag, 12)) for s in a.solutions]
    assert keys == sorted(keys)


def test_json_roundtrip(catalog):
    cat = catalog(5, 2)
    payload = json.loads(cat.dumps())
    assert set(payload["solutions"][0]) == {"w", "B", "E", "residual"}
    back = SolutionCatalog.from_json(payload)
    assert len(back) == len(cat)
    for a, b in zip(back.solutions, cat.solutions):
        assert multiset_distance(a.w, b.w) == 0


def test_check_catalog_flags_damage(catalog):
    cat = catalog(6, 3)
    broken = SolutionCatalog(cat.shape, cat.solutions[:-1])
    assert any("count" in p for p in check_catalog(broken))
    dup = SolutionCatalog(cat.shape, cat.solutions[:-1] + [cat.solutions[0]])
    assert any("duplicate" in p for p in check_catalog(dup))
    off = make_solution(cat.solutions[0].w * (1 + 1e-6), cat.shape)
    assert any("residual" in p for p in check_catalog(SolutionCatalog(cat.shape, [off])))


def test_multiset_distance_ignores_order():
    a = np.array([1 + 1j, 1 - 1j, 0.3])
    assert multiset_distance(a, a[::-1].conj()) == 0
