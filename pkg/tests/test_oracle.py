import numpy as np
import pytest

from tasep_bethe.combinat import RingShape, binomial, steady_state_vector
from tasep_bethe.oracle import (
    EigensolverError, build_generator, direct_correlation, evolve, expected_trace, spectrum,
)


def test_generator_m2():
    assert build_generator(RingShape(2, 1)).dense().tolist() == [[1, -1], [-1, 1]]


def test_generator_jammed():
    assert build_generator(RingShape(3, 3)).dense().tolist() == [[0.0]]


@pytest.mark.parametrize("M", range(1, 10))
def test_generator_structure(M):
    for N in range(M + 1):
        H = build_generator(RingShape(M, N)).dense()
        assert np.all(H.sum(axis=0) == 0)
        off = H - np.diag(np.diag(H))
        assert set(np.unique(off)) <= {0.0, -1.0}
        assert np.trace(H) == expected_trace(RingShape(M, N))


def test_trace_example():
    assert np.trace(build_generator(RingShape(4, 2)).dense()) == 8


def test_memory_cap():
    with pytest.raises(MemoryError):
        build_generator(RingShape(20, 10), max_dim=1000)


def test_spectrum_examples():
    ev = spectrum(build_generator(RingShape(2, 1))).eigenvalues
    assert np.allclose(ev, [0, 2], atol=1e-12)
    ev = spectrum(build_generator(RingShape(3, 1))).eigenvalues
    w = np.exp(2j * np.pi / 3)
    assert np.allclose(np.sort_complex(ev), np.sort_complex([0, 1 - w, 1 - w * w]), atol=1e-12)


@pytest.mark.parametrize("M,N", [(5, 2), (6, 3), (8, 4)])
def test_spectrum_invariants(M, N):
    rep = spectrum(build_generator(RingShape(M, N)))
    ev = rep.eigenvalues
    assert np.sum(np.abs(ev) < 1e-8) == 1 and abs(ev[rep.zero_index]) < 1e-8
    assert ev.real.min() > -1e-8
    assert np.allclose(np.sort_complex(ev), np.sort_complex(ev.conj()), atol=1e-8)
    assert rep.gap > 0
    order = np.lexsort((ev.imag, ev.real))
    assert np.array_equal(order, np.arange(len(ev)))


def test_spectrum_rejects_reducible():
    # two disconnected blocks have two stationary states
    gen = build_generator(RingShape(2, 1))
    from scipy import sparse
    from tasep_bethe.oracle import MarkovGenerator

    bad = MarkovGenerator(gen.shape, sparse.csr_array(np.zeros((2, 2))), 0.0)
    with pytest.raises(EigensolverError):
        spectrum(bad)


def test_evolve_examples():
    gen = build_generator(RingShape(2, 1))
    v = np.array([1.0, 0.0])
    assert np.array_equal(evolve(gen, v, 0.0), v)
    e = np.exp(-2.0)
    assert np.allclose(evolve(gen, v, 1.0), [(1 + e) / 2, (1 - e) / 2], rtol=1e-12)
    with pytest.raises(ValueError):
        evolve(gen, v, -1.0)


@pytest.mark.parametrize("t", [0.3, 2.0, 40.0])
def test_evolve_against_expm(t):
    from scipy.linalg import expm

    gen = build_generator(RingShape(7, 3))
    p = np.random.default_rng(1).random(gen.dim)
    p /= p.sum()
    got = evolve(gen, p, t)
    assert np.allclose(got, expm(-t * gen.dense()) @ p, rtol=1e-12, atol=1e-15)
    assert abs(got.sum() - 1) < 1e-12 and got.min() >= 0
    s = steady_state_vector(gen.shape)
    assert np.allclose(evolve(gen, s, t), s, rtol=1e-12)


def test_direct_correlation_examples():
    sh = RingShape(4, 2)
    assert direct_correlation(sh, 3, 0.0) == pytest.approx(1 / 6, abs=1e-14)
    for M, N in [(4, 2), (5, 1), (7, 3)]:
        sh = RingShape(M, N)
        assert direct_correlation(sh, 1, 0.0) == pytest.approx((M - N) / M, abs=1e-14)
    assert direct_correlation(RingShape(5, 0), 2, 1.7) == pytest.approx(1.0, abs=1e-14)


@pytest.mark.parametrize("M,N", [(5, 2), (6, 3)])
def test_direct_correlation_long_time_and_translation(M, N):
    sh = RingShape(M, N)
    gen = build_generator(sh)
    t_inf = 50 / spectrum(gen).gap
    for m in range(1, M + 1):
        assert abs(direct_correlation(sh, m, t_inf, gen=gen) - ((M - N) / M) ** 2) < 1e-8
        ref = direct_correlation(sh, m, 0.7, gen=gen)
        for k in range(2, M + 1):
            assert direct_correlation(sh, m, 0.7, gen=gen, k=k) == pytest.approx(ref, abs=1e-13)
