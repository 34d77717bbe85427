import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from specpert.eigensolve import (Spectrum, eig_hermitian, eig_oracle_small, eig_sym,
                                 tridiagonal_eigenvalues, tridiagonalize)
from specpert.errors import DomainError, SizeError


def _sym(rng, n):
    A = rng.standard_normal((n, n))
    return (A + A.T) / 2


def _herm(rng, n):
    A = rng.standard_normal((n, n)) + 1j * rng.standard_normal((n, n))
    return (A + A.conj().T) / 2


def test_trivial_examples():
    assert eig_sym(np.diag([3.0, 1.0, 2.0])).values.tolist() == [1.0, 2.0, 3.0]
    assert np.allclose(eig_sym([[0.0, 1.0], [1.0, 0.0]]).values, [-1, 1], atol=1e-15)
    assert np.allclose(eig_hermitian(np.array([[0, -1j], [1j, 0]])).values, [-1, 1], atol=1e-15)
    assert eig_oracle_small([[5.0]]).values.tolist() == [5.0]
    assert np.allclose(eig_oracle_small([[2.0, 0], [0, -2.0]]).values, [-2, 2], atol=1e-14)


def test_spectrum_type():
    s = eig_sym(np.eye(3))
    assert isinstance(s, Spectrum) and s.n == 3 == len(s)
    assert eig_sym(np.zeros((0, 0))).n == 0


def test_random_6x6_against_oracle():
    M = _sym(np.random.default_rng(6), 6)
    assert np.max(np.abs(eig_sym(M).values - eig_oracle_small(M).values)) <= 1e-8


def test_wilkinson_7():
    W = np.diag(np.abs(np.arange(-3.0, 4.0))) + np.diag(np.ones(6), 1) + np.diag(np.ones(6), -1)
    assert np.max(np.abs(eig_sym(W).values - eig_oracle_small(W).values)) <= 1e-8


def test_oracle_repeated_roots():
    M = np.diag([1.0, 1.0, 2.0, 2.0, 2.0])
    assert np.allclose(eig_oracle_small(M).values, [1, 1, 2, 2, 2], atol=1e-13)


@given(n=st.integers(1, 8), seed=st.integers(0, 2**32 - 1), cplx=st.booleans())
def test_agrees_with_oracle(n, seed, cplx):
    rng = np.random.default_rng(seed)
    M = _herm(rng, n) if cplx else _sym(rng, n)
    got = eig_hermitian(M) if cplx else eig_sym(M)
    assert np.max(np.abs(got.values - eig_oracle_small(M).values)) <= 1e-8


def test_hermitian_real_input_matches():
    M = _sym(np.random.default_rng(2), 9)
    assert np.array_equal(eig_hermitian(M).values, eig_sym(M).values)


def test_hermitian_5x5_invariants():
    M = _herm(np.random.default_rng(5), 5)
    v = eig_hermitian(M).values
    assert abs(v.sum() - np.trace(M).real) <= 1e-10 * (1 + abs(np.trace(M)))
    fro = np.sum(np.abs(M) ** 2)
    assert abs(np.sum(v ** 2) - fro) <= 1e-10 * (1 + fro)


@pytest.mark.parametrize("n", [1, 2, 17, 300, 2000])
def test_trace_frobenius(n):
    M = _sym(np.random.default_rng(n), n)
    v = eig_sym(M).values
    assert np.all(np.diff(v) >= 0)
    tr = np.trace(M)
    fro = np.sum(M * M)
    assert abs(v.sum() - tr) <= 1e-10 * (1 + abs(tr)) * max(1, np.sqrt(n))
    assert abs(np.sum(v ** 2) - fro) <= 1e-10 * (1 + fro)


def test_matches_lapack():
    M = _sym(np.random.default_rng(0), 400)
    assert np.max(np.abs(eig_sym(M).values - np.linalg.eigvalsh(M))) <= 1e-11


def _op_norm(E, rng, iters=300):
    v = rng.standard_normal(E.shape[0])
    for _ in range(iters):
        v = E @ v
        v /= np.linalg.norm(v)
    return float(np.linalg.norm(E @ v))


@given(seed=st.integers(0, 2**32 - 1), scale=st.floats(1e-6, 1.0))
def test_weyl(seed, scale):
    rng = np.random.default_rng(seed)
    M, E = _sym(rng, 30), scale * _sym(rng, 30)
    bound = _op_norm(E, rng)
    # power iteration approaches the norm from below; allow for the shortfall
    gap = np.max(np.abs(eig_sym(M + E).values - eig_sym(M).values))
    assert gap <= bound * 1.05 + 1e-12


def test_tridiagonal_roundtrip():
    M = _sym(np.random.default_rng(9), 50)
    d, e = tridiagonalize(M)
    T = np.diag(d) + np.diag(e, 1) + np.diag(e, -1)
    assert np.allclose(np.linalg.eigvalsh(T), np.linalg.eigvalsh(M), atol=1e-12)
    assert np.allclose(tridiagonal_eigenvalues(d, e), np.linalg.eigvalsh(M), atol=1e-12)


def test_errors():
    with pytest.raises(DomainError):
        eig_sym(np.ones((2, 3)))
    with pytest.raises(DomainError):
        eig_sym(np.array([[0.0, 1.0], [0.0, 0.0]]))
    with pytest.raises(DomainError):
        eig_sym(np.array([[0, 1j], [1j, 0]]))
    with pytest.raises(DomainError):
        eig_hermitian(np.array([[0, 1j], [1j, 0]]))
    with pytest.raises(SizeError):
        eig_oracle_small(np.eye(9))


def test_tiny_asymmetry_tolerated():
    M = np.array([[1.0, 2.0], [2.0 + 1e-14, 1.0]])
    assert np.allclose(eig_sym(M).values, [-1, 3], atol=1e-12)


def test_overwrite_leaves_result_unchanged():
    M = _sym(np.random.default_rng(1), 40)
    ref = eig_sym(M).values
    assert np.array_equal(eig_sym(M.copy(), overwrite=True).values, ref)
