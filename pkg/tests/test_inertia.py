import numpy as np
import pytest
from hypothesis import given, strategies as st
from scipy import linalg

from speclocalizer.inertia import InertiaError, gap, inertia, inertia_from_eigvals, norm
from speclocalizer.localizer import LocalizerSpec, build_localizer
from speclocalizer.operators import Model


def _herm(rng, n):
    G = rng.standard_normal((n, n)) + 1j * rng.standard_normal((n, n))
    return (G + G.conj().T) / 2


def test_inertia_examples():
    r = inertia(np.diag([2.0, -3.0, 5.0]))
    assert (r.n_plus, r.n_minus, r.n_zero, r.signature) == (2, 1, 0, 1)
    r = inertia(np.eye(7))
    assert (r.n_plus, r.n_minus, r.n_zero) == (7, 0, 0)


def test_endpoint_localizer_has_zero_signature():
    L = build_localizer(LocalizerSpec(Model("ssh", 0.4, 1.0), 10, 1.0))
    assert inertia(L.matrix).signature == 0


def test_gap_examples(rng):
    assert gap(np.diag([1.0, -1.0])) == 1.0
    assert gap(np.array([[1.0, 2.0], [2.0, 4.0]])) == 0.0
    A, D = rng.standard_normal((3, 3)), rng.standard_normal((4, 4))
    assert np.isclose(gap(linalg.block_diag(A, D)), min(gap(A), gap(D)), rtol=1e-12)


def test_not_hermitian_rejected():
    with pytest.raises(InertiaError):
        inertia(np.array([[0.0, 1.0], [0.0, 0.0]]))


def test_zero_tolerance_and_certification():
    r = inertia(np.diag([1.0, -1.0, 1e-14]))
    assert r.n_zero == 1 and not r.certified
    r = inertia(np.diag([1.0, -1.0, 1e-9]))
    assert r.n_zero == 0 and not r.certified  # inside 100 * tolerance
    assert inertia(np.diag([1.0, -2.0])).certified
    with pytest.raises(InertiaError):
        inertia_from_eigvals([1.0], -1.0)


@given(st.integers(0, 10_000), st.integers(2, 40))
def test_sylvester_invariance(seed, n):
    rng = np.random.default_rng(seed)
    M = _herm(rng, n)
    G = rng.standard_normal((n, n)) + 1j * rng.standard_normal((n, n))
    if np.linalg.cond(G) > 1e3:
        G = G + 5 * np.eye(n)
    a, b = inertia(M), inertia(G.conj().T @ M @ G)
    assert (a.n_plus, a.n_minus, a.n_zero) == (b.n_plus, b.n_minus, b.n_zero)


@given(st.integers(0, 10_000), st.integers(1, 30))
def test_negation_swaps_counts(seed, n):
    M = _herm(np.random.default_rng(seed), n)
    a, b = inertia(M), inertia(-M)
    assert (a.n_plus, a.n_minus) == (b.n_minus, b.n_plus)


@given(st.integers(0, 10_000), st.integers(1, 12))
def test_gap_unitary_invariance(seed, n):
    rng = np.random.default_rng(seed)
    M = rng.standard_normal((n, n)) + 1j * rng.standard_normal((n, n))
    U = linalg.qr(rng.standard_normal((n, n)) + 1j * rng.standard_normal((n, n)))[0]
    V = linalg.qr(rng.standard_normal((n, n)) + 1j * rng.standard_normal((n, n)))[0]
    g = gap(M)
    assert abs(gap(M.conj().T) - g) <= 1e-12 * norm(M)
    assert abs(gap(U @ M @ V) - g) <= 1e-12 * norm(M)


def test_empty_matrix():
    assert gap(np.zeros((0, 0))) == np.inf and norm(np.zeros((0, 0))) == 0.0
