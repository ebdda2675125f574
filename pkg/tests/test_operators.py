import numpy as np
import pytest
from hypothesis import given, strategies as st
from scipy import linalg

from speclocalizer.inertia import gap
from speclocalizer.lattice import LocalOperator, enumerate_box
from speclocalizer.localizer import probe_gap, probe_hamiltonian
from speclocalizer.operators import (SIGMA, LocalityBudget, Model, OperatorError, build_qwz,
                                     build_ssh, chiral_block, compress, dump_operator,
                                     estimate_locality, is_hermitian, load_operator,
                                     polar_part, random_local_operator)


def test_dimerized_ssh_is_identity_block():
    H = build_ssh(enumerate_box(1, 5), 1.0, 0.0)
    S = chiral_block(H).S
    assert np.allclose(S, np.eye(11))
    assert np.isclose(gap(H.matrix), 1.0)


def test_ssh_bulk_gap_matches_symbol_scan():
    # min over k of |v + w e^{ik}| = |w - v|
    k = np.linspace(-np.pi, np.pi, 20001)
    scan = np.abs(0.4 + np.exp(1j * k)).min()
    assert np.isclose(scan, 0.6, atol=1e-8)
    assert np.isclose(probe_hamiltonian(Model("ssh", 0.4, 1.0), 200).gap, scan, atol=1e-3)


def test_ssh_disorder_is_reproducible_and_structured():
    box = enumerate_box(1, 10)
    a = build_ssh(box, 0.4, 1.0, disorder=0.1, seed=7)
    b = build_ssh(box, 0.4, 1.0, disorder=0.1, seed=7)
    c = build_ssh(box, 0.4, 1.0, disorder=0.1, seed=8)
    assert np.array_equal(a.matrix, b.matrix) and not np.array_equal(a.matrix, c.matrix)
    assert is_hermitian(a.matrix) and a.chiral
    chiral_block(a)  # diagonal blocks vanish


def test_disorder_embeds_in_larger_box():
    small = chiral_block(build_ssh(enumerate_box(1, 6), 0.4, 1.0, 0.1, 3)).S
    big_box = enumerate_box(1, 12)
    big = chiral_block(build_ssh(big_box, 0.4, 1.0, 0.1, 3, disorder_ell=6)).S
    idx = big_box.sites_within(6)
    # the bond leaving the region on the right is clean in both
    assert np.array_equal(big[np.ix_(idx, idx)], small)


def test_ssh_rejects_wrong_dimension():
    with pytest.raises(OperatorError):
        build_ssh(enumerate_box(2, 2), 0.4, 1.0)
    with pytest.raises(OperatorError):
        build_qwz(enumerate_box(1, 2), 1.0)


@pytest.mark.parametrize("m", [-3.0, -1.0, 1.0, 3.0])
def test_qwz_hermitian_and_bulk_gap(m):
    H = build_qwz(enumerate_box(2, 10), m)
    assert is_hermitian(H.matrix)
    ks = np.linspace(-np.pi, np.pi, 201)
    K1, K2 = np.meshgrid(ks, ks)
    d3 = m - np.cos(K1) - np.cos(K2)
    scan = np.sqrt(np.sin(K1) ** 2 + np.sin(K2) ** 2 + d3 ** 2).min()
    pg = probe_gap(H)
    assert pg.gap >= scan - 1e-10
    assert pg.gap <= scan + 0.1


def test_locality_examples():
    box = enumerate_box(1, 6)
    # nearest-neighbour operator with block norm h
    h = 0.7
    M = np.diag(np.full(box.n_sites - 1, h), 1)
    assert np.isclose(estimate_locality(LocalOperator(box, 1, M), 1.0).C, h * np.e)
    D = np.diag(np.linspace(-2, 3, box.n_sites))
    assert np.isclose(estimate_locality(LocalOperator(box, 1, D), 0.3).C, 3.0)
    b = estimate_locality(build_ssh(enumerate_box(1, 10), 0.4, 1.0), np.log(2))
    assert np.isclose(b.C, 2.0) and np.isclose(b.D, 8.0)


@given(st.floats(0.05, 3.0))
def test_finite_range_models_are_local_for_every_mu(mu):
    for H in (build_ssh(enumerate_box(1, 6), 0.4, 1.0, 0.2, 1),
              build_qwz(enumerate_box(2, 3), 1.0)):
        b = estimate_locality(H, mu)
        assert np.isfinite(b.C) and b.C > 0


def test_budget_rejects_bad_constants():
    with pytest.raises(OperatorError):
        LocalityBudget(0.0, 1.0)
    with pytest.raises(OperatorError):
        LocalityBudget(1.0, -1.0)


def test_compression_examples(rng):
    box = enumerate_box(1, 6)
    op = random_local_operator(box, 2, 1.0, rng, hermitian=True)
    comp = compress(op, enumerate_box(1, 2))
    assert np.array_equal(comp.reassemble(1.0), op.matrix)
    M0 = comp.reassemble(0.0)
    ii, oo = comp.inner_dofs, comp.outer_dofs
    assert not M0[np.ix_(ii, oo)].any() and not M0[np.ix_(oo, ii)].any()
    assert np.array_equal(M0[np.ix_(ii, ii)], comp.inner.matrix)
    diag = LocalOperator(box, 1, np.diag(np.arange(box.n_sites, dtype=float)))
    assert not compress(diag, enumerate_box(1, 3)).coupling.any()
    with pytest.raises(OperatorError):
        compress(op, enumerate_box(1, 7))


def test_polar_examples(rng):
    assert np.allclose(polar_part(3 * np.eye(4)), np.eye(4))
    assert np.allclose(polar_part(np.diag([2.0, -5.0])), np.diag([1.0, -1.0]))
    M = rng.standard_normal((6, 6)) + 1j * rng.standard_normal((6, 6))
    U = polar_part(M)
    assert np.allclose(U.conj().T @ U, np.eye(6), atol=1e-12)
    assert np.allclose(U @ linalg.sqrtm(M.conj().T @ M), M, atol=1e-12)
    with pytest.raises(OperatorError):
        polar_part(np.diag([1.0, 0.0]))


@given(st.integers(0, 10_000))
def test_polar_invariant_under_functions_of_modulus(seed):
    rng = np.random.default_rng(seed)
    M = rng.standard_normal((5, 5)) + 1j * rng.standard_normal((5, 5))
    w, V = linalg.eigh(M.conj().T @ M)
    P = (V * (1 + rng.random(5))) @ V.conj().T  # positive, commutes with |M|
    assert np.allclose(polar_part(M @ P), polar_part(M), atol=1e-10)


def test_polar_not_invariant_under_generic_positive_factor(rng):
    M = rng.standard_normal((5, 5)) + 1j * rng.standard_normal((5, 5))
    G = rng.standard_normal((5, 5))
    P = G @ G.T + np.eye(5)
    assert not np.allclose(polar_part(M @ P), polar_part(M), atol=1e-6)


def test_dump_roundtrip(tmp_path, rng):
    op = build_qwz(enumerate_box(2, 2), 1.0)
    dump_operator(op, tmp_path / "op.txt")
    back = load_operator(tmp_path / "op.txt")
    assert np.array_equal(back.matrix, op.matrix)
    assert (back.d, back.internal_dim, back.ell, back.hermitian) == (2, 2, 2, True)


def test_model_dispatch():
    assert Model("ssh").d == 1 and Model("qwz").d == 2
    assert Model("ssh", disorder=0.1).clean is False
    assert "m=3" in Model("qwz", m=3).label()
    with pytest.raises(OperatorError):
        Model("kitaev")


def test_sigma_matrices():
    for a in (1, 2, 3):
        assert np.allclose(SIGMA[a] @ SIGMA[a], np.eye(2))
    assert np.allclose(SIGMA[1] @ SIGMA[2], 1j * SIGMA[3])
