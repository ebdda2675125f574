import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from speclocalizer.bounds import (GAP_LEMMAS, BoundError, BoundReport, check_fl_commutator,
                                  check_fl_commutator_2d, check_gap_lemmas,
                                  check_holmgren_commutator, fl2d_suite, fl_suite,
                                  holmgren_constant, holmgren_suite, localizer_traceless)
from speclocalizer.inertia import gap, norm
from speclocalizer.lattice import LocalOperator, enumerate_box
from speclocalizer.operators import LocalityBudget, estimate_locality, random_local_operator

LN2 = np.log(2)


def shift(ell, amplitude=1.0):
    box = enumerate_box(1, ell)
    return LocalOperator(box, 1, amplitude * np.eye(box.n_sites, k=-1))


def nn_hopping_2d(ell, amplitude=1.0):
    box = enumerate_box(2, ell)
    D = box.distances()
    return LocalOperator(box, 1, amplitude * (np.abs(D - 1) < 1e-12).astype(complex),
                         hermitian=True)


def test_report_pass_logic():
    assert BoundReport("x", 1.0, 1.0).passed
    assert BoundReport("x", 1.0 + 1e-12, 1.0).passed
    assert not BoundReport("x", 1.1, 1.0).passed
    assert not BoundReport("x", 0.0, 0.0, strict=True).passed


def test_holmgren_shift_example():
    A = shift(50)
    b = LocalityBudget(2.0, LN2)
    assert np.isclose(estimate_locality(A, LN2).C, 2.0)
    r = check_holmgren_commutator(A, b)
    assert np.isclose(r.lhs, 1.0) and np.isclose(r.rhs, 8.0) and r.passed


def test_holmgren_diagonal_and_2d(rng):
    box = enumerate_box(2, 8)
    D = LocalOperator(box, 1, np.diag(rng.standard_normal(box.n_sites)).astype(complex))
    assert check_holmgren_commutator(D, estimate_locality(D, 1.0), axis=2).lhs == 0
    A = nn_hopping_2d(8)
    r = check_holmgren_commutator(A, estimate_locality(A, 1.0), axis=1)
    assert r.passed and 1.8 < r.lhs <= 2.0  # 2 cos(pi/(n+1)) in an open box


def test_holmgren_constant_d1_is_D():
    b = LocalityBudget(2.0, LN2)
    assert np.isclose(holmgren_constant(b, 1), b.D)


def test_budget_violation_and_bad_axis():
    with pytest.raises(BoundError):
        check_holmgren_commutator(shift(20), LocalityBudget(1.0, LN2))
    with pytest.raises(BoundError):
        check_holmgren_commutator(shift(20), LocalityBudget(2.0, LN2), axis=2)


@pytest.mark.parametrize("ell", [2, 5, 10, 20, 40])
def test_fl_commutator_shift_uniform_in_ell(ell):
    A = shift(ell + 5)
    op, tr = check_fl_commutator(A, LocalityBudget(2.0, LN2), ell)
    assert op.lhs <= 8.0 and op.passed and tr.passed


def test_fl_commutator_diagonal(rng):
    box = enumerate_box(1, 12)
    D = LocalOperator(box, 2, np.diag(rng.standard_normal(2 * box.n_sites)).astype(complex))
    op, tr = check_fl_commutator(D, estimate_locality(D, 1.0), 8)
    assert op.lhs == 0 and tr.lhs == 0


def test_fl_commutator_2d_examples(rng):
    box = enumerate_box(2, 5)
    D = LocalOperator(box, 1, np.diag(rng.standard_normal(box.n_sites)).astype(complex))
    assert all(r.lhs == 0 for r in check_fl_commutator_2d(D, estimate_locality(D, 1.0), 3))
    A = nn_hopping_2d(5)
    assert all(r.passed for r in check_fl_commutator_2d(A, estimate_locality(A, 1.0), 3))
    with pytest.raises(BoundError):
        check_fl_commutator_2d(shift(5), LocalityBudget(2.0, LN2), 3)


def test_fl_commutator_2d_operator_bound_is_not_homogeneous():
    # the right side scales like C^2 while the left side scales like C
    A = nn_hopping_2d(5, amplitude=0.01)
    op, s3 = check_fl_commutator_2d(A, estimate_locality(A, 1.0), 3)
    assert not op.passed and s3.passed
    A1 = shift(8, amplitude=0.01)
    assert all(r.passed for r in check_fl_commutator(A1, estimate_locality(A1, 1.0), 3))


def test_gap_sum_tight_example():
    A, B = np.diag([1.0, -1.0]), 0.5 * np.eye(2)
    assert np.isclose(gap(A + B), gap(A) - norm(B))


@pytest.mark.parametrize("v,w", [(0.4, 1.0), (1.0, 0.4)])
@pytest.mark.parametrize("kappa", [0.02, 0.1, 0.5])
def test_traceless_on_localizer_blocks(v, w, kappa):
    assert localizer_traceless(v, w, kappa, ell=20).passed


@pytest.mark.parametrize("name", list(GAP_LEMMAS))
def test_gap_lemmas_random(name):
    reps = check_gap_lemmas(dim=6, draws=25, seed=1, lemmas=[name])
    assert reps and all(r.passed for r in reps)


def test_tight_witness_exists():
    reps = check_gap_lemmas(dim=8, draws=20, seed=0, lemmas=["B.1 gapAplusB"])
    tight = [r for r in reps if r.lemma == "B.1 gapAplusB lower" and "tight" in r.instance]
    assert tight and min(abs(r.margin) for r in tight) < 1e-12


def test_draws_must_be_positive():
    with pytest.raises(BoundError):
        check_gap_lemmas(draws=0)


@settings(max_examples=10)
@given(st.integers(0, 10_000), st.floats(0.3, 2.0))
def test_random_local_operators_pass_a1_a2(seed, mu):
    rng = np.random.default_rng(seed)
    A = random_local_operator(enumerate_box(1, 14), 2, mu, rng)
    b = estimate_locality(A, mu)
    if 14 - np.ceil(5 / mu) >= 0:
        assert check_holmgren_commutator(A, b).passed
    assert all(r.passed for r in check_fl_commutator(A, b, 6))


@pytest.mark.parametrize("suite", [holmgren_suite, fl_suite, fl2d_suite])
def test_locality_suites(suite):
    assert all(r.passed for r in suite(10, seed=2))
