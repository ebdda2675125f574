import numpy as np
import pytest

from speclocalizer.invariants import (InvariantError, chern_marker, kspace_chern, kspace_winding,
                                      model_invariant, qwz_symbol, realspace_winding, ssh_symbol)
from speclocalizer.lattice import LocalOperator, enumerate_box
from speclocalizer.operators import Model, build_qwz, build_ssh, chiral_block


def ring_block(v, w, ell, disorder=0.0, seed=0):
    box = enumerate_box(1, ell, periodic=True)
    return chiral_block(build_ssh(box, v, w, disorder, seed))


@pytest.mark.parametrize("v,w,expected", [(0.4, 1.0, 1), (1.0, 0.4, 0), (0.7, 1.0, 1)])
def test_kspace_winding(v, w, expected):
    r = kspace_winding(ssh_symbol(v, w))
    assert r.value == expected and r.residual < 1e-8


def test_kspace_winding_constant_and_gapless():
    assert kspace_winding(lambda k: np.eye(1)).value == 0
    with pytest.raises(InvariantError):
        kspace_winding(ssh_symbol(1.0, 1.0), nk=64)


@pytest.mark.parametrize("m,expected", [(-3.0, 0), (-1.0, -1), (1.0, 1), (3.0, 0)])
def test_kspace_chern_profile(m, expected):
    # canonical orientation: whatever FHS gives at m = 1 (here +1) fixes the sign
    r = kspace_chern(qwz_symbol(m))
    assert r.value == expected and r.residual < 1e-8


def test_kspace_chern_gapless():
    with pytest.raises(InvariantError):
        kspace_chern(qwz_symbol(2.0), nk=16)


def test_realspace_winding_ssh():
    r = realspace_winding(ring_block(0.4, 1.0, 40), margin=10)
    assert r.value == 1 and r.residual < 0.05
    r0 = realspace_winding(ring_block(1.0, 0.0, 20))
    assert r0.value == 0 and r0.residual < 1e-10


def test_realspace_winding_polar_and_raw_agree():
    S = ring_block(0.6, 1.0, 30, 0.1, 5)
    a, b = realspace_winding(S), realspace_winding(S, use_polar=False)
    assert a.value == b.value == 1


def test_realspace_winding_margin_stability():
    S = ring_block(0.4, 1.0, 40)
    a, b = realspace_winding(S, margin=10), realspace_winding(S, margin=11)
    assert abs(a.pre_rounding - b.pre_rounding) < 0.02


def test_realspace_winding_singular():
    with pytest.raises(InvariantError):
        realspace_winding(chiral_block(build_ssh(enumerate_box(1, 4), 0.0, 1.0)))


@pytest.mark.parametrize("v,w", [(0.4, 1.0), (1.0, 0.4)])
def test_disordered_winding_matches_clean(v, w):
    clean = kspace_winding(ssh_symbol(v, w)).value
    vals = [model_invariant(Model("ssh", v, w, 0.1, s), 30).value for s in range(20)]
    assert vals == [clean] * 20


@pytest.mark.parametrize("m,expected,tol", [(1.0, 1, 0.1), (3.0, 0, 0.1)])
def test_chern_marker(m, expected, tol):
    r = chern_marker(build_qwz(enumerate_box(2, 14), m), margin=5)
    assert r.value == expected and r.residual < tol
    assert r.value == kspace_chern(qwz_symbol(m)).value


def test_chern_marker_atomic_limit():
    box = enumerate_box(2, 4)
    diag = np.tile([1.0, -1.0], box.n_sites)
    r = chern_marker(LocalOperator(box, 2, np.diag(diag), hermitian=True))
    assert r.value == 0 and r.residual < 1e-10


def test_model_invariant_dispatch():
    assert model_invariant(Model("qwz", m=-1.0), 5).method == "kspace-chern"
    assert model_invariant(Model("ssh", 0.4, 1.0), 5).method == "kspace-winding"
    assert model_invariant(Model("ssh", 0.4, 1.0, 0.1), 5).method == "realspace-winding"
