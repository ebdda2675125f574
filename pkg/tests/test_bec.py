import numpy as np
import pytest

from speclocalizer.bec import (BECError, direct_integrand, flattened_sigma, halfline_flow_symmetry,
                               kubo_chern, kubo_integrand, kubo_traces, polar_ring_block,
                               profile_integral, write_integrand)
from speclocalizer.invariants import kspace_winding, realspace_winding, ssh_symbol
from speclocalizer.lattice import enumerate_box
from speclocalizer.operators import ChiralBlock, Model


@pytest.fixture(scope="module")
def topo_block():
    return polar_ring_block(Model("ssh", v=0.4, w=1.0), 40)


def identity_block(ell=20):
    box = enumerate_box(1, ell, periodic=True)
    return ChiralBlock(np.eye(box.n_sites, dtype=complex), box, 2)


def test_sigma_squares_to_one(topo_block):
    for kappa in (0.0, 0.3, 5.0):
        for s in (1, -1):
            M = flattened_sigma(topo_block, kappa, s).matrix
            assert np.allclose(M @ M, np.eye(len(M)), atol=1e-10)


def test_sigma_limits(topo_block):
    Q = topo_block.to_operator().matrix
    assert np.allclose(flattened_sigma(topo_block, 0.0).matrix, Q)
    n = topo_block.box.n_sites
    gamma = np.diag(np.tile([1.0, -1.0], n))
    assert np.allclose(flattened_sigma(topo_block, 1e6).matrix, gamma, atol=1e-5)
    assert np.allclose(flattened_sigma(topo_block, 1e6, -1).matrix, -gamma, atol=1e-5)


def test_not_unitary_and_bad_sign():
    box = enumerate_box(1, 5, periodic=True)
    bad = ChiralBlock(2 * np.eye(box.n_sites, dtype=complex), box, 2)
    with pytest.raises(BECError, match="not-unitary"):
        flattened_sigma(bad, 0.1)
    with pytest.raises(BECError):
        flattened_sigma(identity_block(), 0.1, sign=0)


def test_profile_integral():
    assert abs(profile_integral() - 4) < 1e-6


@pytest.mark.parametrize("v,w", [(0.4, 1.0), (0.7, 1.0), (1.0, 0.4)])
def test_kubo_chern_matches_winding(v, w):
    U = polar_ring_block(Model("ssh", v=v, w=w), 40)
    W = kspace_winding(ssh_symbol(v, w)).value
    for s in (1, -1):
        r = kubo_chern(U, sign=s)
        assert r.value == -s * W and r.residual < 0.05


def test_kubo_chern_identity_is_zero():
    r = kubo_chern(identity_block())
    assert r.value == 0 and r.residual < 1e-12


def test_kubo_chern_equals_winding_trace(topo_block):
    tr = kubo_traces(topo_block)
    assert abs(kubo_chern(topo_block).pre_rounding + tr.winding_trace) < 1e-6
    rw = realspace_winding(topo_block, margin=tr.margin)
    assert rw.value == 1


def test_kubo_chern_cutoff_doubling(topo_block):
    a = kubo_chern(topo_block, kappa_max=20).pre_rounding
    b = kubo_chern(topo_block, kappa_max=40, nodes=8001).pre_rounding
    assert abs(a - b) < 1e-4
    with pytest.raises(BECError):
        kubo_chern(topo_block, kappa_max=5)


def test_kubo_chern_disordered():
    U = polar_ring_block(Model("ssh", v=0.4, w=1.0, disorder=0.2, seed=3), 40)
    assert kubo_chern(U).value == -1


def test_integrand_profile_ratio(topo_block):
    integ = kubo_integrand(topo_block, np.linspace(5, 20, 31))
    r = integ.profile_ratio()
    assert np.all(np.abs(r / r[-1] - 1) < 0.05)


@pytest.mark.parametrize("kappa", [-1.3, 0.0, 0.4, 2.0])
def test_direct_integrand_matches_closed_form(kappa):
    U = polar_ring_block(Model("ssh", v=0.5, w=1.0), 12)
    closed = kubo_traces(U).integrand(kappa)
    assert abs(direct_integrand(U, kappa) - closed) < 1e-6


def test_write_integrand(tmp_path, topo_block):
    p = tmp_path / "k.csv"
    with open(p, "w") as fh:
        write_integrand(kubo_integrand(topo_block, [0.0, 1.0]), fh)
    lines = p.read_text().splitlines()
    assert lines[0] == "kappa,integrand" and len(lines) == 3


@pytest.mark.parametrize("v,w,full,half", [(0.4, 1.0, -2, -1), (1.0, 0.4, 0, 0), (1.0, 0.0, 0, 0)])
def test_halfline_flow_symmetry(v, w, full, half):
    r = halfline_flow_symmetry(Model("ssh", v=v, w=w), 20)
    assert r.symmetric and (r.full, r.half) == (full, half)


def test_halfline_rejects_non_chiral():
    with pytest.raises(BECError):
        halfline_flow_symmetry(Model("qwz"), 5)
