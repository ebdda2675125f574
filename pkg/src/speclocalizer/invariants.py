"""Independent oracles for the bulk invariants.

Conventions
-----------
* Winding: the chiral symbol is ``S(k) = sum_n S[x+n, x] exp(+i k n)``;
  for SSH this is ``v + w exp(ik)`` and ``v < w`` gives winding +1.
* Chern: Fukui-Hatsugai-Suzuki lattice field strength of the lower band
  of ``h(k) = sum_n H[x+n, x] exp(-i k.n)``, plaquettes oriented
  counter-clockwise in ``(k1, k2)``.
* Real-space winding: ``+tr_W(U^* [Lambda, U])`` with ``U = pol(S)``, which
  agrees with the k-space winding above and with half the localizer
  signature.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable

import numpy as np
from scipy import linalg

from .lattice import LocalOperator
from .operators import SIGMA, ChiralBlock, OperatorError, polar_part


class InvariantError(ValueError):
    pass


@dataclass(frozen=True)
class InvariantValue:
    """Integer invariant with the raw value it was rounded from."""

    value: int
    method: str
    pre_rounding: float

    @property
    def residual(self) -> float:
        return abs(self.pre_rounding - self.value)

    @classmethod
    def from_raw(cls, raw: float, method: str) -> "InvariantValue":
        return cls(int(np.rint(raw)), method, float(raw))


def ssh_symbol(v: float, w: float) -> Callable:
    """Chiral Bloch symbol ``k -> [[v + w exp(ik)]]``."""
    return lambda k: np.array([[v + w * np.exp(1j * k)]])


def qwz_symbol(m: float) -> Callable:
    """``h(k) = sin k1 s1 + sin k2 s2 + (m - cos k1 - cos k2) s3``."""
    def h(k1, k2):
        return (np.sin(k1) * SIGMA[1] + np.sin(k2) * SIGMA[2]
                + (m - np.cos(k1) - np.cos(k2)) * SIGMA[3])
    return h


def _winding_raw(symbol, nk: int) -> float:
    ks = 2 * np.pi * np.arange(nk) / nk
    mats = [np.atleast_2d(symbol(k)) for k in ks]
    smin = min(linalg.svdvals(M)[-1] for M in mats)
    if smin <= 1e-8:
        raise InvariantError(f"gap-closed-on-grid: min singular value {smin:.2e}")
    dets = np.array([linalg.det(M) for M in mats])
    steps = np.angle(np.roll(dets, -1) / dets)
    return steps.sum() / (2 * np.pi)


def kspace_winding(symbol, nk: int = 2048) -> InvariantValue:
    """Winding number of ``det S(k)`` around the origin.

    The phase increments on ``nk`` equally spaced momenta are summed; the
    raw value is checked against a grid of ``2 nk`` points.

    Raises
    ------
    InvariantError
        If ``S(k)`` is singular on the grid or the grid is too coarse.
    """
    raw = _winding_raw(symbol, nk)
    if abs(_winding_raw(symbol, 2 * nk) - raw) >= 1e-6:
        raise InvariantError("winding not converged under grid doubling")
    return InvariantValue.from_raw(raw, "kspace-winding")


def kspace_chern(symbol, nk: int = 64) -> InvariantValue:
    """Fukui-Hatsugai-Suzuki Chern number of the bands below zero.

    Parameters
    ----------
    symbol : callable
        ``(k1, k2) -> h(k)``, a Hermitian matrix.
    nk : int
        Momenta per direction.
    """
    ks = 2 * np.pi * np.arange(nk) / nk
    h = np.array([[symbol(k1, k2) for k2 in ks] for k1 in ks])
    ev, vec = np.linalg.eigh(h)
    n_occ = int(np.count_nonzero(ev[0, 0] < 0))
    if np.any((ev < 0).sum(axis=-1) != n_occ) or np.abs(ev).min() <= 1e-8:
        raise InvariantError("gap-closed-on-grid")
    u = vec[..., :n_occ]

    def link(a, b):
        d = np.linalg.det(np.einsum("...ji,...jk->...ik", a.conj(), b))
        return d / np.abs(d)

    u1 = np.roll(u, -1, axis=0)
    u2 = np.roll(u, -1, axis=1)
    u12 = np.roll(u1, -1, axis=1)
    F = np.angle(link(u, u1) * link(u1, u12) / link(u2, u12) / link(u, u2))
    return InvariantValue.from_raw(F.sum() / (2 * np.pi), "kspace-chern")


def window_mask(op_box, internal: int, margin: int) -> np.ndarray:
    if not 0 <= margin < op_box.ell:
        raise InvariantError(f"margin {margin} must lie in [0, ell)")
    inside = op_box.sup_norms() <= op_box.ell - margin
    return np.repeat(inside, internal)


def realspace_winding(S: ChiralBlock, margin: int | None = None,
                      use_polar: bool = True) -> InvariantValue:
    """Windowed trace ``tr_W(U^* [Lambda, U])`` with ``U = pol(S)``.

    Parameters
    ----------
    S : ChiralBlock
        Chiral block on a box (periodic rings avoid edge zero modes).
    margin : int, optional
        The window keeps sites with ``|x| <= ell - margin``; default
        ``ell // 4``.
    use_polar : bool
        Use ``S`` itself in place of ``U`` (with ``S^-1`` for ``U^*``) when
        False.

    Raises
    ------
    InvariantError
        ``singular-S`` if ``S`` is not invertible.
    """
    box = S.box
    h = S.internal_dim // 2
    margin = box.ell // 4 if margin is None else margin
    try:
        U = polar_part(S.S)
    except OperatorError:
        raise InvariantError("singular-S") from None
    if use_polar:
        left, right = U.conj().T, U
    else:
        left, right = linalg.inv(S.S), S.S
    lam = np.repeat((box.sites[:, 0] >= 0).astype(float), h)
    comm = lam[:, None] * right - right * lam[None, :]      # [Lambda, right]
    prod = left @ comm
    W = window_mask(box, h, margin)
    return InvariantValue.from_raw(float(np.real(np.trace(prod[np.ix_(W, W)]))),
                                   "realspace-winding")


def chern_marker(H: LocalOperator, margin: int | None = None) -> InvariantValue:
    """``2 pi i tr_W([P Lambda_1 P, P Lambda_2 P])`` for the Fermi projection P.

    Raises
    ------
    InvariantError
        ``gapless`` if ``H`` has an eigenvalue within ``1e-8 |H|`` of zero.
    """
    if H.d != 2:
        raise InvariantError("chern_marker needs d=2")
    box, N = H.box, H.internal_dim
    margin = box.ell // 4 if margin is None else margin
    ev, vec = linalg.eigh(H.matrix)
    if np.abs(ev).min() <= 1e-8 * max(np.abs(ev).max(), 1.0):
        raise InvariantError("gapless")
    occ = vec[:, ev < 0]
    P = occ @ occ.conj().T
    l1 = np.repeat((box.sites[:, 0] >= 0).astype(float), N)
    l2 = np.repeat((box.sites[:, 1] >= 0).astype(float), N)
    A = P @ (l1[:, None] * P)
    B = P @ (l2[:, None] * P)
    W = window_mask(box, N, margin)
    # tr_W(AB - BA) from the window rows only
    val = np.einsum("ij,ji->", A[W], B[:, W]) - np.einsum("ij,ji->", B[W], A[:, W])
    return InvariantValue.from_raw(float(np.real(2j * np.pi * val)), "chern-marker")


def model_invariant(model, ell: int, nk: int | None = None,
                    margin: int | None = None) -> InvariantValue:
    """Oracle invariant matching the localizer on ``B_ell``.

    Clean SSH uses the k-space winding, QWZ the FHS Chern number.  For
    disordered SSH the realization is confined to ``|x| <= ell`` and the
    real-space winding is taken on a ring of radius ``2 ell``, whose window
    (margin ``ell // 2`` by default) contains the whole disordered region.
    """
    from .lattice import enumerate_box
    from .operators import chiral_block

    if model.name == "qwz":
        return kspace_chern(qwz_symbol(model.m), nk or 64)
    if model.clean:
        return kspace_winding(ssh_symbol(model.v, model.w), nk or 2048)
    ring = enumerate_box(1, 2 * ell, periodic=True)
    S = chiral_block(model.build(ring, disorder_ell=ell))
    return realspace_winding(S, ell // 2 if margin is None else margin)


__all__ = [
    "InvariantError", "InvariantValue", "ssh_symbol", "qwz_symbol", "kspace_winding",
    "kspace_chern", "realspace_winding", "chern_marker", "window_mask", "model_invariant",
]
