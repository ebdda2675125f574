"""Bulk-edge identities for d=1 chiral models at fixed kappa fibers.

The flattened family is ``Sigma_kappa = (1 + kappa^2)^(-1/2) (s kappa Gamma + Q)``
with ``Q = [[0, U^*], [U, 0]]``, ``Gamma`` the chiral grading and ``s = +-1``.
Because ``Sigma = p (kappa Z + Q)`` with ``Z = s Gamma`` and ``p = (1 + kappa^2)^(-1/2)``,

* ``[Lambda, Sigma] = p [Lambda, Q]``,
* ``d Sigma / d kappa = p^3 (Z - kappa Q)``,

so the Kubo integrand is ``-1/8 p^5 (kappa t1 - kappa^2 t2 + t3 - kappa t4)``
with four kappa-independent windowed traces ``t_i``.
"""

from __future__ import annotations

import csv
from dataclasses import dataclass

import numpy as np

from .flow import HermitianPath, spectral_flow
from .inertia import norm
from .invariants import InvariantError, InvariantValue, window_mask
from .lattice import LocalOperator, enumerate_box
from .operators import ChiralBlock, Model, OperatorError, chiral_block, polar_part

DEFAULT_KAPPA_MAX = 20.0
DEFAULT_NODES = 4001


class BECError(ValueError):
    pass


def _grading(box, internal_dim: int) -> np.ndarray:
    h = internal_dim // 2
    return np.tile(np.r_[np.ones(h), -np.ones(h)], box.n_sites)


def _lambda(box, internal_dim: int) -> np.ndarray:
    return np.repeat((box.sites[:, 0] >= 0).astype(float), internal_dim)


def _check_unitary(U: ChiralBlock):
    M = np.asarray(U.S)
    err = np.abs(M.conj().T @ M - np.eye(M.shape[0])).max(initial=0.0)
    if err > 1e-10:
        raise BECError(f"not-unitary: |U^*U - 1| = {err:.2e}")


def _sign(sign) -> int:
    if sign not in (1, -1, "+", "-"):
        raise BECError(f"sign must be +1 or -1, got {sign!r}")
    return -1 if sign in (-1, "-") else 1


def flattened_sigma(U: ChiralBlock, kappa: float, sign=1) -> LocalOperator:
    """``Sigma_kappa^+-`` for a unitary chiral block ``U``.

    Raises
    ------
    BECError
        ``not-unitary`` if ``|U^*U - 1| > 1e-10``.
    """
    _check_unitary(U)
    Q = U.to_operator()
    Z = _sign(sign) * _grading(U.box, U.internal_dim)
    p = 1 / np.sqrt(1 + kappa ** 2)
    M = p * (Q.matrix + np.diag(kappa * Z))
    return LocalOperator(U.box, U.internal_dim, M, hermitian=True)


@dataclass(frozen=True)
class KuboTraces:
    """The kappa-independent windowed traces of the integrand."""

    t1: float
    t2: float
    t3: float
    t4: float
    winding_trace: float  # tr_W(U^* [Lambda, U])
    margin: int

    def integrand(self, kappa):
        kappa = np.asarray(kappa, dtype=float)
        p5 = (1 + kappa ** 2) ** -2.5
        return -p5 * (kappa * self.t1 - kappa ** 2 * self.t2 + self.t3 - kappa * self.t4) / 8


def kubo_traces(U: ChiralBlock, sign=1, margin: int | None = None) -> KuboTraces:
    _check_unitary(U)
    box, N = U.box, U.internal_dim
    margin = box.ell // 4 if margin is None else margin
    W = window_mask(box, N, margin)
    Q = U.to_operator().matrix
    z = _sign(sign) * _grading(box, N)
    lam = _lambda(box, N)
    LQ = lam[:, None] * Q - Q * lam[None, :]            # [Lambda, Q]
    C1 = LQ * z[None, :] - z[:, None] * LQ              # [[Lambda, Q], Z]
    C2 = LQ @ Q - Q @ LQ                                # [[Lambda, Q], Q]

    def tr_w(A, B):
        # tr_W(A B) with A diagonal (vector) or dense
        if A.ndim == 1:
            return float(np.real(np.sum((A[:, None] * B)[W, W])))
        return float(np.real(np.einsum("ij,ji->", A[W], B[:, W])))

    h = N // 2
    Wh = window_mask(box, h, margin)
    S = np.asarray(U.S)
    lh = _lambda(box, h)
    wt = float(np.real(np.einsum("ij,ji->", S.conj().T[Wh], (lh[:, None] * S - S * lh[None, :])[:, Wh])))
    return KuboTraces(tr_w(z, C1), tr_w(z, C2), tr_w(Q, C1), tr_w(Q, C2), wt, margin)


def direct_integrand(U: ChiralBlock, kappa: float, sign=1, margin: int | None = None) -> float:
    """``-1/8 tr_W(Sigma [[Lambda, Sigma], dSigma])`` from explicit matrices.

    Slow reference for the closed form; ``dSigma`` is a central difference.
    """
    box, N = U.box, U.internal_dim
    margin = box.ell // 4 if margin is None else margin
    W = window_mask(box, N, margin)
    lam = _lambda(box, N)
    Sg = flattened_sigma(U, kappa, sign).matrix
    eps = 1e-5
    dS = (flattened_sigma(U, kappa + eps, sign).matrix
          - flattened_sigma(U, kappa - eps, sign).matrix) / (2 * eps)
    LS = lam[:, None] * Sg - Sg * lam[None, :]
    M = Sg @ (LS @ dS - dS @ LS)
    return float(np.real(np.trace(M[np.ix_(W, W)]))) / -8


@dataclass(frozen=True)
class KuboIntegrand:
    kappas: np.ndarray
    values: np.ndarray
    margin: int
    sign: int

    def profile_ratio(self) -> np.ndarray:
        """``values / (1 + kappa^2)^(-3/2)``."""
        return self.values * (1 + self.kappas ** 2) ** 1.5


def kubo_integrand(U: ChiralBlock, kappas, sign=1, margin: int | None = None) -> KuboIntegrand:
    tr = kubo_traces(U, sign, margin)
    k = np.asarray(kappas, dtype=float)
    return KuboIntegrand(k, tr.integrand(k), tr.margin, _sign(sign))


def _trapezoid(values, kappas):
    return float(np.sum((values[1:] + values[:-1]) * np.diff(kappas)) / 2)


def profile_integral(kappa_max: float = DEFAULT_KAPPA_MAX, nodes: int = DEFAULT_NODES) -> float:
    """Quadrature of ``2 (1 + kappa^2)^(-3/2)`` over the line; exactly 4."""
    k = np.linspace(-kappa_max, kappa_max, nodes)
    tail = 2 * 2 * (1 - kappa_max / np.sqrt(1 + kappa_max ** 2))
    return _trapezoid(2 * (1 + k ** 2) ** -1.5, k) + tail


def _tails(a: float) -> tuple[float, float]:
    """Two-sided tails of ``p^5`` and ``kappa^2 p^5`` beyond ``|kappa| = a``."""
    s = (1 + a * a) ** 1.5
    return 2 * (2 / 3 - a * (2 * a * a + 3) / (3 * s)), 2 * (1 / 3 - a ** 3 / (3 * s))


def _kubo_quadrature(tr: KuboTraces, kappa_max: float, nodes: int) -> float:
    k = np.linspace(-kappa_max, kappa_max, nodes)
    tail0, tail2 = _tails(kappa_max)
    # odd terms have symmetric tails that cancel
    return _trapezoid(tr.integrand(k), k) - (tr.t3 * tail0 - tr.t2 * tail2) / 8


def kubo_chern(U: ChiralBlock, kappa_max: float = DEFAULT_KAPPA_MAX, nodes: int = DEFAULT_NODES,
               margin: int | None = None, sign=1) -> InvariantValue:
    """Chern number of ``[[0, U^*], [U, 0]] +- kappa sigma_3`` by kappa quadrature.

    Composite trapezoid on ``[-kappa_max, kappa_max]`` plus the closed-form
    tail.  In infinite volume the value is ``-+ tr(U^* [Lambda, U])``.

    Raises
    ------
    BECError
        ``quadrature-unconverged`` if doubling the node count moves the
        result by more than 1e-4; ``not-unitary``.
    """
    if kappa_max < 10:
        raise BECError("kappa_max must be at least 10")
    tr = kubo_traces(U, sign, margin)
    raw = _kubo_quadrature(tr, kappa_max, nodes)
    if abs(_kubo_quadrature(tr, kappa_max, 2 * nodes - 1) - raw) > 1e-4:
        raise BECError("quadrature-unconverged")
    return InvariantValue.from_raw(raw, "kubo-chern")


def polar_ring_block(model: Model, ell: int) -> ChiralBlock:
    """``U = pol(S)`` of a chiral model on the periodic ring of radius ``ell``."""
    if not model.chiral:
        raise BECError("model is not chiral")
    box = enumerate_box(1, ell, periodic=True)
    S = chiral_block(model.build(box))
    try:
        return ChiralBlock(polar_part(S.S), box, S.internal_dim)
    except OperatorError:
        raise InvariantError("singular-S") from None


@dataclass(frozen=True)
class HalflineReport:
    """Spectral flows of ``kappa -> [[0, S^*], [S, 0]] + kappa sgn(X) sigma_3``.

    ``half`` is the flow over ``[kappa_min, kappa_max]`` and ``full`` the
    flow over ``[-kappa_max, -kappa_min]`` plus ``half``.  ``box_flow`` is the
    plain finite-volume flow over ``[-kappa_max, kappa_max]``, which also
    counts the crossings of the two modes bound to the ends of the box.
    """

    full: int
    half: int
    box_flow: int
    kappa_min: float
    kappa_max: float

    @property
    def symmetric(self) -> bool:
        return self.full == 2 * self.half


def halfline_flow_symmetry(model: Model, ell: int, kappa_max: float | None = None,
                           kappa_min: float | None = None, points: int = 41) -> HalflineReport:
    """Check ``full = 2 half`` for the sign-profile localizer of a chiral model.

    ``kappa_min`` (default ``1e-3 |H|``) keeps the flow away from kappa = 0,
    where the end modes of the open box make the operator singular.

    Raises
    ------
    FlowError
        ``endpoint-singular``.
    """
    if not model.chiral or model.d != 1:
        raise BECError("halfline_flow_symmetry needs a d=1 chiral model")
    box = enumerate_box(1, ell)
    H = model.build(box)
    nH = norm(H.matrix)
    kappa_max = 3 * nH if kappa_max is None else kappa_max
    kappa_min = 1e-3 * nH if kappa_min is None else kappa_min
    if not 0 < kappa_min < kappa_max:
        raise BECError("need 0 < kappa_min < kappa_max")
    sg = np.repeat(np.where(box.sites[:, 0] >= 0, 1.0, -1.0), H.internal_dim)
    D = sg * _grading(box, H.internal_dim)
    Q = H.matrix

    def path(a, b, n=points):
        return HermitianPath(np.linspace(a, b, n), lambda k: Q + np.diag(k * D))

    half = spectral_flow(path(kappa_min, kappa_max)).flow
    left = spectral_flow(path(-kappa_max, -kappa_min)).flow
    # an even node count keeps kappa = 0 off the grid
    box_flow = spectral_flow(path(-kappa_max, kappa_max, 2 * points)).flow
    return HalflineReport(left + half, half, box_flow, float(kappa_min), float(kappa_max))


def write_integrand(integ: KuboIntegrand, fh) -> None:
    w = csv.writer(fh, lineterminator="\n")
    w.writerow(["kappa", "integrand"])
    for k, v in zip(integ.kappas, integ.values):
        w.writerow([repr(float(k)), repr(float(v))])


__all__ = [
    "BECError", "flattened_sigma", "KuboTraces", "kubo_traces", "direct_integrand",
    "KuboIntegrand", "kubo_integrand", "profile_integral", "kubo_chern", "polar_ring_block",
    "HalflineReport", "halfline_flow_symmetry", "write_integrand",
]
