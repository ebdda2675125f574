"""Checks of the commutator and gap estimates on concrete matrices.

Every check returns :class:`BoundReport` objects; failures are reported,
not raised, except when an input violates the hypotheses of the estimate.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy import linalg

from .inertia import gap, norm
from .lattice import (CLAMPED, LAUGHLIN, RAW, SIGN, SQUARE, LatticeBox, LocalOperator,
                      PositionFunction, enumerate_box, position_values)
from .operators import (LocalityBudget, build_ssh, chiral_block, estimate_locality,
                        random_local_operator)

REL_TOL = 1e-10


class BoundError(ValueError):
    pass


@dataclass(frozen=True)
class BoundReport:
    """One instance of an inequality ``lhs <= rhs``.

    ``passed`` requires ``rhs - lhs >= -1e-10 * max(|lhs|, |rhs|)``, or
    ``rhs - lhs > 0`` for strict reports.
    """

    lemma: str
    lhs: float
    rhs: float
    instance: str = ""
    strict: bool = False

    @property
    def margin(self) -> float:
        return self.rhs - self.lhs

    @property
    def scale(self) -> float:
        return max(abs(self.lhs), abs(self.rhs), np.finfo(float).tiny)

    @property
    def passed(self) -> bool:
        if self.strict:
            return self.margin > 0
        return self.margin >= -REL_TOL * self.scale


def _equality(lemma: str, a: float, b: float, instance: str) -> BoundReport:
    """Equality up to the relative tolerance, as ``|a - b| <= tol max(|a|, |b|)``."""
    return BoundReport(lemma, abs(a - b), REL_TOL * max(abs(a), abs(b)), instance)


def _check_budget(A: LocalOperator, budget: LocalityBudget):
    C = estimate_locality(A, budget.mu).C
    if C > budget.C * (1 + 1e-12):
        raise BoundError(f"budget-violated: operator needs C={C:.6g} > {budget.C:.6g}")


def holmgren_constant(budget: LocalityBudget, d: int) -> float:
    """``C coth(mu / 2 sqrt d)^(d-1) / (cosh(mu / sqrt d) - 1)``."""
    a = budget.mu / math.sqrt(d)
    return budget.C * (1 / math.tanh(a / 2)) ** (d - 1) / (math.cosh(a) - 1)


def _diag(box: LatticeBox, kind: str, ell: int, N: int) -> np.ndarray:
    return np.repeat(position_values(box, PositionFunction(kind, ell, box.d)), N)


def _commutator_diag(A: np.ndarray, f: np.ndarray) -> np.ndarray:
    """``[A, diag(f)]``."""
    return A * f[None, :] - f[:, None] * A


def schatten(M: np.ndarray, p: float) -> float:
    s = linalg.svdvals(M)
    return float(np.sum(s ** p) ** (1 / p))


def check_holmgren_commutator(A: LocalOperator, budget: LocalityBudget, axis: int = 1) -> BoundReport:
    """``|[A, X_j]| <= C coth(mu/(2 sqrt d))^(d-1) / (cosh(mu/sqrt d) - 1)``.

    The left side keeps only rows at sup-distance more than ``5/mu`` from
    the box boundary, which removes truncation effects.
    """
    _check_budget(A, budget)
    if axis not in (1, 2) or axis > A.d:
        raise BoundError(f"invalid axis {axis}")
    x = np.repeat(A.box.sites[:, axis - 1].astype(float), A.internal_dim)
    depth = math.ceil(5 / budget.mu)
    rows = np.repeat(A.box.sup_norms() <= A.ell - depth, A.internal_dim)
    if not rows.any():
        raise BoundError("box too small for the interior restriction")
    lhs = norm(_commutator_diag(A.matrix, x)[rows])
    return BoundReport("A.1 holmgren", lhs, holmgren_constant(budget, A.d),
                       f"d={A.d} ell={A.ell} axis={axis}")


def check_fl_commutator(A: LocalOperator, budget: LocalityBudget, ell: int) -> list[BoundReport]:
    """Operator-norm and trace-norm bounds for ``[A, f_ell(X)]`` in d=1.

    Returns two reports: ``|[A, f]| <= C / (cosh mu - 1)`` and
    ``|[A, f]|_1 <= ell |[A, sgn X]|_1 + 2 N |A| ell (2 ell + 1) + 4 N |A|``.
    """
    if A.d != 1:
        raise BoundError("wrong-dimension: d=1 only")
    _check_budget(A, budget)
    N = A.internal_dim
    f = _diag(A.box, CLAMPED, ell, N).real
    sg = _diag(A.box, SIGN, ell, N).real
    C = _commutator_diag(A.matrix, f)
    nA = norm(A.matrix)
    tag = f"ell={ell} box={A.ell}"
    return [
        BoundReport("A.2 operator-norm", norm(C), budget.D, tag),
        BoundReport("A.2 trace-norm", schatten(C, 1),
                    ell * schatten(_commutator_diag(A.matrix, sg), 1)
                    + 2 * N * nA * ell * (2 * ell + 1) + 4 * N * nA, tag),
    ]


def check_fl_commutator_2d(A: LocalOperator, budget: LocalityBudget, ell: int) -> list[BoundReport]:
    """Operator-norm and Schatten-3 bounds for ``[A, f_ell(X)]`` in d=2.

    Here ``f_ell = ell L + chi_square (X - ell L) + P_0``, i.e. the raw
    position inside the square box and ``ell`` times the Laughlin phase
    outside.  The reports are ``|[A, f]| <= (C / (cosh mu - 1))^2`` and
    ``|[A, f]|_3 <= ell |[A, L]|_3 + 2 N |A| ell (2 ell + 1)^2 + 4 N |A|``.
    """
    if A.d != 2:
        raise BoundError("wrong-dimension: d=2 only")
    _check_budget(A, budget)
    N = A.internal_dim
    f = _diag(A.box, SQUARE, ell, N)
    L = _diag(A.box, LAUGHLIN, ell, N)
    C = _commutator_diag(A.matrix, f)
    nA = norm(A.matrix)
    tag = f"ell={ell} box={A.ell}"
    return [
        BoundReport("A.3 operator-norm", norm(C), budget.D ** 2, tag),
        BoundReport("A.3 schatten-3", schatten(C, 3),
                    ell * schatten(_commutator_diag(A.matrix, L), 3)
                    + 2 * N * nA * ell * (2 * ell + 1) ** 2 + 4 * N * nA, tag),
    ]


# ------------------------------------------------------------ gap lemmas ---

def _rand(rng, n, m=None):
    m = n if m is None else m
    return (rng.standard_normal((n, m)) + 1j * rng.standard_normal((n, m))) / np.sqrt(2)


def _herm(rng, n):
    G = _rand(rng, n)
    return (G + G.conj().T) / 2


def _pos(rng, n):
    G = _rand(rng, n)
    return G @ G.conj().T + 0.1 * np.eye(n)


def gap_squared(rng, n, i):
    A = _rand(rng, n)
    return [_equality("B.1 gap_squared", gap(A), math.sqrt(gap(A.conj().T @ A)), f"draw {i}")]


def gap_product(rng, n, i):
    A, B = _rand(rng, n), _rand(rng, n)
    g = gap(A @ B)
    return [BoundReport("B.1 gapAB lower", gap(A) * gap(B), g, f"draw {i}"),
            BoundReport("B.1 gapAB upper", g, gap(A) * norm(B), f"draw {i}")]


def gap_sum(rng, n, i):
    """Every tenth draw is a tight instance that saturates the lower bound."""
    A = _herm(rng, n)
    if i % 10 == 0:
        ev, V = linalg.eigh(A)
        k = int(np.argmin(np.abs(ev)))
        v = V[:, [k]]
        c = 0.5 * abs(ev[k])
        B = -c * np.sign(ev[k]) * (v @ v.conj().T)
        tag = f"draw {i} tight"
    else:
        B = 0.5 * _rand(rng, n)
        tag = f"draw {i}"
    g = gap(A + B)
    return [BoundReport("B.1 gapAplusB lower", gap(A) - norm(B), g, tag),
            BoundReport("B.1 gapAplusB upper", g, gap(A) + norm(B), tag)]


def gap_sum_positive(rng, n, i):
    A, B = _pos(rng, n), _pos(rng, n)
    return [BoundReport("B.1 gapAplusBpositive", gap(A) + gap(B), gap(A + B), f"draw {i}")]


def gap_direct_sum(rng, n, i):
    A, D = _rand(rng, n), _rand(rng, n + 1)
    return [_equality("B.1 gapDirectSum", gap(linalg.block_diag(A, D)), min(gap(A), gap(D)),
                      f"draw {i}")]


def _blocks(rng, n, d_shift=0.0, b_scale=1.0):
    A, D = _herm(rng, n), _herm(rng, n)
    if d_shift:
        ev, V = linalg.eigh(D)
        D = (V * (ev + d_shift * np.sign(ev))) @ V.conj().T
    B = b_scale * _rand(rng, n)
    return A, B, D, np.block([[A, B], [B.conj().T, D]])


def block_gap(rng, n, i):
    A, B, D, H = _blocks(rng, n, b_scale=0.3)
    return [BoundReport("B.2 block_gap", min(gap(A), gap(D)) - norm(B), gap(H), f"draw {i}")]


def upper_schur(rng, n, i):
    A, B, D, H = _blocks(rng, n)
    Di = linalg.inv(D)
    schur = A - B @ Di @ B.conj().T
    rhs = min(gap(D), gap(schur)) * (1 + norm(B @ Di)) ** 2
    return [BoundReport("B.2 UpperSchur", gap(H), rhs, f"draw {i}")]


def block_gap_d(rng, n, i):
    A, B, D, H = _blocks(rng, n, d_shift=2.0, b_scale=0.5)
    gA, gD = gap(A), gap(D)
    if gA > gD:
        A, D = D, A
        H = np.block([[A, B], [B.conj().T, D]])
        gA, gD = gD, gA
    return [BoundReport("B.2 block_gap_D", gA - math.sqrt(gA / gD) * norm(B), gap(H), f"draw {i}")]


def invertible_cut(rng, n, i, s_points: int = 101):
    """Draw until the cut hypothesis holds, then scan ``s``."""
    A, B, D, H = _blocks(rng, n, d_shift=4.0, b_scale=0.2)
    while True:
        H1 = np.block([[A, B], [B.conj().T, D]])
        nb, g1 = norm(B), gap(H1)
        if g1 > 0 and gap(D) > nb * max(1.0, nb / (0.25 * g1)):
            break
        B = 0.5 * B
    gaps = [gap(np.block([[A, s * B], [s * B.conj().T, D]])) for s in np.linspace(0, 1, s_points)]
    return [BoundReport("B.3 invertible_cut", REL_TOL * norm(H1), min(gaps), f"draw {i}",
                        strict=True)]


def gap_traceless(rng, n, i):
    A, B = _herm(rng, n), _rand(rng, n)
    L = np.block([[A, B.conj().T], [B, -A]])
    comm = norm(A @ B - B @ A)
    return [BoundReport("B.4 gap_traceless", gap(A) ** 2 + gap(B) ** 2 - comm, gap(L) ** 2,
                        f"draw {i}")]


GAP_LEMMAS = {
    "B.1 gap_squared": gap_squared,
    "B.1 gapAB": gap_product,
    "B.1 gapAplusB": gap_sum,
    "B.1 gapAplusBpositive": gap_sum_positive,
    "B.1 gapDirectSum": gap_direct_sum,
    "B.2 block_gap": block_gap,
    "B.2 UpperSchur": upper_schur,
    "B.2 block_gap_D": block_gap_d,
    "B.3 invertible_cut": invertible_cut,
    "B.4 gap_traceless": gap_traceless,
}


def check_gap_lemmas(dim: int = 8, draws: int = 100, seed: int = 0,
                     lemmas=None) -> list[BoundReport]:
    """Random instances of every gap estimate.

    Parameters
    ----------
    dim : int
        Block size of the random matrices.
    draws : int
        Instances per lemma.
    seed : int
        Instance ``i`` of lemma number ``j`` uses the stream
        ``SeedSequence([seed, j, i])``.
    """
    if draws < 1:
        raise BoundError("draws must be at least 1")
    out = []
    for j, (name, fn) in enumerate(GAP_LEMMAS.items()):
        if lemmas is not None and name not in lemmas:
            continue
        for i in range(draws):
            rng = np.random.default_rng(np.random.SeedSequence([seed, j, i]))
            out.extend(fn(rng, dim, i))
    return out


def localizer_traceless(v: float, w: float, kappa: float, ell: int = 20) -> BoundReport:
    """Traceless-block estimate on the d=1 localizer blocks.

    ``A = kappa f_ell(X)`` and ``B = (1 - kappa) S`` for SSH on ``B_ell``.
    """
    box = enumerate_box(1, ell)
    S = chiral_block(build_ssh(box, v, w)).S
    A = kappa * np.diag(position_values(box, PositionFunction(RAW, ell, 1)).real)
    B = (1 - kappa) * S
    L = np.block([[A, B.conj().T], [B, -A]])
    return BoundReport("B.4 gap_traceless localizer", gap(A) ** 2 + gap(B) ** 2 - norm(A @ B - B @ A),
                       gap(L) ** 2, f"ssh v={v} w={w} kappa={kappa} ell={ell}")


# ------------------------------------------------------- locality suites ---

def random_budgeted(box: LatticeBox, N: int, mu: float, rng, hermitian=False):
    A = random_local_operator(box, N, mu, rng, hermitian=hermitian)
    return A, estimate_locality(A, mu)


def holmgren_suite(draws: int = 100, seed: int = 0, mu: float = 1.0) -> list[BoundReport]:
    """Alternating d=1 (radius 20, N=2) and d=2 (radius 8, N=1) draws."""
    boxes = {1: (enumerate_box(1, 20), 2), 2: (enumerate_box(2, 8), 1)}
    out = []
    for i in range(draws):
        rng = np.random.default_rng(np.random.SeedSequence([seed, 101, i]))
        d = 1 + i % 2
        box, N = boxes[d]
        A, b = random_budgeted(box, N, mu, rng)
        out.append(check_holmgren_commutator(A, b, axis=1 + (i // 2) % d))
    return out


def fl_suite(draws: int = 100, seed: int = 0, mu: float = 1.0) -> list[BoundReport]:
    out = []
    for i in range(draws):
        rng = np.random.default_rng(np.random.SeedSequence([seed, 102, i]))
        ell = 2 + i % 9
        A, b = random_budgeted(enumerate_box(1, ell + 5), 2, mu, rng)
        out.extend(check_fl_commutator(A, b, ell))
    return out


def fl2d_suite(draws: int = 100, seed: int = 0, mu: float = 1.0) -> list[BoundReport]:
    out = []
    for i in range(draws):
        rng = np.random.default_rng(np.random.SeedSequence([seed, 103, i]))
        ell = 2 + i % 3
        A, b = random_budgeted(enumerate_box(2, ell + 2), 1, mu, rng)
        out.extend(check_fl_commutator_2d(A, b, ell))
    return out


def run_appendix_suites(draws: int = 100, seed: int = 0, dim: int = 8) -> list[BoundReport]:
    """All locality and gap suites with ``draws`` instances each."""
    if draws < 1:
        raise BoundError("draws must be at least 1")
    return (holmgren_suite(draws, seed) + fl_suite(draws, seed) + fl2d_suite(draws, seed)
            + check_gap_lemmas(dim, draws, seed))


__all__ = [
    "BoundError", "BoundReport", "holmgren_constant", "check_holmgren_commutator",
    "check_fl_commutator", "check_fl_commutator_2d", "check_gap_lemmas", "GAP_LEMMAS",
    "localizer_traceless", "holmgren_suite", "fl_suite", "fl2d_suite", "run_appendix_suites",
    "schatten",
]
