"""Spectral flow of discretized Hermitian paths, flattening of the
localizer endpoints and the index of a pair of self-adjoint unitaries.

For a finite Hermitian path the flow is half the change of signature.
Crossings are located separately by bisection on the signature, and an
interval is declared crossing-free only when Weyl's inequality rules a
crossing out; the two counts are required to agree.
"""

from __future__ import annotations

import csv
from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np
from scipy import linalg

from .inertia import InertiaResult, gap, hermitian_eigvals, inertia_from_eigvals
from .operators import OperatorError, polar_part

BISECT_FLOOR = 1e-6


class FlowError(ValueError):
    pass


@dataclass
class HermitianPath:
    """Piecewise-evaluated Hermitian path ``t -> M(t)``.

    Parameters
    ----------
    grid : sequence of float
        Increasing parameters ``t_0 < ... < t_K``.
    supplier : callable
        Returns the matrix ``M(t)``.
    tolerance : float, optional
        Zero tolerance for inertia; default ``1e-10 |M(t)|`` pointwise.
    affine : bool
        Whether ``M`` is affine in ``t`` between grid points; enables the
        Weyl certificate for crossing-free intervals.
    """

    grid: Sequence[float]
    supplier: Callable[[float], np.ndarray]
    tolerance: float | None = None
    affine: bool = True
    _cache: dict = field(default_factory=dict, repr=False)

    def __post_init__(self):
        self.grid = np.asarray(self.grid, dtype=float)
        if self.grid.ndim != 1 or self.grid.size < 2 or np.any(np.diff(self.grid) <= 0):
            raise FlowError("path grid must be strictly increasing with at least two points")

    def matrix(self, t: float) -> np.ndarray:
        return np.asarray(self.supplier(float(t)))

    def eigvals(self, t: float) -> np.ndarray:
        key = float(t)
        if key not in self._cache:
            self._cache[key] = hermitian_eigvals(self.matrix(key))
        return self._cache[key]

    def inertia(self, t: float) -> InertiaResult:
        return inertia_from_eigvals(self.eigvals(t), self.tolerance)


@dataclass(frozen=True)
class Crossing:
    """Net signature change ``2 * direction * multiplicity`` inside ``(t_lo, t_hi)``."""

    t_lo: float
    t_hi: float
    direction: int
    multiplicity: int


@dataclass
class FlowResult:
    flow: int
    crossings: list
    start: InertiaResult
    end: InertiaResult

    @property
    def crossing_count(self) -> int:
        return sum(c.direction * c.multiplicity for c in self.crossings)


def _crossing_free(path: HermitianPath, a: float, b: float) -> bool:
    """Weyl certificate: no eigenvalue of an affine segment reaches 0."""
    if not path.affine:
        return False
    ea, eb = path.eigvals(a), path.eigvals(b)
    step = np.abs(hermitian_eigvals(path.matrix(b) - path.matrix(a), check=False)).max()
    return np.abs(ea).min() + np.abs(eb).min() > step


def _locate(path: HermitianPath, a: float, b: float, out: list, floor: float, depth=0):
    ia, ib = path.inertia(a), path.inertia(b)
    if ia.signature == ib.signature and _crossing_free(path, a, b):
        return
    if b - a <= floor:
        if ia.n_zero or ib.n_zero:
            raise FlowError(f"unresolved-crossing: singular point inside [{a}, {b}]")
        diff = ib.signature - ia.signature
        if diff:
            out.append(Crossing(a, b, int(np.sign(diff)), abs(diff) // 2))
        return
    mid = 0.5 * (a + b)
    if path.inertia(mid).n_zero:
        # step off an exactly singular midpoint
        mid = a + 0.5 * (b - a) * (1 + 1e-3)
    _locate(path, a, mid, out, floor, depth + 1)
    _locate(path, mid, b, out, floor, depth + 1)


def spectral_flow(path: HermitianPath, floor: float = BISECT_FLOOR,
                  locate: bool = True) -> FlowResult:
    """Spectral flow of a Hermitian path.

    Returns half the signature difference between the endpoints, together
    with the list of located crossings.  With ``locate`` the crossing
    record is refined to intervals of length ``floor`` and its signed sum
    must equal the flow.

    Raises
    ------
    FlowError
        ``endpoint-singular`` if an endpoint has eigenvalues within the
        zero tolerance; ``unresolved-crossing`` if bisection hits the floor
        at a singular point.
    """
    t = path.grid
    start, end = path.inertia(t[0]), path.inertia(t[-1])
    if start.n_zero or end.n_zero:
        raise FlowError("endpoint-singular")
    diff = end.signature - start.signature
    if diff % 2:
        raise FlowError("odd signature difference; dimensions differ along the path")
    crossings: list = []
    if locate:
        for a, b in zip(t[:-1], t[1:]):
            _locate(path, a, b, crossings, floor)
        merged = sum(c.direction * c.multiplicity for c in crossings)
        if merged != diff // 2:
            raise FlowError(f"crossing count {merged} disagrees with signature flow {diff // 2}")
    return FlowResult(diff // 2, crossings, start, end)


def linear_path(M0: np.ndarray, M1: np.ndarray, grid=None, tolerance=None) -> HermitianPath:
    grid = np.linspace(0.0, 1.0, 11) if grid is None else grid
    M0, M1 = np.asarray(M0), np.asarray(M1)
    return HermitianPath(grid, lambda t: (1 - t) * M0 + t * M1, tolerance)


def concatenate(p: HermitianPath, q: HermitianPath) -> HermitianPath:
    """Path ``p`` on ``[0, 1/2]`` followed by ``q`` on ``[1/2, 1]``.

    Both are reparametrized affinely; ``p`` must end where ``q`` starts.
    """
    pa, pb = p.grid[0], p.grid[-1]
    qa, qb = q.grid[0], q.grid[-1]
    g1 = 0.5 * (p.grid - pa) / (pb - pa)
    g2 = 0.5 + 0.5 * (q.grid - qa) / (qb - qa)

    def supplier(t):
        if t <= 0.5:
            return p.matrix(pa + 2 * t * (pb - pa))
        return q.matrix(qa + (2 * t - 1) * (qb - qa))

    return HermitianPath(np.concatenate([g1, g2[1:]]), supplier, p.tolerance, p.affine and q.affine)


def direct_sum(p: HermitianPath, q: HermitianPath) -> HermitianPath:
    """Pointwise ``M_p(t) (+) M_q(t)`` on the union of both grids."""
    grid = np.union1d(p.grid, q.grid)
    return HermitianPath(grid, lambda t: linalg.block_diag(p.matrix(t), q.matrix(t)),
                         p.tolerance, p.affine and q.affine)


def write_trajectories(path: HermitianPath, fh, grid=None) -> None:
    """CSV of eigenvalue trajectories, columns ``t, eig_index, value``."""
    w = csv.writer(fh, lineterminator="\n")
    w.writerow(["t", "eig_index", "value"])
    for t in (path.grid if grid is None else grid):
        for i, v in enumerate(path.eigvals(t)):
            w.writerow([repr(float(t)), i, repr(float(v))])


# ------------------------------------------------------------ flattening ---

def flatten_endpoints(A: np.ndarray, B: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Self-adjoint unitaries ``Q0 = [[0, pol(B)^*], [pol(B), 0]]`` and
    ``Q1 = [[pol(A), 0], [0, -pol(A)]]``.

    For Hermitian invertible ``A``, ``pol(A) = 2 Lambda - 1`` with
    ``Lambda`` the projection onto the positive spectral subspace.
    """
    A, B = np.asarray(A, dtype=complex), np.asarray(B, dtype=complex)
    if np.abs(A - A.conj().T).max(initial=0) > 1e-12 * max(np.abs(A).max(initial=0), 1e-300):
        raise FlowError("A must be Hermitian")
    try:
        Af, Bf = polar_part(A), polar_part(B)
    except OperatorError as exc:
        raise FlowError(str(exc)) from None
    Af = (Af + Af.conj().T) / 2
    Z = np.zeros_like(Af)
    Q0 = np.block([[np.zeros_like(Bf), Bf.conj().T], [Bf, np.zeros_like(Bf)]])
    Q1 = np.block([[Af, Z], [Z, -Af]])
    return Q0, Q1


def _eigenspace(Q: np.ndarray, sign: int) -> np.ndarray:
    ev, vecs = linalg.eigh(Q)
    return vecs[:, ev > 0] if sign > 0 else vecs[:, ev < 0]


def intersection_basis(E: np.ndarray, F: np.ndarray, threshold: float = 1e-8) -> np.ndarray:
    """Orthonormal basis of ``ran E`` intersect ``ran F`` via principal angles.

    Directions with ``cos(theta) >= 1 - threshold`` count as common.
    """
    if E.shape[1] == 0 or F.shape[1] == 0:
        return np.zeros((E.shape[0], 0), dtype=complex)
    U, c, _ = linalg.svd(E.conj().T @ F)
    k = int(np.count_nonzero(c >= 1 - threshold))
    return E @ U[:, :k]


@dataclass(frozen=True)
class PairIndex:
    index: int
    dim_up: int
    dim_down: int


def fredholm_pair_decomposition(Q0: np.ndarray, Q1: np.ndarray, threshold: float = 1e-8,
                                window: np.ndarray | None = None):
    """Bases of ``E_-1(Q0) & E_1(Q1)`` and ``E_1(Q0) & E_-1(Q1)``.

    With ``window`` (a boolean mask on the basis) only intersection
    vectors with at least half their weight in the window are kept.
    """
    Q0, Q1 = np.asarray(Q0, dtype=complex), np.asarray(Q1, dtype=complex)
    S = Q0 + Q1
    s = linalg.svdvals(S)
    scale = max(s[0], 1.0) if s.size else 1.0
    # kernel directions sit well inside the principal-angle threshold;
    # singular values between the two cut-offs would be ambiguous
    kernel_dim = int(np.count_nonzero(s <= 1e-6 * scale))
    if np.any((s > 1e-6 * scale) & (s < 1e-3 * scale)):
        raise FlowError("ill-conditioned-kernel")
    up = intersection_basis(_eigenspace(Q0, -1), _eigenspace(Q1, 1), threshold)
    down = intersection_basis(_eigenspace(Q0, 1), _eigenspace(Q1, -1), threshold)
    if up.shape[1] + down.shape[1] != kernel_dim:
        raise FlowError("ill-conditioned-kernel: intersections do not span ker(Q0+Q1)")
    if window is not None:
        up = _localized(up, window)
        down = _localized(down, window)
    return up, down


def _localized(V: np.ndarray, window: np.ndarray) -> np.ndarray:
    """Rotate ``V`` to separate window-localized directions and keep those."""
    if V.shape[1] == 0:
        return V
    P = V[window].conj().T @ V[window]
    w, R = linalg.eigh(P)
    return V @ R[:, w >= 0.5]


def fredholm_pair_index(Q0: np.ndarray, Q1: np.ndarray, threshold: float = 1e-8,
                        window: np.ndarray | None = None) -> PairIndex:
    """``dim(E_-1(Q0) & E_1(Q1)) - dim(E_1(Q0) & E_-1(Q1))``.

    In finite dimension this index equals the spectral flow of
    ``(1-t) Q0 + t Q1`` and hence vanishes whenever both have the same
    signature.  The ``window`` variant counts only intersection vectors
    localized in a region of the basis, which isolates the contribution of
    one cut from the ones at the box boundary.
    """
    up, down = fredholm_pair_decomposition(Q0, Q1, threshold, window)
    return PairIndex(up.shape[1] - down.shape[1], up.shape[1], down.shape[1])


def flattened_flow(Q0: np.ndarray, Q1: np.ndarray) -> FlowResult:
    """Flow of ``(1-t) Q0 + t Q1``; any crossing sits at ``t = 1/2``."""
    return spectral_flow(linear_path(Q0, Q1, grid=[0.0, 0.25, 0.5 - 1e-3, 0.5 + 1e-3, 0.75, 1.0]))


# ------------------------------------------------------------- homotopy ---

@dataclass
class HomotopyReport:
    bottom: int
    left: int
    top: int
    right: int

    @property
    def consistent(self) -> bool:
        return self.bottom == self.left + self.top + self.right

    @property
    def sides_vanish(self) -> bool:
        return self.left == 0 and self.right == 0


def homotopy_grid_check(H0, H1, Q0, Q1, grid=None, t_range=(0.0, 1.0)) -> HomotopyReport:
    """Compare flows along the edges of the square
    ``H_{t,s} = (1-s)((1-t) H0 + t H1) + s((1-t) Q0 + t Q1)``.

    Bottom edge is ``s = 0`` in ``t``; the three-part route goes up the
    left edge, along the top (``s = 1``) and down the right edge.
    ``t_range`` restricts ``t`` to a sub-interval.

    Raises
    ------
    FlowError
        ``edge-singular`` if a side edge is not invertible.
    """
    grid = np.linspace(0.0, 1.0, 21) if grid is None else np.asarray(grid)
    ta, tb = t_range
    H0, H1, Q0, Q1 = (np.asarray(M) for M in (H0, H1, Q0, Q1))

    def H(t, s):
        return (1 - s) * ((1 - t) * H0 + t * H1) + s * ((1 - t) * Q0 + t * Q1)

    def tpath(s):
        return HermitianPath(ta + grid * (tb - ta), lambda t: H(t, s))

    def spath(t, reverse=False):
        return HermitianPath(grid, lambda s: H(t, 1 - s if reverse else s))

    try:
        left = spectral_flow(spath(ta)).flow
        right = spectral_flow(spath(tb, reverse=True)).flow
    except FlowError as exc:
        raise FlowError(f"edge-singular: {exc}") from None
    return HomotopyReport(spectral_flow(tpath(0.0)).flow, left, spectral_flow(tpath(1.0)).flow,
                          right)


def localizer_path(spec, kappas, surrogate: bool = False) -> HermitianPath:
    """Path ``kappa -> L_kappa`` over the given grid."""
    from .localizer import build_infinite_surrogate, build_localizer
    build = build_infinite_surrogate if surrogate else build_localizer
    return HermitianPath(kappas, lambda k: build(spec.at(k)).matrix)


# ------------------------------------------------------ property suite ---

@dataclass(frozen=True)
class FlowCheck:
    """An integer identity ``expected == got`` on one random instance."""

    prop: str
    expected: int
    got: int
    instance: str = ""

    @property
    def passed(self) -> bool:
        return self.expected == self.got


def _random_hermitian(rng, n: int) -> np.ndarray:
    G = rng.standard_normal((n, n)) + 1j * rng.standard_normal((n, n))
    return (G + G.conj().T) / 2


def _random_unitary(rng, n: int) -> np.ndarray:
    G = rng.standard_normal((n, n)) + 1j * rng.standard_normal((n, n))
    Q, R = linalg.qr(G)
    return Q * (np.diag(R) / np.abs(np.diag(R)))


def random_sau_pair(rng, n: int, planted: int | None = None):
    """Self-adjoint unitaries sharing ``planted`` eigenvectors.

    Planted directions carry independent signs in ``Q0`` and ``Q1``, so
    some of them land in the intersections counted by the pair index.
    """
    planted = int(rng.integers(0, n // 2 + 1)) if planted is None else planted
    V = _random_unitary(rng, n)
    W = V.copy()
    W[:, planted:] = V[:, planted:] @ _random_unitary(rng, n - planted)
    s0 = rng.choice([-1.0, 1.0], n)
    s1 = rng.choice([-1.0, 1.0], n)
    Q0, Q1 = (V * s0) @ V.conj().T, (W * s1) @ W.conj().T
    # exact Hermitian symmetry keeps (1-t) Q0 + t Q1 Hermitian even when Q0 + Q1 ~ 0
    return (Q0 + Q0.conj().T) / 2, (Q1 + Q1.conj().T) / 2


def flow_property_suite(path_pairs: int = 50, sau_pairs: int = 100, seed: int = 0,
                        dim: int = 6) -> list:
    """Concatenation and direct-sum additivity, and pair index against flow."""
    out = []
    grid = np.linspace(0.0, 1.0, 11)
    for i in range(path_pairs):
        rng = np.random.default_rng(np.random.SeedSequence([seed, 201, i]))
        A, B, C, D, E = (_random_hermitian(rng, dim) for _ in range(5))
        p, q, r = linear_path(A, B, grid), linear_path(B, C, grid), linear_path(D, E, grid)
        fp, fq, fr = (spectral_flow(x).flow for x in (p, q, r))
        out.append(FlowCheck("concatenation", fp + fq, spectral_flow(concatenate(p, q)).flow,
                             f"pair {i}"))
        out.append(FlowCheck("direct-sum", fp + fr, spectral_flow(direct_sum(p, r)).flow,
                             f"pair {i}"))
    for i in range(sau_pairs):
        rng = np.random.default_rng(np.random.SeedSequence([seed, 202, i]))
        Q0, Q1 = random_sau_pair(rng, dim + 2)
        out.append(FlowCheck("pair-index", fredholm_pair_index(Q0, Q1).index,
                             flattened_flow(Q0, Q1).flow, f"pair {i}"))
    return out


__all__ = [
    "FlowError", "HermitianPath", "Crossing", "FlowResult", "spectral_flow", "linear_path",
    "concatenate", "direct_sum", "write_trajectories", "flatten_endpoints",
    "intersection_basis", "PairIndex", "fredholm_pair_decomposition", "fredholm_pair_index",
    "flattened_flow", "HomotopyReport", "homotopy_grid_check", "localizer_path", "gap",
    "FlowCheck", "random_sau_pair", "flow_property_suite",
]
