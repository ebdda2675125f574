"""Finite-volume spectral localizer, its outer-box surrogate and the
quantitative constants that control them.

For d=1 the localizer acts on the same space as the chiral Hamiltonian::

    L = (1 - kappa) H + kappa f(X) Gamma,      Gamma = grading of H,

which in the grading reads ``(1-k)[[0, S^*], [S, 0]] + k[[X, 0], [0, -X]]``.
For d=2 the Hilbert space is doubled::

    L = (1 - kappa) H tau_3 + kappa (Re f(X) tau_1 + Im f(X) tau_2),

i.e. ``(1-k)[[H, 0], [0, -H]] + k[[0, X^*], [X, 0]]``.  Both are stored
site-major, with internal dimension N (d=1) or 2N (d=2, doubling index
slow).
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field, replace

import numpy as np
from scipy import linalg

from .inertia import InertiaResult, eigh, gap as _gap, inertia, inertia_from_eigvals
from .lattice import (CLAMPED, RAW, SQUARE, LatticeBox, LocalOperator, PositionFunction,
                      enumerate_box, position_values)
from .operators import (LocalityBudget, Model, OperatorError, chiral_block, compress,
                        estimate_locality)


class LocalizerError(ValueError):
    pass


@dataclass(frozen=True)
class LocalizerSpec:
    """Everything needed to assemble ``L_{kappa, ell}``.

    Parameters
    ----------
    model : Model
    ell : int
        Localizer radius.
    kappa : float
        Mixing parameter in ``[0, 1]``.
    budget : LocalityBudget, optional
    outer_ell : int, optional
        Radius of the outer box standing in for infinite volume; defaults
        to ``2 * ell``.
    profile : str
        Position profile outside ``B_ell`` used by the surrogate in d=2:
        ``square-clamped`` (default, agrees with the raw position on the
        whole square box) or ``clamped-f_ell`` (radial clamp).
    """

    model: Model
    ell: int
    kappa: float
    budget: LocalityBudget | None = None
    outer_ell: int | None = None
    profile: str = SQUARE

    def __post_init__(self):
        if not 0.0 <= self.kappa <= 1.0:
            raise LocalizerError(f"kappa-out-of-range: {self.kappa}")
        if self.ell < 1:
            raise LocalizerError("ell must be >= 1")
        if self.outer_ell is None:
            object.__setattr__(self, "outer_ell", 2 * self.ell)
        if self.profile not in (SQUARE, CLAMPED):
            raise LocalizerError(f"unknown profile {self.profile!r}")

    @property
    def d(self) -> int:
        return self.model.d

    @property
    def N(self) -> int:
        return self.model.N

    def at(self, kappa: float) -> "LocalizerSpec":
        return replace(self, kappa=float(kappa))


def assemble_localizer(H: LocalOperator, fvals: np.ndarray, kappa: float) -> LocalOperator:
    """Localizer from a Hamiltonian on a box and position values per site."""
    n, N = H.box.n_sites, H.internal_dim
    if H.d == 1:
        if not H.chiral:
            chiral_block(H)  # raises not-chiral with a precise message
        h = N // 2
        grading = np.concatenate([np.ones(h), -np.ones(h)])
        diag = (np.real(fvals)[:, None] * grading[None, :]).ravel()
        M = (1 - kappa) * H.matrix + kappa * np.diag(diag)
        return LocalOperator(H.box, N, M, hermitian=True)
    H4 = H.matrix.reshape(n, N, n, N)
    L = np.zeros((n, 2, N, n, 2, N), dtype=complex)
    L[:, 0, :, :, 0, :] = (1 - kappa) * H4
    L[:, 1, :, :, 1, :] = -(1 - kappa) * H4
    idx = np.arange(n)
    eye = np.eye(N)
    L[idx, 0, :, idx, 1, :] = kappa * np.conj(fvals)[:, None, None] * eye
    L[idx, 1, :, idx, 0, :] = kappa * fvals[:, None, None] * eye
    return LocalOperator(H.box, 2 * N, L.reshape(2 * n * N, 2 * n * N), hermitian=True)


def build_localizer(spec: LocalizerSpec) -> LocalOperator:
    """Finite-volume localizer ``L_{kappa, ell}`` on ``B_ell``.

    Uses the raw position with the origin mapped to 1.
    """
    if spec.d == 1 and not spec.model.chiral:
        raise LocalizerError("not-chiral: d=1 localizer needs a chiral model")
    box = enumerate_box(spec.d, spec.ell)
    H = spec.model.build(box, disorder_ell=spec.ell)
    f = position_values(box, PositionFunction(RAW, spec.ell, spec.d))
    return assemble_localizer(H, f, spec.kappa)


def surrogate_profile(spec: LocalizerSpec) -> PositionFunction:
    kind = CLAMPED if spec.d == 1 else spec.profile
    return PositionFunction(kind, spec.ell, spec.d)


def build_infinite_surrogate(spec: LocalizerSpec) -> LocalOperator:
    """Infinite-volume localizer with clamped position, cut to the outer box.

    The Hamiltonian is built on the outer box with any disorder confined
    to ``B_ell``, so its inner block equals :func:`build_localizer`.
    """
    if spec.outer_ell < 2 * spec.ell:
        raise LocalizerError(f"outer-too-small: outer_ell={spec.outer_ell} < 2*ell")
    box = enumerate_box(spec.d, spec.outer_ell)
    H = spec.model.build(box, disorder_ell=spec.ell)
    f = position_values(box, surrogate_profile(spec))
    return assemble_localizer(H, f, spec.kappa)


def localizer_inertia(spec: LocalizerSpec, zero_tolerance: float | None = None) -> InertiaResult:
    return inertia(build_localizer(spec).matrix, zero_tolerance)


def half_signature(res: InertiaResult) -> float:
    return res.signature / 2


# ---------------------------------------------------------------- gaps ---

def boundary_weights(op: LocalOperator, vecs: np.ndarray, width: int) -> np.ndarray:
    """Weight of each column of ``vecs`` on sites within ``width`` of the box edge."""
    frame = op.box.sup_norms() > op.ell - width
    mask = np.repeat(frame, op.internal_dim)
    return (np.abs(vecs[mask]) ** 2).sum(axis=0)


def default_frame(ell: int) -> int:
    return max(3, ell // 8)


@dataclass(frozen=True)
class ProbeGap:
    """Gap of an operator on an open box with boundary-bound modes removed.

    Attributes
    ----------
    gap : float
        Smallest |eigenvalue| over eigenvectors with less than half their
        weight in the boundary frame.
    raw_gap : float
        Smallest |eigenvalue| over all eigenvectors.
    norm : float
    n_artifacts : int
        Eigenvectors discarded as boundary-bound.
    frame : int
    """

    gap: float
    raw_gap: float
    norm: float
    n_artifacts: int
    frame: int


def probe_gap(op: LocalOperator, frame: int | None = None, threshold: float = 0.5) -> ProbeGap:
    """Measure the bulk gap of a Hermitian operator on an open box.

    A Dirichlet cut of a topological phase carries modes bound to the cut
    with energies unrelated to the infinite-volume spectrum.  Those modes
    live in a frame of width ``frame`` along the outer boundary; an
    eigenvector with at least ``threshold`` of its weight there is treated
    as a truncation artifact and skipped.
    """
    frame = default_frame(op.ell) if frame is None else frame
    ev, vecs = eigh(op.matrix)
    art = boundary_weights(op, vecs, frame) >= threshold
    kept = np.abs(ev[~art])
    return ProbeGap(float(kept.min()) if kept.size else np.inf, float(np.abs(ev).min()),
                    float(np.abs(ev).max()), int(art.sum()), frame)


def surrogate_gap(spec: LocalizerSpec, frame: int | None = None) -> ProbeGap:
    return probe_gap(build_infinite_surrogate(spec), frame)


# ------------------------------------------------------------ constants ---

@dataclass(frozen=True)
class TheoremConstants:
    """Constants controlling the localizer.

    ``kappa_star = gapH^2 / (2 (gapH^2 + D^d))`` and
    ``ell_min = (normH / kappa_star) max{2, 1 + 8 normH / gapH}``.
    ``gapH`` and ``normH`` are probe-box estimates.
    """

    gapH: float
    normH: float
    D: float
    d: int
    kappa_star: float = field(init=False)
    ell_min: float = field(init=False)
    note: str = "probe-box estimates"

    def __post_init__(self):
        if not self.gapH > 0:
            raise LocalizerError("gapless-model: gap(H) must be positive")
        g2 = self.gapH ** 2
        ks = 0.5 * g2 / (g2 + self.D ** self.d)
        object.__setattr__(self, "kappa_star", ks)
        object.__setattr__(self, "ell_min",
                           (self.normH / ks) * max(2.0, 1.0 + 8.0 * self.normH / self.gapH))

    @property
    def ell(self) -> int:
        """Smallest admissible integer radius, ``ceil(ell_min)``."""
        return int(math.ceil(self.ell_min))


def theorem_constants(gapH: float, normH: float, budget: LocalityBudget, d: int) -> TheoremConstants:
    """Constants from measured ``gap(H)``, ``|H|`` and a locality budget.

    Examples
    --------
    >>> from speclocalizer.operators import LocalityBudget
    >>> b = LocalityBudget(C=np.cosh(1.0) - 1.0, mu=1.0)   # D = 1
    >>> theorem_constants(1.0, 1.0, b, 1).kappa_star
    0.25
    """
    return TheoremConstants(float(gapH), float(normH), budget.D, d)


def probe_hamiltonian(model: Model, radius: int, frame: int | None = None,
                      disorder_ell: int | None = None) -> ProbeGap:
    """Gap and norm of ``model`` on an open probe box of the given radius.

    Disorder, if any, is confined to ``|x| <= disorder_ell``.
    """
    box = enumerate_box(model.d, radius)
    H = model.build(box, disorder_ell=disorder_ell)
    if model.d == 1:
        # singular values of S are the positive half of spec(H)
        S = chiral_block(H).S
        W, s, Vh = linalg.svd(S, check_finite=False)
        frame = default_frame(radius) if frame is None else frame
        edge = box.sup_norms() > radius - frame
        mask = np.repeat(edge, model.N // 2)
        wl = (np.abs(W[mask]) ** 2).sum(axis=0)
        wr = (np.abs(Vh.conj().T[mask]) ** 2).sum(axis=0)
        art = (wl >= 0.5) | (wr >= 0.5)
        kept = s[~art]
        return ProbeGap(float(kept.min()) if kept.size else np.inf, float(s.min()),
                        float(s.max()), int(art.sum()), frame)
    return probe_gap(H, frame)


def model_constants(model: Model, mu: float, radius: int = 200,
                    disorder_ell: int | None = None) -> tuple[TheoremConstants, LocalityBudget]:
    """Locality budget and theorem constants measured on a probe box.

    The budget is measured on a box of radius ``max(disorder_ell, 4)``
    (capped at 8 in d=2), which sees every distinct hopping amplitude.
    """
    r = max(disorder_ell or 0, 4)
    box = enumerate_box(model.d, min(r, 8) if model.d == 2 else r)
    budget = estimate_locality(model.build(box, disorder_ell=disorder_ell), mu)
    p = probe_hamiltonian(model, radius, disorder_ell=disorder_ell)
    if not p.gap > 1e-8 * max(p.norm, 1.0):
        raise LocalizerError("gapless-model: probe gap vanishes")
    return theorem_constants(p.gap, p.norm, budget, model.d), budget


def gap_lower_bound(kappa: float, budget: LocalityBudget, gapH: float, d: int) -> float:
    """``sqrt((1-k)^2 gapH^2 - k (1-k) D^d)``, valid for ``kappa < 2 kappa_star``.

    Raises
    ------
    LocalizerError
        ``kappa-too-large`` when the radicand is negative.
    """
    rad = (1 - kappa) ** 2 * gapH ** 2 - kappa * (1 - kappa) * budget.D ** d
    if rad < 0:
        if rad > -1e-14 * gapH ** 2:
            return 0.0
        raise LocalizerError(f"kappa-too-large: radicand {rad:.3e} < 0 at kappa={kappa}")
    return math.sqrt(rad)


# ----------------------------------------------------------- decoupling ---

@dataclass
class DecouplingReport:
    """Outcome of the inner/outer decoupling check at one ``kappa``."""

    kappa: float
    gap_outer: float
    norm_coupling: float
    gap_full: float
    hypothesis: bool
    s_grid: np.ndarray
    gaps_along_s: np.ndarray
    invertible_along_s: bool
    flow_inner: int | None = None
    flow_surrogate: int | None = None

    @property
    def flows_agree(self) -> bool:
        return self.flow_inner is not None and self.flow_inner == self.flow_surrogate


def cut_hypothesis(gap_outer: float, norm_b: float, gap_full: float) -> bool:
    """``gap(D) > |B| max{1, |B| / (gap(H_1)/4)}``."""
    if gap_full <= 0:
        return False
    return gap_outer > norm_b * max(1.0, norm_b / (0.25 * gap_full))


def decoupling_check(spec: LocalizerSpec, s_points: int = 101,
                     kappa_grid: np.ndarray | None = None) -> DecouplingReport:
    """Interpolate between the surrogate and its inner/outer splitting.

    ``M_s = [[L_in, s B^*], [s B, L_out]]`` is built from the surrogate at
    ``spec.kappa``; its gap is recorded on an ``s_points`` grid together
    with the cut hypothesis of the invertibility lemma.  If ``kappa_grid``
    is given, the spectral flows over that grid of the inner block and of
    the surrogate are compared as well.
    """
    from .flow import HermitianPath, spectral_flow

    full = build_infinite_surrogate(spec)
    comp = compress(full, enumerate_box(spec.d, spec.ell))
    g_out = _gap(comp.outer)
    nb = float(linalg.norm(comp.coupling, 2))
    g_full = _gap(full.matrix)
    s = np.linspace(0.0, 1.0, s_points)
    gaps = np.array([_gap(comp.reassemble(si)) for si in s])
    scale = max(full.norm(), 1.0)
    rep = DecouplingReport(spec.kappa, g_out, nb, g_full, cut_hypothesis(g_out, nb, g_full),
                           s, gaps, bool(np.all(gaps > 1e-10 * scale)))
    if kappa_grid is not None:
        inner = HermitianPath(kappa_grid, lambda k: build_localizer(spec.at(k)).matrix)
        outer = HermitianPath(kappa_grid, lambda k: build_infinite_surrogate(spec.at(k)).matrix)
        rep.flow_inner = spectral_flow(inner).flow
        rep.flow_surrogate = spectral_flow(outer).flow
    return rep


__all__ = [
    "LocalizerError", "LocalizerSpec", "assemble_localizer", "build_localizer",
    "build_infinite_surrogate", "localizer_inertia", "half_signature", "probe_gap",
    "ProbeGap", "surrogate_gap", "TheoremConstants", "theorem_constants",
    "probe_hamiltonian", "model_constants", "gap_lower_bound", "DecouplingReport",
    "cut_hypothesis", "decoupling_check", "inertia_from_eigvals", "OperatorError",
]
