"""Model Hamiltonians, chiral blocks, locality budgets and compressions.

Conventions
-----------
SSH (d=1, N=2): internal components are ordered ``(A, B)``; A spans the
positive chiral sector.  The chiral block ``S`` maps A to B with
``S[x, x] = v`` and ``S[x+1, x] = w``, so the inter-cell bond joins ``A_x``
to ``B_{x+1}``.

QWZ (d=2, N=2): on-site ``m sigma_3`` and hoppings
``H[x+e_j, x] = (i sigma_j - sigma_3) / 2`` plus conjugates, whose Bloch
symbol is ``sin k1 s1 + sin k2 s2 + (m - cos k1 - cos k2) s3``.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .lattice import LatticeBox, LatticeError, LocalOperator, enumerate_box

SIGMA = {
    0: np.eye(2, dtype=complex),
    1: np.array([[0, 1], [1, 0]], dtype=complex),
    2: np.array([[0, -1j], [1j, 0]], dtype=complex),
    3: np.array([[1, 0], [0, -1]], dtype=complex),
}


class OperatorError(ValueError):
    """Raised on invalid operator input (wrong dimension, singular input, ...)."""


def _require_d(box: LatticeBox, d: int, name: str):
    if box.d != d:
        raise OperatorError(f"wrong-dimension: {name} needs d={d}, got d={box.d}")


def _neighbor(box: LatticeBox, site: np.ndarray, step) -> int | None:
    """Index of ``site + step`` or None if it leaves an open box."""
    y = np.asarray(site) + np.asarray(step)
    if box.periodic:
        y = (y + box.ell) % box.side - box.ell
    elif np.abs(y).max() > box.ell:
        return None
    return box.index_of(y if box.d == 2 else y[0])


def ssh_disorder(v: float, w: float, disorder: float, seed: int, disorder_ell: int):
    """Per-cell intra and inter-cell amplitudes on ``[-disorder_ell, disorder_ell]``.

    Returns two arrays indexed by ``x + disorder_ell``.  The inter-cell
    entry at ``x`` is the bond ``x -> x+1``; it is disordered only when
    both ends lie in the region (the last entry stays clean).
    """
    n = 2 * disorder_ell + 1
    vs = np.full(n, float(v))
    ws = np.full(n, float(w))
    if disorder > 0:
        rng = np.random.default_rng(seed)
        eta = rng.uniform(-disorder, disorder, size=(2, n))
        vs *= 1 + eta[0]
        ws[:-1] *= 1 + eta[1, :-1]
    return vs, ws


def build_ssh(box: LatticeBox, v: float, w: float, disorder: float = 0.0,
              seed: int = 0, disorder_ell: int | None = None) -> LocalOperator:
    """Su-Schrieffer-Heeger chain with multiplicative hopping disorder.

    Parameters
    ----------
    box : LatticeBox
        One-dimensional box; periodic boxes give a ring.
    v, w : float
        Intra-cell and inter-cell hopping.
    disorder : float
        Amplitudes are multiplied by ``1 + eta`` with ``eta`` uniform in
        ``[-disorder, disorder]``.
    seed : int
        RNG seed.
    disorder_ell : int, optional
        Disorder is confined to cells with ``|x| <= disorder_ell`` (default
        ``box.ell``).  Fixing it lets the same realization be embedded in a
        larger box with a clean exterior.
    """
    _require_d(box, 1, "build_ssh")
    if disorder < 0:
        raise OperatorError("disorder must be non-negative")
    R = box.ell if disorder_ell is None else int(disorder_ell)
    vs, ws = ssh_disorder(v, w, disorder, seed, R)

    def amp(arr, x, clean):
        return arr[x + R] if -R <= x <= R else clean

    n = box.n_sites
    S = np.zeros((n, n), dtype=complex)
    for i, (x,) in enumerate(box.sites.tolist()):
        S[i, i] = amp(vs, x, v)
        j = _neighbor(box, [x], [1])
        if j is not None:
            S[j, i] += amp(ws, x, w)
    return ChiralBlock(S, box, 2).to_operator()


def build_qwz(box: LatticeBox, m: float) -> LocalOperator:
    """Qi-Wu-Zhang two-band Chern insulator with mass ``m``."""
    _require_d(box, 2, "build_qwz")
    n = box.n_sites
    H = np.zeros((n, 2, n, 2), dtype=complex)
    hops = {(1, 0): (1j * SIGMA[1] - SIGMA[3]) / 2, (0, 1): (1j * SIGMA[2] - SIGMA[3]) / 2}
    for i, x in enumerate(box.sites):
        H[i, :, i, :] += m * SIGMA[3]
        for step, T in hops.items():
            j = _neighbor(box, x, step)
            if j is not None:
                H[j, :, i, :] += T
                H[i, :, j, :] += T.conj().T
    return LocalOperator(box, 2, H.reshape(2 * n, 2 * n), hermitian=True)


@dataclass(frozen=True)
class LocalityBudget:
    """Exponential locality constants ``|H_xy| <= C exp(-mu |x-y|)``."""

    C: float
    mu: float

    def __post_init__(self):
        if not (self.C > 0 and self.mu > 0):
            raise OperatorError(f"invalid budget C={self.C}, mu={self.mu}")

    @property
    def D(self) -> float:
        return self.C / (np.cosh(self.mu) - 1.0)


def block_norms(op: LocalOperator) -> np.ndarray:
    """Operator norms of all ``N x N`` site blocks, shape ``(n, n)``."""
    blocks = op.blocks()
    out = np.zeros(blocks.shape[:2])
    nz = np.any(blocks != 0, axis=(2, 3))
    if np.any(nz):
        out[nz] = np.linalg.norm(blocks[nz], ord=2, axis=(1, 2))
    return out


def estimate_locality(op: LocalOperator, mu: float) -> LocalityBudget:
    """Smallest ``C`` with ``|op_xy| <= C exp(-mu |x-y|)`` on the box."""
    if mu <= 0:
        raise OperatorError("mu must be positive")
    C = float(np.max(block_norms(op) * np.exp(mu * op.box.distances())))
    # a zero operator is local with any amplitude; keep C positive
    return LocalityBudget(C if C > 0 else np.finfo(float).tiny, mu)


@dataclass(eq=False)
class Compression:
    """Splitting of an operator along an inner box and its complement."""

    parent: LocalOperator
    inner: LocalOperator
    outer: np.ndarray
    coupling: np.ndarray
    inner_dofs: np.ndarray
    outer_dofs: np.ndarray

    def __iter__(self):
        return iter((self.inner, self.outer, self.coupling))

    def reassemble(self, s: float = 1.0) -> np.ndarray:
        """Inner and outer blocks with the coupling scaled by ``s``."""
        M = np.zeros_like(self.parent.matrix)
        ii, oo = self.inner_dofs, self.outer_dofs
        M[np.ix_(ii, ii)] = self.inner.matrix
        M[np.ix_(oo, oo)] = self.outer
        M[np.ix_(oo, ii)] = s * self.coupling
        M[np.ix_(ii, oo)] = s * self.coupling_up
        return M

    @property
    def coupling_up(self) -> np.ndarray:
        return self.parent.matrix[np.ix_(self.inner_dofs, self.outer_dofs)]


def compress(op: LocalOperator, inner: LatticeBox) -> Compression:
    """Dirichlet compressions to ``inner`` and to its complement.

    ``coupling`` is the block from inner to outer (rows outer, columns
    inner); for Hermitian ``op`` the other block is its adjoint.
    """
    if not op.box.contains(inner) or op.box.periodic:
        raise OperatorError("box-not-contained")
    in_sites = op.box.sites_within(inner.ell)
    out_sites = np.setdiff1d(np.arange(op.box.n_sites), in_sites)
    ii, oo = op.dofs(in_sites), op.dofs(out_sites)
    M = op.matrix
    inner_op = LocalOperator(inner, op.internal_dim, M[np.ix_(ii, ii)], op.hermitian, op.chiral)
    return Compression(op, inner_op, M[np.ix_(oo, oo)], M[np.ix_(oo, ii)], ii, oo)


def polar_part(M: np.ndarray, allow_singular: bool = False) -> np.ndarray:
    """Unitary factor ``U`` of the polar decomposition ``M = U |M|``.

    Computed from the SVD ``M = W s Vh`` as ``U = W Vh``.

    Parameters
    ----------
    M : (n, n) array_like
    allow_singular : bool
        Skip the invertibility check.  The factor is then not unique on
        the near-kernel; callers use this only when that subspace is far
        from where the result is read.

    Raises
    ------
    OperatorError
        ``singular-input`` if the smallest singular value is below
        ``1e-12 * |M|``.
    """
    M = np.asarray(M, dtype=complex)
    W, s, Vh = np.linalg.svd(M)
    if not allow_singular and (s.size == 0 or s[-1] <= 1e-12 * s[0]):
        raise OperatorError("singular-input: polar part needs an invertible matrix")
    return W @ Vh


@dataclass(eq=False)
class ChiralBlock:
    """Off-diagonal block ``S : H_+ -> H_-`` of a chiral operator.

    ``S`` is indexed by ``site * (N/2) + k`` on both sides.
    """

    S: np.ndarray
    box: LatticeBox
    internal_dim: int

    def to_operator(self) -> LocalOperator:
        n, h = self.box.n_sites, self.internal_dim // 2
        M = np.zeros((n, self.internal_dim, n, self.internal_dim), dtype=complex)
        S4 = np.asarray(self.S).reshape(n, h, n, h)
        M[:, h:, :, :h] = S4
        M[:, :h, :, h:] = S4.conj().transpose(2, 3, 0, 1)
        return LocalOperator(self.box, self.internal_dim, M.reshape(n * self.internal_dim, -1),
                             hermitian=True, chiral=True)


def chiral_block(op: LocalOperator) -> ChiralBlock:
    """Extract ``S`` from a chiral operator."""
    N = op.internal_dim
    if N % 2:
        raise OperatorError("not-chiral: odd internal dimension")
    n, h = op.box.n_sites, N // 2
    M4 = op.matrix.reshape(n, N, n, N)
    scale = max(np.abs(op.matrix).max(initial=0.0), 1.0)
    if np.abs(M4[:, :h, :, :h]).max(initial=0) > 1e-13 * scale or \
            np.abs(M4[:, h:, :, h:]).max(initial=0) > 1e-13 * scale:
        raise OperatorError("not-chiral: diagonal blocks of the grading do not vanish")
    return ChiralBlock(M4[:, h:, :, :h].reshape(n * h, n * h).copy(), op.box, N)


def is_hermitian(M: np.ndarray, rtol: float = 1e-13) -> bool:
    scale = max(np.abs(M).max(initial=0), 1e-300)
    return bool(np.abs(M - M.conj().T).max(initial=0) <= rtol * scale)


def dump_operator(op: LocalOperator, path) -> None:
    """Write ``op`` as text: header ``d N ell hermitian chiral`` then
    ``row col re im`` per nonzero entry, in row-major order."""
    rows, cols = np.nonzero(op.matrix)
    with open(path, "w") as fh:
        fh.write(f"{op.d} {op.internal_dim} {op.ell} {int(op.hermitian)} {int(op.chiral)}\n")
        for r, c in zip(rows.tolist(), cols.tolist()):
            z = op.matrix[r, c]
            fh.write(f"{r} {c} {float(z.real)!r} {float(z.imag)!r}\n")


def load_operator(path) -> LocalOperator:
    """Inverse of :func:`dump_operator` (open boxes only)."""
    with open(path) as fh:
        d, N, ell, herm, chir = (int(t) for t in fh.readline().split())
        box = enumerate_box(d, ell)
        M = np.zeros((box.n_sites * N,) * 2, dtype=complex)
        for line in fh:
            r, c, re, im = line.split()
            M[int(r), int(c)] = complex(float(re), float(im))
    return LocalOperator(box, N, M, bool(herm), bool(chir))


def random_local_operator(box: LatticeBox, internal_dim: int, mu: float, rng,
                          hermitian: bool = False, amplitude: float = 1.0) -> LocalOperator:
    """Complex-Gaussian entries enveloped by ``exp(-mu |x-y|)``."""
    n, N = box.n_sites, internal_dim
    G = (rng.standard_normal((n, N, n, N)) + 1j * rng.standard_normal((n, N, n, N))) / np.sqrt(2)
    env = np.exp(-mu * box.distances())[:, None, :, None]
    M = (amplitude * G * env).reshape(n * N, n * N)
    if hermitian:
        M = (M + M.conj().T) / 2
    return LocalOperator(box, N, M, hermitian=hermitian)


@dataclass(frozen=True)
class Model:
    """Named model with parameters; ``build`` assembles it on a box.

    ``name`` is ``"ssh"`` (parameters v, w, disorder, seed) or ``"qwz"``
    (parameter m).
    """

    name: str
    v: float = 0.4
    w: float = 1.0
    disorder: float = 0.0
    seed: int = 0
    m: float = 1.0

    def __post_init__(self):
        if self.name not in ("ssh", "qwz"):
            raise OperatorError(f"unknown model {self.name!r}")

    @property
    def d(self) -> int:
        return 1 if self.name == "ssh" else 2

    @property
    def N(self) -> int:
        return 2

    @property
    def chiral(self) -> bool:
        return self.name == "ssh"

    @property
    def clean(self) -> bool:
        return self.name == "qwz" or self.disorder == 0

    def build(self, box: LatticeBox, disorder_ell: int | None = None) -> LocalOperator:
        if self.name == "ssh":
            return build_ssh(box, self.v, self.w, self.disorder, self.seed, disorder_ell)
        return build_qwz(box, self.m)

    def label(self) -> str:
        if self.name == "ssh":
            return f"ssh(v={self.v},w={self.w},disorder={self.disorder},seed={self.seed})"
        return f"qwz(m={self.m})"


__all__ = [
    "Model",
    "SIGMA", "OperatorError", "build_ssh", "build_qwz", "ssh_disorder", "LocalityBudget",
    "block_norms", "estimate_locality", "Compression", "compress", "polar_part",
    "ChiralBlock", "chiral_block", "is_hermitian", "dump_operator", "load_operator",
    "random_local_operator", "LatticeError",
]
