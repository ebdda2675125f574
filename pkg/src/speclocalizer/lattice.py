"""Finite boxes in Z^d and position-derived multiplication operators.

The box B_ell is the square (sup-norm) box of radius ``ell``.  Sites are
ordered lexicographically by ``(x2, x1)`` and every site carries an
``internal_dim``-dimensional fibre, so dense indices run as
``site_index * internal_dim + internal_index``.

This module also hosts :class:`LocalOperator`, the dense container used by
every other module.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

RAW = "raw-amended"
CLAMPED = "clamped-f_ell"
SIGN = "sign"
LAUGHLIN = "laughlin-phase"
SQUARE = "square-clamped"

POSITION_KINDS = (RAW, CLAMPED, SIGN, LAUGHLIN, SQUARE)


class LatticeError(ValueError):
    """Raised on invalid geometry (dimension, axis, mismatched boxes)."""


@dataclass(frozen=True, eq=False)
class LatticeBox:
    """Sites of the box ``{x in Z^d : |x|_inf <= ell}``.

    Parameters
    ----------
    d : int
        Dimension, 1 or 2.
    ell : int
        Box radius.
    periodic : bool, optional
        If True, distances use the minimal image on the torus of side
        ``2*ell + 1``.  Used only for probe rings and oracles.
    """

    d: int
    ell: int
    periodic: bool = False
    sites: np.ndarray = field(init=False, repr=False)
    _index: dict = field(init=False, repr=False)

    def __post_init__(self):
        if self.d not in (1, 2):
            raise LatticeError(f"invalid-dimension: d={self.d}")
        if int(self.ell) != self.ell or self.ell < 1:
            raise LatticeError(f"invalid radius ell={self.ell}")
        r = np.arange(-self.ell, self.ell + 1)
        if self.d == 1:
            sites = r[:, None]
        else:
            # x2 is the slow index, x1 the fast one
            x2, x1 = np.meshgrid(r, r, indexing="ij")
            sites = np.stack([x1.ravel(), x2.ravel()], axis=1)
        sites.setflags(write=False)
        object.__setattr__(self, "sites", sites)
        object.__setattr__(self, "_index", {tuple(s): i for i, s in enumerate(sites.tolist())})

    @property
    def n_sites(self) -> int:
        return len(self.sites)

    @property
    def side(self) -> int:
        return 2 * self.ell + 1

    def index_of(self, x) -> int:
        """Dense index of lattice point ``x`` (int for d=1, pair for d=2)."""
        key = (int(x),) if np.ndim(x) == 0 else tuple(int(c) for c in x)
        try:
            return self._index[key]
        except KeyError:
            raise LatticeError(f"site {x} not in box of radius {self.ell}") from None

    def displacements(self) -> np.ndarray:
        """Array ``(n, n, d)`` of ``x_i - x_j``, minimal image if periodic."""
        diff = self.sites[:, None, :] - self.sites[None, :, :]
        if self.periodic:
            L = self.side
            diff = (diff + self.ell) % L - self.ell
        return diff

    def distances(self) -> np.ndarray:
        """Euclidean distances between all site pairs."""
        return np.sqrt((self.displacements() ** 2).sum(axis=-1))

    def sup_norms(self) -> np.ndarray:
        return np.abs(self.sites).max(axis=1)

    def contains(self, other: "LatticeBox") -> bool:
        return other.d == self.d and other.ell <= self.ell

    def sites_within(self, radius: int) -> np.ndarray:
        """Site indices with sup-norm at most ``radius``."""
        return np.flatnonzero(self.sup_norms() <= radius)

    def __repr__(self):
        p = ", periodic" if self.periodic else ""
        return f"LatticeBox(d={self.d}, ell={self.ell}{p})"


def enumerate_box(d: int, ell: int, periodic: bool = False) -> LatticeBox:
    """Return the box of radius ``ell`` in ``Z^d``."""
    return LatticeBox(d, ell, periodic)


@dataclass(eq=False)
class LocalOperator:
    """Dense matrix on ``box x C^N`` with site-major indexing.

    Attributes
    ----------
    box : LatticeBox
    internal_dim : int
    matrix : ndarray
        Complex array of shape ``(n_sites*N, n_sites*N)``.
    hermitian, chiral : bool
        Metadata flags.  ``chiral`` means the first ``N/2`` internal
        components form the positive sector of the grading and the
        diagonal blocks of that grading vanish.
    """

    box: LatticeBox
    internal_dim: int
    matrix: np.ndarray
    hermitian: bool = False
    chiral: bool = False

    def __post_init__(self):
        self.matrix = np.asarray(self.matrix, dtype=complex)
        n = self.box.n_sites * self.internal_dim
        if self.matrix.shape != (n, n):
            raise LatticeError(f"matrix shape {self.matrix.shape} does not match {n}x{n}")

    @property
    def d(self) -> int:
        return self.box.d

    @property
    def ell(self) -> int:
        return self.box.ell

    @property
    def dim(self) -> int:
        return self.matrix.shape[0]

    def dofs(self, site_ids) -> np.ndarray:
        """Dense indices of all internal components on the given sites."""
        site_ids = np.asarray(site_ids, dtype=int)
        N = self.internal_dim
        return (site_ids[:, None] * N + np.arange(N)[None, :]).ravel()

    def block(self, i: int, j: int) -> np.ndarray:
        N = self.internal_dim
        return self.matrix[i * N:(i + 1) * N, j * N:(j + 1) * N]

    def blocks(self) -> np.ndarray:
        """View as array ``(n, n, N, N)`` of site blocks."""
        n, N = self.box.n_sites, self.internal_dim
        return self.matrix.reshape(n, N, n, N).transpose(0, 2, 1, 3)

    def norm(self) -> float:
        return float(np.linalg.norm(self.matrix, 2)) if self.dim else 0.0

    def with_matrix(self, matrix, hermitian=None, chiral=None) -> "LocalOperator":
        return LocalOperator(self.box, self.internal_dim, matrix,
                             self.hermitian if hermitian is None else hermitian,
                             self.chiral if chiral is None else chiral)


@dataclass(frozen=True)
class PositionFunction:
    """A scalar function of lattice position.

    ``kind`` is one of ``raw-amended`` (x, with 0 mapped to 1),
    ``clamped-f_ell`` (the radial clamp f_ell), ``sign`` (+1 for x >= 0),
    ``laughlin-phase`` (x/|x| read as a complex number, 1 at the origin) and
    ``square-clamped`` (raw position inside the square box, ``ell`` times
    the Laughlin phase outside).
    """

    kind: str
    ell: int
    d: int

    def __post_init__(self):
        if self.kind not in POSITION_KINDS:
            raise LatticeError(f"unknown position kind {self.kind!r}")
        if self.d not in (1, 2):
            raise LatticeError(f"invalid-dimension: d={self.d}")

    def values(self, sites: np.ndarray) -> np.ndarray:
        """Evaluate on an ``(n, d)`` array of lattice points."""
        sites = np.asarray(sites)
        if self.d == 1:
            z = sites[:, 0].astype(complex)
        else:
            z = sites[:, 0] + 1j * sites[:, 1]
        r = np.abs(z)
        origin = r == 0
        phase = np.where(origin, 1.0, z / np.where(origin, 1.0, r))
        if self.kind == RAW:
            out = np.where(origin, 1.0, z)
        elif self.kind == CLAMPED:
            out = np.where(r >= self.ell, self.ell * phase, z)
            out = np.where(origin, 1.0, out)
        elif self.kind == SIGN:
            if self.d != 1:
                raise LatticeError("sign profile is one-dimensional")
            out = np.where(sites[:, 0] >= 0, 1.0, -1.0).astype(complex)
        elif self.kind == LAUGHLIN:
            out = phase
        else:
            inside = np.abs(sites).max(axis=1) <= self.ell
            out = np.where(inside, np.where(origin, 1.0, z), self.ell * phase)
        return out if self.d == 2 else out.real.astype(complex)

    def __call__(self, x):
        return self.values(np.atleast_2d(np.asarray(x).reshape(1, -1)))[0]


def f_ell_value(x, ell: int):
    """Clamped position f_ell at a single lattice point.

    Returns 1 at the origin, ``x`` when ``1 <= |x| < ell`` and
    ``ell * x / |x|`` otherwise.  In d=2 the point is read as ``x1 + i x2``.

    Examples
    --------
    >>> f_ell_value(15, 10)
    10.0
    >>> f_ell_value((6, 8), 5)
    (3+4j)
    """
    pt = np.atleast_1d(np.asarray(x))
    d = pt.size
    val = PositionFunction(CLAMPED, ell, d).values(pt.reshape(1, d))[0]
    return float(val.real) if d == 1 else complex(val)


def sign_value(x: int) -> int:
    """+1 for ``x >= 0`` and -1 otherwise."""
    return 1 if x >= 0 else -1


def position_values(box: LatticeBox, fun: PositionFunction) -> np.ndarray:
    if fun.d != box.d:
        raise LatticeError(f"dimension-mismatch: box d={box.d}, function d={fun.d}")
    return fun.values(box.sites)


def build_position_operator(box: LatticeBox, fun: PositionFunction,
                            internal_dim: int = 1) -> LocalOperator:
    """Diagonal operator ``fun(X) (x) 1_N`` on the box."""
    vals = position_values(box, fun)
    diag = np.repeat(vals, internal_dim)
    return LocalOperator(box, internal_dim, np.diag(diag),
                         hermitian=bool(np.all(diag.imag == 0)))


def half_space_projection(box: LatticeBox, axis: int = 1, internal_dim: int = 1) -> LocalOperator:
    """Projection onto sites whose ``axis`` coordinate is non-negative."""
    if axis not in (1, 2) or axis > box.d:
        raise LatticeError(f"invalid-axis: {axis} for d={box.d}")
    mask = (box.sites[:, axis - 1] >= 0).astype(float)
    return LocalOperator(box, internal_dim, np.diag(np.repeat(mask, internal_dim)), hermitian=True)
