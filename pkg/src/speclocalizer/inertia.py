"""Inertia and signature of Hermitian matrices, and the gap ``|A^-1|^-1``."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy import linalg

DEFAULT_RTOL = 1e-10
CERTIFY_FACTOR = 100.0


class InertiaError(ValueError):
    pass


@dataclass(frozen=True)
class InertiaResult:
    """Eigenvalue counts of a Hermitian matrix.

    Attributes
    ----------
    n_plus, n_minus, n_zero : int
        Eigenvalues above ``zero_tolerance``, below ``-zero_tolerance`` and
        in between.
    min_abs_eig : float
    zero_tolerance : float
    """

    n_plus: int
    n_minus: int
    n_zero: int
    min_abs_eig: float
    zero_tolerance: float

    @property
    def signature(self) -> int:
        return self.n_plus - self.n_minus

    @property
    def dim(self) -> int:
        return self.n_plus + self.n_minus + self.n_zero

    @property
    def certified(self) -> bool:
        """No eigenvalue within ``100 * zero_tolerance`` of zero."""
        return self.n_zero == 0 and self.min_abs_eig >= CERTIFY_FACTOR * self.zero_tolerance


def _real_if_possible(M: np.ndarray) -> np.ndarray:
    # real symmetric problems are about twice as fast
    if np.iscomplexobj(M) and not np.any(M.imag):
        return np.ascontiguousarray(M.real)
    return M


def eigh(M: np.ndarray):
    """Eigenpairs of a Hermitian matrix, ascending."""
    return np.linalg.eigh(_real_if_possible(np.asarray(M)))


def hermitian_eigvals(M: np.ndarray, check: bool = True) -> np.ndarray:
    M = np.asarray(M)
    if check:
        scale = np.abs(M).max(initial=0.0)
        if np.abs(M - M.conj().T).max(initial=0.0) > 1e-12 * max(scale, 1e-300):
            raise InertiaError("not-hermitian")
    if M.shape[0] == 0:
        return np.zeros(0)
    return np.linalg.eigvalsh(_real_if_possible(M))


def inertia_from_eigvals(ev: np.ndarray, zero_tolerance: float | None = None) -> InertiaResult:
    ev = np.asarray(ev, dtype=float)
    norm = np.abs(ev).max(initial=0.0)
    tol = DEFAULT_RTOL * norm if zero_tolerance is None else float(zero_tolerance)
    if tol < 0:
        raise InertiaError("zero_tolerance must be non-negative")
    n_plus = int(np.count_nonzero(ev > tol))
    n_minus = int(np.count_nonzero(ev < -tol))
    return InertiaResult(n_plus, n_minus, ev.size - n_plus - n_minus,
                         float(np.abs(ev).min(initial=np.inf)) if ev.size else np.inf, tol)


def inertia(M: np.ndarray, zero_tolerance: float | None = None) -> InertiaResult:
    """Inertia of a Hermitian matrix via a full eigendecomposition.

    Parameters
    ----------
    M : (n, n) array_like
        Hermitian to ``1e-12 * max|M|``.
    zero_tolerance : float, optional
        Eigenvalues with modulus at most this count as zero.  Defaults to
        ``1e-10 * |M|``.

    Examples
    --------
    >>> r = inertia(np.diag([2.0, -3.0, 5.0]))
    >>> (r.n_plus, r.n_minus, r.n_zero, r.signature)
    (2, 1, 0, 1)
    """
    return inertia_from_eigvals(hermitian_eigvals(M), zero_tolerance)


def gap(M: np.ndarray) -> float:
    """Smallest singular value of ``M``.

    Singular values at round-off level (``n * eps * |M|``) are reported as
    exactly 0, so numerically singular matrices have gap 0.
    """
    M = np.asarray(M)
    if M.size == 0:
        return np.inf
    s = linalg.svdvals(M, check_finite=False)
    if s[-1] <= max(M.shape) * np.finfo(float).eps * s[0]:
        return 0.0
    return float(s[-1])


def norm(M: np.ndarray) -> float:
    M = np.asarray(M)
    return float(linalg.svdvals(M, check_finite=False)[0]) if M.size else 0.0
