"""Dense linear-algebra helpers shared across the package.

Covariance handling follows one policy everywhere: matrices are kept
explicitly symmetric, factorizations retry with an escalating diagonal
jitter before giving up, and failures raise :class:`NumericsError` so
callers can tell numerical breakdown apart from bad arguments.
"""

from __future__ import annotations

import numpy as np
from scipy.linalg import cho_solve

# Jitter schedule: start at BASE_JITTER * mean(diag), grow tenfold per
# retry, give up after MAX_JITTER_ROUNDS retries.
BASE_JITTER = 1e-12
MAX_JITTER_ROUNDS = 3

# "PSD up to roundoff": smallest eigenvalue >= -PSD_REL_TOL * max|eigenvalue|.
PSD_REL_TOL = 1e-10

_TINY = np.finfo(float).tiny

__all__ = [
    "NumericsError",
    "symmetrize",
    "sqrt_psd",
    "solve_psd",
    "ensure_psd",
    "gaussian_pdf",
    "gaussian_log_pdf",
]


class NumericsError(RuntimeError):
    """A numerical operation failed beyond the jitter recovery budget.

    Sequential drivers (the filter loop) fill in ``step`` so a failed run
    reports where it broke down; one-shot operations leave it ``None``.
    """

    def __init__(self, message: str, step: int | None = None):
        super().__init__(message)
        self.step = step


def symmetrize(a: np.ndarray) -> np.ndarray:
    """Return the symmetric part 0.5 * (a + a.T)."""
    return 0.5 * (a + a.T)


def _finite(a: np.ndarray) -> bool:
    # Sum-based screen: NaN and infinities always surface in the sum
    # (inf - inf gives NaN), far cheaper than isfinite().all().
    return bool(np.isfinite(a.sum()))


def _require_square(a: np.ndarray, what: str) -> None:
    if a.ndim != 2 or a.shape[0] != a.shape[1]:
        raise ValueError(f"{what} must be a square matrix, got shape {a.shape}")


def _jitter_start(mat: np.ndarray) -> float:
    # Scale-aware base jitter; falls back to an absolute floor for
    # all-zero matrices so escalation is never a no-op.
    mean_diag = float(np.trace(mat)) / mat.shape[0]
    return BASE_JITTER * max(mean_diag, _TINY)


def sqrt_psd(a: np.ndarray) -> np.ndarray:
    """Symmetric square root of a positive semidefinite matrix.

    Eigendecomposition-based so the result is itself symmetric; tiny
    negative eigenvalues from roundoff are clipped to zero. Diagonal
    input takes an elementwise fast path. Raises
    :class:`NumericsError` if the matrix stays indefinite through the
    jitter schedule.
    """
    a = np.asarray(a, dtype=float)
    _require_square(a, "matrix")
    if not _finite(a):
        raise NumericsError("matrix square root of a non-finite matrix")
    n = a.shape[0]
    if n == 1:
        v = a[0, 0]
        if v < 0.0:
            raise NumericsError(f"negative variance {v!r} has no real square root")
        return np.array([[np.sqrt(v)]])
    diag = np.diagonal(a)
    if np.count_nonzero(a) == np.count_nonzero(diag) and np.all(diag >= 0.0):
        return np.diag(np.sqrt(diag))

    mat = symmetrize(a)
    jitter = _jitter_start(mat)
    for round_ in range(MAX_JITTER_ROUNDS + 1):
        try:
            w, v = np.linalg.eigh(mat)
        except np.linalg.LinAlgError:
            w = None
        if w is not None:
            bound = PSD_REL_TOL * max(abs(w[0]), abs(w[-1]), _TINY)
            if w[0] >= -bound:
                return (v * np.sqrt(np.clip(w, 0.0, None))) @ v.T
        if round_ < MAX_JITTER_ROUNDS:
            mat = mat + jitter * np.eye(n)
            jitter *= 10.0
    raise NumericsError(
        "matrix is not positive semidefinite within the jitter budget"
    )


def solve_psd(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    """Solve ``a @ x = b`` for symmetric positive definite ``a``.

    Cholesky-based (no explicit inverse); escalating diagonal jitter on
    factorization failure, :class:`NumericsError` once the budget is
    exhausted.
    """
    a = np.asarray(a, dtype=float)
    b = np.asarray(b, dtype=float)
    _require_square(a, "left-hand side")
    if b.shape[0] != a.shape[0]:
        raise ValueError(
            f"right-hand side has {b.shape[0]} rows, expected {a.shape[0]}"
        )
    if not (_finite(a) and _finite(b)):
        raise NumericsError("linear solve with non-finite input")
    return _cho_solve_jittered(symmetrize(a), b)


def _cho_solve_jittered(mat: np.ndarray, b: np.ndarray) -> np.ndarray:
    # Shared jitter loop behind solve_psd. Callers that skip the public
    # guards must pass an exactly symmetric float matrix and screen the
    # solution (non-finite input either fails the factorization here or
    # propagates NaN into the result).
    jitter = _jitter_start(mat)
    for round_ in range(MAX_JITTER_ROUNDS + 1):
        try:
            low = np.linalg.cholesky(mat)
        except np.linalg.LinAlgError:
            low = None
        if low is not None:
            return cho_solve((low, True), b, check_finite=False)
        if round_ < MAX_JITTER_ROUNDS:
            mat = mat + jitter * np.eye(mat.shape[0])
            jitter *= 10.0
    raise NumericsError("matrix is singular within the jitter budget")


def ensure_psd(a: np.ndarray, *, scale: float | None = None) -> np.ndarray:
    """Symmetrize and clip tiny negative eigenvalues to zero.

    ``scale`` sets the reference magnitude for the clipping tolerance
    (useful after subtractive updates, where the result can be much
    smaller than the operands); it defaults to the largest absolute
    eigenvalue. Negative eigenvalues beyond the tolerance raise
    :class:`NumericsError`.
    """
    a = np.asarray(a, dtype=float)
    _require_square(a, "matrix")
    if not _finite(a):
        raise NumericsError("non-finite matrix cannot be made PSD")
    if a.shape[0] == 1:
        v = a[0, 0]
        if v >= 0.0:
            return np.array([[v]])
        ref = abs(v) if scale is None else scale
        if v >= -PSD_REL_TOL * max(ref, _TINY):
            return np.array([[0.0]])
        raise NumericsError(f"variance {v!r} is negative beyond tolerance")

    mat = symmetrize(a)
    w, vec = np.linalg.eigh(mat)
    ref = max(abs(w[0]), abs(w[-1])) if scale is None else scale
    if w[0] < -PSD_REL_TOL * max(ref, _TINY):
        raise NumericsError(
            f"matrix has eigenvalue {w[0]!r}, negative beyond tolerance"
        )
    if w[0] >= 0.0:
        return mat
    return symmetrize((vec * np.clip(w, 0.0, None)) @ vec.T)


def gaussian_pdf(x, mean=0.0, var=1.0):
    """Univariate normal density, broadcasting over all arguments.

    ``var`` must be positive wherever it is used; callers owning
    degenerate cases (zero variance) must mask them out themselves.
    """
    x = np.asarray(x, dtype=float)
    d = x - mean
    return np.exp(-0.5 * d * d / var) / np.sqrt(2.0 * np.pi * var)


def gaussian_log_pdf(x, mean=0.0, var=1.0):
    """Log of :func:`gaussian_pdf`, safe where the density underflows."""
    x = np.asarray(x, dtype=float)
    d = x - mean
    return -0.5 * (d * d / var + np.log(2.0 * np.pi * var))
