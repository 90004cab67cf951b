"""Dense Hermitian kernels used by every other module.

Matrices are numpy ``complex128`` arrays throughout; real-field problems
carry zero imaginary parts and go through the same code path.
"""

import numpy as np

from . import _backend
from .errors import (
    NoConvergence,
    NotHermitian,
    NotPositiveDefinite,
    NotSquare,
    SingularIntermediate,
)

PD_TOL = 1e-12


def as_matrix(M):
    """Return ``M`` as a 2-D complex128 array (copy only when needed)."""
    M = np.asarray(M, dtype=np.complex128)
    if M.ndim == 0:
        M = M.reshape(1, 1)
    if M.ndim != 2 or M.shape[0] < 1 or M.shape[1] < 1:
        raise NotSquare(f"expected a non-empty matrix, got shape {M.shape}")
    return M


def _square(M):
    M = as_matrix(M)
    if M.shape[0] != M.shape[1]:
        raise NotSquare(f"matrix is {M.shape[0]}x{M.shape[1]}")
    return M


def ctranspose(M):
    return M.conj().T


def frob(M):
    return float(np.linalg.norm(M))


def hermitize(M, herm_tol=1e-12):
    """Return the Hermitian part ``(M + M^H) / 2``.

    Raises
    ------
    NotHermitian
        If ``max |M[i,j] - conj(M[j,i])|`` exceeds ``herm_tol``.
    """
    M = _square(M)
    dev = np.abs(M - M.conj().T).max()
    if not dev <= herm_tol:
        raise NotHermitian(f"max |M - M^H| = {dev:.3e} exceeds {herm_tol:.3e}")
    return 0.5 * (M + M.conj().T)


def is_positive_definite(M, pd_tol=PD_TOL, return_factor=False):
    """Cholesky-based definiteness test.

    ``M`` is positive definite when every pivot of its Hermitian triangular
    factorization exceeds ``pd_tol * max(1, ||M||_inf)``. With
    ``return_factor=True`` the lower factor (or ``None``) is returned too.
    """
    M = _square(M)
    L = _backend.cholesky(M, pd_tol)
    if return_factor:
        return L is not None, L
    return L is not None


def pd_solve(M, B, pd_tol=PD_TOL):
    """Solve ``M X = B`` for positive definite Hermitian ``M``.

    The residual satisfies ``||M X - B||_F <= c n eps cond(M) ||B||_F``.
    """
    M = _square(M)
    L = _backend.cholesky(M, pd_tol)
    if L is None:
        raise NotPositiveDefinite("matrix is not positive definite")
    B = np.asarray(B, dtype=np.complex128)
    return _backend.cho_solve(L, B)


def loewner_gap(X, Y=None):
    """Smallest eigenvalue of the Hermitian part of ``X - Y``."""
    D = X if Y is None else X - Y
    return float(np.linalg.eigvalsh(0.5 * (D + D.conj().T))[0])


def spectral_radius(M):
    """Spectral radius from the full dense eigenvalue decomposition.

    LAPACK's Hessenberg + shifted QR (``zgeev``) handles complex and
    defective spectra, where power iteration stalls.
    """
    M = _square(M)
    if not np.all(np.isfinite(M)):
        raise NoConvergence("matrix has non-finite entries")
    try:
        ev = np.linalg.eigvals(M)
    except np.linalg.LinAlgError as exc:
        raise NoConvergence(str(exc)) from exc
    return float(np.abs(ev).max())


def smwf_residual(X, Y, A, sign):
    """Discrepancy of the Sherman-Morrison-Woodbury identity.

    Compares ``(X + s A^H Y A)^-1`` against
    ``X^-1 - s X^-1 A^H (Y^-1 + s A X^-1 A^H)^-1 A X^-1`` with ``s = +-1``,
    both evaluated by direct inversion. Returns the Frobenius norm of the
    difference.
    """
    s = _sign_value(sign)
    X, Y, A = _square(X), _square(Y), _square(A)
    Ah = A.conj().T
    try:
        lhs = np.linalg.inv(X + s * Ah @ Y @ A)
        Xi = np.linalg.inv(X)
        mid = np.linalg.inv(np.linalg.inv(Y) + s * A @ Xi @ Ah)
    except np.linalg.LinAlgError as exc:
        raise SingularIntermediate(str(exc)) from exc
    rhs = Xi - s * Xi @ Ah @ mid @ A @ Xi
    return frob(lhs - rhs)


def _sign_value(sign):
    if sign in ("plus", "+", 1):
        return 1.0
    if sign in ("minus", "-", -1):
        return -1.0
    raise ValueError(f"sign must be 'plus' or 'minus', got {sign!r}")


def frozen(M):
    M = np.array(M, dtype=np.complex128, copy=True)
    M.setflags(write=False)
    return M
