"""Numpy/LAPACK implementations of the kernels in ``_kernels.pyx``."""

import numpy as np
import scipy.linalg as spla


def cholesky(M, pd_tol):
    M = np.asarray(M, dtype=np.complex128)
    thresh = pd_tol * max(1.0, np.abs(M).sum(axis=1).max(initial=0.0))
    try:
        L = np.linalg.cholesky(M)
    except np.linalg.LinAlgError:
        return None
    # numpy accepts tiny positive pivots; the threshold is stricter
    if not np.all(np.diag(L).real ** 2 > thresh):
        return None
    return L


def cho_solve(L, B):
    return spla.cho_solve((L, True), np.asarray(B, dtype=np.complex128),
                          check_finite=False)


def combine(Ai, Bi, Qi, Aj, Bj, Qj, pd_tol):
    L = cholesky(Qj - Bi, pd_tol)
    if L is None:
        return None
    n = Ai.shape[0]
    W = cho_solve(L, np.hstack([Ai, Aj.conj().T]))
    W1, W2 = W[:, :n], W[:, n:]
    return Aj @ W1, Bj + Aj @ W2, Qi - Ai.conj().T @ W1
