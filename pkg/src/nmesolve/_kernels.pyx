# Compiled kernels for the triple recursion.
#
# Every function mirrors one in _pykernels.py and must return the same
# values up to roundoff; tests run both backends against each other.
# Inputs are C-contiguous complex128 arrays.

import numpy as np

from libc.math cimport sqrt

ctypedef double complex cplx


cdef inline double _abs2(cplx z) noexcept nogil:
    return z.real * z.real + z.imag * z.imag


cdef double _norm_inf(const cplx[:, ::1] M) noexcept nogil:
    cdef Py_ssize_t n = M.shape[0], m = M.shape[1], i, j
    cdef double best = 0.0, row
    for i in range(n):
        row = 0.0
        for j in range(m):
            row += sqrt(_abs2(M[i, j]))
        if row > best:
            best = row
    return best


cdef Py_ssize_t _chol(const cplx[:, ::1] M, cplx[:, ::1] L, double thresh) noexcept nogil:
    # M = L L^H from the lower triangle of M. Returns the first column whose
    # pivot is not above thresh, or -1. NaN pivots fail the comparison.
    cdef Py_ssize_t n = M.shape[0], i, j, p
    cdef double d
    cdef cplx s
    for j in range(n):
        d = M[j, j].real
        for p in range(j):
            d -= _abs2(L[j, p])
        if not (d > thresh):
            return j
        d = sqrt(d)
        L[j, j] = d
        for i in range(j + 1, n):
            s = M[i, j]
            for p in range(j):
                s = s - L[i, p] * L[j, p].conjugate()
            L[i, j] = s / d
    return -1


cdef void _cho_solve_inplace(const cplx[:, ::1] L, cplx[:, ::1] X) noexcept nogil:
    cdef Py_ssize_t n = L.shape[0], m = X.shape[1], i, p, c
    cdef cplx lip
    cdef double d
    for i in range(n):
        for p in range(i):
            lip = L[i, p]
            for c in range(m):
                X[i, c] = X[i, c] - lip * X[p, c]
        d = L[i, i].real
        for c in range(m):
            X[i, c] = X[i, c] / d
    for i in range(n - 1, -1, -1):
        for p in range(i + 1, n):
            lip = L[p, i].conjugate()
            for c in range(m):
                X[i, c] = X[i, c] - lip * X[p, c]
        d = L[i, i].real
        for c in range(m):
            X[i, c] = X[i, c] / d


cdef void _gemm_acc(const cplx[:, ::1] X, const cplx[:, :] Y, cplx[:, ::1] C,
                    double alpha) noexcept nogil:
    # C += alpha * X @ Y
    cdef Py_ssize_t n = X.shape[0], k = X.shape[1], m = Y.shape[1], i, p, j
    cdef cplx x
    for i in range(n):
        for p in range(k):
            x = alpha * X[i, p]
            for j in range(m):
                C[i, j] = C[i, j] + x * Y[p, j]


cdef void _gemm_h_acc(const cplx[:, ::1] X, const cplx[:, :] Y, cplx[:, ::1] C,
                      double alpha) noexcept nogil:
    # C += alpha * X^H @ Y
    cdef Py_ssize_t n = X.shape[1], k = X.shape[0], m = Y.shape[1], i, p, j
    cdef cplx x
    for p in range(k):
        for i in range(n):
            x = alpha * X[p, i].conjugate()
            for j in range(m):
                C[i, j] = C[i, j] + x * Y[p, j]


def cholesky(M, double pd_tol):
    """Lower Cholesky factor of ``M`` or ``None`` if a pivot is too small."""
    cdef const cplx[:, ::1] Mv = np.ascontiguousarray(M, dtype=np.complex128)
    cdef Py_ssize_t n = Mv.shape[0]
    L = np.zeros((n, n), dtype=np.complex128)
    cdef cplx[:, ::1] Lv = L
    cdef double thresh = pd_tol * max(1.0, _norm_inf(Mv))
    cdef Py_ssize_t bad
    with nogil:
        bad = _chol(Mv, Lv, thresh)
    if bad >= 0:
        return None
    return L


def cho_solve(L, B):
    """Solve ``L L^H X = B``."""
    cdef const cplx[:, ::1] Lv = np.ascontiguousarray(L, dtype=np.complex128)
    B = np.asarray(B, dtype=np.complex128)
    vector = B.ndim == 1
    X = np.array(B.reshape(B.shape[0], -1), dtype=np.complex128, order="C", copy=True)
    cdef cplx[:, ::1] Xv = X
    with nogil:
        _cho_solve_inplace(Lv, Xv)
    return X.ravel() if vector else X


def combine(Ai, Bi, Qi, Aj, Bj, Qj, double pd_tol):
    """Group-law composition of two triples, sharing one factorization.

    Returns ``(A, B, Q)`` or ``None`` when ``Qj - Bi`` loses a pivot.
    """
    cdef const cplx[:, ::1] ai = np.ascontiguousarray(Ai, dtype=np.complex128)
    cdef const cplx[:, ::1] bi = np.ascontiguousarray(Bi, dtype=np.complex128)
    cdef const cplx[:, ::1] qi = np.ascontiguousarray(Qi, dtype=np.complex128)
    cdef const cplx[:, ::1] aj = np.ascontiguousarray(Aj, dtype=np.complex128)
    cdef const cplx[:, ::1] bj = np.ascontiguousarray(Bj, dtype=np.complex128)
    cdef const cplx[:, ::1] qj = np.ascontiguousarray(Qj, dtype=np.complex128)
    cdef Py_ssize_t n = ai.shape[0], i, j
    M = np.empty((n, n), dtype=np.complex128)
    L = np.zeros((n, n), dtype=np.complex128)
    W = np.empty((n, 2 * n), dtype=np.complex128)
    A = np.zeros((n, n), dtype=np.complex128)
    B = np.array(bj, dtype=np.complex128, order="C")
    Q = np.array(qi, dtype=np.complex128, order="C")
    cdef cplx[:, ::1] mv = M, lv = L, wv = W, av = A, bv = B, qv = Q
    cdef double thresh
    cdef Py_ssize_t bad
    with nogil:
        for i in range(n):
            for j in range(n):
                mv[i, j] = qj[i, j] - bi[i, j]
        thresh = pd_tol * max(1.0, _norm_inf(mv))
        bad = _chol(mv, lv, thresh)
        if bad < 0:
            for i in range(n):
                for j in range(n):
                    wv[i, j] = ai[i, j]
                    wv[i, n + j] = aj[j, i].conjugate()
            _cho_solve_inplace(lv, wv)
            _gemm_acc(aj, wv[:, :n], av, 1.0)
            _gemm_acc(aj, wv[:, n:], bv, 1.0)
            _gemm_h_acc(ai, wv[:, :n], qv, -1.0)
    if bad >= 0:
        return None
    return A, B, Q
