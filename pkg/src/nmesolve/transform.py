"""Reduction to the standard equation and the triple recursion.

One Sherman-Morrison-Woodbury step turns ``X +- A^H f(X)^-1 A = Q`` into

    X + A1^H (X - B1)^-1 A1 = Q1,

and iterating the reduction produces triples ``(A_k, B_k, Q_k)`` with
``Q_k`` equal to the ``2k``-th plain fixed-point iterate. Triples obey a
group law: the triples at indices ``i`` and ``j`` determine the triple at
``i + j`` (:func:`combine_triples`), which is what the accelerated solvers
exploit.
"""

from dataclasses import dataclass, field

import numpy as np

from . import _backend
from .errors import (
    Breakdown,
    DimensionMismatch,
    FieldMismatch,
    NotHermitian,
    NotPositiveDefinite,
    NotSolvable,
    NotSquare,
    SingularOperand,
)
from .linalg import (
    PD_TOL,
    as_matrix,
    frob,
    frozen,
    hermitize,
    is_positive_definite,
    pd_solve,
)
from .operators import MatrixOperatorSpec, apply_effective, apply_operator

SIGNS = ("plus", "minus")
FIELDS = ("real", "complex")


@dataclass(frozen=True, eq=False)
class ProblemSpec:
    """One instance of ``X +- A^H f(X)^-1 A = Q``.

    ``Q`` must be Hermitian positive definite; it is stored hermitized.
    Arrays are stored read-only.
    """

    sign: str
    A: np.ndarray = field(repr=False)
    Q: np.ndarray = field(repr=False)
    f: MatrixOperatorSpec = field(default_factory=MatrixOperatorSpec)
    field: str = "complex"

    def __post_init__(self):
        if self.sign not in SIGNS:
            raise ValueError(f"sign must be one of {SIGNS}, got {self.sign!r}")
        if self.field not in FIELDS:
            raise ValueError(f"field must be one of {FIELDS}, got {self.field!r}")
        A, Q = as_matrix(self.A), as_matrix(self.Q)
        for name, M in (("A", A), ("Q", Q)):
            if M.ndim != 2 or M.shape[0] != M.shape[1]:
                raise NotSquare(f"{name} is {M.shape}, must be square")
        n = A.shape[0]
        if Q.shape != (n, n):
            raise DimensionMismatch(f"A is {A.shape}, Q is {Q.shape}; both must be n x n")
        if self.f.kind == "involutory_similarity" and self.f.U.shape != (n, n):
            raise DimensionMismatch(f"operator U is {self.f.U.shape}, problem is {n}x{n}")
        if not self.f.compatible_with(self.field):
            raise FieldMismatch(f"{self.f.kind} operator is not defined on the {self.field} field")
        if self.field == "real":
            if np.any(A.imag != 0) or np.any(Q.imag != 0):
                raise FieldMismatch("real-field problem has complex entries")
            if self.f.kind == "involutory_similarity" and np.any(self.f.U.imag != 0):
                raise FieldMismatch("real-field problem has a complex U")
        try:
            Q = hermitize(Q, 1e-12 * max(1.0, frob(Q)))
        except NotHermitian as exc:
            raise NotHermitian(f"Q: {exc}") from None
        if not is_positive_definite(Q):
            raise NotPositiveDefinite("Q must be positive definite")
        object.__setattr__(self, "A", frozen(A))
        object.__setattr__(self, "Q", frozen(Q))

    @property
    def n(self):
        return self.A.shape[0]

    @property
    def s(self):
        """+1.0 for the plus sign, -1.0 for the minus sign."""
        return 1.0 if self.sign == "plus" else -1.0

    def fx(self, X):
        """``f(X)`` in the multiplication-preserving form used by the recursion."""
        return apply_effective(self.f, X)

    def a_is_singular(self, rtol=1e-10):
        sv = np.linalg.svd(self.A, compute_uv=False)
        return sv[-1] <= rtol * max(sv[0], np.finfo(float).tiny)

    def warnings(self):
        out = []
        if self.sign == "minus" and self.a_is_singular():
            out.append("A is singular: the minus-sign maximal solution is not guaranteed")
        return out


@dataclass(frozen=True, eq=False)
class IterTriple:
    """``(A_k, B_k, Q_k)`` at effective index ``k``."""

    k: int
    A: np.ndarray = field(repr=False)
    B: np.ndarray = field(repr=False)
    Q: np.ndarray = field(repr=False)

    def __post_init__(self):
        for name in ("A", "B", "Q"):
            object.__setattr__(self, name, frozen(getattr(self, name)))

    def is_finite(self):
        return all(np.all(np.isfinite(M)) for M in (self.A, self.B, self.Q))


def _herm(M, what):
    try:
        return hermitize(M, 1e-8 * max(1.0, frob(M)))
    except NotHermitian as exc:
        raise Breakdown(f"{what} drifted from Hermitian: {exc}") from None


def initial_triple(p, pd_tol=PD_TOL, check=True):
    """``X^(1)`` from one reduction step.

    Plus sign: ``(f(A) f(Q)^-1 A, f(A) f(Q)^-1 f(A)^H, Q - A^H f(Q)^-1 A)``;
    minus sign flips the signs of the last two corrections.

    Raises
    ------
    NotSolvable
        Plus sign only, when ``Q1`` is not positive definite; no positive
        definite solution can exist then. Skipped with ``check=False``.
    """
    fA, fQ = p.fx(p.A), p.fx(p.Q)
    rhs = np.hstack([p.A, fA.conj().T])
    try:
        W = pd_solve(fQ, rhs, pd_tol)
    except NotPositiveDefinite:
        raise NotPositiveDefinite("f(Q) is not positive definite") from None
    n = p.n
    A1 = fA @ W[:, :n]
    B1 = p.s * (fA @ W[:, n:])
    Q1 = p.Q - p.s * (p.A.conj().T @ W[:, :n])
    t = IterTriple(1, A1, _herm(B1, "B1"), _herm(Q1, "Q1"))
    if check and p.sign == "plus" and not is_positive_definite(t.Q, pd_tol):
        raise NotSolvable("Q - A^H f(Q)^-1 A is not positive definite")
    return t


def dual_initial_triple(p, pd_tol=PD_TOL):
    """Initial triple of the dual equation ``Y = Q -+ f(A) f(Y)^-1 f(A)^H``.

    Its iterates satisfy ``A_k = dual_A_k^H`` and
    ``dual_Q_k + B_k = dual_B_k + Q_k = Q``.
    """
    fA, fQ = p.fx(p.A), p.fx(p.Q)
    n = p.n
    W = pd_solve(fQ, np.hstack([fA.conj().T, p.A]), pd_tol)
    Ah = p.A.conj().T
    A1 = Ah @ W[:, :n]
    B1 = p.s * (Ah @ W[:, n:])
    Q1 = p.Q - p.s * (fA @ W[:, :n])
    return IterTriple(1, A1, _herm(B1, "dual B1"), _herm(Q1, "dual Q1"))


def combine_triples(Xi, Xj, pd_tol=PD_TOL):
    """Triple at index ``i + j`` from the triples at ``i`` and ``j``.

    ``A = Aj (Qj - Bi)^-1 Ai``, ``B = Bj + Aj (Qj - Bi)^-1 Aj^H``,
    ``Q = Qi - Ai^H (Qj - Bi)^-1 Ai``, with one factorization of
    ``Qj - Bi`` shared by the three updates.

    Raises
    ------
    Breakdown
        If ``Qj - Bi`` is not positive definite.
    """
    k = Xi.k + Xj.k
    out = _backend.combine(Xi.A, Xi.B, Xi.Q, Xj.A, Xj.B, Xj.Q, pd_tol)
    if out is None:
        raise Breakdown(f"pivot loss forming index {k}", index=k)
    A, B, Q = out
    t = IterTriple(k, A, _herm(B, f"B at {k}"), _herm(Q, f"Q at {k}"))
    if not t.is_finite():
        raise Breakdown(f"non-finite entries at index {k}", index=k)
    return t


def step_triple(current, base, pd_tol=PD_TOL):
    """One plain step: ``X^(k+1)`` from ``X^(k)`` and ``X^(1)``."""
    if base.k != 1:
        raise ValueError(f"base triple must have index 1, got {base.k}")
    return combine_triples(current, base, pd_tol)


def iterate_triples(p, count, pd_tol=PD_TOL):
    """Plain triples ``X^(1) .. X^(count)``."""
    t1 = initial_triple(p, pd_tol)
    out = [t1]
    while len(out) < count:
        out.append(step_triple(out[-1], t1, pd_tol))
    return out


def equation_residual(p, X):
    """``||X +- A^H f(X)^-1 A - Q||_F / max(1, ||Q||_F)``."""
    X = as_matrix(X)
    if p.field == "real":
        X = X.real.astype(np.complex128)
    fX = apply_operator(p.f, X)
    try:
        W = np.linalg.solve(fX, p.A)
    except np.linalg.LinAlgError as exc:
        raise SingularOperand(f"f(X) is singular: {exc}") from None
    R = X + p.s * (p.A.conj().T @ W) - p.Q
    return frob(R) / max(1.0, frob(p.Q))
