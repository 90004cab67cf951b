"""Seeded generators for solvable, critical and scalar test instances."""

from dataclasses import dataclass

import numpy as np

from .errors import InvalidInput, NotHermitian, NotPositiveDefinite, RetryExhausted
from .linalg import is_positive_definite
from .operators import MatrixOperatorSpec, apply_operator, random_involutory_unitary
from .transform import ProblemSpec

MODES = ("solvable", "critical", "unsolvable_scalar_family", "scalar")


@dataclass(frozen=True)
class GenSpec:
    n: int = 1
    sign: str = "plus"
    operator_kind: str = "identity"
    seed: int = 0
    mode: str = "solvable"
    margin: float = 0.5
    a: float = 1.0
    q: float = 2.0
    n_critical: int = 1
    zero_A: bool = False

    def __post_init__(self):
        if self.mode not in MODES:
            raise InvalidInput(f"mode must be one of {MODES}, got {self.mode!r}")
        if self.n < 1:
            raise InvalidInput("n must be >= 1")
        if self.mode == "solvable" and not 0 < self.margin < 1:
            raise InvalidInput("margin must lie in (0, 1)")


@dataclass(frozen=True, eq=False)
class GeneratedProblem:
    problem: ProblemSpec
    known_solution: np.ndarray | None = None


def field_for(kind):
    """Real field for the transpose, complex otherwise."""
    return "real" if kind == "transpose" else "complex"


def random_unitary(n, rng, field_name="complex"):
    """Haar-distributed unitary (orthogonal for the real field).

    QR of a Gaussian matrix with the diagonal of ``R`` normalized to
    positive phase.
    """
    G = rng.standard_normal((n, n))
    if field_name == "complex":
        G = G + 1j * rng.standard_normal((n, n))
    Qm, R = np.linalg.qr(G)
    d = np.diag(R)
    ph = d / np.where(np.abs(d) == 0, 1.0, np.abs(d))
    return (Qm * ph).astype(np.complex128)


def _draw(rng, n, field_name):
    M = rng.standard_normal((n, n))
    if field_name == "complex":
        M = M + 1j * rng.standard_normal((n, n))
    return M.astype(np.complex128)


def _operator(kind, n, rng, field_name):
    if kind == "involutory_similarity":
        return MatrixOperatorSpec(kind, random_involutory_unitary(n, rng, field_name))
    return MatrixOperatorSpec(kind)


def _inv_sqrt(X):
    w, V = np.linalg.eigh(X)
    return (V / np.sqrt(w)) @ V.conj().T


def gen_solvable(spec):
    """Random instance built around a known solution ``X``.

    ``Q = X +- A^H f(X)^-1 A``. For the plus sign ``A`` is scaled so that
    ``||f(X)^-1/2 A X^-1/2||_2^2 = 1 - margin``, which makes ``X`` the
    maximal solution with ``rho(T1) <= 1 - margin``. For the minus sign
    ``||A^H f(X)^-1 A||_2 <= (1 - margin) lambda_min(X)``, which keeps
    ``Q`` positive definite.
    """
    rng = np.random.default_rng(spec.seed)
    n, fld = spec.n, field_for(spec.operator_kind)
    f = _operator(spec.operator_kind, n, rng, fld)
    s = 1.0 if spec.sign == "plus" else -1.0
    for _ in range(100):
        G = _draw(rng, n, fld)
        X = G @ G.conj().T + n * np.eye(n)
        X = 0.5 * (X + X.conj().T)
        fX = apply_operator(f, X)
        fX = 0.5 * (fX + fX.conj().T)
        if spec.zero_A:
            A = np.zeros((n, n), dtype=np.complex128)
        else:
            A = _draw(rng, n, fld)
            if spec.sign == "plus":
                K = _inv_sqrt(fX) @ A @ _inv_sqrt(X)
                A = A * np.sqrt(1.0 - spec.margin) / np.linalg.norm(K, 2)
            else:
                C = A.conj().T @ np.linalg.solve(fX, A)
                lam = np.linalg.eigvalsh(X)[0]
                A = A * np.sqrt((1.0 - spec.margin) * lam / np.linalg.norm(C, 2))
        Q = X + s * (A.conj().T @ np.linalg.solve(fX, A))
        Q = 0.5 * (Q + Q.conj().T)
        if fld == "real":
            A, Q, X = A.real + 0j, Q.real + 0j, X.real + 0j
        if not is_positive_definite(Q):
            continue
        try:
            p = ProblemSpec(spec.sign, A, Q, f, fld)
        except (NotPositiveDefinite, NotHermitian):
            continue
        return GeneratedProblem(p, X)
    raise RetryExhausted("no positive definite Q in 100 draws")


def critical_diagonal(n, n_critical, a=None, rng=None):
    """Channel data ``(a_i, q_i)`` with ``q_i = 2 a_i`` on the first ``n_critical``."""
    if not 1 <= n_critical <= n:
        raise InvalidInput("n_critical must lie in [1, n]")
    if a is None:
        a = rng.uniform(0.5, 2.0, n)
    a = np.asarray(a, dtype=float) * np.ones(n)
    q = 2.0 * a
    if n > n_critical:
        q[n_critical:] += rng.uniform(0.5, 2.0, n - n_critical) if rng is not None else 1.0
    return a, q


def gen_critical(n, seed=0, n_critical=1, a=None):
    """Plus-sign identity-operator instance with ``rho(T1) = 1``.

    Independent scalar channels ``x + a_i^2 / x = q_i`` with ``q_i = 2 a_i``
    on ``n_critical`` of them, rotated by a random unitary ``U``:
    ``A = U^H diag(a) U``, ``Q = U^H diag(q) U``. The maximal solution is
    ``U^H diag((q + sqrt(q^2 - 4 a^2)) / 2) U`` and is returned as the known
    solution.
    """
    rng = np.random.default_rng(seed)
    a, q = critical_diagonal(n, n_critical, a, rng)
    if n == 1:
        U = np.eye(1, dtype=np.complex128)
    else:
        U = random_unitary(n, rng, "complex")
    Uh = U.conj().T
    A = Uh @ np.diag(a) @ U
    Q = Uh @ np.diag(q) @ U
    x = 0.5 * (q + np.sqrt(np.maximum(q * q - 4 * a * a, 0.0)))
    X = Uh @ np.diag(x) @ U
    fld = "real" if n == 1 else "complex"
    p = ProblemSpec("plus", A.real + 0j if n == 1 else A, Q.real + 0j if n == 1 else Q,
                    MatrixOperatorSpec(), fld)
    return GeneratedProblem(p, 0.5 * (X + X.conj().T))


def gen_scalar(a, q, sign="plus"):
    """1x1 real problem ``x +- a^2 / x = q`` with the identity operator."""
    if not q > 0:
        raise InvalidInput(f"q must be positive, got {q}")
    return ProblemSpec(sign, [[float(a)]], [[float(q)]], MatrixOperatorSpec(), "real")


def scalar_maximal_solution(a, q, sign="plus"):
    """Larger root of ``x^2 - q x +- a^2 = 0`` or ``None`` when it is complex."""
    disc = q * q - 4 * a * a if sign == "plus" else q * q + 4 * a * a
    if disc < 0:
        return None
    return 0.5 * (q + np.sqrt(disc))


def generate(spec):
    """Dispatch on ``spec.mode``; returns a :class:`GeneratedProblem`."""
    if spec.mode == "solvable":
        return gen_solvable(spec)
    if spec.mode == "critical":
        if spec.sign != "plus" or spec.operator_kind != "identity":
            raise InvalidInput("critical instances are plus-sign, identity-operator only")
        return gen_critical(spec.n, spec.seed, spec.n_critical)
    if spec.mode == "scalar":
        x = scalar_maximal_solution(spec.a, spec.q, spec.sign)
        known = None if x is None else np.array([[x]], dtype=np.complex128)
        return GeneratedProblem(gen_scalar(spec.a, spec.q, spec.sign), known)
    # q < 2|a|: no positive definite solution for the plus sign
    q = spec.q if spec.q < 2 * abs(spec.a) else 1.5 * abs(spec.a)
    return GeneratedProblem(gen_scalar(spec.a, q, "plus"), None)
