"""Period-2 matrix operators ``f`` and randomized axiom checks.

Four kinds are supported: identity, transpose (real field), entrywise
conjugate (complex field) and similarity by an involutory unitary ``U``
(``f(X) = U X U`` with ``U = U^H = U^-1``).
"""

from dataclasses import dataclass, field

import numpy as np

from .errors import DimensionMismatch, FieldMismatch, InvalidOperator
from .linalg import as_matrix, frob, frozen

KINDS = ("identity", "transpose", "conjugate", "involutory_similarity")


@dataclass(frozen=True, eq=False)
class MatrixOperatorSpec:
    kind: str = "identity"
    U: np.ndarray | None = field(default=None, repr=False)

    def __post_init__(self):
        if self.kind not in KINDS:
            raise InvalidOperator(f"unknown operator kind {self.kind!r}")
        if self.kind == "involutory_similarity":
            if self.U is None:
                raise InvalidOperator("involutory_similarity requires U")
            U = as_matrix(self.U)
            n = U.shape[0]
            if U.shape != (n, n):
                raise InvalidOperator("U must be square")
            eye = np.eye(n)
            if np.abs(U.conj().T @ U - eye).max() > 1e-10:
                raise InvalidOperator("U is not unitary")
            if np.abs(U @ U - eye).max() > 1e-10:
                raise InvalidOperator("U is not involutory (U @ U != I)")
            object.__setattr__(self, "U", frozen(U))
        elif self.U is not None:
            raise InvalidOperator(f"{self.kind} takes no U matrix")

    @property
    def orientation(self):
        """``"reversing"`` when ``f(XY) = f(Y) f(X)``, else ``"preserving"``."""
        return "reversing" if self.kind == "transpose" else "preserving"

    def compatible_with(self, field_name):
        if self.kind == "transpose":
            return field_name == "real"
        if self.kind == "conjugate":
            return field_name == "complex"
        return True


def apply_operator(f, X):
    X = as_matrix(X)
    if X.shape[0] != X.shape[1]:
        raise DimensionMismatch(f"operator argument must be square, got {X.shape}")
    if f.kind == "identity":
        return X
    if f.kind == "transpose":
        if np.any(X.imag != 0):
            raise FieldMismatch("transpose operator is defined on the real field only")
        return X.T.copy()
    if f.kind == "conjugate":
        return X.conj()
    U = f.U
    if U.shape != X.shape:
        raise DimensionMismatch(f"U is {U.shape}, argument is {X.shape}")
    return U @ X @ U


def apply_effective(f, X):
    """Multiplication-preserving operator that agrees with ``f`` on Hermitian input.

    For a reversing ``f`` this is ``X -> f(X)^H``; it satisfies all four
    axioms, is preserving, and coincides with ``f`` wherever the equation
    evaluates ``f``. The triple recursion is derived for preserving
    operators, so the solvers use this map in place of ``f``.
    """
    if f.orientation == "preserving":
        return apply_operator(f, X)
    if f.kind == "transpose":
        # f(X)^H = conj(X) for the transpose, without the real-field check
        return as_matrix(X).conj()
    return apply_operator(f, X).conj().T  # pragma: no cover - no other reversing kind


@dataclass
class OperatorAxiomReport:
    period2: float
    additivity: float
    multiplicativity: float
    positivity: float
    unitality: float
    inverse: float
    adjoint: float
    order: float
    sample_count: int
    seed: int

    def deviations(self):
        return {
            "period2": self.period2,
            "additivity": self.additivity,
            "multiplicativity": self.multiplicativity,
            "positivity": self.positivity,
            "unitality": self.unitality,
            "inverse": self.inverse,
            "adjoint": self.adjoint,
            "order": self.order,
        }

    def worst(self):
        return max(self.deviations().values())

    def passed(self, tol):
        return self.worst() <= tol


def _rel(diff, ref):
    return frob(diff) / max(1.0, frob(ref))


def verify_operator_axioms(f, n=None, samples=100, seed=0, field_name=None):
    """Spot-check the operator axioms on random matrices.

    Each deviation is a worst case over ``samples`` draws, measured as
    ``||lhs - rhs||_F / max(1, ||rhs||_F)``; positivity and order
    preservation report ``max(0, -lambda_min)``.
    """
    if samples < 1:
        raise ValueError("samples must be >= 1")
    if f.kind == "involutory_similarity":
        if n is None:
            n = f.U.shape[0]
        elif n != f.U.shape[0]:
            raise DimensionMismatch(f"U is {f.U.shape[0]}x{f.U.shape[0]}, n={n}")
    if n is None or n < 1:
        raise ValueError("n must be >= 1")
    if field_name is None:
        field_name = "real" if f.kind == "transpose" else "complex"
    if not f.compatible_with(field_name):
        raise FieldMismatch(f"{f.kind} operator is not defined on the {field_name} field")

    rng = np.random.default_rng(seed)

    def draw():
        M = rng.standard_normal((n, n))
        if field_name == "complex":
            M = M + 1j * rng.standard_normal((n, n))
        return M.astype(np.complex128)

    def draw_psd():
        G = draw()
        return G @ G.conj().T

    ap = lambda M: apply_operator(f, M)  # noqa: E731
    eye = np.eye(n, dtype=np.complex128)
    dev = dict.fromkeys(
        ("period2", "additivity", "multiplicativity", "positivity",
         "inverse", "adjoint", "order"), 0.0)
    for _ in range(samples):
        X, Y = draw(), draw()
        dev["period2"] = max(dev["period2"], _rel(ap(ap(X)) - X, X))
        dev["additivity"] = max(dev["additivity"], _rel(ap(X + Y) - ap(X) - ap(Y), ap(X + Y)))
        rhs = ap(X) @ ap(Y) if f.orientation == "preserving" else ap(Y) @ ap(X)
        dev["multiplicativity"] = max(dev["multiplicativity"], _rel(ap(X @ Y) - rhs, rhs))
        rhs = np.linalg.inv(ap(X))
        dev["inverse"] = max(dev["inverse"], _rel(ap(np.linalg.inv(X)) - rhs, rhs))
        rhs = ap(X).conj().T
        dev["adjoint"] = max(dev["adjoint"], _rel(ap(X.conj().T) - rhs, rhs))
        P, R = draw_psd(), draw_psd()
        fP = ap(P)
        dev["positivity"] = max(dev["positivity"], -_min_eig(fP) / max(1.0, frob(P)))
        # P + R >= R
        gap = ap(P + R) - ap(R)
        dev["order"] = max(dev["order"], -_min_eig(gap) / max(1.0, frob(P + R)))
    return OperatorAxiomReport(
        unitality=frob(ap(eye) - eye),
        sample_count=samples,
        seed=seed,
        **{k: max(0.0, v) for k, v in dev.items()},
    )


def _min_eig(M):
    H = 0.5 * (M + M.conj().T)
    return float(np.linalg.eigvalsh(H)[0])


def random_involutory_unitary(n, rng, field_name="complex"):
    """``V diag(+-1) V^H`` for a random unitary (orthogonal) ``V``."""
    from .probgen import random_unitary

    V = random_unitary(n, rng, field_name)
    signs = np.where(rng.random(n) < 0.5, -1.0, 1.0)
    if n > 1 and np.all(signs == signs[0]):
        signs[0] = -signs[0]
    U = (V * signs) @ V.conj().T
    return 0.5 * (U + U.conj().T)
