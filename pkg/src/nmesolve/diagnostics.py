"""Post-solve analysis of a converged solve.

Builds ``T1 = (X_M - B1)^-1 A1`` and ``S1 = A1 (Q1 - Y_M)^-1``, classifies
criticality (``rho(T1) = 1`` exactly when ``X_M - Y_M`` is singular), runs
the unit-circle check on ``psi(lambda) = Q1 - B1 + lambda A1 + conj(lambda) A1^H``
and numerically verifies the T-power and half-step relations.
"""

from dataclasses import dataclass, field

import numpy as np

from .errors import InsufficientHistory, NotPositiveDefinite
from .linalg import frob, pd_solve, spectral_radius
from .solvers import HistoryEntry, alternating_sequence
from .transform import initial_triple, iterate_triples

# Achievable accuracy of X_M along a critical direction is about sqrt(eps)
# relative, so the gap X_M - Y_M can only be resolved down to a few times that.
NULLITY_RTOL = 4.0 * np.sqrt(np.finfo(float).eps)


@dataclass
class CriticalityReport:
    critical: bool
    nullity: int
    unit_multiplicity: int | None

    @property
    def label(self):
        return "Critical" if self.critical else "Noncritical"


@dataclass
class PsiCheck:
    min_eig: float
    regular: bool
    samples: int

    def nonnegative(self, psi_tol=1e-8):
        return self.min_eig >= -psi_tol


@dataclass
class DiagnosticsReport:
    rho_T1: float | None
    rho_S1: float | None
    rho_T1S1H: float | None
    critical: bool | None
    nullity_XM_minus_YM: int | None
    measured_rate: float | None
    psi_min_eig: float
    psi_regular: bool
    identity_checks: dict = field(default_factory=dict)
    psi_samples: int = 256

    def to_dict(self):
        return {
            "rho_T1": self.rho_T1,
            "rho_S1": self.rho_S1,
            "rho_T1S1H": self.rho_T1S1H,
            "critical": self.critical,
            "nullity_XM_minus_YM": self.nullity_XM_minus_YM,
            "measured_rate": self.measured_rate,
            "psi": {
                "min_eig": self.psi_min_eig,
                "regular": self.psi_regular,
                "samples": self.psi_samples,
                "note": "sampled heuristic, not a certificate",
            },
            "identity_checks": dict(self.identity_checks),
        }


def _right_pd_solve(B, M):
    """``B M^-1`` for Hermitian positive definite ``M``."""
    return pd_solve(M, B.conj().T, 0.0).conj().T


def _require_converged(res):
    if res.X_M is None or res.Y_M is None:
        raise ValueError("diagnostics need a solve result carrying X_M and Y_M")


def compute_T1_S1(p, res):
    """``(T1, S1)`` for a converged solve.

    Raises
    ------
    NotPositiveDefinite
        If ``X_M - B1`` or ``Q1 - Y_M`` is not positive definite.
    """
    _require_converged(res)
    t1 = initial_triple(p)
    T1 = pd_solve(res.X_M - t1.B, t1.A, 0.0)
    S1 = _right_pd_solve(t1.A, t1.Q - res.Y_M)
    return T1, S1


def classify_criticality(rho_T1, X_M=None, Y_M=None, T1=None, S1=None, crit_tol=1e-6,
                         nullity_rtol=NULLITY_RTOL):
    """Critical iff ``rho_T1 >= 1 - crit_tol``.

    Also counts the eigenvalues of ``X_M - Y_M`` below
    ``nullity_rtol * ||X_M||_2`` and, given ``T1`` and ``S1``, the
    eigenvalues of ``T1 S1^H`` within ``crit_tol`` of 1; in theory the two
    counts agree.
    """
    nullity = 0
    if X_M is not None and Y_M is not None:
        D = X_M - Y_M
        w = np.linalg.eigvalsh(0.5 * (D + D.conj().T))
        nullity = int(np.sum(w < nullity_rtol * np.linalg.norm(X_M, 2)))
    mult = None
    if T1 is not None and S1 is not None:
        ev = np.linalg.eigvals(T1 @ S1.conj().T)
        mult = int(np.sum(np.abs(ev - 1.0) <= max(crit_tol, NULLITY_RTOL)))
    return CriticalityReport(bool(rho_T1 >= 1.0 - crit_tol), nullity, mult)


def _triple_at(p, res, k):
    for t in res.triples:
        if t.k == k:
            return t
    return iterate_triples(p, k)[-1]


def T_k(X_M, t):
    """``(X_M - B_k)^-1 A_k``."""
    return pd_solve(X_M - t.B, t.A, 0.0)


def verify_T_power(p, res, k, detail=False):
    """Deviation of ``T_k = T1^k`` and of ``Q_k - X_M = T_k^H (X_M - B_k) T_k``.

    Both are relative Frobenius deviations. Returns their maximum, or the
    pair with ``detail=True``.
    """
    _require_converged(res)
    X = res.X_M
    T1 = T_k(X, _triple_at(p, res, 1))
    tk = _triple_at(p, res, k)
    Tk = T_k(X, tk)
    Pk = np.linalg.matrix_power(T1, k)
    power = frob(Tk - Pk) / max(1.0, frob(Pk))
    lhs = tk.Q - X
    rhs = Tk.conj().T @ (X - tk.B) @ Tk
    rep = frob(lhs - rhs) / max(1.0, frob(tk.Q))
    return (power, rep) if detail else max(power, rep)


def half_T(p, X_M, h):
    """``T_half^(k) = (f(X_M) - B_half^(k))^-1 A_half^(k)``."""
    return pd_solve(p.fx(X_M) - h.B, h.A, 0.0)


def verify_half_T_relation(p, res, i, j):
    """Worst relative deviation of the half-step T relations.

    Checks ``T_(i+j-1) = f(T_half^(i)) T_half^(j)``,
    ``T_half^(i+j) = T_half^(i) T_j``, their composition
    ``T_half^(i+j) = T_half^(1) f(T_half^(i)) T_half^(j)`` and
    ``T_half^(i+j) = T_half^(1) T1^(i+j-1)``.
    """
    _require_converged(res)
    if i < 1 or j < 1:
        raise ValueError("i and j must be >= 1")
    X = res.X_M
    halves, fulls = alternating_sequence(p, i + j)
    Th = {h.k: half_T(p, X, h) for h in halves}
    Tf = {t.k: T_k(X, t) for t in fulls}

    def rel(a, b):
        return frob(a - b) / max(1.0, frob(b))

    m = i + j
    devs = [
        rel(p.fx(Th[i]) @ Th[j], Tf[m - 1]),
        rel(Th[i] @ Tf[j], Th[m]),
        rel(Th[1] @ p.fx(Th[i]) @ Th[j], Th[m]),
        rel(Th[1] @ np.linalg.matrix_power(Tf[1], m - 1), Th[m]),
    ]
    return max(devs)


def half_T_spectral_radii(p, X_M, count):
    """``rho(T_half^(k))`` for ``k = 1 .. count``."""
    halves, _ = alternating_sequence(p, count)
    return [spectral_radius(half_T(p, X_M, h)) for h in halves]


def psi_unit_circle_check(t1, samples=256):
    """Sample ``psi(e^{i theta})`` at ``samples`` equispaced angles.

    Returns the minimum eigenvalue over the samples (nonnegativity holds when
    it is ``>= -psi_tol``) and whether ``psi`` is nonsingular at some sample.
    This is a sampling heuristic, not a certificate.
    """
    if samples < 8:
        raise ValueError("samples must be >= 8")
    base = t1.Q - t1.B
    A, Ah = t1.A, t1.A.conj().T
    scale = max(1.0, frob(base) + 2 * frob(A))
    worst = np.inf
    regular = False
    for theta in 2 * np.pi * np.arange(samples) / samples:
        lam = np.exp(1j * theta)
        P = base + lam * A + np.conj(lam) * Ah
        w = np.linalg.eigvalsh(0.5 * (P + P.conj().T))
        worst = min(worst, float(w[0]))
        if np.abs(w).min() > 1e-12 * scale:
            regular = True
    return PsiCheck(worst, regular, samples)


def _increments(history):
    """``(iteration, increment)`` pairs above the roundoff floor."""
    eps = np.finfo(float).eps
    out = []
    for i, h in enumerate(history):
        if isinstance(h, HistoryEntry):
            d, scale = h.delta_Q, h.norm_Q if np.isfinite(h.norm_Q) else 1.0
        else:
            d, scale = float(h), 1.0
        if np.isfinite(d) and d > ROUNDOFF_FLOOR * eps * max(1.0, scale):
            out.append((i, d))
    return out


ROUNDOFF_FLOOR = 1e3


def estimate_rate(history, window=10):
    """Per-iteration contraction factor from a convergence history.

    Uses the successive increments ``||Q_k - Q_(k-1)||``, which decay at the
    same asymptotic rate as the errors but do not depend on a reference
    limit. Increments within ``ROUNDOFF_FLOOR * eps * ||Q_k||`` of zero and
    the start-up step are discarded; the rate is ``exp(slope)`` of a
    least-squares line through ``log(increment)`` over the last
    ``min(window, available)`` entries, which is less sensitive than an
    endpoint ratio to the modulation caused by complex dominant eigenvalues.
    ``history`` is a list of :class:`HistoryEntry` or of plain increments.

    Raises
    ------
    InsufficientHistory
        Fewer than 5 usable entries.
    """
    d = _increments(list(history))
    if len(d) > 5 and d[0][0] == 0:
        d = d[1:]
    if len(d) < 5:
        raise InsufficientHistory(f"need >= 5 usable history entries, have {len(d)}")
    d = d[-window:]
    k = np.array([i for i, _ in d], dtype=float)
    y = np.log([v for _, v in d])
    slope = np.polyfit(k, y, 1)[0]
    return float(np.exp(slope))


def diagnose(p, res, samples=256, crit_tol=1e-6, t_power_k=4):
    """Full :class:`DiagnosticsReport` for a solve result.

    Fields that need a maximal solution are ``None`` when the solve did not
    converge; the unit-circle check only needs the problem.
    """
    psi = psi_unit_circle_check(initial_triple(p, check=False), samples)
    try:
        rate = estimate_rate(res.history)
    except InsufficientHistory:
        rate = None
    report = DiagnosticsReport(None, None, None, None, None, rate, psi.min_eig,
                               psi.regular, {}, samples)
    if not res.converged:
        return report
    try:
        T1, S1 = compute_T1_S1(p, res)
    except NotPositiveDefinite:
        return report
    report.rho_T1 = spectral_radius(T1)
    report.rho_S1 = spectral_radius(S1)
    report.rho_T1S1H = spectral_radius(T1 @ S1.conj().T)
    crit = classify_criticality(report.rho_T1, res.X_M, res.Y_M, T1, S1, crit_tol)
    if p.sign == "minus":
        crit.critical = False
    report.critical = crit.critical
    report.nullity_XM_minus_YM = crit.nullity
    checks = report.identity_checks
    evT = np.sort_complex(np.linalg.eigvals(T1))
    evS = np.sort_complex(np.linalg.eigvals(S1))
    checks["spectrum_T1_vs_S1"] = float(np.abs(np.sort(np.abs(evT)) - np.sort(np.abs(evS))).max())
    ev = np.linalg.eigvals(T1 @ S1.conj().T)
    checks["T1S1H_imag"] = float(np.abs(ev.imag).max())
    checks["T1S1H_neg"] = float(max(0.0, -ev.real.min()))
    try:
        checks["T_power"] = verify_T_power(p, res, t_power_k)
        checks["half_T_relation"] = verify_half_T_relation(p, res, 1, 1)
    except Exception as exc:  # noqa: BLE001 - report instead of failing the whole report
        checks["error"] = str(exc)
    if crit.unit_multiplicity is not None:
        checks["nullity_vs_unit_multiplicity"] = float(abs(crit.nullity - crit.unit_multiplicity))
    return report
