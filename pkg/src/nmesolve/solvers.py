"""Fixed-point, accelerated and alternating solvers for the maximal solution.

All accelerated schemes are compositions of :func:`combine_triples`; each
produced triple carries its effective index (the number of plain steps it
stands for), so every iterate can be checked against the plain recursion.
"""

from dataclasses import dataclass, field
from enum import Enum

import numpy as np

from . import _backend
from .errors import Breakdown, NotPositiveDefinite, NotSolvable, SingularOperand
from .linalg import PD_TOL, frob, frozen, hermitize, pd_solve, spectral_radius
from .transform import (
    IterTriple,
    combine_triples,
    equation_residual,
    initial_triple,
    step_triple,
)

ALGORITHMS = ("fixed_point", "accel_restart", "accel_order_r", "accel_schedule", "alternating")


class Status(str, Enum):
    CONVERGED = "Converged"
    NOT_SOLVABLE = "NotSolvable"
    BREAKDOWN = "Breakdown"
    MAX_ITER = "MaxIterExceeded"

    def __str__(self):
        return self.value


@dataclass
class SolveOptions:
    algorithm: str = "fixed_point"
    tol: float = 1e-12
    max_iter: int | None = None
    ell: int = 1
    r: int = 2
    schedule: tuple = (2,)
    record_history: bool = True
    record_triples: bool = False
    pd_tol: float = PD_TOL

    def __post_init__(self):
        if self.algorithm not in ALGORITHMS:
            raise ValueError(f"algorithm must be one of {ALGORITHMS}, got {self.algorithm!r}")
        if self.ell < 1:
            raise ValueError("ell must be >= 1")
        if self.r < 2:
            raise ValueError("r must be >= 2")
        self.schedule = tuple(int(g) for g in self.schedule)
        if not self.schedule or min(self.schedule) < 2:
            raise ValueError("schedule entries must all be >= 2")
        if self.tol <= 0:
            raise ValueError("tol must be positive")

    @property
    def iteration_limit(self):
        if self.max_iter is not None:
            return self.max_iter
        return 1000 if self.algorithm in ("fixed_point", "alternating") else 100


@dataclass
class HistoryEntry:
    iteration: int
    effective_index: int
    norm_A: float
    delta_Q: float
    residual: float
    norm_Q: float = float("nan")


@dataclass(frozen=True, eq=False)
class HalfTriple:
    """Half-step state ``(A_half, B_half, Q_half)`` of the alternating iteration."""

    k: int
    A: np.ndarray = field(repr=False)
    B: np.ndarray = field(repr=False)
    Q: np.ndarray = field(repr=False)

    def __post_init__(self):
        for name in ("A", "B", "Q"):
            object.__setattr__(self, name, frozen(getattr(self, name)))


@dataclass
class SolveResult:
    status: Status
    X_M: np.ndarray | None
    Y_M: np.ndarray | None
    iterations: int
    effective_index: int
    final_residual: float
    history: list = field(default_factory=list)
    warnings: list = field(default_factory=list)
    rho_T1: float | None = None
    message: str = ""
    triples: list = field(default_factory=list, repr=False)
    half_triples: list = field(default_factory=list, repr=False)

    @property
    def converged(self):
        return self.status is Status.CONVERGED


def _psd_within(M, slack):
    """True when ``M + slack I`` admits a Cholesky factorization."""
    M = 0.5 * (M + M.conj().T)
    return _backend.cholesky(M + slack * np.eye(M.shape[0]), 0.0) is not None


def _slack(*mats):
    return 1e-9 * max(1.0, *(frob(M) for M in mats))


class _Run:
    """Shared bookkeeping: stopping test, ordering checks, history."""

    def __init__(self, p, opts):
        self.p = p
        self.opts = opts
        self.history = []
        self.triples = []
        self.half_triples = []
        self.warnings = list(p.warnings())
        self.iterations = 0

    def record(self, t):
        if self.opts.record_triples:
            self.triples.append(t)

    def ordering_violation(self, old, new):
        """Name of the first violated monotonicity relation, or ``None``."""
        p = self.p
        sl = _slack(old.Q, new.Q, p.Q)
        if not _psd_within(old.Q - new.Q, sl):
            return "Q_k nonincreasing"
        if not _psd_within(new.B - old.B, sl):
            return "B_k nondecreasing"
        if p.sign == "plus":
            if not _psd_within(new.B, sl):
                return "B_k >= 0"
            if not _psd_within(new.Q - new.B, sl):
                return "Q_k > B_k"
        else:
            if not _psd_within(-new.B, sl):
                return "B_k <= 0"
            if not _psd_within(new.Q - p.Q, sl):
                return "Q_k >= Q"
        return None

    def residual(self, X):
        try:
            return equation_residual(self.p, X)
        except SingularOperand:
            return float("inf")

    def converged(self, Q_old, Q_new, res):
        dq = frob(Q_new - Q_old)
        return dq <= self.opts.tol * max(1.0, frob(Q_old)) and res <= self.opts.tol, dq

    def log(self, k, A, dq, res, Q):
        if self.opts.record_history:
            self.history.append(
                HistoryEntry(self.iterations, k, frob(A), dq, res, frob(Q)))

    def failure(self, reason, state):
        """Result for a pivot loss or ordering violation."""
        p = self.p
        res = self.residual(state.Q) if state is not None else float("nan")
        if state is not None and res <= self.opts.tol:
            self.warnings.append(
                f"stopped at {reason}; previous iterate already meets the residual "
                "tolerance (near-critical instance)")
            return self.finish(Status.CONVERGED, state.Q, state.B, state.k, res)
        status = Status.NOT_SOLVABLE if p.sign == "plus" else Status.BREAKDOWN
        X = state.Q if state is not None else None
        Y = state.B if state is not None else None
        k = state.k if state is not None else 0
        return self.finish(status, X, Y, k, res, message=reason)

    def finish(self, status, X, Y, k, res, message=""):
        rho = None
        if status is Status.CONVERGED:
            rho = _rho_T1(self.p, X, self.opts.pd_tol)
        return SolveResult(
            status=status, X_M=X, Y_M=Y, iterations=self.iterations,
            effective_index=k, final_residual=res, history=self.history,
            warnings=self.warnings, rho_T1=rho, message=message,
            triples=self.triples, half_triples=self.half_triples)


def _rho_T1(p, X_M, pd_tol=PD_TOL):
    try:
        t1 = initial_triple(p, pd_tol)
        return spectral_radius(pd_solve(X_M - t1.B, t1.A, 0.0))
    except Exception:  # diagnostics are best effort here
        return None


def _drive(p, opts, first, advance):
    """Run ``state = advance(state, iteration)`` until the stopping test holds.

    ``first`` builds the starting triple; both may raise :class:`Breakdown`.
    """
    run = _Run(p, opts)
    try:
        state = first(run)
    except NotSolvable as exc:
        return run.finish(Status.NOT_SOLVABLE, None, None, 0, float("nan"), str(exc))
    except Breakdown as exc:
        return run.failure(f"pivot loss during start-up ({exc})", None)
    run.record(state)
    for it in range(1, opts.iteration_limit + 1):
        run.iterations = it
        try:
            new = advance(run, state, it)
        except Breakdown as exc:
            return run.failure(f"pivot loss forming index {exc.index}", state)
        if not new.is_finite():
            return run.finish(Status.BREAKDOWN, state.Q, state.B, state.k,
                              float("nan"), "non-finite iterate")
        bad = run.ordering_violation(state, new)
        if bad is not None:
            return run.failure(f"ordering violated ({bad}) at index {new.k}", state)
        res = run.residual(new.Q)
        done, dq = run.converged(state.Q, new.Q, res)
        run.log(new.k, new.A, dq, res, new.Q)
        state = new
        if done:
            return run.finish(Status.CONVERGED, state.Q, state.B, state.k, res)
    return run.finish(Status.MAX_ITER, state.Q, state.B, state.k, run.residual(state.Q))


def _start(p, opts):
    return initial_triple(p, opts.pd_tol)


def solve_fixed_point(p, opts=None):
    """Plain triple recursion from ``X^(1)``; ``X_M = Q_k``, ``Y_M = B_k``."""
    opts = opts or SolveOptions("fixed_point")
    base = {}

    def first(run):
        base["t1"] = _start(p, opts)
        return base["t1"]

    def advance(run, state, it):
        new = step_triple(state, base["t1"], opts.pd_tol)
        run.record(new)
        return new

    return _drive(p, opts, first, advance)


def solve_accel_restart(p, opts):
    """Restart from ``X^(ell)``: outer iterate ``k`` stands for index ``k * ell``."""
    ell = opts.ell
    base = {}

    def first(run):
        t1 = _start(p, opts)
        t = t1
        run.record(t1)
        for _ in range(ell - 1):
            t = step_triple(t, t1, opts.pd_tol)
            run.record(t)
        base["X"] = t
        run.triples = run.triples[:-1]  # _drive records the start triple
        return t

    def advance(run, state, it):
        new = combine_triples(state, base["X"], opts.pd_tol)
        run.record(new)
        return new

    return _drive(p, opts, first, advance)


def solve_accel_order_r(p, opts):
    """Order-``r`` scheme: outer iterate ``k`` stands for index ``r^(k-1)``.

    Each outer step combines ``r - 1`` times against the current outer
    triple; ``r = 2`` is the doubling algorithm, ``r = 3`` tripling.
    """
    r = opts.r

    def advance(run, state, it):
        x = state
        for _ in range(r - 2):
            x = combine_triples(x, state, opts.pd_tol)
            run.record(x)
        new = combine_triples(x, state, opts.pd_tol)
        run.record(new)
        return new

    return _drive(p, opts, lambda run: _start(p, opts), advance)


def schedule_entry(schedule, k):
    """``g(k)`` for 1-based ``k``, cycling through ``schedule``."""
    return schedule[(k - 1) % len(schedule)]


def solve_accel_schedule(p, opts):
    """Variable-order scheme driven by a schedule ``g``.

    Outer step ``k`` self-combines ``g(k) - 2`` times (doubling the inner
    index each time) and then combines with the outer triple, so the
    effective index follows ``n_{k+1} = n_k (1 + 2^(g(k) - 2))``.
    """

    def advance(run, state, it):
        g = schedule_entry(opts.schedule, it)
        x = state
        for _ in range(g - 2):
            x = combine_triples(x, x, opts.pd_tol)
            run.record(x)
        new = combine_triples(x, state, opts.pd_tol)
        run.record(new)
        return new

    return _drive(p, opts, lambda run: _start(p, opts), advance)


# -- alternating iteration -------------------------------------------------


def half_initial(p):
    n = p.n
    return HalfTriple(1, p.A, np.zeros((n, n)), p.Q)


def half_to_full(p, h, pd_tol=PD_TOL):
    """Full triple ``X^(k)`` from the half triple at the same ``k``."""
    fA, fQ = p.fx(p.A), p.fx(p.Q)
    n = p.n
    try:
        W = pd_solve(fQ - h.B, np.hstack([h.A, fA.conj().T]), pd_tol)
    except NotPositiveDefinite:
        raise Breakdown(f"f(Q) - B_half loses definiteness at k={h.k}", index=h.k) from None
    A = fA @ W[:, :n]
    B = p.s * (fA @ W[:, n:])
    Q = h.Q - p.s * (h.A.conj().T @ W[:, :n])
    return IterTriple(h.k, A, _herm(B), _herm(Q))


def full_to_half(p, t, pd_tol=PD_TOL):
    """Half triple at ``k + 1`` from the full triple ``X^(k)``."""
    n = p.n
    try:
        W = pd_solve(p.Q - t.B, np.hstack([t.A, p.A.conj().T]), pd_tol)
    except NotPositiveDefinite:
        raise Breakdown(f"Q - B_k loses definiteness at k={t.k}", index=t.k + 1) from None
    A = p.A @ W[:, :n]
    B = p.s * (p.A @ W[:, n:])
    Q = t.Q - t.A.conj().T @ W[:, :n]
    return HalfTriple(t.k + 1, A, _herm(B), _herm(Q))


def _herm(M):
    return hermitize(M, 1e-8 * max(1.0, frob(M)))


def alternating_sequence(p, count, pd_tol=PD_TOL):
    """Half and full triples for ``k = 1 .. count``."""
    halves, fulls = [], []
    h = half_initial(p)
    for _ in range(count):
        halves.append(h)
        t = half_to_full(p, h, pd_tol)
        fulls.append(t)
        h = full_to_half(p, t, pd_tol)
    return halves, fulls


def _half_violation(p, old, new, full, sl):
    """Check the interlacing orderings for consecutive half triples."""
    fB_old, fB_new = p.fx(old.B), p.fx(new.B)
    if p.sign == "plus":
        checks = (
            (new.B - old.B, "B_half nondecreasing"),
            (full.B - fB_old, "f(B_half^k) <= B^k"),
            (fB_new - full.B, "B^k <= f(B_half^(k+1))"),
            (old.Q - full.Q, "Q^k <= Q_half^k"),
            (full.Q - new.Q, "Q_half^(k+1) <= Q^k"),
            (new.Q, "Q_half > 0"),
        )
    else:
        checks = (
            (old.B - new.B, "B_half nonincreasing"),
            (fB_new - full.B, "B^k <= f(B_half^(k+1))"),
            (fB_old - fB_new, "f(B_half^(k+1)) <= f(B_half^k)"),
            (new.Q - old.Q, "Q_half nondecreasing"),
            (full.Q - new.Q, "Q_half^(k+1) <= Q^k"),
        )
    for M, name in checks:
        if not _psd_within(M, sl):
            return name
    return None


def solve_alternating(p, opts=None):
    """Alternate full steps and half steps starting from ``(A, 0, Q)``.

    ``Q_half^(k)`` is the odd plain iterate ``x_(2k-1)`` and ``Q^(k)`` the
    even one ``x_(2k)`` of ``x_(j+1) = Q -+ A^H f(x_j)^-1 A``, ``x_1 = Q``.
    The stopping test is applied to each consecutive pair. Recorded
    ``triples`` are the full triples, which match the fixed-point ones.
    """
    opts = opts or SolveOptions("alternating")
    run = _Run(p, opts)
    h = half_initial(p)
    prev_full_Q = p.Q
    last_full = None
    for k in range(1, opts.iteration_limit + 1):
        run.iterations = k
        if opts.record_triples:
            run.half_triples.append(h)
        try:
            t = half_to_full(p, h, opts.pd_tol)
        except Breakdown as exc:
            return run.failure(str(exc), last_full)
        if not t.is_finite():
            return run.finish(Status.BREAKDOWN, h.Q, None, k - 1, float("nan"), "non-finite iterate")
        if p.sign == "plus" and not _psd_within(t.Q - t.B, _slack(t.Q, p.Q)):
            return run.failure(f"ordering violated (Q_k > B_k) at k={k}", last_full)
        run.record(t)
        last_full = t
        res = run.residual(t.Q)
        done, _ = run.converged(h.Q, t.Q, res)
        run.log(k, t.A, frob(t.Q - prev_full_Q), res, t.Q)
        prev_full_Q = t.Q
        if done:
            return run.finish(Status.CONVERGED, t.Q, t.B, k, res)
        try:
            h_next = full_to_half(p, t, opts.pd_tol)
        except Breakdown as exc:
            return run.failure(str(exc), t)
        bad = _half_violation(p, h, h_next, t, _slack(h.Q, t.Q, p.Q))
        if bad is not None:
            return run.failure(f"ordering violated ({bad}) at k={k}", t)
        res = run.residual(h_next.Q)
        done, _ = run.converged(t.Q, h_next.Q, res)
        h = h_next
        if done:
            if opts.record_triples:
                run.half_triples.append(h)
            return run.finish(Status.CONVERGED, h.Q, t.B, k, res)
    return run.finish(Status.MAX_ITER, h.Q, last_full.B if last_full else None,
                      run.iterations, run.residual(h.Q))


_DISPATCH = {
    "fixed_point": solve_fixed_point,
    "accel_restart": solve_accel_restart,
    "accel_order_r": solve_accel_order_r,
    "accel_schedule": solve_accel_schedule,
    "alternating": solve_alternating,
}


def solve(p, opts=None, **kwargs):
    """Solve with ``opts`` (or ``SolveOptions(**kwargs)``)."""
    if opts is None:
        opts = SolveOptions(**kwargs)
    elif kwargs:
        raise TypeError("pass either opts or keyword options, not both")
    return _DISPATCH[opts.algorithm](p, opts)


def extract_minimal_solution(res, p, rtol=1e-10):
    """``(Y_M, valid)``: the limit of ``B_k`` and whether it solves the equation.

    ``B_k`` has the rank of ``A``, so the limit is a (minimal) solution only
    when ``A`` is nonsingular; ``valid`` is ``False`` otherwise or when the
    solve did not converge.
    """
    valid = res.converged and not p.a_is_singular(rtol)
    return res.Y_M, valid
