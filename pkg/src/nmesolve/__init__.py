"""Solvers for the nonlinear matrix equations ``X +- A^H f(X)^-1 A = Q``.

``f`` is a period-2 operator (identity, transpose, entrywise conjugate or
similarity by an involutory unitary). The package computes the maximal
Hermitian positive definite solution by fixed-point, accelerated
(order-``r``) and alternating iterations, and verifies structural
properties of the iterates numerically.

Examples
--------
>>> from nmesolve import gen_scalar, solve
>>> res = solve(gen_scalar(1.0, 3.0), algorithm="accel_order_r", r=2)
>>> str(res.status), round(res.X_M.real.item(), 7)
('Converged', 2.618034)
"""

from . import _backend
from ._backend import set_backend, use_backend
from .diagnostics import (
    DiagnosticsReport,
    classify_criticality,
    compute_T1_S1,
    diagnose,
    estimate_rate,
    psi_unit_circle_check,
    verify_half_T_relation,
    verify_T_power,
)
from .errors import (
    Breakdown,
    DimensionMismatch,
    FieldMismatch,
    InsufficientHistory,
    InvalidInput,
    InvalidOperator,
    NMEError,
    NoConvergence,
    NotHermitian,
    NotPositiveDefinite,
    NotSolvable,
    NotSquare,
    ProblemFileError,
    RetryExhausted,
    SingularIntermediate,
    SingularOperand,
)
from .io import read_problem, write_problem
from .linalg import hermitize, is_positive_definite, loewner_gap, pd_solve, smwf_residual, spectral_radius
from .operators import MatrixOperatorSpec, apply_operator, verify_operator_axioms
from .probgen import GenSpec, GeneratedProblem, gen_critical, gen_scalar, gen_solvable, generate
from .solvers import (
    HalfTriple,
    HistoryEntry,
    SolveOptions,
    SolveResult,
    Status,
    extract_minimal_solution,
    solve,
    solve_accel_order_r,
    solve_accel_restart,
    solve_accel_schedule,
    solve_alternating,
    solve_fixed_point,
)
from .transform import (
    IterTriple,
    ProblemSpec,
    combine_triples,
    dual_initial_triple,
    equation_residual,
    initial_triple,
    iterate_triples,
    step_triple,
)

__version__ = "0.1.0"


def backend():
    """Name of the active kernel backend (``"compiled"`` or ``"python"``)."""
    return _backend.active()
