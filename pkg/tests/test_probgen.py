import numpy as np
import pytest

from oracles import min_eig
from nmesolve.diagnostics import diagnose
from nmesolve.errors import InvalidInput
from nmesolve.io import dumps_problem
from nmesolve.probgen import (
    GenSpec,
    critical_diagonal,
    gen_critical,
    gen_scalar,
    gen_solvable,
    generate,
    random_unitary,
    scalar_maximal_solution,
)
from nmesolve.solvers import Status, solve

OPS = ["identity", "transpose", "conjugate", "involutory_similarity"]


@pytest.mark.parametrize("mode", ["solvable", "critical", "scalar", "unsolvable_scalar_family"])
def test_deterministic(mode):
    spec = GenSpec(n=3 if mode in ("solvable", "critical") else 1, seed=17, mode=mode, q=3.0)
    assert dumps_problem(generate(spec).problem) == dumps_problem(generate(spec).problem)
    a, b = generate(spec), generate(spec)
    assert np.array_equal(a.problem.A, b.problem.A) and np.array_equal(a.problem.Q, b.problem.Q)


def test_scalar_plus_construction():
    g = gen_solvable(GenSpec(n=1, seed=3))
    p, x = g.problem, g.known_solution.item().real
    a, q = p.A.item(), p.Q.item().real
    assert q == pytest.approx(x + abs(a) ** 2 / x, rel=1e-14)
    res = solve(p)
    assert res.status is Status.CONVERGED and res.final_residual <= 1e-12


def test_zero_A_gives_Q():
    g = gen_solvable(GenSpec(n=4, seed=1, zero_A=True))
    res = solve(g.problem)
    assert np.array_equal(res.X_M, g.problem.Q)
    assert np.allclose(g.known_solution, g.problem.Q)


def test_minus_margin_maximality():
    g = gen_solvable(GenSpec(n=6, sign="minus", seed=8, margin=0.5))
    res = solve(g.problem)
    assert res.status is Status.CONVERGED
    assert min_eig(res.X_M - g.known_solution) >= -1e-8


@pytest.mark.parametrize("op", OPS)
@pytest.mark.parametrize("sign", ["plus", "minus"])
def test_solvable_instances_converge_to_maximal(op, sign):
    for seed in range(8):
        for n in (1, 3, 5):
            g = gen_solvable(GenSpec(n=n, sign=sign, operator_kind=op, seed=seed))
            res = solve(g.problem, algorithm="accel_order_r")
            assert res.status is Status.CONVERGED
            assert res.final_residual <= 1e-12
            assert min_eig(res.X_M - g.known_solution) >= -1e-8


def test_critical_scalar():
    g = gen_critical(1, a=1.0)
    assert g.problem.A.item() == 1.0 and g.problem.Q.item() == 2.0
    assert g.problem.field == "real"


def test_critical_classified_with_nullity():
    g = gen_critical(3, seed=2)
    d = diagnose(g.problem, solve(g.problem, algorithm="accel_order_r"))
    assert d.critical and d.nullity_XM_minus_YM == 1
    g = gen_critical(2, seed=2, n_critical=2)
    d = diagnose(g.problem, solve(g.problem, algorithm="accel_order_r"))
    assert d.critical and d.nullity_XM_minus_YM == 2


def _forward_error(X, g):
    return np.linalg.norm(X - g.known_solution) / np.linalg.norm(g.known_solution)


@pytest.mark.parametrize("seed", range(5))
@pytest.mark.parametrize("n, nc", [(1, 1), (3, 1), (4, 2)])
def test_critical_timing(seed, n, nc):
    # accuracy measured against the known maximal solution
    g = gen_critical(n, seed=seed, n_critical=nc)
    fixed = solve(g.problem, max_iter=500)
    assert fixed.status is Status.MAX_ITER
    assert _forward_error(fixed.X_M, g) > 1e-6
    order2 = solve(g.problem, algorithm="accel_order_r", max_iter=25)
    assert _forward_error(order2.X_M, g) <= 1e-6


def test_known_critical_solution():
    g = gen_critical(4, seed=3, n_critical=2)
    res = solve(g.problem, algorithm="accel_order_r")
    assert np.linalg.norm(res.X_M - g.known_solution) <= 1e-6 * np.linalg.norm(g.known_solution)


def test_scalar_generators():
    with pytest.raises(InvalidInput):
        gen_scalar(1.0, 0.0)
    with pytest.raises(InvalidInput):
        gen_scalar(1.0, -2.0)
    assert scalar_maximal_solution(1.0, 1.5) is None
    assert scalar_maximal_solution(1.0, 1.0, "minus") == pytest.approx((1 + 5**0.5) / 2)
    g = generate(GenSpec(mode="unsolvable_scalar_family", a=1.0, q=5.0))
    assert g.problem.Q.item() == 1.5 and g.known_solution is None
    g = generate(GenSpec(mode="unsolvable_scalar_family", a=1.0, q=1.2))
    assert g.problem.Q.item() == 1.2
    assert solve(g.problem).status is Status.NOT_SOLVABLE


def test_genspec_validation():
    with pytest.raises(InvalidInput):
        GenSpec(mode="weird")
    with pytest.raises(InvalidInput):
        GenSpec(n=0)
    with pytest.raises(InvalidInput):
        GenSpec(margin=1.0)
    with pytest.raises(InvalidInput):
        critical_diagonal(2, 3)
    with pytest.raises(InvalidInput):
        generate(GenSpec(n=2, mode="critical", sign="minus"))


def test_random_unitary():
    rng = np.random.default_rng(0)
    for fld in ("real", "complex"):
        U = random_unitary(5, rng, fld)
        assert np.allclose(U.conj().T @ U, np.eye(5), atol=1e-13)
        if fld == "real":
            assert not U.imag.any()
    f = gen_solvable(GenSpec(n=4, operator_kind="involutory_similarity", seed=2)).problem.f
    assert np.allclose(f.U @ f.U, np.eye(4), atol=1e-13)
