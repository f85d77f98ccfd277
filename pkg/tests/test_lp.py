import numpy as np
import pytest

from pphs_stability.lp import (Constraint, LinearProgram, MalformedProgram, NumericalFailure, Sense,
                               Status, solve)
from randmodels import lp_vertex_oracle


def one_var(objective, *cons, bounds=None, sense=Sense.MAXIMIZE):
    prog = LinearProgram(np.array(objective, dtype=float), sense=sense, bounds=bounds)
    for coeffs, rel, rhs in cons:
        prog.add(coeffs, rel, rhs)
    return prog


def test_bounded_maximum():
    sol = solve(one_var([1.0], ([1.0], "<=", 3.0)))
    assert sol.status is Status.OPTIMAL
    assert sol.value == pytest.approx(3.0)
    assert sol.point == pytest.approx([3.0])


def test_unbounded():
    assert solve(one_var([1.0])).status is Status.UNBOUNDED


def test_infeasible():
    assert solve(one_var([0.0], ([1.0], "<=", -1.0))).status is Status.INFEASIBLE


def test_zero_variables():
    sol = solve(LinearProgram(np.zeros(0)))
    assert sol.optimal and sol.value == 0.0 and len(sol.point) == 0


def test_malformed_length():
    prog = LinearProgram(np.ones(2))
    prog.constraints.append(Constraint(np.ones(3), "<=", 1.0))
    with pytest.raises(MalformedProgram):
        solve(prog)


def test_malformed_relation_and_nan():
    prog = LinearProgram(np.ones(1))
    prog.constraints.append(Constraint(np.ones(1), "<", 1.0))
    with pytest.raises(MalformedProgram):
        solve(prog)
    with pytest.raises(MalformedProgram):
        solve(LinearProgram(np.array([np.nan])))


def test_free_and_negative_bounds():
    # min x + y with x, y free, x + y >= -2, x - y = 1
    prog = one_var([1.0, 1.0], ([1.0, 1.0], ">=", -2.0), ([1.0, -1.0], "=", 1.0),
                   bounds=[(None, None), (None, None)], sense=Sense.MINIMIZE)
    sol = solve(prog)
    assert sol.optimal and sol.value == pytest.approx(-2.0)
    assert sol.point == pytest.approx([-0.5, -1.5])


def test_redundant_equalities():
    prog = one_var([1.0, 2.0], ([1.0, 1.0], "=", 1.0), ([2.0, 2.0], "=", 2.0))
    sol = solve(prog)
    assert sol.optimal and sol.value == pytest.approx(2.0)


def test_iteration_cap(monkeypatch):
    import pphs_stability.lp as lpmod
    monkeypatch.setattr(lpmod, "MAX_ITERATIONS", 0)
    with pytest.raises(NumericalFailure):
        solve(one_var([1.0, 1.0], ([1.0, 2.0], "<=", 4.0), ([3.0, 1.0], "<=", 6.0)))


def random_lp(rng, n):
    m = int(rng.integers(1, 7))
    A = rng.normal(size=(m, n))
    x0 = rng.uniform(0, 1, size=n)
    b = A @ x0 + rng.uniform(0, 1, size=m)  # x0 is feasible
    c = rng.normal(size=n)
    return c, A, b


def test_vertex_oracle_agreement(rng):
    for _ in range(150):
        n = int(rng.integers(1, 7))
        c, A, b = random_lp(rng, n)
        prog = LinearProgram(c, bounds=[(0.0, 10.0)] * n)
        for row, rhs in zip(A, b):
            prog.add(row, "<=", rhs)
        sol = solve(prog)
        assert sol.optimal
        assert sol.value == pytest.approx(lp_vertex_oracle(c, A, b, 10.0), abs=1e-6)
        assert np.max(prog.residuals(sol.point), initial=0.0) <= 1e-8
        assert float(c @ sol.point) == pytest.approx(sol.value, abs=1e-8)


def test_min_max_duality_of_sense(rng):
    for _ in range(100):
        n = int(rng.integers(1, 6))
        c, A, b = random_lp(rng, n)
        hi = LinearProgram(c, bounds=[(0.0, 5.0)] * n)
        lo = LinearProgram(-c, sense=Sense.MINIMIZE, bounds=[(0.0, 5.0)] * n)
        for row, rhs in zip(A, b):
            hi.add(row, "<=", rhs)
            lo.add(row, "<=", rhs)
        assert solve(hi).value == pytest.approx(-solve(lo).value, abs=1e-8)


def test_against_scipy(rng):
    linprog = pytest.importorskip("scipy.optimize").linprog
    for _ in range(100):
        n = int(rng.integers(1, 7))
        m = int(rng.integers(1, 7))
        A = rng.normal(size=(m, n))
        b = rng.normal(size=m)
        c = rng.normal(size=n)
        bounds = [(-3.0, 3.0)] * n
        prog = LinearProgram(c, sense=Sense.MINIMIZE, bounds=bounds)
        for row, rhs in zip(A, b):
            prog.add(row, "<=", rhs)
        ours = solve(prog)
        ref = linprog(c, A_ub=A, b_ub=b, bounds=bounds, method="highs")
        if ref.status == 2:
            assert ours.status is Status.INFEASIBLE
        else:
            assert ours.optimal and ours.value == pytest.approx(ref.fun, abs=1e-6)
