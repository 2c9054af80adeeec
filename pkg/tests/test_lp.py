import numpy as np
import pytest

from dbforecast.core import DimensionMismatch, NonFiniteData
from dbforecast.lp import LinearProgram, LpStatus, solve_lp

from .oracles import lp_vertex_oracle


def test_minimize_x_at_least_one():
    lp = LinearProgram(c=np.array([1.0]), A_ub=np.array([[-1.0]]), b_ub=np.array([-1.0]))
    res = solve_lp(lp)
    assert res.status is LpStatus.OPTIMAL
    assert res.x[0] == pytest.approx(1.0, abs=1e-9)
    assert res.objective == pytest.approx(1.0, abs=1e-9)


def test_facet_vertex_choice():
    lp = LinearProgram(
        c=np.array([-1.0, -1.0]), A_ub=np.array([[1.0, 1.0]]), b_ub=np.array([1.0])
    )
    res = solve_lp(lp)
    assert res.status is LpStatus.OPTIMAL
    assert res.objective == pytest.approx(-1.0, abs=1e-9)
    # deterministic pivoting lands on the x vertex
    assert np.allclose(res.x, [1.0, 0.0], atol=1e-9)


def test_infeasible_reported_as_status():
    lp = LinearProgram(
        c=np.array([1.0]),
        A_ub=np.array([[1.0], [-1.0]]),
        b_ub=np.array([1.0, -2.0]),  # x <= 1 and x >= 2
    )
    res = solve_lp(lp)
    assert res.status is LpStatus.INFEASIBLE
    assert res.x is None


def test_unbounded_reported_as_status():
    lp = LinearProgram(c=np.array([-1.0, 0.0]), A_ub=np.array([[0.0, 1.0]]), b_ub=np.array([1.0]))
    res = solve_lp(lp)
    assert res.status is LpStatus.UNBOUNDED


def test_equality_constraint():
    lp = LinearProgram(
        c=np.array([2.0, 1.0]),
        A_eq=np.array([[1.0, 1.0]]),
        b_eq=np.array([1.0]),
    )
    res = solve_lp(lp)
    assert res.status is LpStatus.OPTIMAL
    assert np.allclose(res.x, [0.0, 1.0], atol=1e-9)
    assert res.objective == pytest.approx(1.0, abs=1e-9)


def test_lower_bounds_shift():
    lp = LinearProgram(
        c=np.array([1.0, 1.0]),
        A_ub=np.array([[-1.0, -1.0]]),
        b_ub=np.array([-3.0]),
        lower_bounds=np.array([1.0, 0.5]),
    )
    res = solve_lp(lp)
    assert res.status is LpStatus.OPTIMAL
    assert res.objective == pytest.approx(3.0, abs=1e-9)
    assert np.all(res.x >= np.array([1.0, 0.5]) - 1e-9)


def _random_feasible_lp(rng):
    n = int(rng.integers(2, 6))
    k = int(rng.integers(1, 5))
    A_ub = rng.integers(-3, 4, size=(k, n)).astype(float)
    x0 = rng.random(n) * 2.0
    b_ub = A_ub @ x0 + rng.random(k)
    # a covering row keeps the optimum away from the origin; positive costs
    # keep the LP bounded
    A_ub = np.vstack([A_ub, -np.ones((1, n))])
    b_ub = np.concatenate([b_ub, [-1.0]])
    c = rng.random(n) + 0.05
    A_eq = b_eq = None
    if rng.random() < 0.3:
        A_eq = np.ones((1, n))
        b_eq = np.array([float(x0.sum() + 1.0)])
    return LinearProgram(c=c, A_ub=A_ub, b_ub=b_ub, A_eq=A_eq, b_eq=b_eq)


def test_random_lps_match_vertex_enumeration():
    rng = np.random.default_rng(42)
    solved = 0
    for trial in range(60):
        lp = _random_feasible_lp(rng)
        res = solve_lp(lp)
        oracle_obj, _ = lp_vertex_oracle(lp.c, lp.A_ub, lp.b_ub, lp.A_eq, lp.b_eq)
        if oracle_obj is None:
            assert res.status is LpStatus.INFEASIBLE
            continue
        assert res.status is LpStatus.OPTIMAL, trial
        assert res.objective == pytest.approx(oracle_obj, abs=1e-8)
        solved += 1
    assert solved >= 40


def test_optimal_solution_feasibility():
    rng = np.random.default_rng(7)
    for trial in range(20):
        lp = _random_feasible_lp(rng)
        res = solve_lp(lp)
        if res.status is not LpStatus.OPTIMAL:
            continue
        if lp.A_ub is not None:
            assert np.all(lp.A_ub @ res.x <= lp.b_ub + 1e-8)
        if lp.A_eq is not None:
            assert np.allclose(lp.A_eq @ res.x, lp.b_eq, atol=1e-8)
        assert np.all(res.x >= -1e-8)


def test_weak_duality_spot_check():
    rng = np.random.default_rng(11)
    lp = _random_feasible_lp(rng)
    while lp.A_eq is not None:  # rejection sampling cannot hit an equality
        lp = _random_feasible_lp(rng)
    res = solve_lp(lp)
    assert res.status is LpStatus.OPTIMAL
    n = lp.c.size
    found = 0
    for _ in range(500_000):
        x = rng.random(n) * 4.0
        if np.all(lp.A_ub @ x <= lp.b_ub):
            assert res.objective <= float(lp.c @ x) + 1e-8
            found += 1
            if found == 100:
                break
    assert found >= 20


def test_determinism_bit_identical():
    rng = np.random.default_rng(13)
    lp = _random_feasible_lp(rng)
    r1 = solve_lp(lp)
    r2 = solve_lp(lp)
    assert r1.status == r2.status
    assert r1.objective == r2.objective
    assert np.array_equal(r1.x, r2.x)


def test_validation():
    with pytest.raises(DimensionMismatch):
        LinearProgram(c=np.array([1.0]), A_ub=np.array([[1.0, 2.0]]), b_ub=np.array([1.0]))
    with pytest.raises(DimensionMismatch):
        LinearProgram(c=np.array([1.0]), A_ub=np.array([[1.0]]))
    with pytest.raises(NonFiniteData):
        LinearProgram(c=np.array([np.nan]))
