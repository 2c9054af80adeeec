import numpy as np
import pytest

from dbforecast.core import DimensionMismatch, NonFiniteData
from dbforecast.trs import (
    BallConstraint,
    QuadraticForm,
    check_kkt,
    max_quadratic_on_ball,
    sup_abs_quadratic_on_ball,
)

from .oracles import trs_sampling_oracle


def _qf(A, b, c):
    return QuadraticForm(A=np.asarray(A, dtype=float), b=np.asarray(b, dtype=float), c=float(c))


def _random_qf(rng, m):
    A = rng.standard_normal((m, m))
    A = (A + A.T) / 2.0
    return _qf(A, rng.standard_normal(m), float(rng.standard_normal()))


def test_concave_interior_maximum():
    sol = max_quadratic_on_ball(_qf(-np.eye(2), [0.0, 0.0], 0.0), BallConstraint(1.0))
    assert sol.value == pytest.approx(0.0, abs=1e-12)
    assert np.linalg.norm(sol.argmax) <= 1e-9


def test_convex_boundary_maximum():
    sol = max_quadratic_on_ball(_qf(np.eye(2), [0.0, 0.0], 0.0), BallConstraint(2.0))
    assert sol.value == pytest.approx(4.0, abs=1e-10)
    assert np.linalg.norm(sol.argmax) == pytest.approx(2.0, abs=1e-9)


def test_indefinite_hard_case_adjacent():
    sol = max_quadratic_on_ball(_qf(np.diag([1.0, -1.0]), [0.0, 0.0], 1.0), BallConstraint(1.0))
    assert sol.value == pytest.approx(2.0, abs=1e-10)
    assert abs(sol.argmax[0]) == pytest.approx(1.0, abs=1e-9)
    assert sol.argmax[1] == pytest.approx(0.0, abs=1e-9)


def test_linear_form_only():
    # A = 0: the maximum is radius * ||b||
    sol = max_quadratic_on_ball(_qf(np.zeros((3, 3)), [3.0, 0.0, 4.0], -1.0), BallConstraint(2.0))
    assert sol.value == pytest.approx(9.0, abs=1e-9)


def test_m1_closed_form():
    # concave with interior stationary point inside the ball
    sol = max_quadratic_on_ball(_qf([[-1.0]], [1.0], 0.0), BallConstraint(5.0))
    assert sol.value == pytest.approx(0.25, abs=1e-12)
    assert sol.argmax[0] == pytest.approx(0.5, abs=1e-12)
    # convex: endpoint wins
    sol = max_quadratic_on_ball(_qf([[2.0]], [1.0], 0.0), BallConstraint(3.0))
    assert sol.value == pytest.approx(21.0, abs=1e-12)
    assert sol.argmax[0] == pytest.approx(3.0)


def test_engineered_hard_case():
    # b orthogonal to the top eigenspace; solution needs a top-eigenvector pad
    qf = _qf(np.diag([1.0, 2.0, 2.0]), [1.0, 0.0, 0.0], 0.0)
    ball = BallConstraint(1.0)
    sol = max_quadratic_on_ball(qf, ball)
    # stationary non-top component: w1 = b1 / (2 (lam_max - lam_1)) = 0.5
    expected_w1 = 0.5
    expected_value = 1.0 * expected_w1**2 + 1.0 * expected_w1 + 2.0 * (1.0 - expected_w1**2)
    assert sol.value == pytest.approx(expected_value, abs=1e-9)
    cert = check_kkt(qf, ball, sol.argmax)
    assert cert.passed


def test_matches_sampling_oracle_m3():
    rng = np.random.default_rng(7)
    for trial in range(10):
        qf = _random_qf(rng, 3)
        ball = BallConstraint(float(rng.choice([0.5, 1.0, 2.0])))
        sol = max_quadratic_on_ball(qf, ball)
        oracle = trs_sampling_oracle(qf.A, qf.b, qf.c, ball.radius, seed=trial)
        assert sol.value >= oracle - 1e-7
        assert abs(sol.value - oracle) <= 1e-4 * max(1.0, abs(sol.value))


def test_sup_abs_constant_form():
    assert sup_abs_quadratic_on_ball(_qf([[0.0]], [0.0], -3.0), BallConstraint(1.0)) == 3.0


def test_sup_abs_symmetric_spectrum():
    val = sup_abs_quadratic_on_ball(_qf(np.diag([1.0, -1.0]), [0.0, 0.0], 0.0), BallConstraint(1.0))
    assert val == pytest.approx(1.0, abs=1e-10)


def test_sup_abs_matches_oracle():
    rng = np.random.default_rng(11)
    for trial in range(6):
        qf = _random_qf(rng, 3)
        ball = BallConstraint(1.5)
        val = sup_abs_quadratic_on_ball(qf, ball)
        o_plus = trs_sampling_oracle(qf.A, qf.b, qf.c, ball.radius, seed=100 + trial)
        o_minus = trs_sampling_oracle(-qf.A, -qf.b, -qf.c, ball.radius, seed=200 + trial)
        oracle = max(o_plus, o_minus)
        assert abs(val - oracle) <= 1e-4 * max(1.0, abs(val))
        assert val >= abs(qf.c) - 1e-12


def test_scaling_invariance():
    rng = np.random.default_rng(13)
    ball = BallConstraint(1.3)
    for trial in range(10):
        qf = _random_qf(rng, 3)
        alpha = float(rng.uniform(0.1, 10.0))
        v1 = max_quadratic_on_ball(qf, ball).value
        v2 = max_quadratic_on_ball(
            _qf(alpha * qf.A, alpha * qf.b, alpha * qf.c), ball
        ).value
        assert v2 == pytest.approx(alpha * v1, rel=1e-9, abs=1e-9)


def test_monotone_in_radius():
    rng = np.random.default_rng(17)
    for trial in range(10):
        qf = _random_qf(rng, 4)
        vals = [
            max_quadratic_on_ball(qf, BallConstraint(r)).value for r in (0.5, 1.0, 2.0)
        ]
        assert vals[0] <= vals[1] + 1e-10
        assert vals[1] <= vals[2] + 1e-10


def test_rotation_invariance():
    rng = np.random.default_rng(19)
    for trial in range(10):
        qf = _random_qf(rng, 3)
        Q, _ = np.linalg.qr(rng.standard_normal((3, 3)))
        rotated = _qf(Q @ qf.A @ Q.T, Q @ qf.b, qf.c)
        v1 = max_quadratic_on_ball(qf, BallConstraint(1.0)).value
        v2 = max_quadratic_on_ball(rotated, BallConstraint(1.0)).value
        assert v2 == pytest.approx(v1, rel=1e-9, abs=1e-9)


def test_kkt_certificate_on_random_instances():
    rng = np.random.default_rng(23)
    for trial in range(50):
        m = int(rng.integers(1, 5))
        qf = _random_qf(rng, m)
        ball = BallConstraint(float(rng.choice([0.5, 1.0, 2.0])))
        sol = max_quadratic_on_ball(qf, ball)
        cert = check_kkt(qf, ball, sol.argmax)
        assert cert.passed, (trial, cert)
        assert sol.value == pytest.approx(qf.value(sol.argmax), abs=1e-10)


def test_validation_errors():
    with pytest.raises(DimensionMismatch):
        QuadraticForm(A=np.array([[0.0, 1.0], [0.0, 0.0]]), b=np.zeros(2), c=0.0)
    with pytest.raises(NonFiniteData):
        QuadraticForm(A=np.full((2, 2), np.nan), b=np.zeros(2), c=0.0)
    with pytest.raises(ValueError):
        BallConstraint(0.0)
    with pytest.raises(DimensionMismatch):
        QuadraticForm(A=np.eye(2), b=np.zeros(3), c=0.0)
