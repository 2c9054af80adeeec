"""Independent oracles used by the test suite.

These deliberately avoid the algorithms used by the library: the ball
maximizer is checked against direction sampling with exact radial
maximization, the LP solver against brute-force vertex enumeration, ridge
against a first-order method, and the t CDF against numerical integration.
"""

from __future__ import annotations

import itertools
import math

import numpy as np


def radial_max_values(A: np.ndarray, b: np.ndarray, c: float, radius: float, dirs: np.ndarray):
    """Exact max of the quadratic along each direction, over the segment
    s in [-radius, radius]."""
    au = np.einsum("ij,jk,ik->i", dirs, A, dirs)
    bu = dirs @ b
    vals = au * radius * radius + np.abs(bu) * radius + c
    neg = au < 0
    if np.any(neg):
        s = np.clip(-bu[neg] / (2.0 * au[neg]), -radius, radius)
        vals_int = au[neg] * s * s + bu[neg] * s + c
        vals[neg] = np.maximum(vals[neg], vals_int)
    return vals


def trs_sampling_oracle(
    A: np.ndarray,
    b: np.ndarray,
    c: float,
    radius: float,
    n_directions: int = 100_000,
    seed: int = 0,
) -> float:
    """Dense direction search plus sampling-only local densification.

    Draws ``n_directions`` quasi-uniform directions, maximizes the quadratic
    exactly along each, then repeatedly re-samples inside shrinking random
    cones around the best few candidates.  Uses no eigenstructure.
    """
    A = np.asarray(A, dtype=float)
    b = np.asarray(b, dtype=float)
    m = A.shape[0]
    rng = np.random.default_rng(seed)
    dirs = rng.standard_normal((n_directions, m))
    dirs /= np.linalg.norm(dirs, axis=1, keepdims=True)
    vals = radial_max_values(A, b, c, radius, dirs)
    order = np.argsort(vals)[::-1]
    best_val = float(vals[order[0]])
    for start in order[:3]:
        u = dirs[start].copy()
        u_val = float(vals[start])
        width = 0.5
        for _ in range(70):
            probes = u[None, :] + width * rng.standard_normal((200, m))
            probes /= np.linalg.norm(probes, axis=1, keepdims=True)
            pvals = radial_max_values(A, b, c, radius, probes)
            k = int(np.argmax(pvals))
            if pvals[k] > u_val:
                u_val = float(pvals[k])
                u = probes[k]
            width *= 0.7
        best_val = max(best_val, u_val)
    return best_val


def lp_vertex_oracle(c, A_ub=None, b_ub=None, A_eq=None, b_eq=None, tol: float = 1e-9):
    """Brute-force the optimum of min c.x, A_ub x <= b_ub, A_eq x = b_eq, x >= 0
    by enumerating all basic solutions of the slack-augmented standard form.

    Returns (best objective, best x) over feasible vertices, or (None, None)
    if no feasible basic solution exists.  Assumes the LP is bounded.
    """
    c = np.asarray(c, dtype=float)
    n = c.size
    rows = []
    rhs = []
    n_slack = 0
    if A_eq is not None and len(A_eq):
        for row, beq in zip(np.atleast_2d(A_eq), np.atleast_1d(b_eq)):
            rows.append((np.asarray(row, dtype=float), float(beq)))
    if A_ub is not None and len(A_ub):
        n_slack = len(np.atleast_2d(A_ub))
        for row, bub in zip(np.atleast_2d(A_ub), np.atleast_1d(b_ub)):
            rows.append((np.asarray(row, dtype=float), float(bub)))
    m = len(rows)
    A_std = np.zeros((m, n + n_slack))
    b_std = np.zeros(m)
    slack_at = m - n_slack
    for i, (row, bi) in enumerate(rows):
        A_std[i, :n] = row
        b_std[i] = bi
        if i >= slack_at:
            A_std[i, n + (i - slack_at)] = 1.0
    best_obj, best_x = None, None
    c_std = np.concatenate([c, np.zeros(n_slack)])
    for basis in itertools.combinations(range(n + n_slack), m):
        B = A_std[:, basis]
        try:
            xb = np.linalg.solve(B, b_std)
        except np.linalg.LinAlgError:
            continue
        if not np.all(np.isfinite(xb)):
            continue
        if float(np.max(np.abs(B @ xb - b_std))) > 1e-7:
            continue
        if np.any(xb < -tol):
            continue
        x = np.zeros(n + n_slack)
        x[list(basis)] = xb
        obj = float(c_std @ x)
        if best_obj is None or obj < best_obj - 1e-12:
            best_obj, best_x = obj, x[:n].copy()
    return best_obj, best_x


def ridge_gradient_oracle(X, y, q, lam1, grad_tol: float = 1e-10, max_iter: int = 500_000):
    """Minimize sum q_t (w.x_t - y_t)^2 + lam1 ||w||^2 by plain gradient
    descent with a conservative fixed step."""
    X = np.asarray(X, dtype=float)
    y = np.asarray(y, dtype=float)
    q = np.asarray(q, dtype=float)
    m = X.shape[1]
    H = 2.0 * (X.T * q) @ X + 2.0 * lam1 * np.eye(m)
    L = float(np.linalg.eigvalsh(H)[-1])
    step = 1.0 / max(L, 1e-12)
    w = np.zeros(m)
    for _ in range(max_iter):
        grad = 2.0 * (X.T @ (q * (X @ w - y))) + 2.0 * lam1 * w
        if float(np.linalg.norm(grad)) <= grad_tol:
            break
        w = w - step * grad
    return w


def student_t_sf_oracle(t: float, dof: int, n_panels: int = 200_000) -> float:
    """P(T > t) for Student's t by Simpson integration of the density.

    The density is symmetric, so the tail probability is 1/2 minus the
    signed integral over the bounded interval [0, |t|].  Integrating a
    bounded interval avoids any truncation error in the far tail, which
    matters for small ``dof`` where the tails are heavy.
    """

    def density(x):
        return math.exp(
            math.lgamma((dof + 1) / 2.0)
            - math.lgamma(dof / 2.0)
            - 0.5 * math.log(dof * math.pi)
            - ((dof + 1) / 2.0) * math.log1p(x * x / dof)
        )

    hi = abs(float(t))
    if hi == 0.0:
        return 0.5
    xs = np.linspace(0.0, hi, 2 * n_panels + 1)
    ys = np.array([density(x) for x in xs])
    h = hi / (2 * n_panels)
    simpson = (h / 3.0) * (ys[0] + ys[-1] + 4.0 * ys[1::2].sum() + 2.0 * ys[2:-1:2].sum())
    return 0.5 - simpson if t > 0 else 0.5 + simpson
