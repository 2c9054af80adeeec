"""Fitting algorithms: weighted ridge (primal and kernel-dual), the
alternating weight/hypothesis minimizer, its jointly convex r = 1/q
reformulation (primal and dual inner solves), and the two-stage
discrepancy-minimization method.

All solvers operate on the factorized feature space, so linear and
kernelized problems share one code path; kernelized fits are returned in
dual representation for prediction on new points.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import NamedTuple, Optional

import numpy as np

from .core import (
    DimensionMismatch,
    LengthMismatch,
    NumericalFailure,
    RegressionDataset,
    SingularSystem,
    WeightVector,
)
from .discrepancy import InstantDiscrepancies, instantaneous_discrepancies, target_proxy
from .kernels import GramMatrix, KernelSpec, _pairwise, feature_rows, gram
from .lp import LinearProgram, LpStatus, solve_lp
from .trs import BallConstraint, QuadraticForm, max_quadratic_on_ball

_LP_SIZE_LIMIT = 60  # q-step sizes up to this go through the simplex solver
_STAGE1_MAX_ITERS = 300
_STAGE1_STEP_OFFSET = 10.0


@dataclass(frozen=True)
class SolverConfig:
    """Hyperparameters shared by the fitting algorithms.

    lam1 weighs ||w||^2, lam2 the weight-vector penalty (and the stage-two
    ridge of the two-stage method), radius the hypothesis ball of the
    discrepancy sups.  norm_p is 1 on the alternating path and 2 on the
    convex-r path.  s is the proxy window and l the discrepancy averaging
    window.
    """

    lam1: float = 1e-4
    lam2: float = 0.1
    radius: float = 1.0
    prior: Optional[WeightVector] = None
    norm_p: float = 1.0
    max_iters: int = 500
    tol: float = 1e-8
    s: int = 20
    l: int = 0

    def __post_init__(self):
        if self.lam1 < 0 or self.lam2 < 0:
            raise ValueError("lam1 and lam2 must be >= 0")
        if not self.radius > 0:
            raise ValueError("radius must be positive")
        if self.norm_p < 1:
            raise ValueError("norm_p must be >= 1")
        if not self.tol > 0:
            raise ValueError("tol must be positive")
        if self.max_iters < 1 or self.s < 1 or self.l < 0:
            raise ValueError("max_iters and s must be >= 1, l >= 0")


@dataclass(frozen=True)
class FitResult:
    """Outcome of a fit.

    ``coefficients`` is the primal w for kind="primal" and the dual alpha
    for kind="dual" (prediction scale in ``dual_scale``); ``q`` the sample
    weights; ``r`` the reciprocal weights when the convex path produced
    them.
    """

    kind: str
    coefficients: np.ndarray
    q: WeightVector
    r: Optional[np.ndarray] = None
    objective_trace: tuple = ()
    iterations: int = 0
    converged: bool = True
    dual_scale: float = 1.0

    def __post_init__(self):
        if self.kind not in ("primal", "dual"):
            raise ValueError("kind must be primal or dual")
        if self.r is not None and np.any(np.asarray(self.r) < 1.0 - 1e-9):
            raise ValueError("reciprocal weights must satisfy r_t >= 1")
        if not np.all(np.isfinite(self.q.weights)):
            raise ValueError("q must be finite")


class DualRidge(NamedTuple):
    alpha: np.ndarray
    objective: float


def _ridge_solve(X: np.ndarray, y: np.ndarray, q: np.ndarray, lam1: float) -> np.ndarray:
    """Solve (X^T diag(q) X + lam1 I) w = X^T diag(q) y via Cholesky."""
    m = X.shape[1]
    M = (X * q[:, None]).T @ X + lam1 * np.eye(m)
    rhs = X.T @ (q * y)
    try:
        L = np.linalg.cholesky(M)
    except np.linalg.LinAlgError:
        if lam1 == 0.0:
            raise SingularSystem("design matrix is rank-deficient and lam1 = 0")
        raise NumericalFailure("ridge normal equations not positive definite")
    diag = np.diag(L)
    # a numerically singular system factors "successfully" with a pivot near
    # sqrt(eps); refuse it when nothing regularizes the solve
    if lam1 == 0.0 and diag.min() <= 1e-6 * diag.max():
        raise SingularSystem("design matrix is rank-deficient and lam1 = 0")
    z = np.linalg.solve(L, rhs)
    return np.linalg.solve(L.T, z)


def weighted_ridge_primal(data: RegressionDataset, q: WeightVector, lam1: float) -> np.ndarray:
    """argmin_w sum_t q_t (w.x_t - y_t)^2 + lam1 ||w||^2.

    Requires q >= 0 and lam1 > 0, or lam1 = 0 with a design matrix of full
    rank on the support of q (otherwise SingularSystem).
    """
    if len(q) != len(data):
        raise LengthMismatch(f"q length {len(q)} != rows {len(data)}")
    if np.any(q.weights < 0):
        raise ValueError("ridge weights must be non-negative")
    if lam1 < 0:
        raise ValueError("lam1 must be >= 0")
    return _ridge_solve(data.features, data.targets, q.weights, lam1)


def weighted_ridge_dual(G: GramMatrix, q: WeightVector, lam1: float, y: np.ndarray) -> DualRidge:
    """Dual coefficients alpha = lam1 (lam1 diag(1/q) + K)^{-1} y.

    Predictions are x -> sum_t alpha_t k(x_t, x) / lam1; the 1/lam1 scale is
    fixed by matching the primal solution on the linear kernel.  Also
    reports the concave dual objective
    -lam1 sum alpha_t^2 / q_t - alpha^T K alpha + 2 lam1 alpha^T y.
    """
    y = np.asarray(y, dtype=float)
    n = G.n
    if len(q) != n or y.size != n:
        raise LengthMismatch("q and y must match the Gram size")
    if np.any(q.weights <= 0):
        raise ValueError("dual ridge requires strictly positive weights")
    if not lam1 > 0:
        raise ValueError("dual ridge requires lam1 > 0")
    # symmetric formulation: alpha = lam1 D^(1/2) (lam1 I + D^(1/2) K D^(1/2))^-1 D^(1/2) y
    s = np.sqrt(q.weights)
    M = lam1 * np.eye(n) + (G.entries * s[:, None]) * s[None, :]
    try:
        L = np.linalg.cholesky(M)
    except np.linalg.LinAlgError:
        raise SingularSystem("dual system not positive definite")
    z = np.linalg.solve(L.T, np.linalg.solve(L, s * y))
    alpha = lam1 * s * z
    obj = float(
        -lam1 * np.sum(alpha * alpha / q.weights)
        - alpha @ G.entries @ alpha
        + 2.0 * lam1 * (alpha @ y)
    )
    return DualRidge(alpha=alpha, objective=obj)


def _uniform_prior(n: int) -> WeightVector:
    return WeightVector(weights=np.full(n, 1.0 / n), simplex=True)


def _resolve_prior(config: SolverConfig, n: int) -> WeightVector:
    if config.prior is None:
        return _uniform_prior(n)
    if len(config.prior) != n:
        raise LengthMismatch(f"prior length {len(config.prior)} != rows {n}")
    return config.prior


def _simplex_l1_argmin(c: np.ndarray, v: np.ndarray, lam2: float) -> np.ndarray:
    """Exact minimizer of sum c_t q_t + lam2 |q - v|_1 over the simplex.

    Water-filling on the dual level nu: coordinate t contributes 0 below
    c_t - lam2, sits at v_t between c_t - lam2 and c_t + lam2, and can
    absorb arbitrary mass at c_t + lam2.  The optimal level is the first
    candidate where the attainable mass reaches 1; leftover mass goes to
    boundary coordinates in index order (ties toward the smallest index).
    """
    n = c.size
    s_lo = c - lam2
    s_hi = c + lam2
    cand = np.unique(np.concatenate([s_lo, s_hi]))
    lo_sorted = np.sort(s_lo)
    v_by_lo = v[np.argsort(s_lo, kind="stable")]
    cum_v = np.concatenate([[0.0], np.cumsum(v_by_lo)])
    mass_le = cum_v[np.searchsorted(lo_sorted, cand, side="right")]
    absorb = cand >= s_hi.min()
    ok = np.flatnonzero((mass_le >= 1.0 - 1e-12) | absorb)
    nu = float(cand[ok[0]])

    q = np.zeros(n)
    strict_lo = s_lo < nu
    q[strict_lo & (s_hi > nu)] = v[strict_lo & (s_hi > nu)]
    q[strict_lo & (s_hi == nu)] = v[strict_lo & (s_hi == nu)]
    deficit = 1.0 - float(q.sum())
    if deficit > 0:
        eligible = np.flatnonzero((s_lo == nu) | (s_hi == nu))
        for t in eligible:
            cap = np.inf if s_hi[t] <= nu else (v[t] if s_lo[t] == nu else 0.0)
            add = min(cap, deficit)
            if add > 0:
                q[t] += add
                deficit -= add
            if deficit <= 1e-15:
                break
        if deficit > 1e-9:
            raise NumericalFailure("weight mass could not be placed")  # unreachable
    total = float(q.sum())
    if total > 0:
        q = q / total
    return q


def _q_step_lp(c: np.ndarray, v: np.ndarray, lam2: float) -> np.ndarray:
    """The same minimization through the simplex LP: variables (q, s) with
    s_t >= |q_t - v_t|."""
    n = c.size
    c_lp = np.concatenate([c, np.full(n, lam2)])
    A_eq = np.concatenate([np.ones(n), np.zeros(n)])[None, :]
    eye = np.eye(n)
    A_ub = np.vstack([np.hstack([eye, -eye]), np.hstack([-eye, -eye])])
    b_ub = np.concatenate([v, -v])
    lp = LinearProgram(c=c_lp, A_ub=A_ub, b_ub=b_ub, A_eq=A_eq, b_eq=np.array([1.0]))
    res = solve_lp(lp)
    if res.status is not LpStatus.OPTIMAL:
        raise NumericalFailure(f"q-step LP ended with status {res.status}")
    q = np.maximum(res.x[:n], 0.0)
    return q / float(q.sum())


def q_step(losses: np.ndarray, d: InstantDiscrepancies, config: SolverConfig) -> WeightVector:
    """Minimize sum q_t (loss_t + d_t) + lam2 ||q - v||_1 over the simplex.

    Small instances go through the LP; larger ones through the exact
    water-filling minimizer (the LP tableau grows quadratically).  Both
    routes agree to solver tolerance.  At lam2 = 0 the s-variables carry no
    cost and the LP vertex is not unique, so that case always takes the
    water-filling route, which returns the one-hot argmin with ties broken
    toward the smallest index.
    """
    if config.norm_p != 1:
        raise ValueError("q_step requires norm_p = 1")
    losses = np.asarray(losses, dtype=float)
    if losses.size != len(d):
        raise LengthMismatch(f"losses length {losses.size} != d length {len(d)}")
    v = _resolve_prior(config, losses.size)
    c = losses + d.d
    if config.lam2 > 0 and losses.size <= _LP_SIZE_LIMIT:
        q = _q_step_lp(c, v.weights, config.lam2)
    else:
        q = _simplex_l1_argmin(c, v.weights, config.lam2)
    return WeightVector(weights=q, simplex=True)


def _features_and_targets(data: RegressionDataset, kernel: KernelSpec):
    phi = feature_rows(kernel, data.features).rows
    return phi, data.targets


def _default_d(data, kernel, config) -> InstantDiscrepancies:
    n = len(data)
    proxy = target_proxy(n, min(config.s, n))
    return instantaneous_discrepancies(
        data, kernel, BallConstraint(config.radius), proxy, l=config.l
    )


def _package_result(kernel, phi, w, **kw) -> FitResult:
    """Primal result for the linear kernel; dual-style representation (alpha
    such that predictions are sum alpha_t k(x_t, .)) otherwise."""
    if kernel.kind == "linear":
        return FitResult(kind="primal", coefficients=w, **kw)
    # w . phi(x) = w^T diag(1/sqrt(lam)) V^T k(X, x); phi = V sqrt(lam), so
    # alpha = phi (phi^T phi)^-1 w maps back onto kernel sections
    gramian = phi.T @ phi
    alpha = phi @ np.linalg.solve(gramian, w)
    return FitResult(kind="dual", coefficients=alpha, dual_scale=1.0, **kw)


def fit_dbf_alternating(
    data: RegressionDataset,
    kernel: KernelSpec,
    config: SolverConfig,
    d: Optional[InstantDiscrepancies] = None,
) -> FitResult:
    """Alternating minimization of
    sum q_t (w.x_t - y_t)^2 + sum q_t d_t + lam1 ||w||^2 + lam2 ||q - v||_1
    over the simplex: exact ridge w-step, exact LP/water-filling q-step.

    ``d`` defaults to the estimated instantaneous discrepancies; passing a
    precomputed vector (for example one built from known generating
    conditionals) reuses the same optimization.
    """
    if config.norm_p != 1:
        raise ValueError("alternating path requires norm_p = 1")
    if d is None:
        d = _default_d(data, kernel, config)
    if len(d) != len(data):
        raise LengthMismatch("d length does not match the dataset")
    phi, y = _features_and_targets(data, kernel)
    v = _resolve_prior(config, len(data))
    q = v
    trace: list[float] = []
    converged = False
    w = np.zeros(phi.shape[1])
    for it in range(1, config.max_iters + 1):
        w = _ridge_solve(phi, y, q.weights, config.lam1)
        losses = (phi @ w - y) ** 2
        q = q_step(losses, d, config)
        obj = (
            float(q.weights @ losses)
            + float(q.weights @ d.d)
            + config.lam1 * float(w @ w)
            + config.lam2 * float(np.abs(q.weights - v.weights).sum())
        )
        trace.append(obj)
        if len(trace) >= 2 and trace[-2] - trace[-1] < config.tol * max(1.0, abs(trace[-2])):
            converged = True
            break
    return _package_result(
        kernel,
        phi,
        w,
        q=q,
        objective_trace=tuple(trace),
        iterations=len(trace),
        converged=converged,
    )


def _convex_objective(losses, d, r, norm_sq, config, v):
    return (
        float(np.sum((losses + d) / r))
        + config.lam1 * norm_sq
        + config.lam2 * float(np.sum((v * v) * (r - 1.0 / v) ** 2))
    )


def _r_step(losses, d, r, norm_sq, config, v):
    """One projected-gradient step on r with Armijo backtracking; the
    projection clamps r_t >= 1."""
    numer = losses + d
    obj = _convex_objective(losses, d, r, norm_sq, config, v)
    grad = -numer / (r * r) + 2.0 * config.lam2 * (v * v) * (r - 1.0 / v)
    step = 1.0
    for _ in range(60):
        r_new = np.maximum(r - step * grad, 1.0)
        new_obj = _convex_objective(losses, d, r_new, norm_sq, config, v)
        if new_obj <= obj + 1e-4 * float(grad @ (r_new - r)):
            return r_new, new_obj
        step *= 0.5
    return r, obj


def _fit_convex_family(data, kernel, config, d, inner: str) -> FitResult:
    if config.norm_p != 2:
        raise ValueError("convex-r path requires norm_p = 2")
    if d is None:
        d = _default_d(data, kernel, config)
    if len(d) != len(data):
        raise LengthMismatch("d length does not match the dataset")
    n = len(data)
    v = _resolve_prior(config, n)
    if np.any(v.weights <= 0):
        raise ValueError("convex-r path requires a strictly positive prior")
    phi, y = _features_and_targets(data, kernel)
    if inner == "dual":
        if not config.lam1 > 0:
            raise ValueError("dual path requires lam1 > 0")
        G = gram(kernel, data.features)
    r = 1.0 / v.weights
    trace: list[float] = []
    converged = False
    w = np.zeros(phi.shape[1])
    alpha = np.zeros(n)
    for it in range(1, config.max_iters + 1):
        qw = 1.0 / r
        if inner == "primal":
            w = _ridge_solve(phi, y, qw, config.lam1)
            preds = phi @ w
            norm_sq = float(w @ w)
        else:
            alpha = weighted_ridge_dual(G, WeightVector(weights=qw), config.lam1, y).alpha
            coef = alpha / config.lam1
            preds = G.entries @ coef
            norm_sq = float(coef @ G.entries @ coef)
        losses = (preds - y) ** 2
        r, obj = _r_step(losses, d.d, r, norm_sq, config, v.weights)
        trace.append(obj)
        if len(trace) >= 2 and trace[-2] - trace[-1] < config.tol * max(1.0, abs(trace[-2])):
            converged = True
            break
    q = WeightVector(weights=1.0 / r)
    common = dict(
        q=q, r=r, objective_trace=tuple(trace), iterations=len(trace), converged=converged
    )
    if inner == "primal":
        return _package_result(kernel, phi, w, **common)
    return FitResult(kind="dual", coefficients=alpha, dual_scale=1.0 / config.lam1, **common)


def fit_dbf_convex(
    data: RegressionDataset,
    kernel: KernelSpec,
    config: SolverConfig,
    d: Optional[InstantDiscrepancies] = None,
) -> FitResult:
    """Jointly convex reformulation over (r, w) with r_t = 1/q_t >= 1:
    minimize sum (loss_t + d_t)/r_t + lam1 ||w||^2
    + lam2 sum v_t^2 (r_t - 1/v_t)^2 by exact w-steps and projected-gradient
    r-steps."""
    return _fit_convex_family(data, kernel, config, d, inner="primal")


def fit_dbf_dual(
    data: RegressionDataset,
    kernel: KernelSpec,
    config: SolverConfig,
    d: Optional[InstantDiscrepancies] = None,
) -> FitResult:
    """Same outer r iteration as fit_dbf_convex with the inner hypothesis
    problem solved in closed form through the kernel dual; the outer
    objective evaluates the inner optimum at primal scale, so linear-kernel
    runs match fit_dbf_convex."""
    return _fit_convex_family(data, kernel, config, d, inner="dual")


def convex_objective_value(
    data: RegressionDataset,
    kernel: KernelSpec,
    config: SolverConfig,
    d: InstantDiscrepancies,
    w: np.ndarray,
    r: np.ndarray,
) -> float:
    """The convex-path objective at arbitrary (w, r); used for convexity
    checks and cross-solver comparisons."""
    phi, y = _features_and_targets(data, kernel)
    v = _resolve_prior(config, len(data))
    losses = (phi @ w - y) ** 2
    return _convex_objective(losses, d.d, np.asarray(r, dtype=float), float(w @ w), config, v.weights)


def _project_simplex(x: np.ndarray) -> np.ndarray:
    """Euclidean projection onto {q : q >= 0, sum q = 1}."""
    u = np.sort(x)[::-1]
    css = np.cumsum(u)
    rho = np.flatnonzero(u * np.arange(1, x.size + 1) > (css - 1.0))[-1]
    theta = (css[rho] - 1.0) / (rho + 1.0)
    return np.maximum(x - theta, 0.0)


def fit_two_stage(
    data: RegressionDataset, kernel: KernelSpec, config: SolverConfig
) -> FitResult:
    """Stage one: minimize the ball-sup discrepancy over distributions q by
    projected subgradient descent (exact sups per step, subgradient -loss_t
    at the attaining hypothesis, best-seen iterate kept, q started at the
    proxy; the iterate is projected back onto the simplex, as dropping the
    mass constraint makes the objective unbounded below).  Stage two:
    weighted ridge on the stage-one weights with lam2 as the ridge
    parameter."""
    n = len(data)
    phi, y = _features_and_targets(data, kernel)
    proxy = target_proxy(n, min(config.s, n))
    p = proxy.p.weights
    ball = BallConstraint(config.radius)

    def sup_and_losses(qw: np.ndarray):
        g = p - qw
        A = (phi * g[:, None]).T @ phi
        qf = QuadraticForm(
            A=(A + A.T) / 2.0, b=-2.0 * (phi.T @ (g * y)), c=float(g @ (y * y))
        )
        sol = max_quadratic_on_ball(qf, ball)
        return sol.value, (phi @ sol.argmax - y) ** 2

    q = p.copy()
    best_q = q.copy()
    g_val, losses = sup_and_losses(q)
    best_val = g_val
    trace = [g_val]
    # the subgradient entries are ball-sup losses, whose size the
    # instantaneous discrepancies measure; 1/max d_t keeps steps commensurate
    d_probe = _default_d(data, kernel, config)
    step_scale = 1.0 / max(float(d_probe.d.max()), 1e-12)
    converged = False
    for k in range(1, _STAGE1_MAX_ITERS + 1):
        step = step_scale / (k + _STAGE1_STEP_OFFSET)
        q = _project_simplex(q - step * (-losses))
        g_val, losses = sup_and_losses(q)
        trace.append(g_val)
        if g_val < best_val:
            best_val = g_val
            best_q = q.copy()
        if abs(trace[-2] - trace[-1]) < config.tol * max(1.0, abs(trace[-2])):
            converged = True
            break
    w = _ridge_solve(phi, y, best_q, config.lam2)
    return _package_result(
        kernel,
        phi,
        w,
        q=WeightVector(weights=best_q),
        objective_trace=tuple(trace),
        iterations=len(trace) - 1,
        converged=converged,
    )


def predict(fit: FitResult, kernel: KernelSpec, training_features, x) -> float:
    """Evaluate a fit at a feature row: w.x for primal fits, the
    alpha-weighted kernel sections for dual fits."""
    x = np.asarray(x, dtype=float)
    if x.ndim != 1:
        raise DimensionMismatch(f"x must be a single feature row, got shape {x.shape}")
    if fit.kind == "primal":
        if x.size != fit.coefficients.size:
            raise DimensionMismatch(
                f"x length {x.size} != coefficient length {fit.coefficients.size}"
            )
        return float(fit.coefficients @ x)
    X = np.asarray(training_features, dtype=float)
    if X.shape[0] != fit.coefficients.size or X.shape[1] != x.size:
        raise DimensionMismatch("training features do not match the dual coefficients")
    k_vec = _pairwise(kernel, X, x[None, :])[:, 0]
    return float(fit.coefficients @ k_vec) * fit.dual_scale
