"""Discrepancy estimation: target proxy, instantaneous discrepancies d_t,
the empirical discrepancy functional, and the analytic Markov-chain oracle.

All suprema over the hypothesis ball reduce to exact trust-region solves on
the factorized feature space; the reduction is exact because every
objective depends on w only through w . Psi(x_t).
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .core import BadWindow, LengthMismatch, WeightVector
from .kernels import KernelSpec, feature_rows
from .trs import (
    BallConstraint,
    QuadraticForm,
    max_quadratic_on_ball,
    sup_abs_quadratic_on_ball,
)


@dataclass(frozen=True)
class TargetProxy:
    """Uniform weights on the last s sample points, standing in for the
    unobservable next-step distribution."""

    p: WeightVector
    s: int


@dataclass(frozen=True)
class InstantDiscrepancies:
    """Per-point discrepancies d_t >= 0 and the averaging window l used
    (0 = pointwise)."""

    d: np.ndarray
    l: int

    def __post_init__(self):
        arr = np.array(self.d, dtype=float)
        if np.any(arr < 0):
            raise ValueError("instantaneous discrepancies must be non-negative")
        arr.setflags(write=False)
        object.__setattr__(self, "d", arr)

    def __len__(self) -> int:
        return int(self.d.size)


@dataclass(frozen=True)
class MarkovChainSpec:
    """Cyclic chain on {0..N-1}: step to (i-1) mod N with probability p,
    else to (i+1) mod N.  The hypothesis family is x -> a(x-1) + b(x+1)
    with a, b >= 0, either constrained to a + b = 1 or free up to `bound`."""

    N: int
    p_stay_left: float
    hypothesis_family: str = "constrained"
    bound: float = 10.0

    def __post_init__(self):
        if self.N < 2:
            raise ValueError("state count must be >= 2")
        if not 0.0 <= self.p_stay_left <= 1.0:
            raise ValueError("transition probability must lie in [0, 1]")
        if self.hypothesis_family not in ("constrained", "unconstrained"):
            raise ValueError("hypothesis_family must be constrained or unconstrained")
        if not self.bound > 0:
            raise ValueError("bound must be positive")


def target_proxy(T: int, s: int) -> TargetProxy:
    """Proxy weights: 1/s on the last s of T points, 0 elsewhere."""
    if s == 0 or s > T:
        raise BadWindow(f"proxy window s={s} invalid for T={T}")
    p = np.zeros(T)
    p[T - s :] = 1.0 / s
    return TargetProxy(p=WeightVector(weights=p, simplex=True), s=s)


def _window_average(outer: np.ndarray, cross: np.ndarray, sq: np.ndarray, l: int):
    """Average per-point quadratic pieces over the clipped window
    [t-l, t+l] for l >= 1 (denominator = actual in-range count)."""
    n, r = cross.shape
    if l == 0:
        return outer, cross, sq
    c_outer = np.concatenate([np.zeros((1, r, r)), np.cumsum(outer, axis=0)])
    c_cross = np.concatenate([np.zeros((1, r)), np.cumsum(cross, axis=0)])
    c_sq = np.concatenate([[0.0], np.cumsum(sq)])
    idx = np.arange(n)
    lo = np.maximum(idx - l, 0)
    hi = np.minimum(idx + l, n - 1) + 1
    count = (hi - lo).astype(float)
    B = (c_outer[hi] - c_outer[lo]) / count[:, None, None]
    h = (c_cross[hi] - c_cross[lo]) / count[:, None]
    e = (c_sq[hi] - c_sq[lo]) / count
    return B, h, e


def _window_stats(phi: np.ndarray, y: np.ndarray, l: int):
    """Per-point (B_t, h_t, e_t): outer product, cross term, and squared
    target, window-averaged via :func:`_window_average`."""
    outer = phi[:, :, None] * phi[:, None, :]
    cross = phi * y[:, None]
    sq = y * y
    return _window_average(outer, cross, sq, l)


def instantaneous_discrepancies(
    data,
    kernel: KernelSpec,
    ball: BallConstraint,
    proxy: TargetProxy,
    l: int = 0,
) -> InstantDiscrepancies:
    """d_t = sup over the ball of |a(w) - loss_t(w)|.

    a(w) is the proxy-weighted squared loss; loss_t is the pointwise squared
    loss, or for l >= 1 its average over window indices clipped to the valid
    range (denominator = actual in-range count).

    Parameters
    ----------
    data : RegressionDataset
    kernel : KernelSpec
    ball : BallConstraint
        Hypothesis-ball radius for the supremum.
    proxy : TargetProxy
        Must have the same length as the dataset.
    l : int
        Averaging half-window; 0 means pointwise.
    """
    if len(proxy.p) != len(data):
        raise LengthMismatch(f"proxy length {len(proxy.p)} != rows {len(data)}")
    if l < 0:
        raise BadWindow("window l must be >= 0")
    phi = feature_rows(kernel, data.features).rows
    y = data.targets
    p = proxy.p.weights
    S = (phi * p[:, None]).T @ phi
    S = (S + S.T) / 2.0
    h = phi.T @ (p * y)
    e = float(p @ (y * y))
    B, hw, ew = _window_stats(phi, y, l)
    d = np.empty(len(data))
    for t in range(len(data)):
        A = S - B[t]
        qf = QuadraticForm(A=(A + A.T) / 2.0, b=-2.0 * (h - hw[t]), c=e - float(ew[t]))
        d[t] = sup_abs_quadratic_on_ball(qf, ball)
    return InstantDiscrepancies(d=np.maximum(d, 0.0), l=l)


def generator_moment_quadratics(coefficients, sigma: float, lag: int, n_rows: int):
    """Expected squared-loss pieces for lag-embedded rows of a time-varying
    first-order autoregression.

    For Y_t = a_t Y_{t-1} + eps_t with eps_t drawn independently from
    N(0, sigma^2) and Y_0 = 0, row i of a lag-r embedding has features
    (Y_{i+1}, ..., Y_{i+r}) and target Y_{i+r+1}, so its expected squared
    loss at weights w is  w' M_i w - 2 m_i' w + v_i  with ::

        M_i[a, b] = E[Y_{i+1+a} Y_{i+1+b}]
        m_i[a]    = E[Y_{i+r+1} Y_{i+1+a}]
        v_i       = E[Y_{i+r+1}^2]

    All second moments follow from the recursions
    E[Y_t^2] = a_t^2 E[Y_{t-1}^2] + sigma^2 and, for t >= s,
    E[Y_t Y_s] = (a_{s+1} ... a_t) E[Y_s^2].

    Parameters
    ----------
    coefficients : array
        Generating coefficients; entry t-1 drives step t.  Must cover at
        least lag + n_rows steps.
    sigma : float
        Innovation standard deviation.
    lag : int
        Embedding width r.
    n_rows : int
        Number of embedded rows.

    Returns
    -------
    tuple
        Arrays (M, m, v) of shapes (n_rows, lag, lag), (n_rows, lag) and
        (n_rows,).
    """
    alpha = np.asarray(coefficients, dtype=float)
    if lag < 1:
        raise ValueError("lag must be >= 1")
    if n_rows < 1:
        raise ValueError("n_rows must be >= 1")
    horizon = lag + n_rows
    if alpha.size < horizon:
        raise LengthMismatch(
            f"{alpha.size} coefficients cover fewer than the {horizon} steps "
            "the embedding spans"
        )
    var = np.zeros(horizon + 1)
    for t in range(1, horizon + 1):
        var[t] = alpha[t - 1] ** 2 * var[t - 1] + sigma**2
    # C[k, t] = E[Y_t Y_{t-k}]; each extra step back multiplies by one
    # coefficient, so C[k, t] = a_t C[k-1, t-1].
    C = np.zeros((lag + 1, horizon + 1))
    C[0] = var
    for k in range(1, lag + 1):
        C[k, k:] = alpha[k - 1 : horizon] * C[k - 1, k - 1 : horizon]
    rows = np.arange(n_rows)
    M = np.empty((n_rows, lag, lag))
    for a in range(lag):
        for b in range(lag):
            M[:, a, b] = C[abs(a - b), rows + 1 + max(a, b)]
    m = np.empty((n_rows, lag))
    for a in range(lag):
        m[:, a] = C[lag - a, rows + lag + 1]
    v = var[rows + lag + 1].copy()
    return M, m, v


def generator_moment_discrepancies(
    coefficients,
    sigma: float,
    lag: int,
    ball: BallConstraint,
    proxy: TargetProxy,
    l: int = 0,
) -> InstantDiscrepancies:
    """d_t from generating-recursion moments rather than from the sample.

    Mirrors :func:`instantaneous_discrepancies` with every sample quadratic
    (outer product, cross term, squared target) replaced by its expectation
    under the recursion Y_t = a_t Y_{t-1} + eps_t, so d_t measures how far
    the generating law at step t sits from the proxy-averaged law over a
    hypothesis ball on the raw lag features (identity feature map).

    Parameters
    ----------
    coefficients : array
        Generating coefficients; entry t-1 drives step t.
    sigma : float
        Innovation standard deviation.
    lag : int
        Embedding width; the proxy length fixes the number of rows.
    ball : BallConstraint
        Hypothesis-ball radius for the supremum.
    proxy : TargetProxy
    l : int
        Averaging half-window; 0 means pointwise.
    """
    if l < 0:
        raise BadWindow("window l must be >= 0")
    n = len(proxy.p)
    M, m, v = generator_moment_quadratics(coefficients, sigma, lag, n)
    p = proxy.p.weights
    S = np.tensordot(p, M, axes=1)
    S = (S + S.T) / 2.0
    h = p @ m
    e = float(p @ v)
    B, hw, ew = _window_average(M, m, v, l)
    d = np.empty(n)
    for t in range(n):
        A = S - B[t]
        qf = QuadraticForm(A=(A + A.T) / 2.0, b=-2.0 * (h - hw[t]), c=e - float(ew[t]))
        d[t] = sup_abs_quadratic_on_ball(qf, ball)
    return InstantDiscrepancies(d=np.maximum(d, 0.0), l=l)


def empirical_discrepancy(
    data,
    kernel: KernelSpec,
    ball: BallConstraint,
    q: WeightVector,
    proxy: TargetProxy,
) -> float:
    """sup over the ball of sum_t (p_t - q_t)(w . phi_t - y_t)^2, signed
    (no absolute value).  Exactly 0 when q equals the proxy weights."""
    if len(q) != len(data) or len(proxy.p) != len(data):
        raise LengthMismatch("q and proxy must match the dataset length")
    g = proxy.p.weights - q.weights
    if not np.any(g):
        return 0.0
    phi = feature_rows(kernel, data.features).rows
    y = data.targets
    A = (phi * g[:, None]).T @ phi
    qf = QuadraticForm(A=(A + A.T) / 2.0, b=-2.0 * (phi.T @ (g * y)), c=float(g @ (y * y)))
    return max_quadratic_on_ball(qf, ball).value


def upper_bound_discrepancy(
    d: InstantDiscrepancies,
    q: WeightVector,
    v: WeightVector,
    lam2: float,
    norm_p: float,
) -> float:
    """The computable bound sum_t q_t d_t + lam2 ||q - v||_p."""
    if len(q) != len(d) or len(v) != len(d):
        raise LengthMismatch("q, v and d must have equal lengths")
    if lam2 < 0:
        raise ValueError("lam2 must be >= 0")
    if norm_p < 1:
        raise ValueError("norm_p must be >= 1")
    penalty = float(np.linalg.norm(q.weights - v.weights, ord=norm_p))
    return float(q.weights @ d.d) + lam2 * penalty


def _markov_expectation_terms(spec: MarkovChainSpec, states: np.ndarray, weights: np.ndarray):
    """Collapse E[f(Z_t)|previous state] terms by state value.

    For the family h(x) = a(x-1) + b(x+1) and absolute loss, conditioning on
    previous state x gives
        E = p |b(x+1) + (a-1)(x-1)| + (1-p) |b(x+1) + a(x-1) - (x+1)|,
    each term linear in b for fixed a.  Returns arrays (alpha, beta_a,
    beta_const, gamma) describing gamma * |alpha * b + beta_a * a + beta_const|
    summands, with per-state weights already merged.
    """
    p = spec.p_stay_left
    uniq, inv = np.unique(states, return_inverse=True)
    w = np.zeros(uniq.size)
    np.add.at(w, inv, weights)
    x = uniq.astype(float)
    alpha = np.concatenate([x + 1, x + 1])
    beta_a = np.concatenate([x - 1, x - 1])
    beta_const = np.concatenate([-(x - 1), -(x + 1)])
    gamma = np.concatenate([p * w, (1.0 - p) * w])
    return alpha, beta_a, beta_const, gamma


def markov_discrepancy_oracle(
    spec: MarkovChainSpec,
    path: np.ndarray,
    q: WeightVector,
    loss_exponent: int = 1,
    step: float = 1e-3,
) -> float:
    """disc(q) for the cyclic-chain example, by maximizing over the
    hypothesis family's closed-form conditional expectations.

    ``path`` holds states (x_0, ..., x_T); q_t weighs the transition into
    path[t] for t = 1..T, so q has length len(path) - 1.  For fixed a the
    objective is piecewise linear in b, so b is maximized exactly over its
    breakpoints while a is scanned on a grid of the given step.
    """
    if loss_exponent != 1:
        raise ValueError("only the absolute loss (exponent 1) is implemented")
    path = np.asarray(path, dtype=int)
    if path.ndim != 1 or path.size < 2:
        raise ValueError("path must contain at least two states")
    if np.any(path < 0) or np.any(path >= spec.N):
        raise ValueError("path states must lie in {0..N-1}")
    if len(q) != path.size - 1:
        raise LengthMismatch(f"q length {len(q)} != transitions {path.size - 1}")

    prev_states = path[:-1]
    weights = np.concatenate([-q.weights, [1.0]])  # sample terms negative, target +1
    states = np.concatenate([prev_states, [path[-1]]])
    alpha, beta_a, beta_const, gamma = _markov_expectation_terms(spec, states, weights)

    def objective_for_a(a: np.ndarray) -> np.ndarray:
        # evaluate max over b for each a in the batch
        if spec.hypothesis_family == "constrained":
            b = 1.0 - a
            args = alpha[None, :] * b[:, None] + beta_a[None, :] * a[:, None] + beta_const[None, :]
            return np.sum(gamma[None, :] * np.abs(args), axis=1)
        out = np.empty(a.size)
        for i, ai in enumerate(a):
            const = beta_a * ai + beta_const
            bps = -const / alpha  # alpha = x+1 >= 1, never zero
            cand = np.concatenate([[0.0, spec.bound], bps[(bps > 0) & (bps < spec.bound)]])
            vals = np.sum(
                gamma[None, :] * np.abs(alpha[None, :] * cand[:, None] + const[None, :]),
                axis=1,
            )
            out[i] = float(np.max(vals))
        return out

    hi = 1.0 if spec.hypothesis_family == "constrained" else spec.bound
    n_grid = int(round(hi / step)) + 1
    a_grid = np.linspace(0.0, hi, n_grid)
    return float(np.max(objective_for_a(a_grid)))
