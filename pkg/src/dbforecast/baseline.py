"""ARIMA(p, d, q) baseline: conditional-sum-of-squares estimation with an
OLS autoregressive warm start, recursive multi-step forecasting, and
teacher-forced one-step predictions for development scoring.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from math import comb
from typing import NamedTuple

import numpy as np
from scipy.optimize import minimize
from scipy.signal import lfilter

from .core import SeriesTooShort, TimeSeries

_MAX_ORDER = 2
_NM_MAX_EVALS = 2000
_NM_TOL = 1e-10
_THETA_CLAMP = 5.0
_THETA_PENALTY = 1e6


@dataclass(frozen=True)
class ArimaOrder:
    """AR order p, differencing order d, moving-average order q_ma, each in
    {0, 1, 2}."""

    p: int
    d: int
    q_ma: int

    def __post_init__(self):
        for name in ("p", "d", "q_ma"):
            val = getattr(self, name)
            if not isinstance(val, (int, np.integer)) or not 0 <= val <= _MAX_ORDER:
                raise ValueError(f"{name} must be an integer in [0, {_MAX_ORDER}]")


@dataclass(frozen=True)
class ArimaModel:
    """Fitted parameters on the d-times differenced scale.

    ``converged`` is False when the simplex search stopped on its evaluation
    budget; the best-found parameters are still reported.
    """

    order: ArimaOrder
    phi: np.ndarray
    theta: np.ndarray
    intercept: float
    sigma2: float
    converged: bool = True

    def __post_init__(self):
        object.__setattr__(self, "phi", np.asarray(self.phi, dtype=float))
        object.__setattr__(self, "theta", np.asarray(self.theta, dtype=float))
        if self.phi.size != self.order.p or self.theta.size != self.order.q_ma:
            raise ValueError("coefficient lengths must match the order")


class OneStepPredictions(NamedTuple):
    """values[i] predicts series.values[offset + i] from the true history."""

    values: np.ndarray
    offset: int


def difference(values, d: int):
    """(d-times differenced array, the leading value of each level 0..d-1)."""
    values = np.asarray(values, dtype=float)
    heads = []
    z = values
    for _ in range(d):
        heads.append(z[0])
        z = np.diff(z)
    return z, heads


def undifference(z, heads) -> np.ndarray:
    """Invert ``difference`` exactly from the stored level heads."""
    values = np.asarray(z, dtype=float)
    for head in reversed(heads):
        values = np.concatenate([[head], head + np.cumsum(values)])
    return values


def css_residuals(z: np.ndarray, phi: np.ndarray, theta: np.ndarray, intercept: float):
    """Innovations of the ARMA recursion on the differenced scale,
    conditioning on the first p observations and zero presample innovations.

    Returns eps of length len(z) - p: eps_t solves
    z_t = intercept + sum phi_i z_{t-i} + eps_t + sum theta_j eps_{t-j}.
    """
    p = phi.size
    n = z.size
    resid = z[p:] - intercept
    for i in range(1, p + 1):
        resid = resid - phi[i - 1] * z[p - i : n - i]
    if theta.size:
        resid = lfilter([1.0], np.concatenate([[1.0], theta]), resid)
    return resid


def _ols_ar(z: np.ndarray, p: int, use_intercept: bool):
    """Exact least-squares AR(p) fit; returns (phi, intercept)."""
    if p == 0:
        return np.empty(0), float(z.mean()) if use_intercept else 0.0
    n = z.size
    cols = [z[p - i : n - i] for i in range(1, p + 1)]
    if use_intercept:
        cols.append(np.ones(n - p))
    X = np.stack(cols, axis=1)
    coef, *_ = np.linalg.lstsq(X, z[p:], rcond=None)
    phi = coef[:p]
    intercept = float(coef[p]) if use_intercept else 0.0
    return phi, intercept


def fit_arima(series: TimeSeries, order: ArimaOrder) -> ArimaModel:
    """Estimate (phi, theta, intercept) by minimizing the conditional sum of
    squared innovations.

    Pure AR orders are solved exactly by OLS; orders with an MA part run
    Nelder-Mead from the OLS-AR warm start (theta = 0).  The intercept is
    dropped for pure random walks (d > 0 with p = q_ma = 0), where the
    differenced mean is the only parameter the data cannot support.
    |theta| is soft-clamped to 5 through a penalty.
    """
    y = series.values
    if y.size <= order.d + order.p + order.q_ma + 10:
        raise SeriesTooShort(
            f"length {y.size} too short for order ({order.p},{order.d},{order.q_ma})"
        )
    z, _ = difference(y, order.d)
    use_intercept = order.d == 0 or order.p + order.q_ma > 0
    phi0, c0 = _ols_ar(z, order.p, use_intercept)

    if order.q_ma == 0:
        eps = css_residuals(z, phi0, np.empty(0), c0)
        return ArimaModel(
            order=order,
            phi=phi0,
            theta=np.empty(0),
            intercept=c0,
            sigma2=float(eps @ eps / eps.size),
            converged=True,
        )

    p, q_ma = order.p, order.q_ma

    def unpack(params):
        phi = params[:p]
        theta = params[p : p + q_ma]
        c = float(params[p + q_ma]) if use_intercept else 0.0
        return phi, theta, c

    def objective(params):
        phi, theta, c = unpack(params)
        with np.errstate(over="ignore", invalid="ignore"):
            eps = css_residuals(z, phi, theta, c)
            excess = np.maximum(np.abs(theta) - _THETA_CLAMP, 0.0)
            value = float(eps @ eps) + _THETA_PENALTY * float(excess @ excess)
        # simplex probes with |theta| > 1 can overflow the recursion; a huge
        # finite value keeps the search moving instead of warning
        return value if math.isfinite(value) else 1e300

    x0 = np.concatenate([phi0, np.zeros(q_ma), [c0] if use_intercept else []])
    res = minimize(
        objective,
        x0,
        method="Nelder-Mead",
        options=dict(maxfev=_NM_MAX_EVALS, fatol=_NM_TOL, xatol=_NM_TOL),
    )
    phi, theta, c = unpack(res.x)
    eps = css_residuals(z, phi, theta, c)
    return ArimaModel(
        order=order,
        phi=phi,
        theta=theta,
        intercept=c,
        sigma2=float(eps @ eps / eps.size),
        converged=bool(res.success),
    )


def _padded_innovations(model: ArimaModel, z: np.ndarray) -> np.ndarray:
    """In-sample innovations aligned to z (zeros over the conditioning
    region)."""
    eps = css_residuals(z, model.phi, model.theta, model.intercept)
    return np.concatenate([np.zeros(model.order.p), eps])


def forecast_arima(model: ArimaModel, series: TimeSeries, horizon: int) -> np.ndarray:
    """Recursive forecasts: the ARMA recursion is iterated on the
    differenced scale with future innovations at 0 (in-sample ones from the
    CSS pass), then integrated d times from the last observed levels."""
    if horizon < 1:
        raise ValueError("horizon must be >= 1")
    y = series.values
    z, _ = difference(y, model.order.d)
    eps = np.concatenate([_padded_innovations(model, z), np.zeros(horizon)])
    zext = np.concatenate([z, np.zeros(horizon)])
    n = z.size
    for h in range(horizon):
        t = n + h
        val = model.intercept
        for i in range(1, model.order.p + 1):
            val += model.phi[i - 1] * zext[t - i]
        for j in range(1, model.order.q_ma + 1):
            if t - j >= 0:
                val += model.theta[j - 1] * eps[t - j]
        zext[t] = val
    fz = zext[n:]
    for k in range(model.order.d - 1, -1, -1):
        anchor = np.diff(y, n=k)[-1] if k else y[-1]
        fz = anchor + np.cumsum(fz)
    return fz


def one_step_predictions(model: ArimaModel, series: TimeSeries) -> OneStepPredictions:
    """Teacher-forced one-step predictions over the whole series: each point
    is predicted from the true history through the fitted recursion.  The
    first d + p points have no prediction (conditioning region)."""
    y = series.values
    d, p = model.order.d, model.order.p
    z, _ = difference(y, d)
    eps = css_residuals(z, model.phi, model.theta, model.intercept)
    pred_z = z[p:] - eps
    offset = d + p
    preds = pred_z.copy()
    # lift back to the original scale: y_t = z_t - sum_k (-1)^k C(d,k) y_{t-k}
    idx = np.arange(offset, y.size)
    for k in range(1, d + 1):
        preds += -((-1.0) ** k) * comb(d, k) * y[idx - k]
    return OneStepPredictions(values=preds, offset=offset)
