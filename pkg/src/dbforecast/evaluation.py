"""Rolling-origin evaluation: hyperparameter selection on a development
holdout, multi-step test forecasts, aggregate error reports, and the paired
significance test.

An algorithm is any object with a ``name``, a ``grid`` of hyperparameter
mappings (in selection order), and three methods::

    fit(series, params) -> state
    predict_next(state, history) -> float      # one step, true history
    forecast(state, series, horizon) -> array  # recursive multi-step

Adapters for the ridge, discrepancy-based, and ARIMA fitters live here.
"""

from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from .baseline import ArimaOrder, fit_arima, forecast_arima
from .core import (
    DbfError,
    DegenerateSample,
    LengthMismatch,
    RegressionDataset,
    TimeSeries,
    WeightVector,
    embed_lags,
)
from .discrepancy import (
    generator_moment_discrepancies,
    instantaneous_discrepancies,
    target_proxy,
)
from .kernels import KernelSpec, linear_kernel
from .solvers import (
    SolverConfig,
    fit_dbf_alternating,
    fit_dbf_convex,
    fit_dbf_dual,
    fit_two_stage,
    predict,
    weighted_ridge_primal,
)
from .trs import BallConstraint

LAM1_GRID = (1e-3, 1e-4, 1e-5, 1e-6)
LAM2_GRID = (100.0, 10.0, 1.0, 0.1, 0.05, 0.01, 0.001, 0.0)
ARIMA_ORDERS = tuple(
    (p, d, q) for p in range(3) for d in range(3) for q in range(3)
)

_SCHEDULE_START = 750
_SCHEDULE_STEP = 25
_RADIUS_RIDGE_LAM1 = 1e-6
_RADIUS_FLOOR = 1e-3
_D_CACHE_LIMIT = 128


@dataclass(frozen=True)
class ProtocolSpec:
    """Cut schedule and holdout sizes.  ``schedule`` of None means cuts at
    750, 775, ... while a full test horizon still fits; ``test_mode`` is
    "recursive" (forecasts feed back into the lag vector) or "one_step"
    (true history at every step)."""

    schedule: Optional[tuple] = None
    dev_holdout: int = 25
    test_horizon: int = 25
    min_train: int = 50
    test_mode: str = "recursive"

    def __post_init__(self):
        if self.dev_holdout < 1 or self.test_horizon < 1 or self.min_train < 1:
            raise ValueError("holdout sizes must be >= 1")
        if self.test_mode not in ("recursive", "one_step"):
            raise ValueError("test_mode must be recursive or one_step")


@dataclass(frozen=True)
class EvaluationReport:
    """Per-cut test MSEs and aggregates, keyed by algorithm name; p-values
    keyed by "a<b" for the one-sided test that a's errors are smaller."""

    cut_times: tuple
    mses: dict
    means: dict
    stds: dict
    running: dict
    selections: dict
    p_values: dict


def resolve_schedule(spec: ProtocolSpec, T: int) -> tuple:
    if spec.schedule is not None:
        schedule = tuple(int(t) for t in spec.schedule)
    else:
        schedule = tuple(
            range(_SCHEDULE_START, T - spec.test_horizon + 1, _SCHEDULE_STEP)
        )
    if not schedule:
        raise ValueError("empty cut schedule")
    for t in schedule:
        if t - spec.dev_holdout < spec.min_train:
            raise ValueError(f"cut {t} leaves fewer than {spec.min_train} points")
        if t + spec.test_horizon > T:
            raise ValueError(f"cut {t} has no room for the test horizon")
    return schedule


def mse(pred, truth) -> float:
    pred = np.asarray(pred, dtype=float)
    truth = np.asarray(truth, dtype=float)
    if pred.shape != truth.shape:
        raise LengthMismatch(f"shapes {pred.shape} and {truth.shape} differ")
    return float(np.mean((pred - truth) ** 2))


def running_mse(squared_errors) -> np.ndarray:
    errs = np.asarray(squared_errors, dtype=float)
    return np.cumsum(errs) / np.arange(1, errs.size + 1)


def _betacf(a: float, b: float, x: float) -> float:
    """Continued fraction of the regularized incomplete beta (Lentz)."""
    tiny = 1e-300
    qab, qap, qam = a + b, a + 1.0, a - 1.0
    c = 1.0
    d = 1.0 - qab * x / qap
    if abs(d) < tiny:
        d = tiny
    d = 1.0 / d
    h = d
    for m in range(1, 300):
        m2 = 2 * m
        aa = m * (b - m) * x / ((qam + m2) * (a + m2))
        d = 1.0 + aa * d
        if abs(d) < tiny:
            d = tiny
        c = 1.0 + aa / c
        if abs(c) < tiny:
            c = tiny
        d = 1.0 / d
        h *= d * c
        aa = -(a + m) * (qab + m) * x / ((a + m2) * (qap + m2))
        d = 1.0 + aa * d
        if abs(d) < tiny:
            d = tiny
        c = 1.0 + aa / c
        if abs(c) < tiny:
            c = tiny
        d = 1.0 / d
        delta = d * c
        h *= delta
        if abs(delta - 1.0) < 3e-16:
            break
    return h


def _reg_inc_beta(a: float, b: float, x: float) -> float:
    if x <= 0.0:
        return 0.0
    if x >= 1.0:
        return 1.0
    ln_front = (
        math.lgamma(a + b)
        - math.lgamma(a)
        - math.lgamma(b)
        + a * math.log(x)
        + b * math.log1p(-x)
    )
    front = math.exp(ln_front)
    if x < (a + 1.0) / (a + b + 2.0):
        return front * _betacf(a, b, x) / a
    return 1.0 - front * _betacf(b, a, 1.0 - x) / b


def student_t_cdf(t: float, dof: float) -> float:
    """P(T <= t) for Student's t with ``dof`` degrees of freedom."""
    if dof <= 0:
        raise ValueError("dof must be positive")
    if math.isinf(t):
        return 0.0 if t < 0 else 1.0
    x = dof / (dof + t * t)
    tail = 0.5 * _reg_inc_beta(dof / 2.0, 0.5, x)
    return tail if t < 0 else 1.0 - tail


def paired_t_test(errors_a, errors_b, alternative: str = "a_less_than_b") -> float:
    """One-sided paired t-test p-value for the hypothesis that a's errors
    are smaller than b's (small p = strong evidence)."""
    if alternative != "a_less_than_b":
        raise ValueError("only the a_less_than_b alternative is supported")
    a = np.asarray(errors_a, dtype=float)
    b = np.asarray(errors_b, dtype=float)
    if a.shape != b.shape:
        raise LengthMismatch(f"shapes {a.shape} and {b.shape} differ")
    n = a.size
    if n < 2:
        raise DegenerateSample("need at least 2 paired observations")
    diffs = a - b
    sd = float(np.std(diffs, ddof=1))
    if sd == 0.0:
        raise DegenerateSample("paired differences have zero variance")
    t_stat = float(np.mean(diffs)) / (sd / math.sqrt(n))
    return student_t_cdf(t_stat, n - 1)


def default_radius(data: RegressionDataset) -> float:
    """Hypothesis-ball radius rule: twice the norm of the nearly
    unregularized uniform-weight ridge solution, floored away from zero."""
    n = len(data)
    uniform = WeightVector(weights=np.full(n, 1.0 / n))
    w = weighted_ridge_primal(data, uniform, _RADIUS_RIDGE_LAM1)
    return max(2.0 * float(np.linalg.norm(w)), _RADIUS_FLOOR)


class RidgeAdapter:
    """Uniform-weight ridge on lag features."""

    def __init__(self, lag: int = 3, lam1_grid=LAM1_GRID, kernel: Optional[KernelSpec] = None):
        self.name = "ridge"
        self.lag = lag
        self.kernel = kernel if kernel is not None else linear_kernel()
        self.grid = tuple({"lam1": float(l)} for l in lam1_grid)

    def fit(self, series: TimeSeries, params):
        data = embed_lags(series, self.lag)
        n = len(data)
        uniform = WeightVector(weights=np.full(n, 1.0 / n))
        w = weighted_ridge_primal(data, uniform, params["lam1"])
        return (w, data)

    def predict_next(self, state, history) -> float:
        w, _ = state
        return float(w @ np.asarray(history)[-self.lag :])

    def forecast(self, state, series: TimeSeries, horizon: int) -> np.ndarray:
        return _recursive_forecast(lambda h: self.predict_next(state, h), series, horizon)


def _recursive_forecast(predict_one, series: TimeSeries, horizon: int) -> np.ndarray:
    history = list(series.values)
    out = np.empty(horizon)
    for h in range(horizon):
        out[h] = predict_one(np.asarray(history))
        history.append(out[h])
    return out


_DBF_FITTERS = {
    "alt": (fit_dbf_alternating, 1.0),
    "convex": (fit_dbf_convex, 2.0),
    "dual": (fit_dbf_dual, 2.0),
}


class DbfAdapter:
    """Discrepancy-based fits on lag features.

    ``generator_coefficients`` switches the per-row discrepancies from
    sample estimates to exact values under the generating recursion
    Y_t = a_t Y_{t-1} + eps_t: every sample quadratic is replaced by its
    second-moment expectation, so the d_t reflect the drift of the law
    itself with none of the realized-noise component.  That mode works on
    the raw lag features only, so it insists on the linear kernel.
    """

    def __init__(
        self,
        variant: str = "alt",
        lag: int = 3,
        lam1_grid=LAM1_GRID,
        lam2_grid=LAM2_GRID,
        s: int = 20,
        l: int = 0,
        kernel: Optional[KernelSpec] = None,
        generator_coefficients: Optional[np.ndarray] = None,
        generator_sigma: float = 0.05,
        name: Optional[str] = None,
    ):
        if variant not in _DBF_FITTERS:
            raise ValueError(f"unknown variant {variant!r}")
        self.variant = variant
        self.lag = lag
        self.s = s
        self.l = l
        self.kernel = kernel if kernel is not None else linear_kernel()
        self.generator_coefficients = (
            None
            if generator_coefficients is None
            else np.asarray(generator_coefficients, dtype=float)
        )
        self.generator_sigma = float(generator_sigma)
        if self.generator_coefficients is not None and self.kernel.kind != "linear":
            raise ValueError("generator-moment discrepancies need the linear kernel")
        default = ("tdbf" if generator_coefficients is not None else "edbf") + "-" + variant
        self.name = name if name is not None else default
        self.grid = tuple(
            {"lam1": float(a), "lam2": float(b)} for a in lam1_grid for b in lam2_grid
        )
        self._d_cache: dict = {}

    def _radius_and_d(self, data: RegressionDataset):
        key = (data.features.tobytes(), data.targets.tobytes())
        hit = self._d_cache.get(key)
        if hit is not None:
            return hit
        radius = default_radius(data)
        n = len(data)
        proxy = target_proxy(n, min(self.s, n))
        ball = BallConstraint(radius)
        if self.generator_coefficients is None:
            d = instantaneous_discrepancies(data, self.kernel, ball, proxy, l=self.l)
        else:
            d = generator_moment_discrepancies(
                self.generator_coefficients,
                self.generator_sigma,
                self.lag,
                ball,
                proxy,
                l=self.l,
            )
        if len(self._d_cache) >= _D_CACHE_LIMIT:
            self._d_cache.pop(next(iter(self._d_cache)))
        self._d_cache[key] = (radius, d)
        return radius, d

    def fit(self, series: TimeSeries, params):
        data = embed_lags(series, self.lag)
        radius, d = self._radius_and_d(data)
        fitter, norm_p = _DBF_FITTERS[self.variant]
        config = SolverConfig(
            lam1=params["lam1"],
            lam2=params["lam2"],
            radius=radius,
            norm_p=norm_p,
            s=self.s,
            l=self.l,
        )
        fit = fitter(data, self.kernel, config, d=d)
        return (fit, data)

    def predict_next(self, state, history) -> float:
        fit, data = state
        x = np.asarray(history)[-self.lag :]
        return predict(fit, self.kernel, data.features, x)

    def forecast(self, state, series: TimeSeries, horizon: int) -> np.ndarray:
        return _recursive_forecast(lambda h: self.predict_next(state, h), series, horizon)


class TwoStageAdapter:
    """Discrepancy-minimizing weights, then ridge on them; the grid ranges
    over the stage-two ridge parameter."""

    def __init__(
        self,
        lag: int = 3,
        lam2_grid=LAM1_GRID,
        s: int = 20,
        kernel: Optional[KernelSpec] = None,
    ):
        self.name = "two-stage"
        self.lag = lag
        self.s = s
        self.kernel = kernel if kernel is not None else linear_kernel()
        self.grid = tuple({"lam2": float(b)} for b in lam2_grid)

    def fit(self, series: TimeSeries, params):
        data = embed_lags(series, self.lag)
        config = SolverConfig(
            lam2=params["lam2"], radius=default_radius(data), s=self.s
        )
        fit = fit_two_stage(data, self.kernel, config)
        return (fit, data)

    def predict_next(self, state, history) -> float:
        fit, data = state
        return predict(fit, self.kernel, data.features, np.asarray(history)[-self.lag :])

    def forecast(self, state, series: TimeSeries, horizon: int) -> np.ndarray:
        return _recursive_forecast(lambda h: self.predict_next(state, h), series, horizon)


class ArimaAdapter:
    """CSS-estimated ARIMA over an order grid."""

    def __init__(self, orders=ARIMA_ORDERS):
        self.name = "arima"
        self.grid = tuple(
            {"p": int(p), "d": int(d), "q_ma": int(q)} for (p, d, q) in orders
        )

    def fit(self, series: TimeSeries, params):
        order = ArimaOrder(p=params["p"], d=params["d"], q_ma=params["q_ma"])
        return fit_arima(series, order)

    def predict_next(self, state, history) -> float:
        return float(forecast_arima(state, TimeSeries(values=np.asarray(history)), 1)[0])

    def forecast(self, state, series: TimeSeries, horizon: int) -> np.ndarray:
        return forecast_arima(state, series, horizon)


def _dev_score(algorithm, values: np.ndarray, t: int, spec: ProtocolSpec, params) -> float:
    """Teacher-forced one-step MSE over the development holdout
    (y_{t-h+1}..y_t) for a fit on the prefix before it."""
    h = spec.dev_holdout
    prefix = TimeSeries(values=values[: t - h])
    state = algorithm.fit(prefix, params)
    preds = np.empty(h)
    for i in range(h):
        preds[i] = algorithm.predict_next(state, values[: t - h + i])
    return mse(preds, values[t - h : t])


def _test_score(algorithm, values: np.ndarray, t: int, spec: ProtocolSpec, params) -> float:
    prefix = TimeSeries(values=values[:t])
    state = algorithm.fit(prefix, params)
    horizon = spec.test_horizon
    if spec.test_mode == "recursive":
        preds = np.asarray(algorithm.forecast(state, prefix, horizon), dtype=float)
    else:
        preds = np.empty(horizon)
        for i in range(horizon):
            preds[i] = algorithm.predict_next(state, values[: t + i])
    return mse(preds, values[t : t + horizon])


_CELL_ERRORS = (DbfError, np.linalg.LinAlgError, FloatingPointError)


def _evaluate_cut(algorithm, values: np.ndarray, t: int, spec: ProtocolSpec):
    """Grid-select on the development holdout, retrain, test-forecast.
    Returns (test MSE, selected params); failed cells score +inf and are
    skipped by the argmin."""
    scores = []
    for params in algorithm.grid:
        try:
            scores.append(_dev_score(algorithm, values, t, spec, params))
        except _CELL_ERRORS:
            scores.append(math.inf)
    best = int(np.argmin(scores))
    params = algorithm.grid[best]
    try:
        return _test_score(algorithm, values, t, spec, params), params
    except _CELL_ERRORS:
        return math.inf, params


def run_protocol(
    series: TimeSeries, algorithms, spec: ProtocolSpec, workers: int = 1
) -> EvaluationReport:
    """Run every algorithm through every cut of the rolling-origin schedule
    and aggregate.  Cuts are independent work units; results are assembled
    in schedule order, so the report does not depend on ``workers``."""
    values = series.values
    schedule = resolve_schedule(spec, values.size)
    names = [a.name for a in algorithms]
    if len(set(names)) != len(names):
        raise ValueError("algorithm names must be unique")

    def eval_cut(t):
        return {a.name: _evaluate_cut(a, values, t, spec) for a in algorithms}

    if workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            per_cut = list(pool.map(eval_cut, schedule))
    else:
        per_cut = [eval_cut(t) for t in schedule]

    mses = {name: tuple(row[name][0] for row in per_cut) for name in names}
    selections = {name: tuple(row[name][1] for row in per_cut) for name in names}
    means = {name: float(np.mean(mses[name])) for name in names}
    stds = {name: float(np.std(mses[name], ddof=1)) if len(schedule) > 1 else 0.0 for name in names}
    running = {name: tuple(running_mse(mses[name])) for name in names}
    p_values = {}
    for a in names:
        for b in names:
            if a == b:
                continue
            try:
                p_values[f"{a}<{b}"] = paired_t_test(mses[a], mses[b])
            except DegenerateSample:
                p_values[f"{a}<{b}"] = None
    return EvaluationReport(
        cut_times=tuple(schedule),
        mses=mses,
        means=means,
        stds=stds,
        running=running,
        selections=selections,
        p_values=p_values,
    )
