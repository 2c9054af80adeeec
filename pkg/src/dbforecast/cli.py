"""Batch command-line interface: dataset generation, discrepancy estimation,
model fitting, forecasting, and rolling-origin evaluation.

Commands
--------
generate
    Write a synthetic series to CSV (``index,value`` header, 1-based index).
discrepancy
    Estimate instantaneous discrepancies for a CSV series and write JSON.
fit / forecast
    Fit one algorithm (optionally forecasting ``--horizon`` steps) and write
    the fitted representation to JSON.
evaluate
    Run the rolling-origin protocol over one or more algorithms and write an
    evaluation report to JSON, optionally with plot-data CSVs.

Conventions
-----------
* Option precedence is flags > ``--config`` JSON file > built-in defaults.
  Config keys use the flag names with underscores (``lam1_grid``).
* Output files are written to a temporary file in the destination directory
  and renamed into place, so failures never leave partial output.
* JSON uses sorted keys; non-finite floats are serialized as the strings
  ``"inf"``/``"-inf"``/``"nan"`` to keep the output strictly parseable.
* Exit codes: 0 success, 1 usage error, 2 data error, 3 numerical failure.
* The optional ``THREADS`` environment variable caps evaluation parallelism.
"""

from __future__ import annotations

import argparse
import json
import math
import os
import sys
import tempfile

import numpy as np

from .baseline import ArimaOrder, fit_arima, forecast_arima
from .core import (
    DataFormatError,
    DbfError,
    NonFiniteData,
    RegressionDataset,
    SeriesTooShort,
    TimeSeries,
    WeightVector,
    embed_lags,
)
from .datagen import GeneratorSpec, generate
from .discrepancy import BallConstraint, instantaneous_discrepancies, target_proxy
from .evaluation import (
    ArimaAdapter,
    DbfAdapter,
    LAM1_GRID,
    LAM2_GRID,
    ProtocolSpec,
    RidgeAdapter,
    TwoStageAdapter,
    default_radius,
    resolve_schedule,
    run_protocol,
)
from .kernels import KernelSpec, linear_kernel, polynomial_kernel, rbf_kernel
from .solvers import (
    FitResult,
    SolverConfig,
    fit_dbf_alternating,
    fit_dbf_convex,
    fit_dbf_dual,
    fit_two_stage,
    predict,
    weighted_ridge_primal,
)

EXIT_OK = 0
EXIT_USAGE = 1
EXIT_DATA = 2
EXIT_NUMERIC = 3

_DATASET_NAMES = ("ads1", "ads2", "ads3", "ads4", "markov")
_FIT_ALGORITHMS = ("dbf-alt", "dbf-convex", "dbf-dual", "two-stage", "ridge", "arima")
_EVAL_ALGORITHMS = ("tdbf", "edbf", "dbf-convex", "dbf-dual", "two-stage", "ridge", "arima")
_DBF_NORM_P = {"dbf-alt": 1.0, "dbf-convex": 2.0, "dbf-dual": 2.0}


class UsageError(Exception):
    """Bad flags or flag combinations discovered after parsing."""


# ---------------------------------------------------------------------------
# file formats


def _atomic_write_text(path: str, text: str) -> None:
    """Write ``text`` to ``path`` via a temp file + rename in one directory."""
    directory = os.path.dirname(os.path.abspath(path))
    fd, tmp = tempfile.mkstemp(dir=directory, prefix=".dbforecast-", suffix=".tmp")
    try:
        with os.fdopen(fd, "w", encoding="utf-8", newline="") as handle:
            handle.write(text)
        os.replace(tmp, path)
    except BaseException:
        try:
            os.unlink(tmp)
        except OSError:
            pass
        raise


def write_series_csv(path: str, values) -> None:
    """Write a series as ``index,value`` CSV with a 1-based index column."""
    lines = ["index,value"]
    for i, v in enumerate(np.asarray(values, dtype=float), start=1):
        lines.append(f"{i},{float(v)!r}")
    _atomic_write_text(path, "\n".join(lines) + "\n")


def read_series_csv(path: str) -> TimeSeries:
    """Parse an ``index,value`` CSV; errors carry ``path:line`` context."""
    try:
        with open(path, "r", encoding="utf-8") as handle:
            lines = handle.read().splitlines()
    except OSError as exc:
        raise DataFormatError(f"{path}: {exc.strerror or exc}") from exc
    if not lines:
        raise DataFormatError(f"{path}:1: empty file, expected 'index,value' header")
    if lines[0].strip() != "index,value":
        raise DataFormatError(f"{path}:1: expected header 'index,value', got {lines[0]!r}")
    values = []
    for lineno, line in enumerate(lines[1:], start=2):
        if not line.strip():
            continue
        parts = line.split(",")
        if len(parts) != 2:
            raise DataFormatError(
                f"{path}:{lineno}: expected two comma-separated fields, got {len(parts)}"
            )
        try:
            int(parts[0])
            value = float(parts[1])
        except ValueError as exc:
            raise DataFormatError(f"{path}:{lineno}: {exc}") from exc
        values.append(value)
    if not values:
        raise DataFormatError(f"{path}: no data rows")
    try:
        return TimeSeries(values=np.array(values))
    except NonFiniteData as exc:
        raise DataFormatError(f"{path}: {exc}") from exc


def _jsonable(obj):
    """Recursively convert numpy containers/scalars for strict JSON output."""
    if isinstance(obj, dict):
        return {str(k): _jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_jsonable(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return [_jsonable(v) for v in obj.tolist()]
    if isinstance(obj, (bool, np.bool_)):
        return bool(obj)
    if isinstance(obj, (float, np.floating)):
        value = float(obj)
        return value if math.isfinite(value) else repr(value)
    if isinstance(obj, (int, np.integer)):
        return int(obj)
    return obj


def write_json(path: str, doc: dict) -> None:
    _atomic_write_text(path, json.dumps(_jsonable(doc), sort_keys=True, indent=2) + "\n")


# ---------------------------------------------------------------------------
# option plumbing


def _load_config(path):
    if path is None:
        return {}
    try:
        with open(path, "r", encoding="utf-8") as handle:
            text = handle.read()
    except OSError as exc:
        raise DataFormatError(f"{path}: {exc.strerror or exc}") from exc
    try:
        obj = json.loads(text)
    except json.JSONDecodeError as exc:
        raise DataFormatError(f"{path}:{exc.lineno}: invalid JSON: {exc.msg}") from exc
    if not isinstance(obj, dict):
        raise DataFormatError(f"{path}: config must be a JSON object")
    return obj


def _resolve_options(args, defaults: dict) -> dict:
    """Merge flags > config file > defaults into one plain dict."""
    config = _load_config(getattr(args, "config", None))
    unknown = sorted(set(config) - set(defaults))
    if unknown:
        raise UsageError(f"unknown config keys: {', '.join(unknown)}")
    resolved = {}
    for key, default in defaults.items():
        value = getattr(args, key, None)
        if value is None:
            value = config.get(key, default)
        resolved[key] = value
    return resolved


def _require(cfg: dict, key: str, flag: str):
    if cfg[key] is None:
        raise UsageError(f"{flag} is required")
    return cfg[key]


def _parse_float_list(value, flag: str):
    if isinstance(value, (list, tuple)):
        return tuple(float(v) for v in value)
    try:
        return tuple(float(tok) for tok in str(value).split(",") if tok.strip())
    except ValueError as exc:
        raise UsageError(f"{flag}: expected comma-separated numbers, got {value!r}") from exc


def _parse_schedule(value):
    """``START:STOP:STEP`` (inclusive stop) or comma-separated cut times."""
    if value is None:
        return None
    if isinstance(value, (list, tuple)):
        return tuple(int(v) for v in value)
    text = str(value)
    try:
        if ":" in text:
            parts = text.split(":")
            if len(parts) != 3:
                raise UsageError(f"--schedule: expected START:STOP:STEP, got {value!r}")
            start, stop, step = (int(p) for p in parts)
            return tuple(range(start, stop + 1, step))
        return tuple(int(tok) for tok in text.split(",") if tok.strip())
    except ValueError as exc:
        raise UsageError(f"--schedule: could not parse {value!r}") from exc


def _parse_order(value):
    if isinstance(value, (list, tuple)):
        parts = [int(v) for v in value]
    else:
        try:
            parts = [int(tok) for tok in str(value).split(",")]
        except ValueError as exc:
            raise UsageError(f"--order: expected p,d,q integers, got {value!r}") from exc
    if len(parts) != 3:
        raise UsageError(f"--order: expected three components p,d,q, got {value!r}")
    return tuple(parts)


def _kernel_from(cfg: dict) -> KernelSpec:
    kind = cfg["kernel"]
    if kind == "linear":
        return linear_kernel()
    if kind == "rbf":
        return rbf_kernel(float(cfg["gamma"]))
    if kind == "poly":
        return polynomial_kernel(int(cfg["degree"]), float(cfg["offset"]))
    raise UsageError(f"unknown kernel {kind!r} (choose linear, rbf, or poly)")


def _kernel_doc(kernel: KernelSpec) -> dict:
    return {
        "kind": kernel.kind,
        "degree": kernel.degree,
        "offset": kernel.offset,
        "gamma": kernel.gamma,
    }


def _workers() -> int:
    raw = os.environ.get("THREADS")
    if raw is None:
        return 1
    try:
        n = int(raw)
    except ValueError as exc:
        raise UsageError(f"THREADS must be an integer, got {raw!r}") from exc
    if n < 1:
        raise UsageError("THREADS must be >= 1")
    return n


def _generated_series(cfg: dict):
    dataset = cfg["dataset"]
    if dataset not in _DATASET_NAMES:
        raise UsageError(
            f"unknown dataset {dataset!r} (choose {', '.join(_DATASET_NAMES)})"
        )
    spec = GeneratorSpec(
        which=dataset,
        T=int(cfg["length"]),
        seed=int(cfg["seed"]),
        sigma=float(cfg["sigma"]),
        markov_states=int(cfg["markov_states"]),
        markov_p=float(cfg["markov_p"]),
    )
    return generate(spec)


# ---------------------------------------------------------------------------
# commands

_GENERATE_DEFAULTS = {
    "dataset": None,
    "length": 3000,
    "seed": 1,
    "sigma": 0.05,
    "markov_states": 10,
    "markov_p": 0.7,
    "out": None,
}


def cmd_generate(cfg: dict) -> int:
    _require(cfg, "dataset", "--dataset")
    out = _require(cfg, "out", "--out")
    result = _generated_series(cfg)
    write_series_csv(out, result.series.values)
    return EXIT_OK


_DISCREPANCY_DEFAULTS = {
    "input": None,
    "lag": 3,
    "kernel": "linear",
    "gamma": 1.0,
    "degree": 2,
    "offset": 0.0,
    "radius": None,
    "proxy_len": 20,
    "window": 0,
    "out": None,
}


def cmd_discrepancy(cfg: dict) -> int:
    path = _require(cfg, "input", "--input")
    out = _require(cfg, "out", "--out")
    series = read_series_csv(path)
    data = embed_lags(series, int(cfg["lag"]))
    kernel = _kernel_from(cfg)
    radius = float(cfg["radius"]) if cfg["radius"] is not None else default_radius(data)
    s_eff = min(int(cfg["proxy_len"]), len(data))
    proxy = target_proxy(len(data), s_eff)
    result = instantaneous_discrepancies(
        data, kernel, BallConstraint(radius), proxy, l=int(cfg["window"])
    )
    write_json(
        out,
        {
            "d": list(result.d),
            "s": s_eff,
            "l": int(cfg["window"]),
            "lambda_cap": radius,
            "kernel": _kernel_doc(kernel),
        },
    )
    return EXIT_OK


_FIT_DEFAULTS = {
    "input": None,
    "algorithm": None,
    "lag": 3,
    "kernel": "linear",
    "gamma": 1.0,
    "degree": 2,
    "offset": 0.0,
    "radius": None,
    "proxy_len": 20,
    "window": 0,
    "lam1": 1e-4,
    "lam2": 0.1,
    "order": "1,0,0",
    "out": None,
}

_FORECAST_DEFAULTS = dict(_FIT_DEFAULTS, horizon=25)


def _fit_result_doc(algorithm: str, fit: FitResult, hyper: dict) -> dict:
    doc = {
        "algorithm": algorithm,
        "hyperparameters": hyper,
        "q": list(fit.q.weights),
        "objective_trace": list(fit.objective_trace),
        "iterations": fit.iterations,
        "converged": fit.converged,
    }
    if fit.kind == "primal":
        doc["coefficients"] = list(fit.coefficients)
    else:
        doc["alpha"] = list(fit.coefficients)
        doc["dual_scale"] = fit.dual_scale
    if fit.r is not None:
        doc["r"] = list(fit.r)
    return doc


def _fit_on_series(series: TimeSeries, cfg: dict):
    """Fit the requested algorithm; return (json doc, one-step predictor).

    The predictor maps a history array to the next-value forecast and is
    reused by ``cmd_forecast`` for recursive multi-step forecasts.
    """
    algorithm = cfg["algorithm"]
    if algorithm not in _FIT_ALGORITHMS:
        raise UsageError(
            f"unknown algorithm {algorithm!r} (choose {', '.join(_FIT_ALGORITHMS)})"
        )

    if algorithm == "arima":
        order = _parse_order(cfg["order"])
        model = fit_arima(series, ArimaOrder(*order))
        doc = {
            "algorithm": algorithm,
            "hyperparameters": {"order": list(order)},
            "coefficients": {
                "phi": list(model.phi),
                "theta": list(model.theta),
                "intercept": model.intercept,
                "sigma2": model.sigma2,
            },
            "q": None,
            "objective_trace": [],
            "converged": model.converged,
        }

        def predictor(history):
            return float(
                forecast_arima(model, TimeSeries(values=np.asarray(history)), 1)[0]
            )

        return doc, predictor

    lag = int(cfg["lag"])
    data = embed_lags(series, lag)
    kernel = _kernel_from(cfg)

    if algorithm == "ridge":
        if kernel.kind != "linear":
            raise UsageError("ridge supports the linear kernel only")
        n = len(data)
        uniform = WeightVector(weights=np.full(n, 1.0 / n))
        w = weighted_ridge_primal(data, uniform, float(cfg["lam1"]))
        doc = {
            "algorithm": algorithm,
            "hyperparameters": {"lag": lag, "lam1": float(cfg["lam1"])},
            "coefficients": list(w),
            "q": None,
            "objective_trace": [],
        }
        return doc, lambda history: float(w @ np.asarray(history)[-lag:])

    radius = float(cfg["radius"]) if cfg["radius"] is not None else default_radius(data)
    hyper = {
        "lag": lag,
        "lam2": float(cfg["lam2"]),
        "radius": radius,
        "proxy_len": int(cfg["proxy_len"]),
        "kernel": _kernel_doc(kernel),
    }

    if algorithm == "two-stage":
        config = SolverConfig(
            lam2=float(cfg["lam2"]), radius=radius, s=int(cfg["proxy_len"])
        )
        fit = fit_two_stage(data, kernel, config)
    else:
        hyper["lam1"] = float(cfg["lam1"])
        hyper["window"] = int(cfg["window"])
        config = SolverConfig(
            lam1=float(cfg["lam1"]),
            lam2=float(cfg["lam2"]),
            radius=radius,
            norm_p=_DBF_NORM_P[algorithm],
            s=int(cfg["proxy_len"]),
            l=int(cfg["window"]),
        )
        fitter = {
            "dbf-alt": fit_dbf_alternating,
            "dbf-convex": fit_dbf_convex,
            "dbf-dual": fit_dbf_dual,
        }[algorithm]
        fit = fitter(data, kernel, config)

    doc = _fit_result_doc(algorithm, fit, hyper)

    def predictor(history):
        x = np.asarray(history)[-lag:]
        return predict(fit, kernel, data.features, x)

    return doc, predictor


def cmd_fit(cfg: dict) -> int:
    path = _require(cfg, "input", "--input")
    out = _require(cfg, "out", "--out")
    series = read_series_csv(path)
    doc, _ = _fit_on_series(series, cfg)
    write_json(out, doc)
    return EXIT_OK


def cmd_forecast(cfg: dict) -> int:
    path = _require(cfg, "input", "--input")
    out = _require(cfg, "out", "--out")
    horizon = int(cfg["horizon"])
    if horizon < 1:
        raise UsageError("--horizon must be >= 1")
    series = read_series_csv(path)
    doc, predictor = _fit_on_series(series, cfg)
    history = list(series.values)
    forecasts = []
    for _ in range(horizon):
        forecasts.append(predictor(np.asarray(history)))
        history.append(forecasts[-1])
    doc["forecasts"] = forecasts
    doc["horizon"] = horizon
    write_json(out, doc)
    return EXIT_OK


_EVALUATE_DEFAULTS = {
    "input": None,
    "dataset": None,
    "length": 3000,
    "seed": 1,
    "sigma": 0.05,
    "markov_states": 10,
    "markov_p": 0.7,
    "algorithms": "edbf,arima",
    "lag": 3,
    "lam1_grid": LAM1_GRID,
    "lam2_grid": LAM2_GRID,
    "arima_max_order": 2,
    "schedule": None,
    "dev_holdout": 25,
    "horizon": 25,
    "min_train": 50,
    "test_mode": "recursive",
    "proxy_len": 20,
    "window": 0,
    "emit_plots": None,
    "out": None,
}


def _evaluation_algorithms(names, cfg: dict, coefficients):
    lag = int(cfg["lag"])
    lam1_grid = _parse_float_list(cfg["lam1_grid"], "--lam1-grid")
    lam2_grid = _parse_float_list(cfg["lam2_grid"], "--lam2-grid")
    max_order = int(cfg["arima_max_order"])
    if not 0 <= max_order <= 2:
        raise UsageError("--arima-max-order must be 0, 1, or 2")
    orders = tuple(
        (p, d, q)
        for p in range(max_order + 1)
        for d in range(max_order + 1)
        for q in range(max_order + 1)
    )
    s, l = int(cfg["proxy_len"]), int(cfg["window"])

    built = []
    for name in names:
        if name == "tdbf":
            if coefficients is None or coefficients.size == 0:
                raise UsageError(
                    "tdbf needs the generating coefficients; use --dataset with an"
                    " autoregressive dataset (ads1..ads4), not --input"
                )
            built.append(
                DbfAdapter(
                    variant="alt",
                    lag=lag,
                    lam1_grid=lam1_grid,
                    lam2_grid=lam2_grid,
                    s=s,
                    l=l,
                    generator_coefficients=coefficients,
                    generator_sigma=float(cfg["sigma"]),
                    name="tdbf",
                )
            )
        elif name == "edbf":
            built.append(
                DbfAdapter(
                    variant="alt",
                    lag=lag,
                    lam1_grid=lam1_grid,
                    lam2_grid=lam2_grid,
                    s=s,
                    l=l,
                    name="edbf",
                )
            )
        elif name in ("dbf-convex", "dbf-dual"):
            built.append(
                DbfAdapter(
                    variant=name.split("-")[1],
                    lag=lag,
                    lam1_grid=lam1_grid,
                    lam2_grid=lam2_grid,
                    s=s,
                    l=l,
                    name=name,
                )
            )
        elif name == "two-stage":
            built.append(TwoStageAdapter(lag=lag, lam2_grid=lam1_grid, s=s))
        elif name == "ridge":
            built.append(RidgeAdapter(lag=lag, lam1_grid=lam1_grid))
        elif name == "arima":
            built.append(ArimaAdapter(orders=orders))
        else:
            raise UsageError(
                f"unknown algorithm {name!r} (choose {', '.join(_EVAL_ALGORITHMS)})"
            )
    return built


def _emit_plot_data(directory, series, report, algorithms, spec) -> None:
    """Write plot-source CSVs: running MSE, per-cut q weights, forecasts."""
    os.makedirs(directory, exist_ok=True)
    names = [a.name for a in algorithms]

    lines = ["cut_time," + ",".join(names)]
    for k, t in enumerate(report.cut_times):
        row = [str(t)] + [repr(float(report.running[n][k])) for n in names]
        lines.append(",".join(row))
    _atomic_write_text(os.path.join(directory, "running_mse.csv"), "\n".join(lines) + "\n")

    q_lines = ["algorithm,cut_time,row,weight"]
    f_lines = ["algorithm,cut_time,step,forecast,truth"]
    values = series.values
    for adapter in algorithms:
        for k, t in enumerate(report.cut_times):
            params = report.selections[adapter.name][k]
            prefix = TimeSeries(values=values[:t])
            try:
                state = adapter.fit(prefix, params)
                forecast = np.asarray(adapter.forecast(state, prefix, spec.test_horizon))
            except DbfError:
                continue
            truth = values[t : t + spec.test_horizon]
            for step in range(len(truth)):
                f_lines.append(
                    f"{adapter.name},{t},{step + 1},"
                    f"{float(forecast[step])!r},{float(truth[step])!r}"
                )
            fit = state[0] if isinstance(state, tuple) else state
            if isinstance(fit, FitResult):
                for row, weight in enumerate(fit.q.weights):
                    q_lines.append(f"{adapter.name},{t},{row},{float(weight)!r}")
    _atomic_write_text(os.path.join(directory, "forecasts.csv"), "\n".join(f_lines) + "\n")
    if len(q_lines) > 1:
        _atomic_write_text(os.path.join(directory, "q_weights.csv"), "\n".join(q_lines) + "\n")


def cmd_evaluate(cfg: dict) -> int:
    out = _require(cfg, "out", "--out")
    if (cfg["input"] is None) == (cfg["dataset"] is None):
        raise UsageError("exactly one of --input or --dataset is required")

    coefficients = None
    if cfg["dataset"] is not None:
        result = _generated_series(cfg)
        series = result.series
        coefficients = result.coefficients
        source = {
            "dataset": cfg["dataset"],
            "length": int(cfg["length"]),
            "seed": int(cfg["seed"]),
            "sigma": float(cfg["sigma"]),
        }
    else:
        series = read_series_csv(cfg["input"])
        source = {"input": cfg["input"]}

    names = [tok.strip() for tok in str(cfg["algorithms"]).split(",") if tok.strip()]
    if not names:
        raise UsageError("--algorithms must name at least one algorithm")
    algorithms = _evaluation_algorithms(names, cfg, coefficients)

    spec = ProtocolSpec(
        schedule=_parse_schedule(cfg["schedule"]),
        dev_holdout=int(cfg["dev_holdout"]),
        test_horizon=int(cfg["horizon"]),
        min_train=int(cfg["min_train"]),
        test_mode=str(cfg["test_mode"]),
    )
    report = run_protocol(series, algorithms, spec, workers=_workers())

    doc = {
        "source": source,
        "algorithms": names,
        "protocol": {
            "schedule": list(resolve_schedule(spec, len(series.values))),
            "dev_holdout": spec.dev_holdout,
            "test_horizon": spec.test_horizon,
            "min_train": spec.min_train,
            "test_mode": spec.test_mode,
        },
        "cut_times": list(report.cut_times),
        "mses": {k: list(v) for k, v in report.mses.items()},
        "means": dict(report.means),
        "stds": dict(report.stds),
        "running": {k: list(v) for k, v in report.running.items()},
        "selections": {k: list(v) for k, v in report.selections.items()},
        "p_values": dict(report.p_values),
    }
    write_json(out, doc)

    if cfg["emit_plots"] is not None:
        _emit_plot_data(cfg["emit_plots"], series, report, algorithms, spec)
    return EXIT_OK


# ---------------------------------------------------------------------------
# parser


class _Parser(argparse.ArgumentParser):
    """ArgumentParser that exits 1 (not 2) on usage errors."""

    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


def _add_common(parser):
    parser.add_argument("--config", help="JSON file with default option values")
    parser.add_argument("--out", help="output file path")


def _add_kernel_flags(parser):
    parser.add_argument("--kernel", help="kernel: linear (default), rbf, or poly")
    parser.add_argument("--gamma", type=float, help="rbf kernel width parameter")
    parser.add_argument("--degree", type=int, help="poly kernel degree")
    parser.add_argument("--offset", type=float, help="poly kernel offset term")


def _add_fit_flags(parser):
    parser.add_argument("--input", help="input series CSV (index,value)")
    parser.add_argument("--lag", type=int, help="autoregressive embedding length")
    parser.add_argument("--radius", type=float, help="hypothesis-ball radius (default: data-driven)")
    parser.add_argument("--proxy-len", dest="proxy_len", type=int, help="proxy window length s")
    parser.add_argument("--window", type=int, help="discrepancy smoothing half-width l")
    _add_kernel_flags(parser)


def _build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="dbforecast", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", metavar="command")

    g = sub.add_parser("generate", help="write a synthetic series to CSV")
    g.add_argument("--dataset", help=f"one of {', '.join(_DATASET_NAMES)}")
    g.add_argument("--length", type=int, help="series length T")
    g.add_argument("--seed", type=int, help="generator seed")
    g.add_argument("--sigma", type=float, help="innovation standard deviation")
    g.add_argument("--markov-states", dest="markov_states", type=int)
    g.add_argument("--markov-p", dest="markov_p", type=float)
    _add_common(g)
    g.set_defaults(handler=cmd_generate, defaults=_GENERATE_DEFAULTS)

    d = sub.add_parser("discrepancy", help="estimate instantaneous discrepancies")
    _add_fit_flags(d)
    _add_common(d)
    d.set_defaults(handler=cmd_discrepancy, defaults=_DISCREPANCY_DEFAULTS)

    for cmd, handler, defaults in (
        ("fit", cmd_fit, _FIT_DEFAULTS),
        ("forecast", cmd_forecast, _FORECAST_DEFAULTS),
    ):
        f = sub.add_parser(cmd, help=f"{cmd} one algorithm on a CSV series")
        f.add_argument("--algorithm", help=f"one of {', '.join(_FIT_ALGORITHMS)}")
        _add_fit_flags(f)
        f.add_argument("--lam1", type=float, help="hypothesis regularization weight")
        f.add_argument("--lam2", type=float, help="weight-deviation regularization")
        f.add_argument("--order", help="arima order as p,d,q")
        if cmd == "forecast":
            f.add_argument("--horizon", type=int, help="forecast steps")
        _add_common(f)
        f.set_defaults(handler=handler, defaults=defaults)

    e = sub.add_parser("evaluate", help="run the rolling-origin protocol")
    e.add_argument("--input", help="input series CSV (index,value)")
    e.add_argument("--dataset", help="generate this dataset instead of reading --input")
    e.add_argument("--length", type=int, help="generated series length")
    e.add_argument("--seed", type=int, help="generator seed")
    e.add_argument("--sigma", type=float, help="generator innovation std dev")
    e.add_argument("--markov-states", dest="markov_states", type=int)
    e.add_argument("--markov-p", dest="markov_p", type=float)
    e.add_argument("--algorithms", help=f"comma list from {', '.join(_EVAL_ALGORITHMS)}")
    e.add_argument("--lag", type=int, help="autoregressive embedding length")
    e.add_argument("--lam1-grid", dest="lam1_grid", help="comma list of lam1 values")
    e.add_argument("--lam2-grid", dest="lam2_grid", help="comma list of lam2 values")
    e.add_argument("--arima-max-order", dest="arima_max_order", type=int,
                   help="grid covers all orders with p,d,q <= this")
    e.add_argument("--schedule", help="cut times: START:STOP:STEP or comma list")
    e.add_argument("--dev-holdout", dest="dev_holdout", type=int)
    e.add_argument("--horizon", type=int, help="test horizon per cut")
    e.add_argument("--min-train", dest="min_train", type=int)
    e.add_argument("--test-mode", dest="test_mode", help="recursive or one_step")
    e.add_argument("--proxy-len", dest="proxy_len", type=int)
    e.add_argument("--window", type=int)
    e.add_argument("--emit-plots", dest="emit_plots", metavar="DIR",
                   help="also write plot-data CSVs to DIR")
    _add_common(e)
    e.set_defaults(handler=cmd_evaluate, defaults=_EVALUATE_DEFAULTS)

    return parser


def main(argv=None) -> int:
    parser = _build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code) if exc.code else EXIT_OK
    if not hasattr(args, "handler"):
        parser.print_usage(sys.stderr)
        print(f"{parser.prog}: error: a command is required", file=sys.stderr)
        return EXIT_USAGE
    try:
        cfg = _resolve_options(args, args.defaults)
        return args.handler(cfg)
    except UsageError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except ValueError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except (DataFormatError, NonFiniteData, SeriesTooShort) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_DATA
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_DATA
    except (DbfError, np.linalg.LinAlgError, FloatingPointError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_NUMERIC


if __name__ == "__main__":
    sys.exit(main())
