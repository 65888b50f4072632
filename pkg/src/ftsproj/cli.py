"""Command-line front end.

Subcommands: `simulate` (shock-model dataset + trace), `forecast`
(one-step or h-step ahead), `update` (dynamic updating of the last
curve's tail), `tune` (k / theta / band-k selection) and `evaluate`
(holdout backtest across methods).  Flags override a key=value config
file, which overrides built-in defaults; the default seed can also come
from the FTSPROJ_SEED environment variable.  Exit codes: 0 ok, 1 usage,
2 data/domain error, 3 numeric failure.
"""

from __future__ import annotations

import argparse
import os
import sys
from pathlib import Path

import numpy as np

from . import io
from .backtest import MethodSpec, run_backtest
from .core import FocalSpec, candidate_set
from .envelope import build_envelope
from .errors import DataError, DomainError, NumericError
from .forecast import Weighting, ep_band, ep_point, fknn_band, fknn_point
from .metrics import coverage, mape, mse, winkler
from .benchmarks import fpcf_forecast, mean_predictor, naive_predictor, seasonal_naive
from .sim import ShockModelParams, generate_fts
from .tuning import TuningConfig, select_band_k, select_k, select_theta

SEED_ENV = "FTSPROJ_SEED"


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):  # exit 1 on usage problems, not argparse's 2
        raise UsageError(message)


def _build_parser() -> _Parser:
    parser = _Parser(prog="ftsproj", description=__doc__)
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p):
        p.add_argument("--config", help="key=value config file (flags take precedence)")
        p.add_argument("-o", "--output", help="main output file")
        p.add_argument("--emit-plot-data", action="store_true", default=None,
                       help="also write long-format (t,value,series) CSV next to the output")
        p.add_argument("--plot", action="store_true", default=None,
                       help="also render a PNG figure next to the output")

    p = sub.add_parser("simulate", help="generate a shock-model dataset CSV plus trace JSON")
    common(p)
    p.add_argument("--mu", type=float, help="expected proportion of shocked periods [0,1)")
    p.add_argument("--periods", type=int, help="number of unit periods (curves)")
    p.add_argument("--ppp", type=int, help="grid points per period")
    p.add_argument("--noise-lengthscale", type=float)
    p.add_argument("--periodic-lengthscale", type=float)
    p.add_argument("--shock-scale", type=float)
    p.add_argument("--seed", type=int)

    def forecasting(p, updating: bool):
        p.add_argument("--input", required=True, help="wide-CSV dataset")
        p.add_argument("--method", choices=["fknn", "ep", "mean", "naive", "snaive", "fpcf"])
        p.add_argument("--k", type=int, help="fKNN neighbors (omit to tune)")
        p.add_argument("--theta", type=float, help="exponential weight decay")
        p.add_argument("--weighting", choices=["invdist", "exp"])
        p.add_argument("--tune-theta", action="store_true", default=None,
                       help="pick theta by rolling-origin MSE (ep only)")
        p.add_argument("--season", type=int, help="seasonal-naive lag")
        p.add_argument("--threshold", type=float, help="FPCF explained-variance threshold")
        p.add_argument("--order", type=int, help="FPCF autoregression order")
        p.add_argument("--band-k", help="band size (integer) or 'tune'")
        p.add_argument("--alpha", type=float, help="band level for the Winkler score")
        p.add_argument("--folds", type=int, help="rolling-origin folds for tuning")
        if updating:
            p.add_argument("--q", type=float, required=True,
                           help="observed fraction of the last curve, in (0,1)")
        else:
            p.add_argument("--h", type=int, help="steps ahead (default 1)")

    p = sub.add_parser("forecast", help="forecast the next curve from a dataset")
    common(p)
    forecasting(p, updating=False)

    p = sub.add_parser("update", help="predict the unobserved tail of the last curve")
    common(p)
    forecasting(p, updating=True)

    p = sub.add_parser("tune", help="select k, theta, or band-k by rolling origin")
    common(p)
    p.add_argument("--input", required=True)
    p.add_argument("--target", choices=["k", "theta", "band-k"], required=True)
    p.add_argument("--mode", choices=["one-step", "updating"])
    p.add_argument("--q", type=float)
    p.add_argument("--weighting", choices=["invdist", "exp"])
    p.add_argument("--theta", type=float)
    p.add_argument("--source", choices=["fknn", "ep"], help="band source for --target band-k")
    p.add_argument("--alpha", type=float)
    p.add_argument("--folds", type=int)
    p.add_argument("--k-grid", help="comma-separated k values")
    p.add_argument("--theta-grid", help="comma-separated theta values")

    p = sub.add_parser("evaluate", help="holdout backtest over the last H curves")
    common(p)
    p.add_argument("--input", required=True)
    p.add_argument("--methods", help="comma list, e.g. naive,snaive:7,fknn,ep,fpcf")
    p.add_argument("--holdout", type=int, help="number of most recent curves to forecast")
    p.add_argument("--mode", choices=["one-step", "updating"])
    p.add_argument("--q", type=float)
    p.add_argument("--theta", type=float)
    p.add_argument("--weighting", choices=["invdist", "exp"])
    p.add_argument("--tune-theta", action="store_true", default=None)
    p.add_argument("--threshold", type=float)
    p.add_argument("--order", type=int)
    p.add_argument("--band-k", help="band size (integer) or 'tune'")
    p.add_argument("--alpha", type=float)
    p.add_argument("--folds", type=int)
    p.add_argument("--audit", action="store_true", default=None,
                   help="record data access and write a look-ahead audit report")
    return parser


DEFAULTS = {
    "simulate": {
        "mu": 0.0, "periods": 300, "ppp": 48, "noise_lengthscale": 0.2,
        "periodic_lengthscale": 1.0, "shock_scale": 10.0, "seed": None,
        "output": "dataset.csv",
    },
    "forecast": {
        "method": "ep", "k": None, "theta": None, "weighting": None,
        "tune_theta": False, "season": 7, "threshold": 0.80, "order": 1,
        "band_k": None, "alpha": 0.1, "folds": 20, "h": 1,
        "output": "forecast.json",
    },
    "update": {
        "method": "ep", "k": None, "theta": None, "weighting": None,
        "tune_theta": False, "season": 7, "threshold": 0.80, "order": 1,
        "band_k": None, "alpha": 0.1, "folds": 20,
        "output": "update.json",
    },
    "tune": {
        "mode": "one-step", "q": None, "weighting": None, "theta": None,
        "source": "ep", "alpha": 0.1, "folds": 20, "k_grid": None,
        "theta_grid": None, "output": "tuning.json",
    },
    "evaluate": {
        "methods": "mean,naive,fknn,ep", "holdout": 30, "mode": "one-step",
        "q": None, "theta": None, "weighting": None, "tune_theta": False,
        "threshold": 0.80, "order": 1, "band_k": None, "alpha": 0.1,
        "folds": 20, "audit": False, "output": "evaluation.csv",
    },
}

_BOOL_KEYS = {"emit_plot_data", "plot", "tune_theta", "audit"}
_INT_KEYS = {"periods", "ppp", "seed", "k", "season", "order", "folds", "holdout", "h"}
_FLOAT_KEYS = {
    "mu", "noise_lengthscale", "periodic_lengthscale", "shock_scale",
    "theta", "threshold", "alpha", "q",
}


def _load_config(path: str) -> dict:
    out = {}
    try:
        text = Path(path).read_text(encoding="utf-8")
    except OSError as exc:
        raise DataError(f"cannot read config {path}: {exc}") from None
    for lineno, line in enumerate(text.splitlines(), start=1):
        line = line.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise DataError(f"config line {lineno}: expected key = value")
        key, value = (part.strip() for part in line.split("=", 1))
        out[key.replace("-", "_")] = value
    return out


def _convert(key: str, raw: str):
    if key in _BOOL_KEYS:
        if raw.lower() in ("1", "true", "yes", "on"):
            return True
        if raw.lower() in ("0", "false", "no", "off"):
            return False
        raise DataError(f"config key {key}: expected a boolean, got {raw!r}")
    try:
        if key in _INT_KEYS:
            return int(raw)
        if key in _FLOAT_KEYS:
            return float(raw)
    except ValueError:
        raise DataError(f"config key {key}: cannot parse {raw!r}") from None
    return raw


def _merge_options(args: argparse.Namespace) -> dict:
    """Flags beat config file entries beat built-in defaults."""
    opts = vars(args).copy()
    config = _load_config(opts["config"]) if opts.get("config") else {}
    defaults = DEFAULTS[opts["command"]]
    for key, default in {**defaults, "emit_plot_data": False, "plot": False}.items():
        if opts.get(key) is None:
            if key in config:
                opts[key] = _convert(key, config[key])
            else:
                opts[key] = default
    if opts.get("seed") is None and opts["command"] == "simulate":
        env = os.environ.get(SEED_ENV)
        opts["seed"] = int(env) if env else 0
    return opts


def _resolve_weighting(opts) -> Weighting:
    kind = opts.get("weighting")
    theta = opts.get("theta")
    if kind == "exp" or (kind is None and theta is not None):
        return Weighting.exponential(theta if theta is not None else 1.0)
    return Weighting.inverse_distance()


def _parse_band_k(raw):
    if raw is None or raw == "tune":
        return raw
    try:
        return int(raw)
    except (TypeError, ValueError):
        raise UsageError(f"--band-k expects an integer or 'tune', got {raw!r}") from None


def _parse_methods(raw: str, opts) -> list[MethodSpec]:
    weighting = _resolve_weighting(opts)
    specs = []
    for token in raw.split(","):
        token = token.strip()
        if not token:
            continue
        name, _, param = token.partition(":")
        if name == "snaive":
            specs.append(MethodSpec("snaive", season=int(param) if param else 7))
        elif name == "fknn":
            specs.append(
                MethodSpec("fknn", k=int(param) if param else None, weighting=weighting)
            )
        elif name == "ep":
            specs.append(
                MethodSpec(
                    "ep",
                    weighting=Weighting.exponential(float(param)) if param else weighting,
                    tune_theta=bool(opts.get("tune_theta")),
                )
            )
        elif name in ("mean", "naive", "fpcf"):
            specs.append(
                MethodSpec(name, threshold=opts["threshold"], order=opts["order"])
            )
        else:
            raise UsageError(f"unknown method token {token!r}")
    if not specs:
        raise UsageError("no methods requested")
    return specs


def _spec_from_opts(opts, updating: bool) -> FocalSpec:
    if updating:
        if opts.get("q") is None:
            raise UsageError("dynamic updating needs --q")
        return FocalSpec.dynamic_updating(opts["q"])
    h = opts.get("h", 1) or 1
    return FocalSpec.one_step_ahead() if h == 1 else FocalSpec.h_step(h)


def _sibling(output: Path, suffix: str) -> Path:
    return output.with_name(output.stem + suffix)


# ---------------------------------------------------------------- simulate


def _cmd_simulate(opts) -> int:
    params = ShockModelParams(
        mu=opts["mu"],
        n_periods=opts["periods"],
        points_per_period=opts["ppp"],
        noise_lengthscale=opts["noise_lengthscale"],
        periodic_lengthscale=opts["periodic_lengthscale"],
        shock_scale=opts["shock_scale"],
        seed=opts["seed"],
    )
    dataset, trace = generate_fts(params)
    output = Path(opts["output"])
    io.save_dataset_csv(dataset, output)
    io.write_json(
        {
            "schema": "ftsproj.simtrace/1",
            "params": {
                "mu": params.mu,
                "periods": params.n_periods,
                "points_per_period": params.points_per_period,
                "noise_lengthscale": params.noise_lengthscale,
                "periodic_lengthscale": params.periodic_lengthscale,
                "shock_scale": params.shock_scale,
                "seed": params.seed,
            },
            "shock_offset": trace.shock_offset,
            "shock_states": trace.shock_states.tolist(),
            "noise": trace.noise.tolist(),
            "periodic": trace.periodic.tolist(),
            "shocks": trace.shocks.tolist(),
        },
        _sibling(output, "_trace.json"),
    )
    if opts["emit_plot_data"]:
        t = np.arange(trace.noise.size) / params.points_per_period
        rows = []
        rows += io.series_rows(t, trace.noise + trace.periodic + trace.shocks, "path")
        rows += io.series_rows(t, trace.noise, "noise")
        rows += io.series_rows(t, trace.periodic, "periodic")
        rows += io.series_rows(t, trace.shocks, "shocks")
        io.write_plot_data(rows, _sibling(output, "_plot.csv"))
    if opts["plot"]:
        from . import plotting

        plotting.save_simulation_figure(
            _sibling(output, ".png"), dataset, trace, params.points_per_period
        )
    print(f"wrote {output} ({dataset.n_curves} curves x {dataset.grid.m} points)")
    return 0


# ------------------------------------------------------- forecast / update


def _single_forecast(opts, updating: bool) -> int:
    dataset = io.load_csv(opts["input"])
    spec = _spec_from_opts(opts, updating)
    weighting = _resolve_weighting(opts)
    tuning = TuningConfig(folds=opts["folds"], alpha=opts["alpha"])
    method = opts["method"]
    band_k = _parse_band_k(opts.get("band_k"))

    focal, cands = candidate_set(dataset, spec)
    t_focal = spec.focal_points(dataset.grid)
    env = None
    params_extra: dict = {}

    if method == "fknn":
        k = opts.get("k")
        if k is None:
            result = select_k(dataset, spec, weighting, tuning)
            k = int(result.best)
            params_extra["k_tuned"] = True
        fc = fknn_point(cands, focal, t_focal, k, weighting)
    elif method == "ep":
        if opts["tune_theta"]:
            result = select_theta(dataset, spec, tuning)
            weighting = Weighting.exponential(float(result.best))
            params_extra["theta_tuned"] = True
        env = build_envelope(cands, focal, t_focal)
        fc = ep_point(env, cands, weighting)
    elif method == "mean":
        fc = mean_predictor(dataset, spec)
    elif method == "naive":
        fc = naive_predictor(dataset, spec)
    elif method == "snaive":
        fc = seasonal_naive(dataset, spec, opts["season"])
    else:
        fc = fpcf_forecast(dataset, spec, opts["threshold"], opts["order"])

    if band_k is not None and method in ("fknn", "ep"):
        if band_k == "tune":
            result = select_band_k(dataset, spec, method, opts["alpha"], tuning)
            band_k = int(result.best)
            params_extra["band_k_tuned"] = True
        if method == "fknn":
            band = fknn_band(cands, focal, t_focal, min(band_k, len(cands)))
        else:
            band = ep_band(env, cands, focal, min(band_k, len(env)))
        fc.lower, fc.upper = band.lower, band.upper
        fc.params = {**fc.params, "band_k": band.params["k"]}

    # in dynamic updating the realized tail is in the input, so score it
    truth = None
    metrics = None
    if updating:
        _, (p0, p1) = spec.split(dataset.grid)
        truth = dataset.values[-1, p0:p1]
        metrics = {"mse": mse(fc.point, truth)}
        try:
            metrics["mape"] = mape(fc.point, truth)
        except DomainError:
            pass
        if fc.has_band:
            metrics["coverage"] = coverage(fc.lower, fc.upper, truth)
            metrics["winkler"] = winkler(fc.lower, fc.upper, truth, opts["alpha"])

    output = Path(opts["output"])
    t_pred = spec.projection_points(dataset.grid)
    io.write_json(
        {
            "schema": "ftsproj.forecast/1",
            "input": str(opts["input"]),
            "mode": spec.mode,
            "q": spec.q,
            "h": spec.h if spec.mode == "h-step" else None,
            "method": fc.method,
            "params": {**fc.params, **params_extra},
            "prediction_points": t_pred.tolist(),
            "point": fc.point.tolist() if fc.point is not None else None,
            "band": {"lower": fc.lower.tolist(), "upper": fc.upper.tolist()}
            if fc.has_band
            else None,
            "weights": fc.weights.tolist() if fc.weights is not None else None,
            "contributors": fc.contributors,
            "truth": truth.tolist() if truth is not None else None,
            "metrics": metrics,
        },
        output,
    )
    if opts["emit_plot_data"]:
        rows = io.series_rows(t_focal, focal, "focal")
        if fc.point is not None:
            rows += io.series_rows(t_pred, fc.point, "point")
        if fc.has_band:
            rows += io.series_rows(t_pred, fc.lower, "lower")
            rows += io.series_rows(t_pred, fc.upper, "upper")
        if truth is not None:
            rows += io.series_rows(t_pred, truth, "truth")
        io.write_plot_data(rows, _sibling(output, "_plot.csv"))
    if opts["plot"]:
        from . import plotting

        plotting.save_forecast_figure(_sibling(output, ".png"), dataset, spec, fc, truth)
    print(f"wrote {output} ({fc.method}, {len(t_pred)} predicted points)")
    return 0


# ------------------------------------------------------------------- tune


def _cmd_tune(opts) -> int:
    dataset = io.load_csv(opts["input"])
    updating = opts["mode"] == "updating"
    spec = _spec_from_opts(opts, updating)
    k_grid = None
    if opts.get("k_grid"):
        k_grid = tuple(int(v) for v in str(opts["k_grid"]).split(","))
    theta_grid = TuningConfig().theta_grid
    if opts.get("theta_grid"):
        theta_grid = tuple(float(v) for v in str(opts["theta_grid"]).split(","))
    tuning = TuningConfig(
        folds=opts["folds"], k_grid=k_grid, theta_grid=theta_grid, alpha=opts["alpha"]
    )

    target = opts["target"]
    if target == "k":
        result = select_k(dataset, spec, _resolve_weighting(opts), tuning)
        score_name = "mse"
    elif target == "theta":
        result = select_theta(dataset, spec, tuning)
        score_name = "mse"
    else:
        result = select_band_k(dataset, spec, opts["source"], opts["alpha"], tuning)
        score_name = "winkler"

    output = Path(opts["output"])
    io.write_json(
        {
            "schema": "ftsproj.tuning/1",
            "input": str(opts["input"]),
            "mode": spec.mode,
            "target": target,
            "score": score_name,
            "alpha": opts["alpha"] if target == "band-k" else None,
            "folds": opts["folds"],
            "best": result.best,
            "score_table": {str(k): v for k, v in result.score_table.items()},
        },
        output,
    )
    print(f"wrote {output} (best {target} = {result.best})")
    return 0


# --------------------------------------------------------------- evaluate


def _cmd_evaluate(opts) -> int:
    dataset = io.load_csv(opts["input"])
    updating = opts["mode"] == "updating"
    spec = _spec_from_opts(opts, updating)
    methods = _parse_methods(opts["methods"], opts)
    tuning = TuningConfig(folds=opts["folds"], alpha=opts["alpha"])
    result = run_backtest(
        dataset,
        spec,
        methods,
        holdout=opts["holdout"],
        band_k=_parse_band_k(opts.get("band_k")),
        alpha=opts["alpha"],
        tuning=tuning,
        audit=bool(opts["audit"]),
    )

    output = Path(opts["output"])
    summary_header = (
        "method", "n_forecasts", "mse", "mse_ratio", "mape",
        "coverage", "winkler", "band_width", "params",
    )
    summary_rows = [
        (
            s.method, s.n_forecasts, s.mse, s.mse_ratio, s.mape,
            s.coverage, s.winkler, s.band_width,
            ";".join(f"{k}={v}" for k, v in sorted(s.params.items())) or None,
        )
        for s in result.summaries
    ]
    io.write_table_csv(summary_header, summary_rows, output)

    per_header = ("origin", "method", "mse", "mape", "coverage", "winkler", "band_width")
    per_rows = [
        (r.origin, r.method, r.mse, r.mape, r.coverage, r.winkler, r.band_width)
        for r in result.records
    ]
    io.write_table_csv(per_header, per_rows, _sibling(output, "_per_forecast.csv"))

    if opts["audit"]:
        io.write_json(
            {"schema": "ftsproj.audit/1", **result.audit}, _sibling(output, "_audit.json")
        )
    if opts["emit_plot_data"]:
        t_pred = spec.projection_points(dataset.grid)
        rows = []
        for origin in result.origins:
            rows += io.series_rows(t_pred, result.truths[origin], f"origin{origin}/truth")
        for r in result.records:
            if r.forecast.point is not None:
                rows += io.series_rows(t_pred, r.forecast.point, f"origin{r.origin}/{r.method}")
        io.write_plot_data(rows, _sibling(output, "_plot.csv"))
    if opts["plot"]:
        from . import plotting

        plotting.save_backtest_figure(_sibling(output, ".png"), result)

    best = min(result.summaries, key=lambda s: s.mse)
    print(f"wrote {output} ({len(result.origins)} origins; best method {best.method}, mse {best.mse:.6g})")
    if opts["audit"]:
        print(f"audit: {result.audit['total_violations']} look-ahead violations")
    return 0


def main(argv=None) -> int:
    parser = _build_parser()
    try:
        args = parser.parse_args(argv)
        opts = _merge_options(args)
        if opts["command"] == "simulate":
            return _cmd_simulate(opts)
        if opts["command"] == "forecast":
            return _single_forecast(opts, updating=False)
        if opts["command"] == "update":
            return _single_forecast(opts, updating=True)
        if opts["command"] == "tune":
            return _cmd_tune(opts)
        return _cmd_evaluate(opts)
    except UsageError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except (DataError, DomainError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except NumericError as exc:
        print(f"numeric failure: {exc}", file=sys.stderr)
        return 3


if __name__ == "__main__":
    sys.exit(main())
