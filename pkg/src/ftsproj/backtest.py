"""Holdout backtesting across methods, with a data-access audit mode.

The harness forecasts each of the last `holdout` curves using only data
strictly before it (in dynamic updating: before it plus its observed
head), scores every requested method, and aggregates per-method means
plus the MSE ratio against the best method.  Hyperparameters are tuned
once on the pre-holdout prefix.  In audit mode every curve read performed
by forecasting code is recorded and checked against the fold's origin, so
a zero-violation report certifies that no method saw the future.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .benchmarks import fpcf_forecast, mean_predictor, naive_predictor, seasonal_naive
from .core import DYNAMIC_UPDATING, AccessLog, FocalSpec, FtsDataset, candidate_set
from .envelope import build_envelope
from .errors import DomainError
from .forecast import Forecast, Weighting, ep_band, ep_point, fknn_band, fknn_point
from .metrics import band_width, coverage, mape, mse, winkler
from .tuning import TuningConfig, fold_view, select_band_k, select_k, select_theta

POINT_KINDS = ("mean", "naive", "snaive", "fknn", "ep", "fpcf")
BAND_SOURCES = ("fknn", "ep")


@dataclass(frozen=True)
class MethodSpec:
    """One requested method; k=None on fknn means "tune it"."""

    kind: str
    k: int | None = None
    season: int = 7
    weighting: Weighting = Weighting.inverse_distance()
    tune_theta: bool = False
    threshold: float = 0.80
    order: int = 1

    def __post_init__(self) -> None:
        if self.kind not in POINT_KINDS:
            raise DomainError(f"unknown method {self.kind!r}")

    @property
    def label(self) -> str:
        if self.kind == "snaive":
            return f"snaive:{self.season}"
        if self.kind == "fknn" and self.k is not None:
            return f"fknn:{self.k}"
        return self.kind


@dataclass
class ForecastRecord:
    origin: int
    method: str
    forecast: Forecast
    mse: float
    mape: float | None
    coverage: float | None = None
    winkler: float | None = None
    band_width: float | None = None


@dataclass
class MethodSummary:
    method: str
    n_forecasts: int
    mse: float
    mse_ratio: float | None
    mape: float | None
    coverage: float | None
    winkler: float | None
    band_width: float | None
    params: dict = field(default_factory=dict)


@dataclass
class BacktestResult:
    spec: FocalSpec
    origins: list[int]
    records: list[ForecastRecord]
    summaries: list[MethodSummary]
    truths: dict[int, np.ndarray]
    audit: dict | None = None


def _resolve_params(
    train: FtsDataset,
    spec: FocalSpec,
    methods: list[MethodSpec],
    band_k,
    alpha: float,
    tuning: TuningConfig,
) -> dict:
    resolved: dict = {"k": {}, "weighting": {}, "band_k": {}}
    for m in methods:
        if m.kind == "fknn":
            if m.k is None:
                result = select_k(train, spec, m.weighting, tuning)
                resolved["k"][m.label] = int(result.best)
            else:
                resolved["k"][m.label] = m.k
        if m.kind == "ep" and m.tune_theta:
            result = select_theta(train, spec, tuning)
            resolved["weighting"][m.label] = Weighting.exponential(float(result.best))
        elif m.kind == "ep":
            resolved["weighting"][m.label] = m.weighting
    if band_k == "tune":
        for source in BAND_SOURCES:
            if any(m.kind == source for m in methods):
                result = select_band_k(train, spec, source, alpha, tuning)
                resolved["band_k"][source] = int(result.best)
    elif band_k is not None:
        for source in BAND_SOURCES:
            resolved["band_k"][source] = int(band_k)
    return resolved


def run_backtest(
    dataset: FtsDataset,
    spec: FocalSpec,
    methods: list[MethodSpec],
    holdout: int,
    band_k: int | str | None = None,
    alpha: float = 0.1,
    tuning: TuningConfig = TuningConfig(),
    audit: bool = False,
) -> BacktestResult:
    """Forecast the last `holdout` curves with every method and score them.

    band_k: None for point forecasts only, an int for fixed-size bands on
    the fknn/ep methods (clamped per origin to the available contributor
    count), or "tune" to pick it by Winkler score on the training prefix.
    """
    if holdout < 1:
        raise DomainError("holdout must be >= 1")
    n = dataset.n_curves
    first = n - holdout
    log = AccessLog() if audit else None
    ds = dataset.with_log(log) if audit else dataset

    if log is not None:
        log.start_fold(("tune", first))
    if first < 3:
        raise DomainError(f"holdout of {holdout} leaves too little history ({first} curves)")
    train = ds.head(first)
    resolved = _resolve_params(train, spec, methods, band_k, alpha, tuning)

    origins = list(range(first, n))
    records: list[ForecastRecord] = []
    truths: dict[int, np.ndarray] = {}
    t_focal = spec.focal_points(dataset.grid)

    for origin in origins:
        if log is not None:
            log.start_fold((spec.mode, origin))
        sub, truth = fold_view(ds, spec, origin)
        truths[origin] = truth

        shared: dict = {}

        def candidates():
            if "cands" not in shared:
                focal, cands = candidate_set(sub, spec)
                shared["focal"], shared["cands"] = focal, cands
            return shared["focal"], shared["cands"]

        def envelope():
            if "env" not in shared:
                focal, cands = candidates()
                shared["env"] = build_envelope(cands, focal, t_focal)
            return shared["env"]

        for m in methods:
            band: Forecast | None = None
            if m.kind == "mean":
                fc = mean_predictor(sub, spec)
            elif m.kind == "naive":
                fc = naive_predictor(sub, spec)
            elif m.kind == "snaive":
                fc = seasonal_naive(sub, spec, m.season)
            elif m.kind == "fpcf":
                fc = fpcf_forecast(sub, spec, m.threshold, m.order)
            elif m.kind == "fknn":
                focal, cands = candidates()
                fc = fknn_point(cands, focal, t_focal, resolved["k"][m.label], m.weighting)
                if "fknn" in resolved["band_k"]:
                    k_band = min(resolved["band_k"]["fknn"], len(cands))
                    band = fknn_band(cands, focal, t_focal, k_band)
            else:  # ep
                env = envelope()
                focal, cands = candidates()
                fc = ep_point(env, cands, resolved["weighting"][m.label])
                if "ep" in resolved["band_k"]:
                    k_band = min(resolved["band_k"]["ep"], len(env))
                    band = ep_band(env, cands, focal, k_band)

            if band is not None:
                fc.lower, fc.upper = band.lower, band.upper
                fc.params = {**fc.params, "band_k": band.params["k"]}

            try:
                pct = mape(fc.point, truth)
            except DomainError:
                pct = None
            records.append(
                ForecastRecord(
                    origin=origin,
                    method=m.label,
                    forecast=fc,
                    mse=mse(fc.point, truth),
                    mape=pct,
                    coverage=coverage(fc.lower, fc.upper, truth) if fc.has_band else None,
                    winkler=winkler(fc.lower, fc.upper, truth, alpha) if fc.has_band else None,
                    band_width=band_width(fc.lower, fc.upper) if fc.has_band else None,
                )
            )

    summaries = _summarize(methods, records, resolved)
    report = _audit_report(log, first) if log is not None else None
    return BacktestResult(
        spec=spec,
        origins=origins,
        records=records,
        summaries=summaries,
        truths=truths,
        audit=report,
    )


def _mean_or_none(values: list) -> float | None:
    if any(v is None for v in values) or not values:
        return None
    return float(np.mean(values))


def _summarize(
    methods: list[MethodSpec], records: list[ForecastRecord], resolved: dict
) -> list[MethodSummary]:
    summaries = []
    for m in methods:
        rows = [r for r in records if r.method == m.label]
        params: dict = {}
        if m.label in resolved["k"]:
            params["k"] = resolved["k"][m.label]
        if m.label in resolved["weighting"]:
            params.update(resolved["weighting"][m.label].describe())
        if m.kind in resolved["band_k"]:
            params["band_k"] = resolved["band_k"][m.kind]
        summaries.append(
            MethodSummary(
                method=m.label,
                n_forecasts=len(rows),
                mse=float(np.mean([r.mse for r in rows])),
                mse_ratio=None,
                mape=_mean_or_none([r.mape for r in rows]),
                coverage=_mean_or_none([r.coverage for r in rows]),
                winkler=_mean_or_none([r.winkler for r in rows]),
                band_width=_mean_or_none([r.band_width for r in rows]),
                params=params,
            )
        )
    best = min(s.mse for s in summaries)
    for s in summaries:
        s.mse_ratio = s.mse / best if best > 0 else (1.0 if s.mse == best else None)
    return summaries


def _audit_report(log: AccessLog, first_origin: int) -> dict:
    """Check every recorded read against its fold's origin.

    Forecasting row `origin` may only read rows strictly before it; in
    dynamic updating the origin row itself may be read as a prefix (its
    observed head) but never in full.  Tuning reads may not reach the
    holdout at all.
    """
    violations = []
    n_reads = 0
    folds = set()
    for tag, row, kind in log.records:
        n_reads += 1
        folds.add(tag)
        phase, origin = tag
        if phase == "tune":
            ok = row < origin
        elif phase == DYNAMIC_UPDATING:
            ok = row < origin or (row == origin and kind == "prefix")
        else:
            ok = row < origin
        if not ok:
            violations.append({"fold": list(tag), "row": int(row), "kind": kind})
    return {
        "first_origin": int(first_origin),
        "folds": len(folds),
        "reads": n_reads,
        "violations": violations,
        "total_violations": len(violations),
    }
