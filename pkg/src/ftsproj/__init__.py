"""Nonparametric projection forecasting for functional time series.

Curves observed on a shared grid are forecast by "projecting" past curves
that resemble the most recent one: either its k nearest neighbors (fKNN)
or a depth-guided envelope of curves that surround it in shape and
magnitude (EP), with prediction bands from the deepest members.  Includes
dynamic updating of partially observed curves, rolling-origin tuning,
benchmark predictors, scoring, and a shock-contaminated simulator.
"""

from .backtest import BacktestResult, MethodSpec, run_backtest
from .benchmarks import (
    FpcaModel,
    VarModel,
    fpca,
    fpcf_forecast,
    mean_predictor,
    naive_predictor,
    seasonal_naive,
    select_var_order,
    var_fit,
    var_predict,
)
from .core import (
    DYNAMIC_UPDATING,
    H_STEP,
    ONE_STEP,
    AccessLog,
    CandidatePair,
    FocalSpec,
    FtsDataset,
    Grid,
    candidate_set,
    l2_sq_distance,
    restrict,
    trapezoid_weights,
)
from .depth import deepest_k, envelopment, mbd, mbd_all_fast
from .envelope import Envelope, build_envelope, envelope_band
from .errors import DataError, DomainError, FtsError, NumericError
from .forecast import (
    Forecast,
    Weighting,
    ep_band,
    ep_point,
    fknn_band,
    fknn_point,
    normalized_weights,
)
from .io import load_csv, save_dataset_csv
from .metrics import band_width, coverage, mape, mse, winkler
from .sim import (
    ShockModelParams,
    SimTrace,
    generate_fts,
    periodic_cov,
    sample_noise_gp,
    sample_periodic_gp,
    sample_shock_process,
    shock_shape,
    squared_exponential_cov,
)
from .tuning import (
    TuningConfig,
    TuningResult,
    fold_origins,
    fold_view,
    rolling_origin_eval,
    select_band_k,
    select_k,
    select_theta,
)

__version__ = "0.1.0"

__all__ = [
    "AccessLog",
    "BacktestResult",
    "CandidatePair",
    "DYNAMIC_UPDATING",
    "DataError",
    "DomainError",
    "Envelope",
    "FocalSpec",
    "Forecast",
    "FpcaModel",
    "FtsDataset",
    "FtsError",
    "Grid",
    "H_STEP",
    "MethodSpec",
    "NumericError",
    "ONE_STEP",
    "ShockModelParams",
    "SimTrace",
    "TuningConfig",
    "TuningResult",
    "VarModel",
    "Weighting",
    "band_width",
    "build_envelope",
    "candidate_set",
    "coverage",
    "deepest_k",
    "envelope_band",
    "envelopment",
    "ep_band",
    "ep_point",
    "fknn_band",
    "fknn_point",
    "fold_origins",
    "fold_view",
    "fpca",
    "fpcf_forecast",
    "generate_fts",
    "l2_sq_distance",
    "load_csv",
    "mape",
    "mbd",
    "mbd_all_fast",
    "mean_predictor",
    "mse",
    "naive_predictor",
    "normalized_weights",
    "periodic_cov",
    "restrict",
    "rolling_origin_eval",
    "run_backtest",
    "sample_noise_gp",
    "sample_periodic_gp",
    "sample_shock_process",
    "save_dataset_csv",
    "seasonal_naive",
    "select_band_k",
    "select_k",
    "select_theta",
    "select_var_order",
    "shock_shape",
    "squared_exponential_cov",
    "trapezoid_weights",
    "var_fit",
    "var_predict",
    "winkler",
]
