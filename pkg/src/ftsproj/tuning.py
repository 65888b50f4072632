"""Rolling-forecasting-origin evaluation and hyperparameter selection.

A fold treats one training curve as the quantity to predict: in one-step
mode each origin forecasts curve tau from the curves strictly before it;
in dynamic updating the origin's observed head is the focal and its own
tail is the truth.  Parameters (k for fKNN, theta for EP, k for bands via
the Winkler score) are chosen by the mean score over the most recent folds,
with ties broken toward the smaller parameter.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, Sequence

import numpy as np

from .core import DYNAMIC_UPDATING, H_STEP, FocalSpec, FtsDataset, candidate_set
from .envelope import build_envelope
from .errors import DomainError
from .forecast import Forecast, Weighting, ep_point, fknn_point, _nearest_order
from .depth import deepest_k
from .metrics import mse, winkler

DEFAULT_THETA_GRID = (0.25, 0.5, 1.0, 2.0, 4.0, 8.0, 16.0)
MAX_DEFAULT_K = 50


@dataclass(frozen=True)
class TuningConfig:
    """Fold count and search grids; unset grids fall back to defaults."""

    folds: int = 20
    k_grid: tuple[int, ...] | None = None
    theta_grid: tuple[float, ...] = DEFAULT_THETA_GRID
    alpha: float = 0.1

    def __post_init__(self) -> None:
        if self.folds < 1:
            raise DomainError("fold count must be >= 1")
        if self.k_grid is not None and len(self.k_grid) == 0:
            raise DomainError("k grid must be nonempty")
        if len(self.theta_grid) == 0:
            raise DomainError("theta grid must be nonempty")
        if any(th <= 0 for th in self.theta_grid):
            raise DomainError("theta grid values must be > 0")
        if not 0.0 < self.alpha < 1.0:
            raise DomainError("alpha must lie in (0, 1)")


@dataclass
class TuningResult:
    """Chosen parameter plus the full parameter -> mean-score table."""

    best: float | int
    score_table: dict


def _min_origin(spec: FocalSpec) -> int:
    # smallest truth-row index whose fold still has >= 2 candidates
    if spec.mode == DYNAMIC_UPDATING:
        return 2
    if spec.mode == H_STEP:
        return 2 * spec.h + 1
    return 3


def fold_origins(dataset: FtsDataset, spec: FocalSpec, folds: int) -> list[int]:
    """The `folds` most recent truth-row indices usable as pseudo-test origins."""
    n = dataset.n_curves
    first = n - folds
    if first < _min_origin(spec):
        raise DomainError(
            f"insufficient history: {folds} folds need at least "
            f"{folds + _min_origin(spec)} curves, got {n}"
        )
    return list(range(first, n))


def fold_view(
    dataset: FtsDataset, spec: FocalSpec, origin: int
) -> tuple[FtsDataset, np.ndarray]:
    """The data visible when forecasting row `origin`, and the realized truth.

    Tags the dataset's access log (when present) with this fold, so every
    curve read during the forecast is attributable to its origin.  The
    truth itself is read from the raw array, not through the logged
    accessors: scoring happens after the forecast and is not part of the
    audited forecasting surface.
    """
    if dataset.log is not None:
        dataset.log.start_fold((spec.mode, origin))
    _, (p0, p1) = spec.split(dataset.grid)
    if spec.mode == DYNAMIC_UPDATING:
        sub = dataset.head(origin + 1)
        truth = dataset.values[origin, p0:p1]
    elif spec.mode == H_STEP:
        sub = dataset.head(origin - spec.h + 1)
        truth = dataset.values[origin]
    else:
        sub = dataset.head(origin)
        truth = dataset.values[origin]
    return sub, truth


def rolling_origin_eval(
    dataset: FtsDataset,
    spec: FocalSpec,
    method: Callable[[FtsDataset, FocalSpec], Forecast],
    folds: int,
    score: Callable[[Forecast, np.ndarray], float] | None = None,
) -> float:
    """Mean score of a forecasting method over the most recent fold origins."""
    if score is None:
        score = lambda fc, truth: mse(fc.point, truth)
    total = 0.0
    origins = fold_origins(dataset, spec, folds)
    for origin in origins:
        sub, truth = fold_view(dataset, spec, origin)
        total += score(method(sub, spec), truth)
    return total / len(origins)


def _argmin_table(table: dict) -> float | int:
    best = None
    best_score = np.inf
    for param in sorted(table):
        if table[param] < best_score:
            best = param
            best_score = table[param]
    return best


def select_k(
    dataset: FtsDataset,
    spec: FocalSpec,
    weighting: Weighting,
    config: TuningConfig = TuningConfig(),
) -> TuningResult:
    """Choose the fKNN neighbor count by mean rolling-origin MSE."""
    origins = fold_origins(dataset, spec, config.folds)
    folds = []
    for origin in origins:
        sub, truth = fold_view(dataset, spec, origin)
        focal, cands = candidate_set(sub, spec)
        folds.append((focal, cands, truth))
    t = spec.focal_points(dataset.grid)

    if config.k_grid is not None:
        k_grid = tuple(config.k_grid)
    else:
        smallest = min(len(cands) for _, cands, _ in folds)
        k_grid = tuple(range(1, min(MAX_DEFAULT_K, smallest) + 1))

    table = {k: 0.0 for k in k_grid}
    for focal, cands, truth in folds:
        for k in k_grid:
            fc = fknn_point(cands, focal, t, k, weighting)
            table[k] += mse(fc.point, truth)
    table = {k: s / len(folds) for k, s in table.items()}
    return TuningResult(best=_argmin_table(table), score_table=table)


def select_theta(
    dataset: FtsDataset, spec: FocalSpec, config: TuningConfig = TuningConfig()
) -> TuningResult:
    """Choose the EP exponential-weight decay by mean rolling-origin MSE."""
    origins = fold_origins(dataset, spec, config.folds)
    t = spec.focal_points(dataset.grid)
    table = {float(th): 0.0 for th in config.theta_grid}
    for origin in origins:
        sub, truth = fold_view(dataset, spec, origin)
        focal, cands = candidate_set(sub, spec)
        env = build_envelope(cands, focal, t)
        for th in table:
            fc = ep_point(env, cands, Weighting.exponential(th))
            table[th] += mse(fc.point, truth)
    table = {th: s / len(origins) for th, s in table.items()}
    return TuningResult(best=_argmin_table(table), score_table=table)


def select_band_k(
    dataset: FtsDataset,
    spec: FocalSpec,
    source: str,
    alpha: float | None = None,
    config: TuningConfig = TuningConfig(),
) -> TuningResult:
    """Choose the band size k by mean rolling-origin Winkler score.

    source is "ep" (k deepest envelope members) or "fknn" (k nearest
    candidates).  Scoring uses cumulative prefix envelopes of the
    depth/nearness ordering, which reproduces the per-k band forecasts
    exactly because a smaller k's contributor set is a prefix of a larger
    k's.  A fold whose source holds fewer than k curves is scored with all
    of them (the envelope size varies fold to fold; the forecast harness
    clamps the same way).
    """
    if source not in ("ep", "fknn"):
        raise DomainError(f"unknown band source {source!r}")
    if alpha is None:
        alpha = config.alpha
    origins = fold_origins(dataset, spec, config.folds)
    t = spec.focal_points(dataset.grid)

    fold_projections = []  # projections ordered by band preference
    for origin in origins:
        sub, truth = fold_view(dataset, spec, origin)
        focal, cands = candidate_set(sub, spec)
        by_index = {c.index: c for c in cands}
        if source == "ep":
            env = build_envelope(cands, focal, t)
            member_rows = np.stack([by_index[i].restricted for i in env.members])
            ordered = deepest_k(member_rows, focal, len(env), indices=env.members)
        else:
            order, _ = _nearest_order(cands, focal, t)
            ordered = [cands[j].index for j in order]
        proj = np.stack([by_index[i].projection for i in ordered])
        fold_projections.append((proj, truth))

    if config.k_grid is not None:
        k_grid = tuple(config.k_grid)
    else:
        largest = max(p.shape[0] for p, _ in fold_projections)
        k_grid = tuple(range(1, min(MAX_DEFAULT_K, largest) + 1))

    table = {k: 0.0 for k in k_grid}
    for proj, truth in fold_projections:
        lows = np.minimum.accumulate(proj, axis=0)
        highs = np.maximum.accumulate(proj, axis=0)
        for k in k_grid:
            kk = min(k, proj.shape[0])
            table[k] += winkler(lows[kk - 1], highs[kk - 1], truth, alpha)
    table = {k: s / len(fold_projections) for k, s in table.items()}
    return TuningResult(best=_argmin_table(table), score_table=table)
