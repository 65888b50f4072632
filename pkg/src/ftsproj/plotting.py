"""Figure rendering for the CLI report paths.

Every figure is written to a file (Agg backend, no display) next to the
delimited output it illustrates.  PNG metadata is stripped so repeated
runs with the same seed produce identical bytes.
"""

from __future__ import annotations

from pathlib import Path

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt
import numpy as np

from .backtest import BacktestResult
from .core import FocalSpec, FtsDataset
from .forecast import Forecast
from .sim import SimTrace

_META = {"Software": None}


def _save(fig, path: Path) -> None:
    fig.savefig(path, dpi=120, metadata=_META)
    plt.close(fig)


def save_forecast_figure(
    path: str | Path,
    dataset: FtsDataset,
    spec: FocalSpec,
    forecast: Forecast,
    truth: np.ndarray | None = None,
    history: int = 40,
) -> None:
    """Recent curves in grey, the focal in red, the forecast (and band) in blue."""
    grid = dataset.grid
    (f0, f1), (p0, p1) = spec.split(grid)
    t_f, t_p = grid.points[f0:f1], grid.points[p0:p1]

    fig, ax = plt.subplots(figsize=(8, 4.5))
    shown = dataset.values[-min(history, dataset.n_curves) :]
    for row in shown:
        ax.plot(grid.points, row, color="0.8", lw=0.6, zorder=1)
    ax.plot(t_f, dataset.values[-1, f0:f1], color="crimson", lw=1.8, label="focal", zorder=3)
    if forecast.has_band:
        ax.fill_between(
            t_p, forecast.lower, forecast.upper, color="steelblue", alpha=0.25,
            label="band", zorder=2,
        )
    if forecast.point is not None:
        ax.plot(t_p, forecast.point, color="navy", lw=1.8, label=forecast.method, zorder=4)
    if truth is not None:
        ax.plot(t_p, truth, color="crimson", lw=1.2, ls="--", label="truth", zorder=4)
    ax.set_xlabel("t")
    ax.set_ylabel("value")
    ax.legend(loc="best", fontsize=8)
    fig.tight_layout()
    _save(fig, Path(path))


def save_simulation_figure(
    path: str | Path, dataset: FtsDataset, trace: SimTrace, points_per_period: int
) -> None:
    """Left: the scalar path with its shock component; right: the sliced curves."""
    n_points = trace.noise.size
    t = np.arange(n_points) / points_per_period
    path_vals = trace.noise + trace.periodic + trace.shocks

    fig, (ax1, ax2) = plt.subplots(1, 2, figsize=(11, 4))
    ax1.plot(t, path_vals, lw=0.5, color="0.3")
    shocked = trace.shocks != 0
    if shocked.any():
        ax1.plot(t[shocked], path_vals[shocked], lw=0.7, color="crimson")
    ax1.set_xlabel("time (periods)")
    ax1.set_ylabel("value")
    ax1.set_title("trajectory")

    cmap = plt.get_cmap("viridis")
    n = dataset.n_curves
    for i, row in enumerate(dataset.values):
        ax2.plot(dataset.grid.points, row, lw=0.5, color=cmap(i / max(n - 1, 1)))
    ax2.set_xlabel("t")
    ax2.set_title("sliced curves")
    fig.tight_layout()
    _save(fig, Path(path))


def save_backtest_figure(path: str | Path, result: BacktestResult) -> None:
    """Per-method mean MSE bars, plus coverage when bands were evaluated."""
    summaries = result.summaries
    labels = [s.method for s in summaries]
    mses = [s.mse for s in summaries]
    covs = [s.coverage for s in summaries]
    has_cov = any(c is not None for c in covs)

    ncols = 2 if has_cov else 1
    fig, axes = plt.subplots(1, ncols, figsize=(5.5 * ncols, 4))
    ax1 = axes[0] if has_cov else axes
    ax1.bar(labels, mses, color="steelblue")
    ax1.set_ylabel("mean MSE")
    ax1.tick_params(axis="x", rotation=30)
    if has_cov:
        ax2 = axes[1]
        shown = [(l, c) for l, c in zip(labels, covs) if c is not None]
        ax2.bar([l for l, _ in shown], [c for _, c in shown], color="seagreen")
        ax2.set_ylim(0, 1.05)
        ax2.set_ylabel("mean coverage")
        ax2.tick_params(axis="x", rotation=30)
    fig.tight_layout()
    _save(fig, Path(path))
