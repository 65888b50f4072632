"""Reference predictors: historical mean, naive, seasonal naive, and FPCF.

FPCF reduces the curves to functional principal component scores (enough
components to pass an explained-variance threshold), fits a d-variate
autoregression to the score series by least squares, predicts the next
score vector and reconstructs the curve.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .core import ONE_STEP, FocalSpec, FtsDataset, candidate_set, trapezoid_weights
from .errors import DomainError, NumericError
from .forecast import Forecast


def mean_predictor(dataset: FtsDataset, spec: FocalSpec) -> Forecast:
    """Pointwise mean over all candidate projections."""
    _, cands = candidate_set(dataset, spec)
    proj = np.stack([c.projection for c in cands])
    n = proj.shape[0]
    w = np.full(n, 1.0 / n)
    return Forecast(
        method="mean",
        point=proj.mean(axis=0),
        weights=w,
        contributors=[c.index for c in cands],
    )


def naive_predictor(dataset: FtsDataset, spec: FocalSpec) -> Forecast:
    """The most recent candidate's projection (the last observed datum on
    the prediction range)."""
    _, cands = candidate_set(dataset, spec)
    last = cands[-1]
    return Forecast(
        method="naive",
        point=np.asarray(last.projection, dtype=float).copy(),
        weights=np.array([1.0]),
        contributors=[last.index],
    )


def seasonal_naive(dataset: FtsDataset, spec: FocalSpec, season: int) -> Forecast:
    """The projection of the candidate `season` steps back (season=1 is naive)."""
    if season < 1:
        raise DomainError("season must be >= 1")
    _, cands = candidate_set(dataset, spec)
    if season > len(cands):
        raise DomainError(
            f"seasonal naive with season={season} needs more than {season} curves of history"
        )
    pick = cands[-season]
    return Forecast(
        method="snaive",
        point=np.asarray(pick.projection, dtype=float).copy(),
        params={"season": season},
        weights=np.array([1.0]),
        contributors=[pick.index],
    )


@dataclass
class FpcaModel:
    """Grid-evaluated functional PCA of a curve sample.

    Eigenfunctions are orthonormal under the trapezoid quadrature;
    explained holds the cumulative explained-variance fractions over all
    components, and n_components how many were kept.
    """

    mean: np.ndarray
    components: np.ndarray  # (n_components, m)
    eigenvalues: np.ndarray  # all, descending
    scores: np.ndarray  # (n_curves, n_components)
    n_components: int
    explained: np.ndarray  # cumulative fractions, all components

    def reconstruct(self, scores: np.ndarray) -> np.ndarray:
        """Curve(s) for the given score vector(s): mean + scores @ components."""
        return self.mean + np.asarray(scores, dtype=float) @ self.components


def fpca(
    dataset: FtsDataset, threshold: float = 0.80, n_components: int | None = None
) -> FpcaModel:
    """Functional PCA on the grid with quadrature-weighted inner products.

    Keeps the smallest number of components whose cumulative explained
    variance reaches `threshold`, unless `n_components` overrides it.
    """
    if not 0.0 < threshold <= 1.0:
        raise DomainError("threshold must lie in (0, 1]")
    X = dataset.curve_matrix()
    n, m = X.shape
    mean = X.mean(axis=0)
    Xc = X - mean

    w = trapezoid_weights(dataset.grid.points)
    sw = np.sqrt(w)
    C = (Xc.T @ Xc) / (n - 1)
    A = sw[:, None] * C * sw[None, :]
    eigvals, eigvecs = np.linalg.eigh(A)
    eigvals = eigvals[::-1]
    eigvecs = eigvecs[:, ::-1]

    scale = max(1.0, float(np.abs(X).max()) ** 2)
    eigvals = np.clip(eigvals, 0.0, None)
    total = eigvals.sum()
    if total <= 1e-12 * scale:
        raise DomainError("degenerate data: no variance to decompose")

    fractions = eigvals / total
    cumulative = np.cumsum(fractions)
    if n_components is None:
        d = int(np.searchsorted(cumulative, threshold - 1e-12) + 1)
        d = min(d, m)
    else:
        if not 1 <= n_components <= m:
            raise DomainError(f"n_components out of range 1..{m}")
        d = n_components

    phi = (eigvecs[:, :d] / sw[:, None]).T  # (d, m), unit quadrature norm
    # deterministic sign: largest-magnitude coordinate is positive
    for j in range(d):
        peak = np.argmax(np.abs(phi[j]))
        if phi[j, peak] < 0:
            phi[j] = -phi[j]
    scores = Xc @ (phi * w[None, :]).T
    return FpcaModel(
        mean=mean,
        components=phi,
        eigenvalues=eigvals,
        scores=scores,
        n_components=d,
        explained=cumulative,
    )


@dataclass
class VarModel:
    """Least-squares vector autoregression of order p with intercept."""

    order: int
    intercept: np.ndarray  # (d,)
    coef: np.ndarray  # (p, d, d); coef[j-1] maps the lag-j score vector
    resid_cov: np.ndarray  # (d, d), diagnostic only

    @property
    def dim(self) -> int:
        return self.intercept.size


def var_fit(scores: np.ndarray, order: int) -> VarModel:
    """Fit each score vector on the previous `order` score vectors plus intercept.

    Fitted on mean-centered data (equivalent to an explicit intercept
    column whenever the design has full rank, and better behaved when it
    does not: a constant series yields zero lag coefficients and the
    constant as intercept).
    """
    scores = np.atleast_2d(np.asarray(scores, dtype=float))
    if scores.ndim != 2:
        raise DomainError("scores must be a (time, d) matrix")
    T, d = scores.shape
    if order < 1:
        raise DomainError("autoregression order must be >= 1")
    if T < d * order + order + 1:
        raise DomainError(
            f"too few score rows ({T}) for a VAR({order}) in dimension {d}"
        )
    mean = scores.mean(axis=0)
    centered = scores - mean
    rows = T - order
    Z = np.empty((rows, d * order))
    for j in range(1, order + 1):
        Z[:, (j - 1) * d : j * d] = centered[order - j : T - j]
    Y = centered[order:]
    B, *_ = np.linalg.lstsq(Z, Y, rcond=None)
    coef = np.stack([B[(j - 1) * d : j * d].T for j in range(1, order + 1)])
    intercept = mean - sum(coef[j] @ mean for j in range(order))
    resid = Y - Z @ B
    dof = max(rows - (1 + d * order), 1)
    return VarModel(
        order=order,
        intercept=intercept,
        coef=coef,
        resid_cov=(resid.T @ resid) / dof,
    )


def var_predict(model: VarModel, recent: np.ndarray) -> np.ndarray:
    """One-step-ahead score prediction from the most recent `order` rows."""
    recent = np.atleast_2d(np.asarray(recent, dtype=float))
    if recent.shape[0] < model.order or recent.shape[1] != model.dim:
        raise DomainError(
            f"need the last {model.order} score vectors of dimension {model.dim}"
        )
    out = model.intercept.copy()
    for j in range(1, model.order + 1):
        out += model.coef[j - 1] @ recent[-j]
    return out


def select_var_order(
    scores: np.ndarray, orders=(1, 2, 3, 4, 5), folds: int = 10
) -> int:
    """Pick the order with the smallest rolling one-step score MSE."""
    scores = np.atleast_2d(np.asarray(scores, dtype=float))
    T, d = scores.shape
    best, best_score = None, np.inf
    for p in sorted(orders):
        if T - folds < d * p + p + 1:
            continue
        err = 0.0
        for tau in range(T - folds, T):
            model = var_fit(scores[:tau], p)
            pred = var_predict(model, scores[tau - p : tau])
            err += float(np.mean((pred - scores[tau]) ** 2))
        err /= folds
        if err < best_score:
            best, best_score = p, err
    if best is None:
        raise DomainError("score series too short for any candidate order")
    return best


def fpcf_forecast(
    dataset: FtsDataset,
    spec: FocalSpec,
    threshold: float = 0.80,
    order: int | None = 1,
) -> Forecast:
    """FPCA scores + d-variate autoregression, reconstructed to a curve.

    Needs fully observed curves, so only the one-step-ahead scenario is
    supported.  order=None selects the order over 1..5 by rolling score MSE.
    """
    if spec.mode != ONE_STEP:
        raise DomainError("FPCF requires the one-step-ahead scenario")
    X = dataset.curve_matrix()
    mean = X.mean(axis=0)
    scale = max(1.0, float(np.abs(X).max()) ** 2)
    if float(((X - mean) ** 2).sum()) <= 1e-12 * scale:
        # a constant series forecasts as its constant; nothing to decompose
        return Forecast(
            method="fpcf",
            point=mean.copy(),
            params={"threshold": threshold, "order": 0, "n_components": 0},
        )
    model = fpca(dataset, threshold)
    p = select_var_order(model.scores) if order is None else order
    var = var_fit(model.scores, p)
    next_scores = var_predict(var, model.scores[-p:])
    return Forecast(
        method="fpcf",
        point=model.reconstruct(next_scores),
        params={"threshold": threshold, "order": p, "n_components": model.n_components},
    )
