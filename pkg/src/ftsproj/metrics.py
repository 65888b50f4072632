"""Forecast scoring: MSE, MAPE, band coverage, and the Winkler interval score."""

from __future__ import annotations

import numpy as np

from .errors import DomainError


def _aligned(a, b) -> tuple[np.ndarray, np.ndarray]:
    a = np.asarray(a, dtype=float)
    b = np.asarray(b, dtype=float)
    if a.shape != b.shape or a.ndim != 1:
        raise DomainError("segments must be 1-D and equally long")
    return a, b


def mse(pred, truth) -> float:
    """Mean squared pointwise error over the prediction-domain grid points."""
    pred, truth = _aligned(pred, truth)
    err = pred - truth
    return float(np.mean(err * err))


def mape(pred, truth) -> float:
    """Mean absolute percentage error (in percent); truth must be nonzero."""
    pred, truth = _aligned(pred, truth)
    if np.any(truth == 0.0):
        raise DomainError("MAPE undefined: truth has zero values")
    return float(100.0 * np.mean(np.abs((truth - pred) / truth)))


def coverage(lower, upper, truth) -> float:
    """Fraction of grid points where the truth lies inside the band."""
    lower, upper = _aligned(lower, upper)
    _, truth = _aligned(lower, truth)
    inside = (lower <= truth) & (truth <= upper)
    return float(np.count_nonzero(inside)) / truth.size


def winkler(lower, upper, truth, alpha: float) -> float:
    """Mean interval score: width plus 2/alpha times any excursion outside.

    Equals the mean band width exactly when the truth is covered at every
    point, and grows with both widening and non-coverage.
    """
    if not 0.0 < alpha < 1.0:
        raise DomainError("alpha must lie in (0, 1)")
    lower, upper = _aligned(lower, upper)
    _, truth = _aligned(lower, truth)
    width = upper - lower
    below = np.clip(lower - truth, 0.0, None)
    above = np.clip(truth - upper, 0.0, None)
    return float(np.mean(width + (2.0 / alpha) * (below + above)))


def band_width(lower, upper) -> float:
    """Mean band width over the prediction-domain grid points."""
    lower, upper = _aligned(lower, upper)
    return float(np.mean(upper - lower))
