"""Point and band forecasts from candidate projections.

Point forecasts are convex combinations of contributor projections with
weights decreasing in the squared L2 distance to the focal: either
inverse-square-distance weights or exponential weights exp(-theta * d/d1)
scaled by the nearest contributor's distance d1.  Band forecasts take the
pointwise min/max envelope of the projections of the k nearest candidates
(fKNN) or of the k deepest envelope members (EP).
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .core import CandidatePair, trapezoid_weights
from .depth import deepest_k
from .envelope import Envelope, envelope_band
from .errors import DomainError

INVERSE_SQ_DISTANCE = "inverse-square-distance"
EXPONENTIAL = "exponential"


@dataclass(frozen=True)
class Weighting:
    """Contributor weighting scheme for point forecasts."""

    kind: str
    theta: float | None = None

    def __post_init__(self) -> None:
        if self.kind not in (INVERSE_SQ_DISTANCE, EXPONENTIAL):
            raise DomainError(f"unknown weighting kind {self.kind!r}")
        if self.kind == EXPONENTIAL and (self.theta is None or self.theta <= 0):
            raise DomainError("exponential weighting needs theta > 0")

    @classmethod
    def inverse_distance(cls) -> "Weighting":
        return cls(INVERSE_SQ_DISTANCE)

    @classmethod
    def exponential(cls, theta: float) -> "Weighting":
        return cls(EXPONENTIAL, theta=float(theta))

    def describe(self) -> dict:
        out = {"weighting": self.kind}
        if self.theta is not None:
            out["theta"] = self.theta
        return out


@dataclass
class Forecast:
    """A point forecast and/or band on the prediction domain, plus metadata."""

    method: str
    point: np.ndarray | None = None
    lower: np.ndarray | None = None
    upper: np.ndarray | None = None
    params: dict = field(default_factory=dict)
    weights: np.ndarray | None = None
    contributors: list[int] | None = None

    @property
    def has_band(self) -> bool:
        return self.lower is not None and self.upper is not None


def normalized_weights(distances: np.ndarray, weighting: Weighting) -> np.ndarray:
    """Nonnegative weights summing to 1 for the given squared distances.

    When the nearest distance is 0 both schemes degenerate; the limit is an
    unweighted average over the zero-distance contributors.
    """
    d = np.asarray(distances, dtype=float)
    if d.size == 0:
        raise DomainError("no contributors to weight")
    d1 = d.min()
    if d1 == 0.0:
        w = (d == 0.0).astype(float)
    elif weighting.kind == INVERSE_SQ_DISTANCE:
        w = 1.0 / d
    else:
        # exp(-theta*d/d1) rescaled by its max so theta ~ 1e3 cannot underflow
        w = np.exp(-weighting.theta * (d - d1) / d1)
    return w / w.sum()


def _distances(candidates: list[CandidatePair], focal: np.ndarray, t: np.ndarray) -> np.ndarray:
    rows = np.stack([np.asarray(c.restricted, dtype=float) for c in candidates])
    if rows.shape[1] != focal.size:
        raise DomainError("candidate segments must match the focal segment length")
    diff = rows - np.asarray(focal, dtype=float)[None, :]
    return (diff * diff) @ trapezoid_weights(t)


def _nearest_order(candidates: list[CandidatePair], focal, t) -> tuple[np.ndarray, np.ndarray]:
    dist = _distances(candidates, focal, t)
    idx = np.array([c.index for c in candidates])
    order = np.lexsort((idx, dist))
    return order, dist


def fknn_point(
    candidates: list[CandidatePair],
    focal: np.ndarray,
    t: np.ndarray,
    k: int,
    weighting: Weighting,
) -> Forecast:
    """Weighted mean of the projections of the k nearest candidates."""
    if not 1 <= k <= len(candidates):
        raise DomainError(f"k={k} out of range 1..{len(candidates)}")
    order, dist = _nearest_order(candidates, focal, t)
    sel = order[:k]
    w = normalized_weights(dist[sel], weighting)
    proj = np.stack([np.asarray(candidates[j].projection, dtype=float) for j in sel])
    return Forecast(
        method="fknn",
        point=w @ proj,
        params={"k": k, **weighting.describe()},
        weights=w,
        contributors=[int(candidates[j].index) for j in sel],
    )


def ep_point(
    envelope: Envelope, candidates: list[CandidatePair], weighting: Weighting
) -> Forecast:
    """Weighted mean of the projections of all envelope members."""
    if len(envelope) == 0:
        raise DomainError("envelope has no members")
    by_index = {c.index: c for c in candidates}
    proj = np.stack(
        [np.asarray(by_index[i].projection, dtype=float) for i in envelope.members]
    )
    w = normalized_weights(envelope.distances, weighting)
    return Forecast(
        method="ep",
        point=w @ proj,
        params={"members": len(envelope), **weighting.describe()},
        weights=w,
        contributors=list(envelope.members),
    )


def fknn_band(
    candidates: list[CandidatePair], focal: np.ndarray, t: np.ndarray, k: int
) -> Forecast:
    """Band between the pointwise extremes of the k nearest projections."""
    if not 1 <= k <= len(candidates):
        raise DomainError(f"k={k} out of range 1..{len(candidates)}")
    order, _ = _nearest_order(candidates, focal, t)
    sel = order[:k]
    proj = np.stack([np.asarray(candidates[j].projection, dtype=float) for j in sel])
    lower, upper = envelope_band(proj)
    return Forecast(
        method="fknn-band",
        lower=lower,
        upper=upper,
        params={"k": k},
        contributors=[int(candidates[j].index) for j in sel],
    )


def ep_band(
    envelope: Envelope, candidates: list[CandidatePair], focal: np.ndarray, k: int
) -> Forecast:
    """Band between the pointwise extremes of the k deepest members' projections.

    Depth is measured against the envelope members plus the focal; the
    focal itself is never a band contributor.
    """
    if not 1 <= k <= len(envelope):
        raise DomainError(f"k={k} out of range 1..{len(envelope)}")
    by_index = {c.index: c for c in candidates}
    member_rows = np.stack(
        [np.asarray(by_index[i].restricted, dtype=float) for i in envelope.members]
    )
    deepest = deepest_k(member_rows, focal, k, indices=envelope.members)
    proj = np.stack([np.asarray(by_index[i].projection, dtype=float) for i in deepest])
    lower, upper = envelope_band(proj)
    return Forecast(
        method="ep-band",
        lower=lower,
        upper=upper,
        params={"k": k},
        contributors=list(deepest),
    )
