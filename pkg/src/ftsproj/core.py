"""Grids, curves, datasets and the focal/projection pairing.

Functional data live on a shared uniform grid over [0, 1]; a curve is a
1-D float array aligned to that grid and a functional time series is the
(n_curves, m) matrix of such rows in time order.  The prediction scenario
(one-step-ahead, dynamic updating at a cutoff q, or h-step) fixes which
part of a curve is observed (the focal domain) and which part is being
predicted (the projection domain), and how past curves pair up with their
"projections" — the next curve, the curve h steps later, or the curve's
own unobserved tail.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import DomainError

ONE_STEP = "one-step-ahead"
DYNAMIC_UPDATING = "dynamic-updating"
H_STEP = "h-step"

_SPACING_TOL = 1e-12
_CUTOFF_TOL = 1e-9


def trapezoid_weights(t: np.ndarray) -> np.ndarray:
    """Quadrature weights w such that w @ y approximates the integral of y over t.

    Exact for piecewise-linear interpolants (the trapezoid rule).  A
    single-point segment gets weight 0.
    """
    t = np.asarray(t, dtype=float)
    if t.ndim != 1:
        raise DomainError("grid points must be a 1-D array")
    n = t.size
    w = np.zeros(n)
    if n >= 2:
        d = np.diff(t)
        w[0] = d[0] / 2.0
        w[-1] = d[-1] / 2.0
        w[1:-1] = (d[:-1] + d[1:]) / 2.0
    return w


class AccessLog:
    """Records which dataset rows forecasting code touches.

    Used by the look-ahead audit: the backtest harness tags the current
    fold, and every curve read through :class:`FtsDataset` accessors lands
    here as ``(fold_tag, row_index, kind)`` with kind ``"full"`` or
    ``"prefix"`` (the focal curve's observed head in dynamic updating).
    """

    def __init__(self) -> None:
        self.records: list[tuple[object, int, str]] = []
        self._fold: object = None

    def start_fold(self, tag: object) -> None:
        self._fold = tag

    def record(self, index: int, kind: str) -> None:
        self.records.append((self._fold, index, kind))


def _freeze(a: np.ndarray) -> np.ndarray:
    out = np.asarray(a, dtype=float)
    if out.flags.writeable:
        out = out.copy()
        out.setflags(write=False)
    return out


@dataclass(frozen=True, eq=False)
class Grid:
    """A uniform evaluation grid on [0, 1]: points[0] = 0, points[-1] = 1."""

    points: np.ndarray

    def __post_init__(self) -> None:
        pts = _freeze(self.points)
        if pts.ndim != 1 or pts.size < 2:
            raise DomainError("grid needs at least 2 points")
        d = np.diff(pts)
        if np.any(d <= 0):
            raise DomainError("grid points must be strictly increasing")
        if abs(pts[0]) > _SPACING_TOL or abs(pts[-1] - 1.0) > _SPACING_TOL:
            raise DomainError("grid must start at 0 and end at 1")
        if np.max(np.abs(d - d.mean())) > _SPACING_TOL:
            raise DomainError("grid spacing must be uniform")
        object.__setattr__(self, "points", pts)

    @classmethod
    def uniform(cls, m: int) -> "Grid":
        if m < 2:
            raise DomainError("grid needs at least 2 points")
        return cls(np.linspace(0.0, 1.0, m))

    @property
    def m(self) -> int:
        return self.points.size

    @property
    def spacing(self) -> float:
        return float(self.points[1] - self.points[0])

    def __eq__(self, other: object) -> bool:
        return isinstance(other, Grid) and np.array_equal(self.points, other.points)

    def __hash__(self) -> int:
        return hash((self.points.size, float(self.points[1])))


@dataclass(frozen=True, eq=False)
class FtsDataset:
    """An ordered sequence of curves sharing one grid (rows are time order)."""

    grid: Grid
    values: np.ndarray
    log: AccessLog | None = field(default=None, repr=False, compare=False)

    def __post_init__(self) -> None:
        vals = _freeze(self.values)
        if vals.ndim != 2:
            raise DomainError("dataset values must be a 2-D (n_curves, m) array")
        if vals.shape[0] < 2:
            raise DomainError("dataset needs at least 2 curves")
        if vals.shape[1] != self.grid.m:
            raise DomainError(
                f"curves have {vals.shape[1]} points but the grid has {self.grid.m}"
            )
        if not np.all(np.isfinite(vals)):
            raise DomainError("curve values must be finite")
        object.__setattr__(self, "values", vals)

    @property
    def n_curves(self) -> int:
        return self.values.shape[0]

    def curve(self, i: int) -> np.ndarray:
        """Row i (0-based), recorded as a full-curve access."""
        if not 0 <= i < self.n_curves:
            raise DomainError(f"curve index {i} out of range 0..{self.n_curves - 1}")
        if self.log is not None:
            self.log.record(i, "full")
        return self.values[i]

    def curve_prefix(self, i: int, stop: int) -> np.ndarray:
        """The first `stop` values of row i, recorded as a prefix access."""
        if not 0 <= i < self.n_curves:
            raise DomainError(f"curve index {i} out of range 0..{self.n_curves - 1}")
        if not 0 < stop <= self.grid.m:
            raise DomainError("prefix length out of range")
        if self.log is not None:
            self.log.record(i, "prefix")
        return self.values[i, :stop]

    def curve_matrix(self) -> np.ndarray:
        """The full (n, m) matrix; every row is recorded as accessed."""
        if self.log is not None:
            for i in range(self.n_curves):
                self.log.record(i, "full")
        return self.values

    def head(self, n: int) -> "FtsDataset":
        """The first n curves, sharing this dataset's access log.

        Row indices in the head view coincide with absolute row indices,
        so audit records stay unambiguous.
        """
        if not 2 <= n <= self.n_curves:
            raise DomainError(f"head size {n} out of range 2..{self.n_curves}")
        return FtsDataset(self.grid, self.values[:n], log=self.log)

    def with_log(self, log: AccessLog | None) -> "FtsDataset":
        return FtsDataset(self.grid, self.values, log=log)


@dataclass(frozen=True)
class FocalSpec:
    """Prediction scenario: what is observed and what is being predicted.

    mode is one of ``one-step-ahead`` (full focal curve, predict the next
    curve), ``dynamic-updating`` (focal observed on [0, q], predict its
    tail on (q, 1]) or ``h-step`` (full focal curve, predict the curve h
    steps ahead).
    """

    mode: str
    q: float | None = None
    h: int = 1

    def __post_init__(self) -> None:
        if self.mode not in (ONE_STEP, DYNAMIC_UPDATING, H_STEP):
            raise DomainError(f"unknown mode {self.mode!r}")
        if self.mode == DYNAMIC_UPDATING:
            if self.q is None or not 0.0 < self.q < 1.0:
                raise DomainError("dynamic updating needs a cutoff q in (0, 1)")
        if self.mode == H_STEP and self.h < 1:
            raise DomainError("h-step needs h >= 1")

    @classmethod
    def one_step_ahead(cls) -> "FocalSpec":
        return cls(ONE_STEP)

    @classmethod
    def dynamic_updating(cls, q: float) -> "FocalSpec":
        return cls(DYNAMIC_UPDATING, q=q)

    @classmethod
    def h_step(cls, h: int) -> "FocalSpec":
        return cls(H_STEP, h=h)

    def split(self, grid: Grid) -> tuple[tuple[int, int], tuple[int, int]]:
        """Index spans (start, stop) of the focal domain and prediction domain."""
        m = grid.m
        if self.mode == DYNAMIC_UPDATING:
            stop = int(np.searchsorted(grid.points, self.q + _CUTOFF_TOL, side="right"))
            if stop < 2:
                raise DomainError(f"cutoff q={self.q} leaves fewer than 2 observed grid points")
            if stop >= m:
                raise DomainError(f"cutoff q={self.q} leaves no grid points to predict")
            return (0, stop), (stop, m)
        return (0, m), (0, m)

    def focal_points(self, grid: Grid) -> np.ndarray:
        (a, b), _ = self.split(grid)
        return grid.points[a:b]

    def projection_points(self, grid: Grid) -> np.ndarray:
        _, (a, b) = self.split(grid)
        return grid.points[a:b]

    @property
    def steps_ahead(self) -> int:
        return self.h if self.mode == H_STEP else 1


@dataclass(frozen=True, eq=False)
class CandidatePair:
    """A past focal curve (restricted to the focal domain) and its projection."""

    index: int
    restricted: np.ndarray
    projection: np.ndarray


def restrict(values: np.ndarray, span: tuple[int, int]) -> np.ndarray:
    """The sub-vector of a curve over a grid index span [start, stop)."""
    values = np.asarray(values)
    start, stop = span
    if not (0 <= start < stop <= values.shape[-1]):
        raise DomainError(f"span {span} is empty or out of bounds for length {values.shape[-1]}")
    return values[..., start:stop]


def l2_sq_distance(a: np.ndarray, b: np.ndarray, t: np.ndarray) -> float:
    """Squared L2 distance of two segments over their t-interval (trapezoid rule)."""
    a = np.asarray(a, dtype=float)
    b = np.asarray(b, dtype=float)
    t = np.asarray(t, dtype=float)
    if a.shape != b.shape or a.shape != t.shape:
        raise DomainError("segments and grid points must have equal lengths")
    diff = a - b
    return float(trapezoid_weights(t) @ (diff * diff))


def candidate_set(
    dataset: FtsDataset, spec: FocalSpec
) -> tuple[np.ndarray, list[CandidatePair]]:
    """The focal segment and the past-focal-curves sample with projections.

    One-step-ahead: the focal is the last curve and candidate i (0-based
    row) projects to row i+1.  h-step: candidate i projects to row i+h.
    Dynamic updating: the focal is the last curve's observed head and each
    earlier curve pairs its own head with its own tail.
    """
    n = dataset.n_curves
    (f0, f1), (p0, p1) = spec.split(dataset.grid)

    if spec.mode == DYNAMIC_UPDATING:
        if n < 3:
            raise DomainError("dynamic updating needs at least 3 curves")
        focal = dataset.curve_prefix(n - 1, f1)
        pairs = []
        for i in range(n - 1):
            row = dataset.curve(i)
            pairs.append(CandidatePair(i, row[f0:f1], row[p0:p1]))
        return focal, pairs

    h = spec.steps_ahead
    if spec.mode == ONE_STEP and n < 3:
        raise DomainError("one-step-ahead forecasting needs at least 3 curves")
    if spec.mode == H_STEP and n < h + 2:
        raise DomainError(f"h-step forecasting with h={h} needs at least {h + 2} curves")
    focal = dataset.curve(n - 1)
    pairs = []
    for i in range(n - h):
        pairs.append(CandidatePair(i, dataset.curve(i), dataset.curve(i + h)))
    return focal, pairs
