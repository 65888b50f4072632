"""Iterative construction of the focal-curve envelope.

The envelope is built in batches.  Each pass starts a batch with the
nearest remaining candidate and sweeps the rest once in increasing
distance order, admitting a curve only when it strictly enlarges the
fraction of grid points where the focal lies inside the batch's band.
The batch is merged into the envelope when doing so does not decrease the
focal's band depth (computed against the would-be envelope plus the focal
itself); either way the batch's curves are out of play.  The loop stops
when fewer than two candidates remain.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .core import CandidatePair, trapezoid_weights
from .depth import envelopment, mbd_all_fast
from .errors import DomainError


@dataclass
class Envelope:
    """Result of the envelope construction, with loop bookkeeping.

    members holds candidate indices in order of acceptance; distances the
    squared L2 distance of each member to the focal over the focal domain;
    focal_depth_trace the focal's depth after each accepted batch (with a
    one-member envelope scored by its envelopment fraction, the degenerate
    stand-in for the undefined two-curve depth).
    """

    members: list[int]
    distances: np.ndarray
    iterations: int
    focal_depth_trace: list[float] = field(default_factory=list)

    def __len__(self) -> int:
        return len(self.members)


def _focal_depth(member_rows: np.ndarray, focal: np.ndarray) -> float:
    if member_rows.shape[0] == 1:
        return envelopment(member_rows, focal)
    return float(mbd_all_fast(np.vstack([member_rows, focal[None, :]]))[-1])


def build_envelope(
    candidates: list[CandidatePair], focal: np.ndarray, t: np.ndarray
) -> Envelope:
    """Select the envelope of the focal from candidate curves on the focal domain."""
    if len(candidates) < 2:
        raise DomainError("envelope construction needs at least 2 candidates")
    focal = np.asarray(focal, dtype=float)
    rows = np.stack([np.asarray(c.restricted, dtype=float) for c in candidates])
    if rows.shape[1] != focal.size:
        raise DomainError("candidate segments must match the focal segment length")
    idx = np.array([c.index for c in candidates])

    w = trapezoid_weights(t)
    diff = rows - focal[None, :]
    dist = (diff * diff) @ w

    # increasing distance, ties toward smaller candidate index
    order = np.lexsort((idx, dist))

    remaining = list(order)
    chosen: list[int] = []  # positions into rows, acceptance order
    depth = 0.0
    trace: list[float] = []
    iterations = 0

    while len(remaining) >= 2:
        iterations += 1
        batch = [remaining[0]]
        lower = rows[remaining[0]].copy()
        upper = lower.copy()
        count = int(np.count_nonzero((lower <= focal) & (focal <= upper)))

        # one-pass sweep: after an acceptance only later curves stay eligible
        eligible = remaining[1:]
        pos = 0
        while pos < len(eligible):
            tail = eligible[pos:]
            lo = np.minimum(lower, rows[tail])
            hi = np.maximum(upper, rows[tail])
            counts = np.count_nonzero((lo <= focal) & (focal <= hi), axis=1)
            gains = np.nonzero(counts > count)[0]
            if gains.size == 0:
                break
            j = int(gains[0])
            picked = tail[j]
            batch.append(picked)
            lower = lo[j]
            upper = hi[j]
            count = int(counts[j])
            pos += j + 1

        new_depth = _focal_depth(rows[chosen + batch], focal)
        if new_depth >= depth:
            chosen = chosen + batch
            depth = new_depth
            trace.append(new_depth)

        batch_set = set(batch)
        remaining = [r for r in remaining if r not in batch_set]

    return Envelope(
        members=[int(idx[p]) for p in chosen],
        distances=dist[chosen],
        iterations=iterations,
        focal_depth_trace=trace,
    )


def envelope_band(curves) -> tuple[np.ndarray, np.ndarray]:
    """Pointwise min and max over a nonempty set of curves."""
    a = np.asarray(curves, dtype=float)
    if a.ndim == 1:
        a = a[None, :]
    if a.shape[0] == 0:
        raise DomainError("band needs at least one curve")
    return a.min(axis=0), a.max(axis=0)
