"""Modified band depth, envelopment, and selection of the deepest curves.

The depth of a curve y against a reference sample is the average, over all
unordered pairs of distinct sample curves, of the fraction of grid points
where y lies inside the band the pair delimits (boundary contact counts as
inside).  `mbd` is the literal pairwise definition; `mbd_all_fast` computes
the same numbers for a whole sample at once from per-grid-point rank
counts, in O(n log n * m) instead of O(n^2 * m), and the two must agree
exactly.
"""

from __future__ import annotations

from itertools import combinations

import numpy as np

from .errors import DomainError


def _as_sample(curves) -> np.ndarray:
    a = np.asarray(curves, dtype=float)
    if a.ndim == 1:
        a = a[None, :]
    if a.ndim != 2:
        raise DomainError("curves must form a (n, m) array")
    return a


def envelopment(members, focal: np.ndarray) -> float:
    """Fraction of grid points where the focal lies inside the members' band."""
    a = _as_sample(members)
    if a.shape[0] == 0:
        raise DomainError("envelopment needs a nonempty member set")
    focal = np.asarray(focal, dtype=float)
    if focal.shape != (a.shape[1],):
        raise DomainError("focal segment length must match the member curves")
    lower = a.min(axis=0)
    upper = a.max(axis=0)
    inside = (lower <= focal) & (focal <= upper)
    return float(np.count_nonzero(inside)) / focal.size


def mbd(y: np.ndarray, band_curves, focal: np.ndarray) -> float:
    """Depth of y against the sample formed by `band_curves` plus the focal.

    Brute-force over all unordered pairs of distinct sample curves; pairs
    containing y itself count (they always envelope it).  Serves as the
    independent oracle for `mbd_all_fast`.
    """
    J = _as_sample(band_curves)
    if J.shape[0] < 2:
        raise DomainError("band depth needs at least 2 reference curves")
    focal = np.asarray(focal, dtype=float)
    y = np.asarray(y, dtype=float)
    sample = np.vstack([J, focal[None, :]])
    n, m = sample.shape
    inside_total = 0
    for i, j in combinations(range(n), 2):
        lo = np.minimum(sample[i], sample[j])
        hi = np.maximum(sample[i], sample[j])
        inside_total += int(np.count_nonzero((lo <= y) & (y <= hi)))
    n_pairs = n * (n - 1) // 2
    return inside_total / (n_pairs * m)


def _strict_rank_counts(sample: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Per entry: how many values in its column are strictly below / above it."""
    n, m = sample.shape
    order = np.argsort(sample, axis=0, kind="stable")
    sorted_vals = np.take_along_axis(sample, order, axis=0)
    idx = np.arange(n)[:, None]

    # first/last index of each tie group in sorted order
    is_first = np.ones((n, m), dtype=bool)
    is_first[1:] = sorted_vals[1:] != sorted_vals[:-1]
    grp_first = np.maximum.accumulate(np.where(is_first, idx, 0), axis=0)

    is_last = np.ones((n, m), dtype=bool)
    is_last[:-1] = sorted_vals[1:] != sorted_vals[:-1]
    grp_last = np.minimum.accumulate(np.where(is_last, idx, n - 1)[::-1], axis=0)[::-1]

    below = np.empty((n, m), dtype=np.int64)
    above = np.empty((n, m), dtype=np.int64)
    np.put_along_axis(below, order, grp_first, axis=0)
    np.put_along_axis(above, order, n - 1 - grp_last, axis=0)
    return below, above


def mbd_all_fast(sample) -> np.ndarray:
    """Depth of every curve in the sample with respect to the whole sample.

    Rank-based: at each grid point a pair fails to envelope a value only
    when both pair members are strictly above it or both strictly below
    it, so the enveloping-pair count is C(n,2) - C(below,2) - C(above,2).
    Equals the pairwise `mbd` (with reference sample = this sample) exactly.
    """
    a = _as_sample(sample)
    n, m = a.shape
    if n < 3:
        raise DomainError("fast band depth needs a sample of at least 3 curves")
    below, above = _strict_rank_counts(a)
    below = below.astype(float)
    above = above.astype(float)
    n_pairs = n * (n - 1) / 2.0
    enveloping = n_pairs - below * (below - 1) / 2.0 - above * (above - 1) / 2.0
    return enveloping.sum(axis=1) / (n_pairs * m)


def deepest_k(curves, focal: np.ndarray, k: int, indices=None) -> list[int]:
    """Indices of the k deepest curves, depth measured against curves + focal.

    The focal enters the reference sample but is never selected.  Ties in
    depth break toward the smaller index, and the result for a smaller k
    is always a prefix of the result for a larger one.
    """
    a = _as_sample(curves)
    n = a.shape[0]
    if indices is None:
        indices = np.arange(n)
    indices = np.asarray(indices)
    if indices.shape != (n,):
        raise DomainError("indices must parallel the curves")
    if not 1 <= k <= n:
        raise DomainError(f"k={k} out of range 1..{n}")
    if n == 1:
        return [int(indices[0])]
    focal = np.asarray(focal, dtype=float)
    depths = mbd_all_fast(np.vstack([a, focal[None, :]]))[:n]
    order = np.lexsort((indices, -depths))
    return [int(indices[j]) for j in order[:k]]
