"""Independent reference implementations used by tests.

These deliberately take the slow, literal route (pairwise definitions,
from-scratch recomputation, step-by-step loops) so they exercise none of
the code paths they are checking.
"""

import numpy as np

from ftsproj.core import trapezoid_weights
from ftsproj.depth import envelopment, mbd


def literal_envelope(candidates, focal, t):
    """Step-by-step transcription of the batch selection loop.

    Returns (member indices in acceptance order, depth trace of accepted
    batches).  Envelopment is recomputed from scratch at every check and
    depth uses the brute-force pairwise definition.
    """
    w = trapezoid_weights(np.asarray(t, dtype=float))
    focal = np.asarray(focal, dtype=float)

    def dist(c):
        d = np.asarray(c.restricted, dtype=float) - focal
        return float(w @ (d * d))

    def depth_of_focal(members):
        rows = np.stack([c.restricted for c in members])
        if len(members) == 1:
            return envelopment(rows, focal)
        return mbd(focal, rows, focal)

    pool = sorted(candidates, key=lambda c: (dist(c), c.index))
    selected = []
    depth = 0.0
    trace = []
    while len(pool) >= 2:
        batch = [pool[0]]
        for y in pool[1:]:
            current = envelopment(np.stack([c.restricted for c in batch]), focal)
            extended = envelopment(
                np.stack([c.restricted for c in batch + [y]]), focal
            )
            if extended > current:
                batch.append(y)
        new_depth = depth_of_focal(selected + batch)
        if new_depth >= depth:
            selected = selected + batch
            depth = new_depth
            trace.append(new_depth)
        taken = {id(c) for c in batch}
        pool = [c for c in pool if id(c) not in taken]
    return [c.index for c in selected], trace
