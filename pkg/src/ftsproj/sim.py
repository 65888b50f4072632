"""Shock-contaminated functional time series generator.

A scalar path over [0, n_periods] is the sum of three independent
components: a stationary squared-exponential Gaussian noise, a random
periodic function of period 1 (a Gaussian process with a periodic
kernel), and an occasional shock process.  Shocks switch on according to
a two-state Markov chain that can never stay on twice in a row, are
shaped like sigma_g^2 * (g(t)^2 - g(0)^2) for an independent copy g of
the periodic component, and are offset by a uniform start time u so each
on-interval straddles two contiguous unit periods.  Slicing the path at
integer times yields the functional time series.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .core import FtsDataset, Grid
from .errors import DomainError, NumericError

_JITTERS = (1e-10, 1e-9, 1e-8, 1e-7, 1e-6)


@dataclass(frozen=True)
class ShockModelParams:
    """Generator configuration; contamination level mu is the expected
    proportion of shocked periods."""

    mu: float
    n_periods: int
    points_per_period: int
    noise_lengthscale: float = 0.2
    periodic_lengthscale: float = 1.0
    shock_scale: float = 10.0
    seed: int = 0

    def __post_init__(self) -> None:
        if not 0.0 <= self.mu < 1.0:
            raise DomainError("mu must lie in [0, 1)")
        if self.n_periods < 2:
            raise DomainError("need at least 2 periods")
        if self.points_per_period < 4:
            raise DomainError("need at least 4 points per period")
        if self.noise_lengthscale <= 0 or self.periodic_lengthscale <= 0:
            raise DomainError("lengthscales must be > 0")
        if self.shock_scale <= 0:
            raise DomainError("shock scale must be > 0")


@dataclass
class SimTrace:
    """The generated components on the full grid plus the shock bookkeeping."""

    noise: np.ndarray
    periodic: np.ndarray
    shocks: np.ndarray
    shock_offset: float
    shock_states: np.ndarray  # x_0 .. x_{n_periods}


def squared_exponential_cov(t: np.ndarray, s: np.ndarray, lengthscale: float) -> np.ndarray:
    lag = np.subtract.outer(np.asarray(t, float), np.asarray(s, float))
    return np.exp(-(lag * lag) / (2.0 * lengthscale**2))


def periodic_cov(t: np.ndarray, s: np.ndarray, lengthscale: float) -> np.ndarray:
    lag = np.subtract.outer(np.asarray(t, float), np.asarray(s, float))
    sin = np.sin(np.pi * np.abs(lag))
    return np.exp(-2.0 * sin * sin / lengthscale**2)


def shock_shape(g_values: np.ndarray, g_at_zero: float, scale: float) -> np.ndarray:
    """Shock magnitude sigma_g^2 * (g(t)^2 - g(0)^2); exactly zero at t = 0."""
    return scale * (np.asarray(g_values, dtype=float) ** 2 - g_at_zero**2)


def cholesky_with_jitter(K: np.ndarray) -> np.ndarray:
    """Lower Cholesky factor with escalating diagonal jitter (1e-10 to 1e-6)."""
    eye = np.eye(K.shape[0])
    for jitter in _JITTERS:
        try:
            return np.linalg.cholesky(K + jitter * eye)
        except np.linalg.LinAlgError:
            continue
    raise NumericError("covariance not positive definite even after jitter")


def sample_periodic_gp(
    lengthscale: float,
    points: np.ndarray,
    rng: np.random.Generator,
    size: int | None = None,
) -> np.ndarray:
    """Trajectories of the zero-mean period-1 Gaussian process at `points`.

    Returns one curve, or a (size, m) stack when size is given.
    """
    points = np.asarray(points, dtype=float)
    if points.size < 4:
        raise DomainError("need at least 4 grid points per period")
    L = cholesky_with_jitter(periodic_cov(points, points, lengthscale))
    k = 1 if size is None else size
    draws = (L @ rng.standard_normal((points.size, k))).T
    return draws[0] if size is None else draws


def sample_noise_gp(
    lengthscale: float, points: np.ndarray, rng: np.random.Generator
) -> np.ndarray:
    """A zero-mean squared-exponential Gaussian path on a uniform grid.

    Sampled blockwise: each period's points are drawn conditionally on the
    trailing one-time-unit window of what has already been generated.  The
    kernel's correlation across a whole unit is negligible for the
    lengthscales used here, so the seams are exact to well below sampling
    noise.
    """
    points = np.asarray(points, dtype=float)
    n = points.size
    if n < 2:
        raise DomainError("need at least 2 grid points")
    step = points[1] - points[0]
    window = int(round(1.0 / step))  # points per time unit

    path = np.empty(n)
    first = min(n, window + 1)
    L0 = cholesky_with_jitter(squared_exponential_cov(points[:first], points[:first], lengthscale))
    path[:first] = L0 @ rng.standard_normal(first)

    cache: dict[int, tuple[np.ndarray, np.ndarray]] = {}
    start = first
    while start < n:
        stop = min(n, start + window)
        new = points[start:stop]
        win = points[start - (window + 1) : start]
        key = stop - start
        if key not in cache:
            K_ww = squared_exponential_cov(win, win, lengthscale)
            K_nw = squared_exponential_cov(new, win, lengthscale)
            K_nn = squared_exponential_cov(new, new, lengthscale)
            Lw = cholesky_with_jitter(K_ww)
            # M = K_nw K_ww^{-1} via two triangular solves
            M = np.linalg.solve(Lw.T, np.linalg.solve(Lw, K_nw.T)).T
            Lc = cholesky_with_jitter(K_nn - M @ K_nw.T)
            cache[key] = (M, Lc)
        M, Lc = cache[key]
        mean = M @ path[start - (window + 1) : start]
        path[start:stop] = mean + Lc @ rng.standard_normal(stop - start)
        start = stop
    return path


def sample_shock_process(
    mu: float,
    shock_scale: float,
    periodic_lengthscale: float,
    n_periods: int,
    points: np.ndarray,
    rng: np.random.Generator,
) -> tuple[np.ndarray, float, np.ndarray]:
    """The shock path on the full grid, its uniform offset u, and the chain states.

    The on/off chain starts off, turns on with probability rho = mu/(2-mu)
    and always switches off again, so two consecutive on-states are
    impossible and the long-run proportion of shocked periods tends to mu.
    The shock shape starts from exactly zero at each on-interval boundary.
    """
    if not 0.0 <= mu < 1.0:
        raise DomainError("mu must lie in [0, 1)")
    points = np.asarray(points, dtype=float)
    rho = mu / (2.0 - mu)

    u = float(rng.uniform(0.0, 1.0))
    states = np.zeros(n_periods + 1, dtype=np.int64)
    draws = rng.uniform(size=n_periods)
    for i in range(1, n_periods + 1):
        if states[i - 1] == 0 and draws[i - 1] < rho:
            states[i] = 1

    path = np.zeros(points.size)
    if rho == 0.0 or not states.any():
        return path, u, states

    step = points[1] - points[0]
    per_period = int(round(1.0 / step))
    # the shock shape is evaluated on the u-shifted grid, jointly with g(0)
    shifted = np.mod(np.arange(per_period) * step - u, 1.0)
    g = sample_periodic_gp(
        periodic_lengthscale, np.append(shifted, 0.0), rng, size=None
    )
    shape = shock_shape(g[:per_period], g[-1], shock_scale)

    elapsed = points - u
    active = elapsed >= 0.0
    interval = np.zeros(points.size, dtype=np.int64)
    interval[active] = np.floor(elapsed[active]).astype(np.int64) + 1
    beyond = interval > n_periods  # only reachable when u draws exactly 0
    on = states[np.clip(interval, 0, n_periods)] == 1
    idx = np.arange(points.size) % per_period
    mask = active & on & ~beyond
    path[mask] = shape[idx[mask]]
    return path, u, states


def generate_fts(params: ShockModelParams) -> tuple[FtsDataset, SimTrace]:
    """Generate the shock-model path, slice it into unit-period curves.

    The three components come from independent child streams of the seed,
    so each is reproducible on its own.  Slice i covers [i, i+1] inclusive
    of both ends (the next slice starts where the previous one stopped).
    """
    w = params.points_per_period
    n_points = params.n_periods * w + 1
    points = np.arange(n_points) / w

    children = np.random.SeedSequence(params.seed).spawn(3)
    rng_noise = np.random.default_rng(children[0])
    rng_periodic = np.random.default_rng(children[1])
    rng_shock = np.random.default_rng(children[2])

    noise = sample_noise_gp(params.noise_lengthscale, points, rng_noise)
    one_period = sample_periodic_gp(
        params.periodic_lengthscale, np.arange(w) / w, rng_periodic
    )
    periodic = one_period[np.arange(n_points) % w]
    shocks, offset, states = sample_shock_process(
        params.mu,
        params.shock_scale,
        params.periodic_lengthscale,
        params.n_periods,
        points,
        rng_shock,
    )

    path = noise + periodic + shocks
    curves = np.stack(
        [path[i * w : (i + 1) * w + 1] for i in range(params.n_periods)]
    )
    dataset = FtsDataset(Grid.uniform(w + 1), curves)
    trace = SimTrace(
        noise=noise,
        periodic=periodic,
        shocks=shocks,
        shock_offset=offset,
        shock_states=states,
    )
    return dataset, trace
