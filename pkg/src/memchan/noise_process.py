"""Gaussian AR(1) noise process on the complex plane.

The noise variable follows the Markov kernel

    w(z | z') ∝ exp(-|z - mu z'|^2 / ((1 - mu^2) sigma)),

so Gaussian laws stay Gaussian and only the mean and the total variance
E|z - mean|^2 need tracking.  P_1 is the initial law and P_n is reached
after n - 1 transitions.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy import integrate

from .errors import QuadratureError, ZeroVariance

DEFAULT_MAX_STEPS = 10_000
L1_TOLERANCE = 1e-6
# disk radius in units of sqrt(variance); tail mass beyond is ~exp(-64)
_DISK_WIDTHS = 8.0


@dataclass(frozen=True)
class MarkovParams:
    mu: float
    sigma: float

    def __post_init__(self):
        if not 0.0 <= self.mu <= 1.0:
            raise ValueError(f"mu must lie in [0, 1], got {self.mu}")
        if self.sigma < 0.0:
            raise ValueError(f"sigma must be >= 0, got {self.sigma}")


@dataclass(frozen=True)
class GaussianNoiseDist:
    """Isotropic complex Gaussian with ``variance = E|z - mean|^2``.

    ``variance == 0`` stands for a point mass at ``mean``.
    """

    mean: complex = 0j
    variance: float = 1.0

    def __post_init__(self):
        if self.variance < 0.0:
            raise ValueError(f"variance must be >= 0, got {self.variance}")
        object.__setattr__(self, "mean", complex(self.mean))
        object.__setattr__(self, "variance", float(self.variance))

    @property
    def is_singular(self) -> bool:
        return self.variance == 0.0

    def pdf(self, z):
        if self.is_singular:
            raise ZeroVariance("point mass has no density")
        r2 = np.abs(np.asarray(z) - self.mean) ** 2
        return np.exp(-r2 / self.variance) / (math.pi * self.variance)


def stationary(params: MarkovParams) -> GaussianNoiseDist:
    return GaussianNoiseDist(0j, params.sigma)


def transition_step(dist: GaussianNoiseDist, params: MarkovParams) -> GaussianNoiseDist:
    """Push ``dist`` through one application of the Markov kernel."""
    mu2 = params.mu * params.mu
    return GaussianNoiseDist(
        params.mu * dist.mean,
        mu2 * dist.variance + (1.0 - mu2) * params.sigma,
    )


def evolve(dist: GaussianNoiseDist, params: MarkovParams, steps: int) -> GaussianNoiseDist:
    """Closed form of ``steps`` successive transitions."""
    if steps < 0:
        raise ValueError("steps must be nonnegative")
    if steps == 0:
        return dist
    muk = params.mu**steps
    mu2k = muk * muk
    return GaussianNoiseDist(
        muk * dist.mean,
        mu2k * dist.variance + (1.0 - mu2k) * params.sigma,
    )


def _complex_normal(rng: np.random.Generator, variance, size):
    scale = np.sqrt(np.asarray(variance, dtype=float) / 2.0)
    return scale * (rng.standard_normal(size) + 1j * rng.standard_normal(size))


def sample_paths(
    params: MarkovParams,
    initial: GaussianNoiseDist,
    n: int,
    size: int,
    rng: np.random.Generator | int | None = None,
) -> np.ndarray:
    """Draw ``size`` independent noise paths of length ``n``.

    Returns a complex array of shape ``(size, n)``.
    """
    if n < 1:
        raise ValueError("path length n must be >= 1")
    rng = np.random.default_rng(rng)
    mu = params.mu
    innovation_var = (1.0 - mu * mu) * params.sigma
    paths = np.empty((size, n), dtype=complex)
    paths[:, 0] = initial.mean + _complex_normal(rng, initial.variance, size)
    for k in range(1, n):
        paths[:, k] = mu * paths[:, k - 1] + _complex_normal(rng, innovation_var, size)
    return paths


def sample_path(params: MarkovParams, initial: GaussianNoiseDist, n: int, seed: int) -> np.ndarray:
    """One noise path ``z_1..z_n``; deterministic in ``seed``."""
    return sample_paths(params, initial, n, 1, np.random.default_rng(seed))[0]


def l1_distance(d1: GaussianNoiseDist, d2: GaussianNoiseDist) -> float:
    """Integral of |p1 - p2| over the complex plane, in [0, 2].

    Evaluated by nested adaptive quadrature in a frame where the first
    mean sits at the origin and the second on the positive real axis.
    The curve p1 = p2 (a line or a circle) is passed to the integrator
    as explicit breakpoints.
    """
    if d1.is_singular or d2.is_singular:
        raise ZeroVariance("l1_distance needs strictly positive variances")
    v1, v2 = d1.variance, d2.variance
    d = abs(d2.mean - d1.mean)
    if d == 0.0 and v1 == v2:
        return 0.0

    R = d + _DISK_WIDTHS * math.sqrt(max(v1, v2))
    c1, c2 = 1.0 / (math.pi * v1), 1.0 / (math.pi * v2)
    a = 1.0 / v1 - 1.0 / v2
    log_ratio = math.log(v2 / v1)

    def integrand(y, x):
        r1 = x * x + y * y
        r2 = (x - d) ** 2 + y * y
        return abs(c1 * math.exp(-r1 / v1) - c2 * math.exp(-r2 / v2))

    # boundary p1 = p2:  a (x^2 + y^2) + 2 x d / v2 - d^2 / v2 = log(v2/v1)
    if a == 0.0:
        outer_points = [d / 2.0]
    else:
        xc = -(d / v2) / a
        rad2 = (log_ratio + d * d / v2) / a + xc * xc
        outer_points = []
        if rad2 > 0.0:
            rad = math.sqrt(rad2)
            outer_points = [p for p in (xc - rad, xc + rad) if -R < p < R]

    def inner(x):
        ymax = math.sqrt(max(R * R - x * x, 0.0))
        if ymax == 0.0:
            return 0.0
        points = None
        if a != 0.0:
            y2 = (log_ratio + d * d / v2 - 2.0 * x * d / v2) / a - x * x
            if 0.0 < y2 < ymax * ymax:
                points = [math.sqrt(y2)]
        val, err = integrate.quad(
            integrand, 0.0, ymax, args=(x,), points=points, epsabs=1e-12, epsrel=1e-10, limit=200
        )
        return 2.0 * val  # integrand is even in y

    val, err = integrate.quad(
        inner, -R, R, points=outer_points or None, epsabs=1e-10, epsrel=1e-10, limit=200
    )
    if err > L1_TOLERANCE:
        raise QuadratureError("l1_distance quadrature did not converge", err)
    return min(max(val, 0.0), 2.0)


def _distance(d1: GaussianNoiseDist, d2: GaussianNoiseDist) -> float:
    if d1 == d2:
        return 0.0
    if d1.is_singular and d2.is_singular:
        return 2.0
    return l1_distance(d1, d2)


@dataclass(frozen=True)
class NotForgetful:
    """Returned when the distance never drops below epsilon."""

    steps: int
    last_distance: float


def distance_profile(
    params: MarkovParams, d1: GaussianNoiseDist, d2: GaussianNoiseDist, steps: int
) -> np.ndarray:
    """``||P_n - P'_n||`` for n = 1..steps."""
    return np.array([_distance(evolve(d1, params, k), evolve(d2, params, k)) for k in range(steps)])


def forgetfulness_horizon(
    params: MarkovParams,
    d1: GaussianNoiseDist,
    d2: GaussianNoiseDist,
    epsilon: float,
    max_steps: int = DEFAULT_MAX_STEPS,
) -> int | NotForgetful:
    """Smallest n <= max_steps with ``||P_n - P'_n|| < epsilon``.

    n = 1 compares the initial laws themselves.
    """
    if epsilon <= 0.0:
        raise ValueError("epsilon must be positive")
    if max_steps < 1:
        raise ValueError("max_steps must be >= 1")

    dist = _distance(d1, d2)
    if dist < epsilon:
        return 1
    if params.mu == 1.0:
        # kernel is the identity, the distance never moves
        return NotForgetful(max_steps, dist)
    for n in range(2, max_steps + 1):
        dist = _distance(evolve(d1, params, n - 1), evolve(d2, params, n - 1))
        if dist < epsilon:
            return n
    return NotForgetful(max_steps, dist)
