"""Water-filling capacity of the Markov-correlated additive noise channel.

Per-mode capacities are in bits.  With noise variances s_k and photon
budget N, the optimal allocation is N_k = (W - s_k)_+ with the water level
W fixed by mean_k (W - s_k)_+ = N; the Lagrange multiplier is
L = log2(1 + 1/W).  In the n -> inf limit the sum over collective modes
becomes an integral over the noise symbol sigma(lam).
"""

from __future__ import annotations

import math
import os
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from ._quadrature import checked_quad
from .errors import BlockMismatch, DomainError, QuadratureError, SingularRegion
from .spectral import noise_spectrum

_LN2 = math.log(2.0)
CAPACITY_EPSABS = 1e-11


@dataclass(frozen=True)
class ChannelParams:
    mu: float
    sigma: float
    N: float = 8.0

    def __post_init__(self):
        if not 0.0 <= self.mu <= 1.0:
            raise ValueError(f"mu must lie in [0, 1], got {self.mu}")
        if not self.sigma >= 0.0:
            raise ValueError(f"sigma must be >= 0, got {self.sigma}")
        if not self.N > 0.0:
            raise ValueError(f"N must be > 0, got {self.N}")

    @property
    def region(self) -> str:
        if self.sigma == 0.0:
            return "sigma_zero"
        if self.mu == 1.0:
            return "mu_one"
        return "regular"


@dataclass
class WaterFillSolution:
    water_level: float
    capacity: float
    residual: float
    # per-mode photon numbers (discrete case)
    allocation: np.ndarray | None = None
    # start of the active band [crossing, pi] (continuous case)
    crossing: float | None = None
    region: str = "regular"

    @property
    def lagrange(self) -> float:
        return math.log2(1.0 + 1.0 / self.water_level)


def g(x):
    """Entropy in bits of a thermal state with mean photon number x."""
    arr = np.asarray(x, dtype=float)
    if np.any(arr < 0.0) or np.any(np.isnan(arr)):
        raise DomainError("g(x) is defined for x >= 0")
    with np.errstate(divide="ignore", invalid="ignore", over="ignore"):
        # (x+1)log(x+1) - x log x, rearranged to avoid cancellation at large x
        # and overflow of 1/x at tiny x
        tail = np.where(arr >= 1.0, arr * np.log1p(1.0 / arr), arr * (np.log1p(arr) - np.log(arr)))
        out = np.log1p(arr) + tail
    out = np.where(arr == 0.0, 0.0, out) / _LN2
    return float(out) if out.ndim == 0 else out


def _g_scalar(x: float) -> float:
    if x == 0.0:
        return 0.0
    tail = x * math.log1p(1.0 / x) if x >= 1.0 else x * (math.log1p(x) - math.log(x))
    return (math.log1p(x) + tail) / _LN2


def _bisect(f, target, lo, hi, tol, max_iter=200):
    """Bisection for f(W) = target with f nondecreasing on [lo, hi]."""
    f_lo, f_hi = f(lo), f(hi)
    if f_lo > target + tol or f_hi < target - tol:
        raise ValueError(f"root not bracketed: f({lo})={f_lo}, f({hi})={f_hi}, target {target}")
    if abs(f_lo - target) <= tol:
        return lo, f_lo - target
    if abs(f_hi - target) <= tol:
        return hi, f_hi - target
    mid, f_mid = lo, f_lo
    for _ in range(max_iter):
        mid = 0.5 * (lo + hi)
        f_mid = f(mid)
        assert f_lo - tol <= f_mid <= f_hi + tol, "constraint map must be nondecreasing in W"
        if abs(f_mid - target) <= tol or mid in (lo, hi):
            break
        if f_mid < target:
            lo, f_lo = mid, f_mid
        else:
            hi, f_hi = mid, f_mid
    return mid, f_mid - target


def waterfill_discrete(variances, N: float, tol: float = 1e-12) -> WaterFillSolution:
    s = np.asarray(variances, dtype=float).ravel()
    if s.size < 1:
        raise ValueError("need at least one mode")
    if not np.all(np.isfinite(s)) or np.any(s < 0.0):
        raise ValueError("noise variances must be finite and >= 0")
    if not N > 0.0:
        raise ValueError(f"N must be > 0, got {N}")

    def mean_power(W):
        return float(np.mean(np.maximum(W - s, 0.0)))

    W, residual = _bisect(mean_power, N, N, N + s.max(), tol)

    # exact level for the active set found by bisection
    active = s < W
    W_exact = (s.size * N + s[active].sum()) / active.sum()
    res_exact = mean_power(W_exact) - N
    if abs(res_exact) <= abs(residual):
        W, residual = W_exact, res_exact

    alloc = np.maximum(W - s, 0.0)
    capacity = float(np.mean(g(alloc + s) - g(s)))
    return WaterFillSolution(W, capacity, residual, allocation=alloc)


def capacity_discrete(variances, N: float) -> float:
    return waterfill_discrete(variances, N).capacity


def _symbol(lam: float, mu: float, sigma: float) -> float:
    return sigma * (1.0 - mu * mu) / ((1.0 - mu) ** 2 + 4.0 * mu * math.sin(lam / 2.0) ** 2)


def crossing_angle(W: float, mu: float, sigma: float) -> float:
    """lam* with sigma(lam) <= W exactly on [lam*, pi]; pi if nothing is active.

    Same as acos(clamp((1 + mu^2 - sigma (1 - mu^2) / W) / (2 mu))), in the
    half-angle form that keeps precision for small lam*.
    """
    if mu == 0.0:
        return 0.0 if W > sigma else math.pi
    s2 = (sigma * (1.0 - mu * mu) / W - (1.0 - mu) ** 2) / (4.0 * mu)
    return 2.0 * math.asin(math.sqrt(min(max(s2, 0.0), 1.0)))


def _check_regular(mu, sigma):
    if mu >= 1.0 or sigma <= 0.0:
        raise SingularRegion(f"continuous water-filling needs mu < 1 and sigma > 0 (mu={mu}, sigma={sigma})")


def _band_points(lo: float, mu: float) -> list[float]:
    """Geometric breakpoints past ``lo``.

    The symbol varies on the scale max(lam, 1 - mu), so doubling steps
    from that scale resolve both the peak at 0 and the tail.
    """
    if mu <= 0.5:
        return []
    p = max(lo, 1.0 - mu)
    pts = []
    while p < math.pi:
        if p > lo:
            pts.append(p)
        p *= 2.0
    return pts


def constraint_integral(W: float, mu: float, sigma: float) -> float:
    """``∫_0^pi (W - sigma(lam))_+ dlam / pi`` with the kink removed analytically."""
    lam0 = crossing_angle(W, mu, sigma)
    if lam0 >= math.pi:
        return 0.0
    val = checked_quad(
        lambda lam: W - _symbol(lam, mu, sigma), lam0, math.pi,
        points=_band_points(lam0, mu), epsabs=1e-14 * max(W, 1.0), limit=500,
        what="water-filling constraint",
    )
    return val / math.pi


def waterfill_continuous(mu: float, sigma: float, N: float, tol: float = 1e-10) -> WaterFillSolution:
    _check_regular(mu, sigma)
    if not N > 0.0:
        raise ValueError(f"N must be > 0, got {N}")
    lo = N + _symbol(math.pi, mu, sigma)
    hi = N + _symbol(0.0, mu, sigma)
    W, residual = _bisect(lambda w: constraint_integral(w, mu, sigma), N, lo, hi, tol)
    lam0 = crossing_angle(W, mu, sigma)
    return WaterFillSolution(W, _capacity_integral(W, lam0, mu, sigma), residual, crossing=lam0)


def _capacity_integral(W, lam0, mu, sigma):
    # on the active band N(lam) + sigma(lam) = W, elsewhere the integrand vanishes
    if lam0 >= math.pi:
        return 0.0
    gW = _g_scalar(W)
    val = checked_quad(
        lambda lam: gW - _g_scalar(_symbol(lam, mu, sigma)), lam0, math.pi,
        points=_band_points(lam0, mu), epsabs=CAPACITY_EPSABS, limit=500,
        what="capacity integral",
    )
    return val / math.pi


def solve_memory(params: ChannelParams, tol: float = 1e-10) -> WaterFillSolution:
    """Water-filling solution of the memory channel, singular regions included."""
    region = params.region
    if region != "regular":
        # noiseless channel: every mode carries N photons
        return WaterFillSolution(params.N, g(params.N), 0.0, crossing=0.0, region=region)
    sol = waterfill_continuous(params.mu, params.sigma, params.N, tol)
    sol.region = region
    return sol


def capacity_memory(params: ChannelParams, tol: float = 1e-10) -> float:
    """Classical capacity in bits per mode."""
    return solve_memory(params, tol).capacity


def capacity_bounds(params: ChannelParams, n: int, J: int) -> tuple[float, float]:
    """Broadband-channel bounds from J blocks of the sorted n-mode spectrum.

    Each block is replaced by its largest noise variance (lower bound) or
    its smallest (upper bound).
    """
    if J < 1 or n % J:
        raise BlockMismatch(f"J={J} does not divide n={n}")
    spec = noise_spectrum(n, params.mu, params.sigma)
    blocks = spec.variances.reshape(J, n // J)
    lower = capacity_discrete(blocks.max(axis=1), params.N)
    upper = capacity_discrete(blocks.min(axis=1), params.N)
    return lower, upper


@dataclass
class SweepResult:
    mu: np.ndarray
    sigma: np.ndarray
    N: float
    # capacity[i, j] at (mu[i], sigma[j]); NaN where the cell failed
    capacity: np.ndarray
    failures: dict = field(default_factory=dict)


def _sweep_cell(args):
    mu, sigma, N, tol = args
    try:
        return capacity_memory(ChannelParams(mu, sigma, N), tol), None
    except (QuadratureError, ValueError, AssertionError) as exc:
        return math.nan, f"{type(exc).__name__}: {exc}"


def default_workers() -> int:
    try:
        return max(1, int(os.environ.get("MEMCHAN_THREADS", "1")))
    except ValueError:
        return 1


def sweep(mu_grid, sigma_grid, N: float = 8.0, tol: float = 1e-10, workers: int | None = None) -> SweepResult:
    mu_grid = np.asarray(mu_grid, dtype=float)
    sigma_grid = np.asarray(sigma_grid, dtype=float)
    cells = [(float(m), float(s), N, tol) for m in mu_grid for s in sigma_grid]
    workers = default_workers() if workers is None else workers
    if workers > 1 and len(cells) > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            results = list(pool.map(_sweep_cell, cells, chunksize=8))
    else:
        results = [_sweep_cell(c) for c in cells]

    cap = np.array([r[0] for r in results]).reshape(mu_grid.size, sigma_grid.size)
    failures = {
        (k // sigma_grid.size, k % sigma_grid.size): r[1] for k, r in enumerate(results) if r[1] is not None
    }
    return SweepResult(mu_grid, sigma_grid, N, cap, failures)
