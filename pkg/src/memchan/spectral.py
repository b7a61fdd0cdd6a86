"""Spectrum of the stationary noise precision matrix.

For n channel uses the stationary joint density is

    P(z) ∝ exp(-z^† M z / ((1 - mu^2) sigma))

with M the tridiagonal matrix diag(1, 1+mu^2, ..., 1+mu^2, 1), off-diagonal
-mu.  Diagonalising M with a real orthogonal O yields independent
collective noise variables with variances (1 - mu^2) sigma / m_j.  As
n grows those variances are distributed like the symbol

    sigma(lam) = sigma (1 - mu^2) / |1 - mu e^{i lam}|^2,   lam in [0, pi].
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable

import numpy as np
from scipy.linalg import eigh_tridiagonal

from ._quadrature import checked_quad
from .errors import SingularRegion


@dataclass(frozen=True)
class SymTridiagonal:
    diag: np.ndarray
    offdiag: np.ndarray

    def __post_init__(self):
        diag = np.asarray(self.diag, dtype=float)
        offdiag = np.asarray(self.offdiag, dtype=float)
        if diag.ndim != 1 or diag.size < 1:
            raise ValueError("diag must be a nonempty vector")
        if offdiag.shape != (diag.size - 1,):
            raise ValueError("offdiag must have length n - 1")
        object.__setattr__(self, "diag", diag)
        object.__setattr__(self, "offdiag", offdiag)

    @property
    def n(self) -> int:
        return self.diag.size

    def todense(self) -> np.ndarray:
        return np.diag(self.diag) + np.diag(self.offdiag, 1) + np.diag(self.offdiag, -1)


@dataclass(frozen=True)
class NoiseSpectrum:
    """Collective noise variances, sorted nonincreasing."""

    variances: np.ndarray
    mu: float
    sigma: float

    @property
    def n(self) -> int:
        return self.variances.size

    def mean(self) -> float:
        return float(np.mean(self.variances))


def _check_regular(mu, sigma):
    if mu >= 1.0 or sigma <= 0.0:
        raise SingularRegion(f"spectrum requires mu < 1 and sigma > 0 (mu={mu}, sigma={sigma})")


def build_M(n: int, mu: float) -> SymTridiagonal:
    """Precision matrix of the stationary AR(1) law over n uses.

    For n = 1 the stationary density alone gives M = (1 - mu^2).
    """
    if n < 1:
        raise ValueError("n must be >= 1")
    if not 0.0 <= mu <= 1.0:
        raise ValueError(f"mu must lie in [0, 1], got {mu}")
    if n == 1:
        return SymTridiagonal(np.array([1.0 - mu * mu]), np.empty(0))
    diag = np.full(n, 1.0 + mu * mu)
    diag[0] = diag[-1] = 1.0
    return SymTridiagonal(diag, np.full(n - 1, -mu))


def eigenvalues(M: SymTridiagonal) -> np.ndarray:
    """All eigenvalues of M in nondecreasing order."""
    if M.n == 1:
        return M.diag.copy()
    return eigh_tridiagonal(M.diag, M.offdiag, eigvals_only=True, lapack_driver="sterf")


def eigenvectors(M: SymTridiagonal) -> np.ndarray:
    """Orthogonal O with O M O^T diagonal; row j pairs with ``eigenvalues(M)[j]``."""
    if M.n == 1:
        return np.ones((1, 1))
    _, vecs = eigh_tridiagonal(M.diag, M.offdiag, lapack_driver="stemr")
    return np.ascontiguousarray(vecs.T)


def noise_spectrum(n: int, mu: float, sigma: float) -> NoiseSpectrum:
    _check_regular(mu, sigma)
    m = eigenvalues(build_M(n, mu))
    # ascending m  ->  descending variances
    return NoiseSpectrum((1.0 - mu * mu) * sigma / m, mu, sigma)


def symbol_m(lam, mu: float):
    """|1 - mu e^{i lam}|^2, written to stay accurate near lam = 0, mu = 1."""
    return (1.0 - mu) ** 2 + 4.0 * mu * np.sin(np.asarray(lam) / 2.0) ** 2


def symbol_sigma(lam, mu: float, sigma: float):
    lam_arr = np.asarray(lam, dtype=float)
    if mu == 1.0 and np.any(lam_arr == 0.0):
        raise SingularRegion("noise symbol diverges at mu = 1, lambda = 0")
    return sigma * (1.0 - mu * mu) / symbol_m(lam_arr, mu)


def szego_deviation(n: int, mu: float, sigma: float) -> float:
    """Mean absolute gap between sorted collective variances and the symbol on lam_j = pi j / n."""
    spec = noise_spectrum(n, mu, sigma)
    lam = math.pi * np.arange(1, n + 1) / n
    return float(np.mean(np.abs(spec.variances - symbol_sigma(lam, mu, sigma))))


def _peak_points(mu: float) -> list[float]:
    # the symbol varies on the scale max(lam, 1 - mu)
    if mu <= 0.5:
        return []
    pts, p = [], 1.0 - mu
    while p < math.pi:
        pts.append(p)
        p *= 2.0
    return pts


def symbol_average(
    F: Callable[[float], float],
    mu: float,
    sigma: float,
    epsabs: float = 1e-9,
    limit: int = 500,
) -> float:
    """``∫_0^pi F(sigma(lam)) dlam / pi`` by adaptive quadrature.

    Raises QuadratureError when QUADPACK reports trouble.
    """
    _check_regular(mu, sigma)
    k = sigma * (1.0 - mu * mu)

    def integrand(lam):
        return F(k / ((1.0 - mu) ** 2 + 4.0 * mu * math.sin(lam / 2.0) ** 2))

    val = checked_quad(
        integrand, 0.0, math.pi, points=_peak_points(mu), epsabs=epsabs * math.pi, limit=limit,
        what="symbol_average",
    )
    return val / math.pi
