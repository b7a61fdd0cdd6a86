"""Covariance-level model of the random-displacement channel.

Quadrature convention: a = (x + i p) / sqrt(2), vacuum variance 1/2, and a
displacement by z shifts (x, p) by sqrt(2) (Re z, Im z).  Vectors are
ordered (x_1, p_1, ..., x_n, p_n).
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.linalg import solve_banded

from .errors import DimensionMismatch, NotOrthogonal, SingularRegion
from .noise_process import GaussianNoiseDist, MarkovParams, sample_paths
from .spectral import build_M, eigenvectors, noise_spectrum

ORTHOGONALITY_TOL = 1e-10
CHUNK_SHOTS = 4096


@dataclass(frozen=True)
class GaussianState:
    mean: np.ndarray
    cov: np.ndarray

    def __post_init__(self):
        mean = np.asarray(self.mean, dtype=float)
        cov = np.asarray(self.cov, dtype=float)
        if mean.ndim != 1 or mean.size % 2:
            raise DimensionMismatch("mean must have length 2n")
        if cov.shape != (mean.size, mean.size):
            raise DimensionMismatch(f"cov shape {cov.shape} does not match mean length {mean.size}")
        if not np.allclose(cov, cov.T, atol=1e-12):
            raise ValueError("covariance must be symmetric")
        object.__setattr__(self, "mean", mean)
        object.__setattr__(self, "cov", cov)

    @property
    def n_modes(self) -> int:
        return self.mean.size // 2

    @classmethod
    def vacuum(cls, n: int) -> GaussianState:
        return cls(np.zeros(2 * n), 0.5 * np.eye(2 * n))

    @classmethod
    def coherent(cls, alphas) -> GaussianState:
        alphas = np.atleast_1d(np.asarray(alphas, dtype=complex))
        mean = np.empty(2 * alphas.size)
        mean[0::2] = math.sqrt(2.0) * alphas.real
        mean[1::2] = math.sqrt(2.0) * alphas.imag
        return cls(mean, 0.5 * np.eye(2 * alphas.size))

    def photon_numbers(self) -> np.ndarray:
        d = np.diag(self.cov)
        return (d[0::2] + d[1::2] - 1.0) / 2.0 + (self.mean[0::2] ** 2 + self.mean[1::2] ** 2) / 2.0

    def total_photons(self) -> float:
        return float(self.photon_numbers().sum())


@dataclass(frozen=True)
class NoiseCovariance:
    """Covariance of the displacement vector sqrt(2) (Re z_k, Im z_k)."""

    matrix: np.ndarray

    def __post_init__(self):
        m = np.asarray(self.matrix, dtype=float)
        if m.ndim != 2 or m.shape[0] != m.shape[1] or m.shape[0] % 2:
            raise DimensionMismatch("noise covariance must be 2n x 2n")
        object.__setattr__(self, "matrix", m)

    @property
    def n_modes(self) -> int:
        return self.matrix.shape[0] // 2

    @classmethod
    def from_quadrature_block(cls, block) -> NoiseCovariance:
        """Same block for x and p, no x-p cross terms."""
        return cls(np.kron(np.asarray(block, dtype=float), np.eye(2)))

    def quadrature_block(self) -> np.ndarray:
        return self.matrix[0::2, 0::2]


def apply_additive_noise(state: GaussianState, noisecov: NoiseCovariance) -> GaussianState:
    if noisecov.matrix.shape != state.cov.shape:
        raise DimensionMismatch(
            f"noise covariance {noisecov.matrix.shape} vs state covariance {state.cov.shape}"
        )
    return GaussianState(state.mean.copy(), state.cov + noisecov.matrix)


def stationary_noise_cov(n: int, mu: float, sigma: float) -> NoiseCovariance:
    """(1 - mu^2) sigma M^{-1} per quadrature, via banded solves."""
    if mu >= 1.0 or sigma <= 0.0:
        raise SingularRegion(f"stationary covariance needs mu < 1 and sigma > 0 (mu={mu}, sigma={sigma})")
    M = build_M(n, mu)
    ab = np.zeros((3, n))
    ab[0, 1:] = M.offdiag
    ab[1] = M.diag
    ab[2, :-1] = M.offdiag
    block = (1.0 - mu * mu) * sigma * solve_banded((1, 1), ab, np.eye(n))
    block = 0.5 * (block + block.T)
    return NoiseCovariance.from_quadrature_block(block)


def _check_orthogonal(O):
    O = np.asarray(O, dtype=float)
    if O.ndim != 2 or O.shape[0] != O.shape[1]:
        raise NotOrthogonal("O must be square")
    err = np.max(np.abs(O.T @ O - np.eye(O.shape[0])))
    if err > ORTHOGONALITY_TOL:
        raise NotOrthogonal(f"max |O^T O - I| = {err:.3g}")
    return O


def encode_orthogonal(state: GaussianState, O) -> GaussianState:
    """Passive transformation a~_j = sum_k O_jk a_k on n modes."""
    O = _check_orthogonal(O)
    if O.shape[0] != state.n_modes:
        raise DimensionMismatch(f"O is {O.shape[0]}x{O.shape[0]} but state has {state.n_modes} modes")
    S = np.kron(O, np.eye(2))
    cov = S @ state.cov @ S.T
    return GaussianState(S @ state.mean, 0.5 * (cov + cov.T))


@dataclass
class DecoupleReport:
    max_offdiag: float
    variances: np.ndarray
    expected: np.ndarray

    @property
    def max_diag_error(self) -> float:
        return float(np.max(np.abs(self.variances - self.expected)))

    def passed(self, tol: float = 1e-8) -> bool:
        return self.max_offdiag < tol and self.max_diag_error < tol


def decouple_check(n: int, mu: float, sigma: float) -> DecoupleReport:
    """Conjugate the stationary noise by the eigenbasis of M and measure what is left off-diagonal."""
    noise = stationary_noise_cov(n, mu, sigma)
    O = eigenvectors(build_M(n, mu))
    S = np.kron(O, np.eye(2))
    rotated = S @ noise.matrix @ S.T
    diag = np.diag(rotated)
    off = rotated - np.diag(diag)
    return DecoupleReport(
        max_offdiag=float(np.max(np.abs(off))) if n > 1 else 0.0,
        variances=diag[0::2].copy(),
        expected=noise_spectrum(n, mu, sigma).variances,
    )


def dft_collective(paths: np.ndarray) -> np.ndarray:
    """z~_j = n^{-1/2} sum_{k=1}^n exp(i 2 pi (j-1) k / n) z_k, along the last axis."""
    paths = np.asarray(paths, dtype=complex)
    n = paths.shape[-1]
    j = np.arange(n)[:, None]
    k = np.arange(1, n + 1)[None, :]
    F = np.exp(2j * math.pi * j * k / n) / math.sqrt(n)
    return paths @ F.T


@dataclass
class UnravelReport:
    n: int
    path_passed: np.ndarray
    first_mode_error: np.ndarray
    residual_ratio: np.ndarray
    # variance of z~_1 / sqrt(n) and its standard error
    variance: float
    variance_se: float

    @property
    def all_passed(self) -> bool:
        return bool(np.all(self.path_passed))

    def variance_z(self, expected: float) -> float:
        return abs(self.variance - expected) / self.variance_se


def dft_unravel(n: int, paths) -> UnravelReport:
    """Check that perfectly correlated paths collapse onto the first collective mode."""
    if n < 2:
        raise ValueError("n must be >= 2")
    paths = np.atleast_2d(np.asarray(paths, dtype=complex))
    if paths.shape[1] != n:
        raise DimensionMismatch(f"paths have length {paths.shape[1]}, expected {n}")
    zt = dft_collective(paths)
    z1 = paths[:, 0]
    scale = math.sqrt(n) * np.abs(z1)
    first_err = np.abs(zt[:, 0] - math.sqrt(n) * z1)
    rest = np.max(np.abs(zt[:, 1:]), axis=1)
    with np.errstate(divide="ignore", invalid="ignore"):
        ratio = np.where(scale > 0, rest / scale, np.where(rest == 0, 0.0, np.inf))
    passed = (first_err <= 1e-12 * np.maximum(scale, 1e-300)) & (rest <= 1e-12 * scale)

    w = zt[:, 0] / math.sqrt(n)
    dev2 = np.abs(w - w.mean()) ** 2
    count = w.size
    var = float(dev2.sum() / max(count - 1, 1))
    se = float(dev2.std(ddof=1) / math.sqrt(count)) if count > 1 else math.inf
    return UnravelReport(n, passed, first_err, ratio, var, se)


@dataclass
class MonteCarloResult:
    mean: np.ndarray
    cov: np.ndarray
    mean_se: np.ndarray
    cov_se: np.ndarray
    shots: int

    def z_scores(self, state: GaussianState) -> tuple[np.ndarray, np.ndarray]:
        """Standardised deviations from an analytic state (mean, covariance)."""
        with np.errstate(divide="ignore", invalid="ignore"):
            zm = np.abs(self.mean - state.mean) / self.mean_se
            zc = np.abs(self.cov - state.cov) / self.cov_se
        return np.nan_to_num(zm), np.nan_to_num(zc)


def _sample_chunk(params, state, n, size, seed, chunk):
    rng = np.random.default_rng(np.random.SeedSequence([seed, chunk]))
    z = sample_paths(params, GaussianNoiseDist(0j, params.sigma), n, size, rng)
    x = rng.multivariate_normal(state.mean, state.cov, size=size, method="eigh")
    x[:, 0::2] += math.sqrt(2.0) * z.real
    x[:, 1::2] += math.sqrt(2.0) * z.imag
    return x


def monte_carlo_channel(
    params: MarkovParams, state: GaussianState, n: int, shots: int, seed: int
) -> MonteCarloResult:
    """Sampled output statistics for stationary-start noise.

    Shots are generated in fixed-size chunks whose generators are keyed
    by (seed, chunk index), so the result does not depend on how chunks
    are scheduled.
    """
    if state.n_modes != n:
        raise DimensionMismatch(f"state has {state.n_modes} modes, expected {n}")
    if shots < 2:
        raise ValueError("need at least two shots")
    chunks = []
    for c, start in enumerate(range(0, shots, CHUNK_SHOTS)):
        size = min(CHUNK_SHOTS, shots - start)
        chunks.append(_sample_chunk(params, state, n, size, seed, c))
    x = np.concatenate(chunks)

    mean = x.mean(axis=0)
    dx = x - mean
    cov = dx.T @ dx / (shots - 1)
    mean_se = dx.std(axis=0, ddof=1) / math.sqrt(shots)
    # standard error of each covariance entry from the spread of products
    prod_sq = np.einsum("si,sj->ij", dx**2, dx**2) / shots
    cov_se = np.sqrt(np.maximum(prod_sq - cov**2, 0.0) / shots)
    return MonteCarloResult(mean, cov, mean_se, cov_se, shots)
