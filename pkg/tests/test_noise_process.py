import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy import integrate
from scipy.stats import ncx2, norm

from memchan.errors import ZeroVariance
from memchan.noise_process import (
    GaussianNoiseDist,
    MarkovParams,
    NotForgetful,
    distance_profile,
    evolve,
    forgetfulness_horizon,
    l1_distance,
    sample_path,
    sample_paths,
    transition_step,
)

mus = st.floats(0.0, 1.0)
sigmas = st.floats(0.0, 10.0)
means = st.complex_numbers(max_magnitude=5.0, allow_nan=False, allow_infinity=False)
variances = st.floats(0.0, 10.0)


def l1_oracle(d1, d2):
    """Closed form: 2 (P1(A) - P2(A)) with A = {p1 > p2} a half-plane or a disk."""
    v1, v2 = d1.variance, d2.variance
    d = abs(d2.mean - d1.mean)
    if v1 == v2:
        return 2.0 * (2.0 * norm.cdf(d / 2.0 / math.sqrt(v1 / 2.0)) - 1.0)
    a = 1.0 / v1 - 1.0 / v2
    xc = -(d / v2) / a
    r2 = (math.log(v2 / v1) + d * d / v2) / a + xc * xc

    def in_disk(m, v):
        return ncx2.cdf(r2 / (v / 2.0), 2, (m - xc) ** 2 / (v / 2.0))

    inside = in_disk(0.0, v1) - in_disk(d, v2)
    return 2.0 * inside if a > 0 else -2.0 * inside


class TestTransition:
    @given(mu=mus, sigma=sigmas)
    def test_stationary_fixed_point(self, mu, sigma):
        d = GaussianNoiseDist(0j, sigma)
        out = transition_step(d, MarkovParams(mu, sigma))
        assert out.mean == 0
        assert out.variance == pytest.approx(sigma, rel=1e-15, abs=1e-300)

    def test_memoryless_forgets_immediately(self):
        out = transition_step(GaussianNoiseDist(3 - 1j, 7.0), MarkovParams(0.0, 2.0))
        assert out == GaussianNoiseDist(0j, 2.0)

    def test_perfect_memory_is_identity(self):
        d = GaussianNoiseDist(3 - 1j, 7.0)
        assert transition_step(d, MarkovParams(1.0, 2.0)) == d


class TestEvolve:
    def test_zero_steps(self):
        d = GaussianNoiseDist(1 + 2j, 0.3)
        assert evolve(d, MarkovParams(0.4, 2.0), 0) == d

    def test_two_steps_by_hand(self):
        # (2, 0) -> (1, 0.75) -> (0.5, 0.25*0.75 + 0.75)
        out = evolve(GaussianNoiseDist(2.0, 0.0), MarkovParams(0.5, 1.0), 2)
        assert out.mean == pytest.approx(0.5)
        assert out.variance == pytest.approx(0.9375)

    def test_long_run_reaches_stationary(self):
        out = evolve(GaussianNoiseDist(5 + 5j, 20.0), MarkovParams(0.9, 1.5), 2000)
        assert abs(out.mean) < 1e-12
        assert out.variance == pytest.approx(1.5, abs=1e-12)

    @given(mu=mus, sigma=sigmas, m=means, v=variances, k=st.integers(0, 30))
    def test_closed_form_matches_composition(self, mu, sigma, m, v, k):
        params = MarkovParams(mu, sigma)
        d = GaussianNoiseDist(m, v)
        it = d
        for _ in range(k):
            it = transition_step(it, params)
        closed = evolve(d, params, k)
        assert abs(closed.mean - it.mean) <= 1e-12 * (1 + abs(m))
        assert closed.variance == pytest.approx(it.variance, rel=1e-12, abs=1e-12)

    def test_negative_steps_rejected(self):
        with pytest.raises(ValueError):
            evolve(GaussianNoiseDist(), MarkovParams(0.5, 1.0), -1)


class TestSampling:
    def test_deterministic_for_seed(self):
        p = MarkovParams(0.5, 1.0)
        a = sample_path(p, GaussianNoiseDist(0j, 1.0), 50, seed=11)
        b = sample_path(p, GaussianNoiseDist(0j, 1.0), 50, seed=11)
        np.testing.assert_array_equal(a, b)
        assert a.shape == (50,)

    def test_perfect_memory_constant_path(self):
        z = sample_path(MarkovParams(1.0, 3.0), GaussianNoiseDist(1j, 2.0), 20, seed=3)
        assert np.all(z == z[0])

    def test_memoryless_uncorrelated(self):
        z = sample_paths(MarkovParams(0.0, 1.0), GaussianNoiseDist(0j, 1.0), 2, 100_000, 5)
        prod = z[:, 0] * np.conj(z[:, 1])
        se = np.std(prod) / math.sqrt(prod.size)
        assert abs(prod.mean()) < 5 * se

    @pytest.mark.parametrize("lag", [1, 2, 3])
    def test_ar1_autocovariance(self, lag):
        mu, sigma = 0.5, 1.0
        z = sample_paths(MarkovParams(mu, sigma), GaussianNoiseDist(0j, sigma), 4, 100_000, 17)
        prod = z[:, 0] * np.conj(z[:, lag])
        se = np.std(prod) / math.sqrt(prod.size)
        assert abs(prod.mean() - mu**lag * sigma) < 5 * se

    @pytest.mark.parametrize("k", [1, 2, 5])
    def test_marginals_match_evolve(self, k):
        params = MarkovParams(0.7, 2.0)
        init = GaussianNoiseDist(3 - 1j, 0.4)
        z = sample_paths(params, init, 5, 100_000, 23)[:, k - 1]
        ref = evolve(init, params, k - 1)
        shots = z.size
        mean_se = math.sqrt(ref.variance / shots)
        assert abs(z.mean() - ref.mean) < 5 * mean_se
        dev2 = np.abs(z - z.mean()) ** 2
        assert abs(dev2.mean() - ref.variance) < 5 * dev2.std() / math.sqrt(shots)


class TestL1Distance:
    def test_identical(self):
        d = GaussianNoiseDist(1 + 1j, 2.0)
        assert l1_distance(d, d) == 0.0

    def test_equal_means_radial_oracle(self):
        v1, v2 = 1.0, 2.0
        r_star2 = v1 * v2 * math.log(v2 / v1) / (v2 - v1)

        def radial(r):
            return 2 * math.pi * r * abs(
                math.exp(-r * r / v1) / (math.pi * v1) - math.exp(-r * r / v2) / (math.pi * v2)
            )

        oracle = sum(
            integrate.quad(radial, a, b, epsabs=1e-13)[0]
            for a, b in ((0, math.sqrt(r_star2)), (math.sqrt(r_star2), 60))
        )
        # also closed form 2(e^{-r*^2/v2} - e^{-r*^2/v1}) = 2 (1/2 - 1/4)
        assert oracle == pytest.approx(0.5, abs=1e-12)
        assert l1_distance(GaussianNoiseDist(0, v1), GaussianNoiseDist(0, v2)) == pytest.approx(oracle, abs=1e-6)

    def test_far_apart(self):
        assert l1_distance(GaussianNoiseDist(0, 1.0), GaussianNoiseDist(10, 1.0)) == pytest.approx(2.0, abs=1e-6)

    @pytest.mark.parametrize(
        "a, b",
        [
            ((2.0, 3.0), (-1.0, 0.5)),
            ((1 + 1j, 0.7), (0.3, 0.71)),
            ((0.0, 1.0), (0.5, 1.0)),
            ((-2j, 4.0), (1 + 1j, 0.2)),
            ((0.1, 5.0), (0.1 + 0.1j, 5.5)),
        ],
    )
    def test_matches_disk_probability_oracle(self, a, b):
        d1, d2 = GaussianNoiseDist(*a), GaussianNoiseDist(*b)
        assert l1_distance(d1, d2) == pytest.approx(l1_oracle(d1, d2), abs=1e-6)

    def test_rotation_invariant(self):
        base = l1_distance(GaussianNoiseDist(0, 1.0), GaussianNoiseDist(1.5, 2.0))
        rot = l1_distance(GaussianNoiseDist(1j, 1.0), GaussianNoiseDist(1j + 1.5j, 2.0))
        assert rot == pytest.approx(base, abs=1e-9)

    def test_singular_rejected(self):
        with pytest.raises(ZeroVariance):
            l1_distance(GaussianNoiseDist(0, 0.0), GaussianNoiseDist(0, 1.0))

    @settings(max_examples=15, deadline=None)
    @given(
        triple=st.lists(
            st.tuples(st.complex_numbers(max_magnitude=3.0), st.floats(0.2, 4.0)), min_size=3, max_size=3
        )
    )
    def test_metric_properties(self, triple):
        d1, d2, d3 = (GaussianNoiseDist(m, v) for m, v in triple)
        d12, d21 = l1_distance(d1, d2), l1_distance(d2, d1)
        assert 0.0 <= d12 <= 2.0
        assert d12 == pytest.approx(d21, abs=2e-6)
        assert d12 <= l1_distance(d1, d3) + l1_distance(d3, d2) + 3e-6


def pinsker_bound(d1, d2):
    """sqrt(2 KL(d1 || d2)) >= L1 for isotropic complex Gaussians."""
    v1, v2 = d1.variance, d2.variance
    kl = math.log(v2 / v1) + v1 / v2 - 1.0 + abs(d1.mean - d2.mean) ** 2 / v2
    return math.sqrt(2.0 * max(kl, 0.0))


class TestForgetfulness:
    params = MarkovParams(0.5, 1.0)
    d1 = GaussianNoiseDist(2.0, 3.0)
    d2 = GaussianNoiseDist(-1.0, 0.5)

    def test_identical_initials(self):
        assert forgetfulness_horizon(self.params, self.d1, self.d1, 1e-3) == 1

    def test_perfect_memory_not_forgetful(self):
        res = forgetfulness_horizon(MarkovParams(1.0, 1.0), self.d1, self.d2, 1e-3)
        assert isinstance(res, NotForgetful)
        assert res.last_distance == pytest.approx(l1_distance(self.d1, self.d2))

    def test_horizon_regression_and_bounds(self):
        nu = forgetfulness_horizon(self.params, self.d1, self.d2, 1e-3)
        # regression anchor from the quadrature
        assert nu == 13
        # upper bound from Pinsker on the closed-form evolved laws
        n_pinsker = next(
            n for n in range(1, 200)
            if pinsker_bound(evolve(self.d1, self.params, n - 1), evolve(self.d2, self.params, n - 1)) < 1e-3
        )
        assert nu <= n_pinsker
        # minimality
        profile = distance_profile(self.params, self.d1, self.d2, nu)
        assert profile[-1] < 1e-3 <= profile[-2]

    def test_contraction(self):
        profile = distance_profile(self.params, self.d1, self.d2, 20)
        assert np.all(np.diff(profile) <= 1e-8)

    def test_memoryless_forgets_after_one_step(self):
        assert forgetfulness_horizon(MarkovParams(0.0, 1.0), self.d1, self.d2, 1e-9) == 2

    def test_budget_exhausted(self):
        res = forgetfulness_horizon(self.params, self.d1, self.d2, 1e-3, max_steps=5)
        assert isinstance(res, NotForgetful)
        assert res.steps == 5

    def test_delta_conventions(self):
        p = MarkovParams(0.5, 0.0)
        delta = GaussianNoiseDist(1.0, 0.0)
        assert forgetfulness_horizon(p, delta, delta, 1e-3) == 1
        assert isinstance(forgetfulness_horizon(p, delta, GaussianNoiseDist(2.0, 0.0), 1e-3, 10), NotForgetful)
        with pytest.raises(ZeroVariance):
            forgetfulness_horizon(p, delta, GaussianNoiseDist(0.0, 1.0), 1e-3, 10)

    def test_bad_epsilon(self):
        with pytest.raises(ValueError):
            forgetfulness_horizon(self.params, self.d1, self.d2, 0.0)


def test_param_validation():
    with pytest.raises(ValueError):
        MarkovParams(1.2, 1.0)
    with pytest.raises(ValueError):
        MarkovParams(0.5, -1.0)
    with pytest.raises(ValueError):
        GaussianNoiseDist(0, -1.0)
