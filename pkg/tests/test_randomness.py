import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from randlanczos.bounds import head_mass_bound
from randlanczos.randomness import (
    chi2_tail_points,
    derive_rng,
    gaussians,
    head_mass,
    sample_sphere,
    smallest_mass,
)


class TestDeriveRng:
    def test_streams_independent_of_each_other(self):
        a = derive_rng(1, 0, "x").random(8)
        b = derive_rng(1, 1, "x").random(8)
        c = derive_rng(1, 0, "y").random(8)
        assert not np.allclose(a, b)
        assert not np.allclose(a, c)

    def test_reproducible(self):
        a = derive_rng(99, 5, "tag").random(16)
        b = derive_rng(99, 5, "tag").random(16)
        np.testing.assert_array_equal(a, b)


class TestGaussians:
    def test_deterministic(self):
        a = gaussians(derive_rng(2, 0, "g"), 1000)
        b = gaussians(derive_rng(2, 0, "g"), 1000)
        np.testing.assert_array_equal(a, b)

    def test_moments(self):
        z = gaussians(derive_rng(3, 0, "g"), 200000)
        assert z.mean() == pytest.approx(0.0, abs=0.01)
        assert z.var() == pytest.approx(1.0, rel=0.02)
        assert np.mean(z**4) == pytest.approx(3.0, rel=0.05)


class TestSampleSphere:
    def test_n1_is_sign(self):
        for rep in range(8):
            u = sample_sphere(1, derive_rng(4, rep, "u"))
            assert abs(u[0]) == pytest.approx(1.0)

    def test_bitwise_reproducible(self):
        a = sample_sphere(100, derive_rng(5, 0, "u"))
        b = sample_sphere(100, derive_rng(5, 0, "u"))
        np.testing.assert_array_equal(a, b)

    def test_unit_norm(self):
        for rep in range(20):
            u = sample_sphere(int(1 + rep * 37), derive_rng(6, rep, "u"))
            assert abs(np.linalg.norm(u) - 1.0) <= 1e-13

    def test_first_coordinate_second_moment(self):
        # E[u_1^2] = 1/n; check within 3 standard errors over 10^4 samples
        n, reps = 1000, 10**4
        vals = np.empty(reps)
        for rep in range(reps):
            vals[rep] = sample_sphere(n, derive_rng(7, rep, "u"))[0] ** 2
        se = vals.std() / math.sqrt(reps)
        assert abs(vals.mean() - 1.0 / n) <= 3 * se


class TestSmallestMass:
    def test_basis_vector(self):
        assert smallest_mass(np.array([1.0, 0, 0, 0]), 0.5) == 0.0

    def test_uniform_coords(self):
        u = np.full(4, 0.5)
        assert smallest_mass(u, 0.5) == pytest.approx(0.5)

    def test_hand_enumeration(self):
        u = np.array([1.0, 2.0, 3.0, 4.0]) / math.sqrt(30)
        assert smallest_mass(u, 0.5) == pytest.approx((1 + 4) / 30)

    @settings(max_examples=60, deadline=None)
    @given(
        st.lists(st.floats(-3, 3), min_size=2, max_size=24).filter(
            lambda v: math.fsum(x * x for x in v) > 1e-6
        )
    )
    def test_nondecreasing_in_delta(self, coords):
        u = np.array(coords)
        u = u / np.linalg.norm(u)
        masses = [smallest_mass(u, d) for d in (0.1, 0.3, 0.5, 0.8, 1.0)]
        assert all(a <= b + 1e-15 for a, b in zip(masses, masses[1:]))
        assert masses[-1] == pytest.approx(1.0)


class TestHeadMass:
    def test_full_and_empty(self):
        u = sample_sphere(32, derive_rng(8, 0, "u"))
        assert head_mass(u, 32) == pytest.approx(1.0)
        assert head_mass(u, 0) == 0.0

    def test_monte_carlo_vs_bound(self):
        # first two squared coordinates at n=4096 vs the tail bound at c=1/4
        n, m, reps = 4096, 2, 10**4
        c = 0.25
        alpha = math.log(m) / math.log(n)
        threshold = n ** (-c)
        hits = 0
        for rep in range(reps):
            u = sample_sphere(n, derive_rng(9, rep, "u"))
            if head_mass(u, m) >= threshold:
                hits += 1
        freq = hits / reps
        bound = head_mass_bound(alpha, c, n)
        se = math.sqrt(max(freq * (1 - freq), 1e-9) / reps)
        assert freq <= bound.value + 3 * se


class TestChi2TailPoints:
    def test_arithmetic_k4(self):
        assert chi2_tail_points(4, 1.0) == pytest.approx((0.0, 10.0, math.exp(-1)))

    def test_t_zero(self):
        assert chi2_tail_points(7, 0.0) == (7.0, 7.0, 1.0)

    def test_k100(self):
        lo, hi, p = chi2_tail_points(100, 25.0)
        assert (lo, hi) == (0.0, 250.0)
        assert p == pytest.approx(math.exp(-25))

    @pytest.mark.parametrize("k", [16, 256])
    @pytest.mark.parametrize("t", [1.0, 4.0])
    def test_empirical_tails(self, k, t):
        # 10^4 chi-square(k) draws: both tail frequencies obey the bound
        reps = 10**4
        rng = derive_rng(10, k, f"chi{t}")
        z = gaussians(rng, reps * k).reshape(reps, k)
        y = (z**2).sum(axis=1)
        lo, hi, p = chi2_tail_points(k, t)
        for freq in (np.mean(y <= lo), np.mean(y >= hi)):
            se = math.sqrt(max(freq * (1 - freq), 1e-9) / reps)
            assert freq <= p + 3 * se
