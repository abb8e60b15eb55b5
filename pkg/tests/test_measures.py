import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from randlanczos.measures import (
    ContinuousRef,
    DiscreteMeasure,
    Spectrum,
    affine_pushforward,
    kolmogorov,
    moments,
    moments_via_cdf,
    quantile_discretize,
    read_measure,
    spectral_measure,
    write_measure,
)

from conftest import random_measure


class TestDiscreteMeasure:
    def test_validates_weight_sum(self):
        with pytest.raises(ValueError):
            DiscreteMeasure(np.array([0.0, 1.0]), np.array([0.5, 0.6]))

    def test_merges_equal_atoms(self):
        m = DiscreteMeasure.from_atoms([0.0, 0.0, 1.0], [0.25, 0.25, 0.5])
        assert m.natoms == 2
        np.testing.assert_allclose(m.weights, [0.5, 0.5])

    def test_drops_zero_weights(self):
        m = DiscreteMeasure.from_atoms([0.0, 0.5, 1.0], [0.5, 0.0, 0.5])
        assert m.natoms == 2

    def test_strictly_increasing_required(self):
        with pytest.raises(ValueError):
            DiscreteMeasure(np.array([1.0, 0.0]), np.array([0.5, 0.5]))


class TestSpectralMeasure:
    def test_basis_vector_gives_point_mass(self):
        spec = Spectrum([-1.0, 0.0, 1.0])
        m = spectral_measure(spec, np.array([1.0, 0.0, 0.0]))
        assert m.natoms == 1
        assert m.support[0] == -1.0
        assert m.weights[0] == 1.0

    def test_uniform_coords_give_empirical_distribution(self):
        spec = Spectrum([-1.0, 0.0, 1.0])
        m = spectral_measure(spec, np.full(3, 1.0 / math.sqrt(3)))
        np.testing.assert_allclose(m.weights, np.full(3, 1 / 3), atol=1e-15)

    def test_repeated_eigenvalue_aggregates(self):
        spec = Spectrum([0.0, 0.0, 1.0])
        u = np.sqrt(np.array([0.25, 0.25, 0.5]))
        m = spectral_measure(spec, u)
        np.testing.assert_allclose(m.support, [0.0, 1.0])
        np.testing.assert_allclose(m.weights, [0.5, 0.5], atol=1e-15)

    def test_dimension_mismatch(self):
        with pytest.raises(ValueError, match="dimension"):
            spectral_measure(Spectrum([0.0, 1.0]), np.array([1.0, 0.0, 0.0]))

    def test_non_unit_rejected(self):
        with pytest.raises(ValueError, match="unit"):
            spectral_measure(Spectrum([0.0, 1.0]), np.array([1.0, 1.0]))


class TestQuantileDiscretize:
    def test_uniform_two_points(self):
        m = quantile_discretize(ContinuousRef.uniform(0, 1), 2)
        np.testing.assert_allclose(m.support, [0.25, 0.75])
        np.testing.assert_allclose(m.weights, [0.5, 0.5])

    def test_uniform_kol_is_half_over_n(self):
        # sup of the CDF gap over breakpoints: midpoint quantiles halve 1/n
        ref = ContinuousRef.uniform(0, 1)
        m = quantile_discretize(ref, 1000)
        assert kolmogorov(m, ref) == pytest.approx(1 / 2000, rel=1e-6)

    def test_semicircle_symmetric(self):
        m = quantile_discretize(ContinuousRef.semicircle(0, 2), 4)
        np.testing.assert_allclose(m.support, -m.support[::-1], atol=1e-11)
        assert m.support[0] == pytest.approx(-1.26940919, abs=1e-6)

    def test_kol_within_one_over_n(self):
        for ref in (ContinuousRef.uniform(-2, 3), ContinuousRef.semicircle(1, 2)):
            for n in (1, 3, 10, 100, 1000):
                assert kolmogorov(quantile_discretize(ref, n), ref) <= 1.0 / n + 1e-12


class TestMoments:
    def test_symmetric_two_point(self):
        m = DiscreteMeasure.from_atoms([-1.0, 1.0], [0.5, 0.5])
        np.testing.assert_allclose(moments(m, 3), [1, 0, 1, 0], atol=1e-15)

    def test_point_mass(self):
        m = DiscreteMeasure.from_atoms([0.7])
        np.testing.assert_allclose(moments(m, 2), [1, 0.7, 0.49])

    def test_uniform_discretization_matches_integrals(self):
        # quadrature oracle: int_0^1 x^k dx = 1/(k+1)
        m = quantile_discretize(ContinuousRef.uniform(0, 1), 10**5)
        np.testing.assert_allclose(moments(m, 4), [1, 1 / 2, 1 / 3, 1 / 4, 1 / 5], atol=1e-4)

    def test_via_cdf_trivial_cases(self):
        m = DiscreteMeasure.from_atoms([-1.0, 1.0], [0.5, 0.5])
        np.testing.assert_allclose(moments_via_cdf(m, 2), [1, 0, 1], atol=1e-14)
        pm = DiscreteMeasure.from_atoms([0.3])
        assert moments_via_cdf(pm, 1)[1] == pytest.approx(0.3)

    def test_via_cdf_agrees_with_direct(self, rng):
        for _ in range(20):
            m = random_measure(rng, 8)
            np.testing.assert_allclose(moments_via_cdf(m, 6), moments(m, 6), atol=1e-10)

    @settings(max_examples=50, deadline=None)
    @given(st.lists(st.floats(-3, 3), min_size=1, max_size=10, unique=True), st.integers(0, 12))
    def test_moment_route_equivalence_property(self, atoms, k):
        m = DiscreteMeasure.from_atoms(np.array(atoms))
        np.testing.assert_allclose(moments_via_cdf(m, k), moments(m, k), atol=1e-10)

    def test_moment_lipschitz_in_kolmogorov(self, rng):
        # |m_k(mu) - m_k(nu)| <= 2 C^k Kol(mu, nu) over random pairs in [-C, C]
        for _ in range(1000):
            c = rng.uniform(0.5, 2.0)
            a = random_measure(rng, int(rng.integers(2, 9)), -c, c)
            b = random_measure(rng, int(rng.integers(2, 9)), -c, c)
            kol = kolmogorov(a, b)
            ma, mb = moments(a, 10), moments(b, 10)
            for k in range(1, 11):
                assert abs(ma[k] - mb[k]) <= 2 * c**k * kol + 1e-12


class TestKolmogorov:
    def test_identical_zero(self, rng):
        m = random_measure(rng, 6)
        assert kolmogorov(m, m) == 0.0

    def test_point_masses(self):
        a = DiscreteMeasure.from_atoms([0.0])
        b = DiscreteMeasure.from_atoms([1.0])
        assert kolmogorov(a, b) == 1.0

    def test_endpoint_grid_vs_uniform(self):
        n = 64
        grid = DiscreteMeasure.from_atoms((np.arange(n) + 1) / n)
        assert kolmogorov(grid, ContinuousRef.uniform(0, 1)) == pytest.approx(1 / n)

    def test_symmetry_and_triangle(self, rng):
        ms = [random_measure(rng, int(rng.integers(2, 8))) for _ in range(6)]
        for a in ms:
            for b in ms:
                assert kolmogorov(a, b) == kolmogorov(b, a)
                for c in ms:
                    assert kolmogorov(a, b) <= kolmogorov(a, c) + kolmogorov(c, b) + 1e-12

    @settings(max_examples=40, deadline=None)
    @given(
        st.lists(st.floats(-2, 2), min_size=1, max_size=6, unique=True),
        st.lists(st.floats(-2, 2), min_size=1, max_size=6, unique=True),
    )
    def test_range_and_symmetry_property(self, xs, ys):
        a = DiscreteMeasure.from_atoms(np.array(xs))
        b = DiscreteMeasure.from_atoms(np.array(ys))
        d = kolmogorov(a, b)
        assert 0.0 <= d <= 1.0
        assert d == kolmogorov(b, a)


class TestAffinePushforward:
    def test_identity(self, rng):
        m = random_measure(rng, 5)
        out = affine_pushforward(m, 1.0, 0.0)
        np.testing.assert_array_equal(out.support, m.support)
        np.testing.assert_array_equal(out.weights, m.weights)

    def test_shift_and_scale(self):
        m = DiscreteMeasure.from_atoms([-1.0, 1.0], [0.5, 0.5])
        out = affine_pushforward(m, 2.0, 3.0)
        np.testing.assert_allclose(out.support, [1.0, 5.0])

    def test_reflection_reorders(self):
        m = DiscreteMeasure.from_atoms([0.0, 1.0], [0.25, 0.75])
        out = affine_pushforward(m, -1.0, 0.0)
        np.testing.assert_allclose(out.support, [-1.0, 0.0])
        np.testing.assert_allclose(out.weights, [0.75, 0.25])

    def test_zero_scale_rejected(self, rng):
        with pytest.raises(ValueError):
            affine_pushforward(random_measure(rng, 3), 0.0, 1.0)


class TestContinuousRef:
    def test_density_normalization(self):
        for ref in (ContinuousRef.uniform(0, 1), ContinuousRef.semicircle(0, 2), ContinuousRef.semicircle(1.5, 0.5)):
            assert ref.check_normalization() == pytest.approx(1.0, abs=1e-8)

    def test_cdf_endpoints(self):
        ref = ContinuousRef.semicircle(0, 2)
        assert ref.cdf(-2.0) == 0.0
        assert ref.cdf(2.0) == 1.0
        assert ref.cdf(0.0) == pytest.approx(0.5)

    def test_quantile_inverts_cdf(self):
        ref = ContinuousRef.semicircle(0.5, 1.5)
        q = np.linspace(0.01, 0.99, 23)
        x = ref.quantile(q)
        np.testing.assert_allclose(ref.cdf(x), q, atol=1e-10)

    def test_affine_image(self):
        ref = ContinuousRef.uniform(0, 1).affine(2.0, 1.0)
        assert ref.params == (1.0, 3.0)
        sc = ContinuousRef.semicircle(0, 2).affine(-0.5, 0.0)
        assert sc.params == (0.0, 1.0)


class TestMeasureFile:
    def test_roundtrip(self, rng, tmp_path):
        m = random_measure(rng, 7)
        path = tmp_path / "m.txt"
        write_measure(m, path)
        back = read_measure(path)
        np.testing.assert_allclose(back.support, m.support)
        np.testing.assert_allclose(back.weights, m.weights)

    def test_default_weights_and_comments(self, tmp_path):
        path = tmp_path / "m.txt"
        path.write_text("# comment\n0.5\n1.5  # trailing\n2.5\n")
        m = read_measure(path)
        np.testing.assert_allclose(m.weights, np.full(3, 1 / 3))
