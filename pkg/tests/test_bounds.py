import math

import mpmath
import pytest

from randlanczos.bounds import (
    BoundResult,
    det_perturb_bound,
    gamma_bound,
    head_mass_bound,
    incompressibility_bound,
    jacobi_conc_bound,
    lipschitz_bound,
    moment_lipschitz_bound,
    outlier_fail_prob,
    outlier_max_iters,
    ritz_conc_bound,
    ritz_vector_bound,
)


def mp_jacobi_conc(delta, omega, i, t, n, norm_a):
    """Independent extended-precision evaluation of the coefficient bound."""
    with mpmath.workdps(50):
        delta, omega, t, n, norm_a = map(mpmath.mpf, (delta, omega, t, n, norm_a))
        first = 2 * mpmath.exp(-(min(delta, mpmath.mpf(1) / 50) ** 2) * n / 32)
        second = 2 * mpmath.exp(-((omega / (4 * norm_a)) ** (2 * i)) * delta**2 * t**2 * n / 64)
        return float(first + second)


def mp_ritz_conc(delta, omega, k, t, n, norm_a):
    with mpmath.workdps(50):
        delta, omega, t, n, norm_a = map(mpmath.mpf, (delta, omega, t, n, norm_a))
        first = mpmath.exp(-(min(delta, mpmath.mpf(1) / 50) ** 2) * n / 32)
        second = mpmath.exp(-((omega / (4 * norm_a)) ** (2 * k)) * delta**2 * t**2 * n / 192)
        return float(4 * k * (first + second))


class TestJacobiConcBound:
    def test_t_zero_clamps_to_one(self):
        res = jacobi_conc_bound(0.25, 0.5, 3, 0.0, 1000, 1.0)
        assert res.value == 1.0
        assert res.clamped
        assert res.raw >= 2.0

    def test_monotone_in_n(self):
        vals = [jacobi_conc_bound(0.25, 0.5, 2, 0.5, n, 1.0).raw for n in (1e3, 1e5, 1e7, 1e9)]
        assert all(a >= b for a, b in zip(vals, vals[1:]))
        assert vals[-1] < 1e-6

    def test_against_extended_precision(self):
        params = (0.25, 4 * math.exp(-2), 3, 0.1, 1e6, 1.0)
        res = jacobi_conc_bound(*params)
        assert res.raw == pytest.approx(mp_jacobi_conc(*params), rel=1e-12)

    def test_omega_above_norm_warns(self):
        with pytest.warns(UserWarning, match="omega"):
            jacobi_conc_bound(0.25, 2.0, 1, 0.1, 100, 1.0)


class TestRitzConcBound:
    def test_t_zero_clamps(self):
        assert ritz_conc_bound(0.25, 0.5, 4, 0.0, 1000, 1.0).value == 1.0

    def test_k_doubling_increases(self):
        a = ritz_conc_bound(0.25, 0.5, 2, 0.3, 1e6, 1.0).raw
        b = ritz_conc_bound(0.25, 0.5, 4, 0.3, 1e6, 1.0).raw
        assert b > a

    def test_against_extended_precision(self):
        params = (0.2, 0.3, 5, 0.25, 2e5, 1.5)
        res = ritz_conc_bound(*params)
        assert res.raw == pytest.approx(mp_ritz_conc(*params), rel=1e-12)

    def test_dominates_per_coordinate_ingredient(self):
        # the vector bound unions 2k coefficient events at deviation t/3;
        # checked at experiment-scale certificates (omega well below normA)
        for n in (1e3, 1e4, 1e5):
            for omega in (0.034, 0.184, 0.368):
                for k in (1, 2, 4, 8):
                    for t in (0.01, 0.1, 0.5, 1.0):
                        ritz = ritz_conc_bound(0.25, omega, k, t, n, 1.0)
                        coef = jacobi_conc_bound(0.25, omega, k, t / 3.0, n, 1.0)
                        assert ritz.value >= coef.value - 1e-12

    def test_exponent_matches_t_over_three_split(self):
        # the second exponent equals 3x the coefficient bound's at t/3
        delta, omega, k, t, n = 0.25, 0.3, 4, 0.6, 1e5
        ritz = ritz_conc_bound(delta, omega, k, t, n, 1.0)
        coef = jacobi_conc_bound(delta, omega, k, t / 3.0, n, 1.0)
        exp_ritz = -math.log(ritz.terms["lipschitz"])
        exp_coef = -math.log(coef.terms["lipschitz"] / 2.0)
        assert exp_ritz == pytest.approx(3.0 * exp_coef, rel=1e-9)


class TestRitzVectorBound:
    def test_c_zero_reduces_to_ritz_conc_at_t_one(self):
        a = ritz_vector_bound(0.25, 0.3, 4, 0.05, 0.0, 1e5, 1.0)
        b = ritz_conc_bound(0.25, 0.3, 4, 1.0, 1e5, 1.0)
        assert a.raw == pytest.approx(b.raw)
        # the threshold carries the 2/gap_eps factor
        assert a.terms["sin_threshold"] == pytest.approx(2.0 / 0.05)

    def test_monotone_in_c(self):
        vals = [ritz_vector_bound(0.25, 0.3, 4, 0.05, c, 1e5, 1.0).raw for c in (0.0, 0.2, 0.4)]
        assert all(a <= b for a, b in zip(vals, vals[1:]))

    def test_generic_triple_extended_precision(self):
        res = ritz_vector_bound(0.2, 0.25, 3, 0.1, 0.2, 1e6, 2.0)
        with mpmath.workdps(50):
            delta, omega, n, norm_a = map(mpmath.mpf, (0.2, 0.25, 1e6, 2.0))
            first = mpmath.exp(-(min(delta, mpmath.mpf(1) / 50) ** 2) * n / 32)
            second = mpmath.exp(
                -((omega / (4 * norm_a)) ** 6) * delta**2 * n ** mpmath.mpf(0.6) / 192
            )
            expect = float(12 * (first + second))
        assert res.raw == pytest.approx(expect, rel=1e-12)


class TestGammaBound:
    def test_k_zero(self):
        assert gamma_bound(0.5, 0.25, 0) == pytest.approx(2.0)

    def test_omega_one_flat_in_k(self):
        assert gamma_bound(1.0, 0.25, 7) == pytest.approx(gamma_bound(1.0, 0.25, 0))

    def test_generic_extended_precision(self):
        with mpmath.workdps(40):
            expect = float(1 / (mpmath.mpf(4 * math.exp(-2)) ** 5 * mpmath.sqrt(mpmath.mpf(1) / 8)))
        assert gamma_bound(4 * math.exp(-2), 1 / 8, 5) == pytest.approx(expect, rel=1e-12)


class TestLipschitzBound:
    def test_i_zero(self):
        assert lipschitz_bound(0, 0.25, 0.5, 1.0) == pytest.approx(16 / 0.25)

    def test_doubling_norm(self):
        for i in (0, 1, 3):
            ratio = lipschitz_bound(i, 0.1, 0.5, 2.0) / lipschitz_bound(i, 0.1, 0.5, 1.0)
            assert ratio == pytest.approx(2.0 ** (i + 1))

    def test_generic(self):
        assert lipschitz_bound(3, 0.125, 0.3, 1.5) == pytest.approx(
            4.0**5 * 1.5**4 / (0.3**3 * 0.125)
        )


class TestOutlierMaxIters:
    def test_unit_log_argument(self):
        # kappa*delta/(2mg) = 1 makes the additive term vanish
        res = outlier_max_iters(j=100, M=2.0, omega=0.5, c=0.3, n=1e6, kappa=0.4, delta=1.0, m=1, g=0.2)
        expect = math.floor(0.3 * math.log(1e6) / (2 * math.log(4.0)))
        assert res.value == expect

    def test_example_parameters_cross_check(self):
        # diameter 1.08, outlier at 1.1 over a unit grid: the closed form and
        # its simplified floor expression floor(0.7c log n - 3.5) agree within
        # one iteration (both clamp at 0 across this grid)
        for n in (1e3, 1e4, 1e5, 1e6):
            for c in (0.1, 0.2, 0.3, 0.4):
                res = outlier_max_iters(
                    j=int(n // 16), M=1.08, omega=4 * math.exp(-2), c=c, n=n,
                    kappa=1e-4, delta=0.25, m=1, g=0.1,
                )
                simplified = max(0, math.floor(0.7 * c * math.log(n) - 3.5))
                assert abs(res.value - simplified) <= 1

    def test_out_of_regime_flagged(self):
        res = outlier_max_iters(j=10, M=2.0, omega=0.5, c=0.49, n=5, kappa=0.1, delta=0.5, m=2, g=0.1)
        assert res.terms["out_of_regime"]
        big = outlier_max_iters(j=10, M=2.0, omega=0.5, c=0.25, n=1e6, kappa=0.1, delta=0.5, m=1, g=0.1)
        assert not big.terms["out_of_regime"]

    def test_m_le_omega_rejected(self):
        with pytest.raises(ValueError):
            outlier_max_iters(j=5, M=0.3, omega=0.5, c=0.2, n=100, kappa=0.1, delta=0.5, m=1, g=0.1)


class TestOutlierFailProb:
    def test_c_near_half_limit(self):
        # n^{1-2c} -> 1, so the second term tends to 2e^{-1/16}
        res = outlier_fail_prob(0.25, 0.4999999, 1e6)
        assert res.terms["tail"] == pytest.approx(2 * math.exp(-1 / 16), rel=1e-3)

    def test_monotone_decreasing_in_n(self):
        vals = [outlier_fail_prob(0.25, 0.2, n).raw for n in (1e2, 1e4, 1e6, 1e8)]
        assert all(a >= b for a, b in zip(vals, vals[1:]))

    def test_generic(self):
        res = outlier_fail_prob(0.1, 0.25, 1e4)
        expect = 2 * math.exp(-(0.02**2) * 1e4 / 32) + 2 * math.exp(-math.sqrt(1e4) / 16)
        assert res.raw == pytest.approx(expect, rel=1e-12)


class TestHeadMassBound:
    def test_alpha_regime_rejected(self):
        with pytest.raises(ValueError, match="alpha"):
            head_mass_bound(0.8, 0.25, 1e4)

    def test_vanishes_for_large_n(self):
        assert head_mass_bound(0.2, 0.25, 1e12).raw < 1e-30

    def test_generic_extended_precision(self):
        res = head_mass_bound(0.2, 0.25, 4096)
        with mpmath.workdps(50):
            n = mpmath.mpf(4096)
            first = mpmath.exp(
                -(4 * n**mpmath.mpf(0.2) - 4 * mpmath.sqrt(2) * n ** ((1 - 0.25 + 0.2) / 2) + 2 * n ** mpmath.mpf(0.75)) / 16
            )
            second = mpmath.exp(-(n ** mpmath.mpf(0.5)) / 16)
            expect = float(first + second)
        assert res.raw == pytest.approx(expect, rel=1e-10)


class TestIncompressibilityBound:
    def test_small_delta_dominated_by_corollary_form(self):
        # at eps = delta/2 and delta <= 1/50 the bound is within 2 exp(-delta^2 n/32)
        delta = 1 / 50
        for n in (1e4, 1e5, 1e6):
            res = incompressibility_bound(delta, delta / 2, n)
            assert res.raw <= 2 * math.exp(-(delta**2) * n / 32)

    def test_goes_to_zero(self):
        assert incompressibility_bound(0.02, 0.01, 1e8).raw < 1e-20

    def test_generic(self):
        res = incompressibility_bound(0.1, 0.05, 50)
        expect = math.exp((2 * 0.1 * (1 + math.log(10)) - 0.25) * 50) + math.exp(-0.0025 * 50 / 8)
        assert res.raw == pytest.approx(expect, rel=1e-12)
        assert res.clamped

    def test_vacuous_entropy_regime_saturates(self):
        # large delta makes the entropy term overflow; the bound clamps to 1
        res = incompressibility_bound(0.1, 0.05, 1e4)
        assert res.value == 1.0
        assert res.clamped


class TestPerturbationBounds:
    def test_eps_zero(self):
        assert det_perturb_bound(1.0, 0.0, 5) == 0.0
        assert moment_lipschitz_bound(2.0, 3, 0.0) == 0.0

    def test_k_one(self):
        assert det_perturb_bound(1.0, 0.3, 1) == pytest.approx(0.3)
        assert moment_lipschitz_bound(1.7, 1, 0.2) == pytest.approx(2 * 1.7 * 0.2)

    def test_generic(self):
        assert det_perturb_bound(1.5, 0.1, 4) == pytest.approx(0.1 * 4 * 1.6**3)
        assert moment_lipschitz_bound(2.0, 6, 0.01) == pytest.approx(2 * 64 * 0.01)


class TestBoundResultBookkeeping:
    def test_probability_results_in_unit_interval(self):
        results = [
            jacobi_conc_bound(0.25, 0.034, 3, 0.1, 2000, 1.0),
            ritz_conc_bound(0.25, 0.034, 5, 0.2, 2000, 1.0),
            ritz_vector_bound(0.25, 0.034, 5, 0.1, 0.25, 2000, 1.0),
            outlier_fail_prob(0.25, 0.25, 2000),
            head_mass_bound(0.1, 0.25, 2000),
            incompressibility_bound(0.02, 0.01, 2000),
        ]
        for res in results:
            assert 0.0 <= res.value <= 1.0
            assert res.clamped == (res.raw > 1.0)
            if res.clamped:
                assert res.value == 1.0
            else:
                assert res.value == res.raw
