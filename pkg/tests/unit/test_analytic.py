"""Unit tests for the analytic checks."""

import math

import numpy as np
import pytest

from app.models.domain import AbelInput, SieveTable
from app.models.exceptions import DomainException, RangeException, ValidationException
from app.services.analytic import (
    abel_check,
    abel_family,
    abel_report,
    abel_sides,
    mertens_grid,
    mertens_sums,
    prime_pi,
    prime_power_count,
    rho1_formula_check,
    stirling_eval,
    stirling_grid,
    wallis_log_sqrt_2pi,
)
from tests.fixtures.oracles import (
    FIRST_RESIDUAL_BOUND,
    GOLDEN_MERTENS,
    GOLDEN_PRIME_PI,
    eratosthenes,
)

PRIME_FAMILIES = ["prime-reciprocal", "prime-inverse-log", "prime-log-over-p"]


class TestAbelCheck:
    """Test cases for the partial summation identity."""

    def test_constant_is_exact(self):
        data = abel_family("constant", 100)
        assert abel_check(data) == 0.0

    def test_log_factorial(self):
        lhs, rhs, mode = abel_sides(abel_family("log-factorial", 100))
        assert mode == "exact"
        assert lhs == pytest.approx(math.lgamma(101), abs=1e-9)
        assert abs(lhs - rhs) < 1e-9

    def test_prime_reciprocal_sum(self, small_table: SieveTable):
        data = abel_family("prime-reciprocal", 10**4, small_table)
        lhs, rhs, _ = abel_sides(data)
        expected = math.fsum(1.0 / p for p in eratosthenes(10**4))
        assert lhs == pytest.approx(expected, abs=1e-12)
        assert abs(lhs - rhs) < 1e-9

    @pytest.mark.parametrize("family", ["log-factorial"] + PRIME_FAMILIES)
    def test_exact_segments(self, small_table: SieveTable, family):
        report = abel_report(family, table=small_table, mode="exact")
        assert report.discrepancy < 1e-9

    @pytest.mark.parametrize("family", ["log-factorial"] + PRIME_FAMILIES)
    def test_quadrature(self, small_table: SieveTable, family):
        report = abel_report(family, table=small_table, mode="quadrature", quadrature_steps=64)
        assert report.mode == "quadrature"
        assert report.discrepancy < 1e-6

    def test_fractional_endpoint(self):
        """x between points: the last step runs only up to x."""
        data = abel_family("log-factorial", 10.5)
        lhs, rhs, _ = abel_sides(data)
        assert lhs == pytest.approx(math.lgamma(11))
        assert rhs == pytest.approx(lhs, abs=1e-12)

    def test_points_beyond_x_ignored(self):
        data = AbelInput(
            points=[1.0, 2.0, 3.0, 10.0],
            weights=[1.0, 2.0, 3.0, 100.0],
            f=lambda t: t,
            f_prime=np.ones_like,
            x=5.0,
        )
        lhs, rhs, _ = abel_sides(data)
        assert lhs == 1.0 + 4.0 + 9.0
        assert rhs == pytest.approx(lhs)

    def test_quadrature_fallback(self):
        data = AbelInput(
            points=[1.0, 2.0, 4.0],
            weights=[1.0, -1.0, 0.5],
            f=np.sqrt,
            f_prime=lambda t: 0.5 / np.sqrt(t),
            x=6.0,
            segment_exact=False,
        )
        _, _, mode = abel_sides(data, mode="exact")
        assert mode == "quadrature"
        assert abel_check(data) < 1e-9

    def test_x_below_first_point(self):
        data = AbelInput(points=[2.0, 3.0], weights=[1.0, 1.0], f=np.log, f_prime=np.reciprocal, x=1.5)
        with pytest.raises(DomainException):
            abel_check(data)

    def test_invalid_points(self):
        with pytest.raises(ValidationException):
            AbelInput(points=[1.0, 1.0], weights=[1.0, 1.0], f=np.log, f_prime=np.reciprocal, x=2.0)
        with pytest.raises(ValidationException):
            AbelInput(points=[1.0, 2.0], weights=[1.0], f=np.log, f_prime=np.reciprocal, x=2.0)

    def test_invalid_steps(self):
        with pytest.raises(ValidationException):
            abel_check(abel_family("log-factorial", 10), quadrature_steps=0)

    def test_family_validation(self, small_table: SieveTable):
        with pytest.raises(ValidationException):
            abel_family("harmonic", 10)
        with pytest.raises(ValidationException):
            abel_family("prime-reciprocal", 100)
        with pytest.raises(RangeException):
            abel_family("prime-reciprocal", 10**6, small_table)


class TestPrimeCounting:
    """Test cases for prime counting and the prime-power formula."""

    def test_small(self, small_table: SieveTable):
        assert prime_pi(1, small_table) == 0
        assert prime_pi(2, small_table) == 1
        assert prime_pi(100, small_table) == GOLDEN_PRIME_PI[100]

    def test_million(self, oracle_table: SieveTable):
        assert prime_pi(10**6, oracle_table) == GOLDEN_PRIME_PI[10**6]

    def test_against_eratosthenes(self, small_table: SieveTable):
        primes = eratosthenes(10**5)
        for x in (10, 1000, 54321, 10**5):
            assert prime_pi(x, small_table) == sum(1 for p in primes if p <= x)

    def test_prime_power_count(self, small_table: SieveTable):
        assert prime_power_count(10, small_table) == 7
        assert prime_power_count(1, small_table) == 0
        assert prime_power_count(100, small_table) == 35

    @pytest.mark.parametrize("x", [1, 2, 10, 100, 1000, 10**4, 10**5])
    def test_rho1_formula(self, small_table: SieveTable, x):
        assert rho1_formula_check(x, small_table)

    def test_range(self, small_table: SieveTable):
        with pytest.raises(RangeException):
            prime_pi(10**5 + 1, small_table)


class TestMertens:
    """Test cases for the Mertens sums."""

    def test_ten(self, small_table: SieveTable):
        report = mertens_sums(10, small_table)
        assert report.sum_inv_p == pytest.approx(1 / 2 + 1 / 3 + 1 / 5 + 1 / 7)
        assert report.sum_inv_p == pytest.approx(1.1762, abs=1e-4)
        expected = sum(math.log(p) / p for p in (2, 3, 5, 7))
        assert report.sum_logp_over_p == pytest.approx(expected)
        assert report.m_estimate == pytest.approx(report.sum_inv_p - math.log(math.log(10)))

    def test_domain(self, small_table: SieveTable):
        with pytest.raises(DomainException):
            mertens_sums(2, small_table)

    def test_grid(self, oracle_table: SieveTable):
        grid = [10**3, 10**4, 10**5, 10**6]
        reports = mertens_grid(grid, oracle_table)
        assert [r.x for r in reports] == grid
        for report in reports:
            m_estimate, first_residual = GOLDEN_MERTENS[report.x]
            assert report.m_estimate == pytest.approx(m_estimate, rel=1e-10)
            assert report.first_residual == pytest.approx(first_residual, rel=1e-10)
            assert abs(report.first_residual) <= FIRST_RESIDUAL_BOUND
        for a, b in zip(reports, reports[1:]):
            assert a.sum_inv_p < b.sum_inv_p
            assert a.sum_logp_over_p < b.sum_logp_over_p
        steps = [abs(b.m_estimate - a.m_estimate) for a, b in zip(reports, reports[1:])]
        assert steps == sorted(steps, reverse=True)


class TestStirling:
    """Test cases for Stirling's expansion."""

    def test_one(self):
        report = stirling_eval(1)
        assert report.ln_factorial == 0.0
        assert report.main_term == -1.0
        assert report.c_estimate == 1.0

    def test_matches_lgamma(self):
        for n in (5, 100, 12345):
            assert stirling_eval(n).ln_factorial == pytest.approx(math.lgamma(n + 1), rel=1e-13)

    def test_cauchy(self):
        c = {r.n: r.c_estimate for r in stirling_grid([10**6, 2 * 10**6])}
        assert abs(c[10**6] - c[2 * 10**6]) < 1e-6

    def test_rate(self):
        for n in (10**3, 10**4, 10**5):
            near, far = stirling_grid([n, 4 * n])
            assert n * abs(near.c_estimate - far.c_estimate) <= 1.0

    def test_steps_shrink(self):
        ns = [10, 100, 1000, 10**4]
        steps = [abs(stirling_eval(2 * n).c_estimate - stirling_eval(n).c_estimate) for n in ns]
        assert steps == sorted(steps, reverse=True)

    def test_against_wallis(self):
        reference = wallis_log_sqrt_2pi()
        assert abs(stirling_eval(10**6).c_estimate - reference) < 1e-6

    def test_rejects_zero(self):
        with pytest.raises(ValidationException):
            stirling_eval(0)


class TestWallis:
    """Test cases for the Wallis product reference."""

    def test_value(self):
        assert wallis_log_sqrt_2pi() == pytest.approx(0.5 * math.log(2 * math.pi), abs=1e-12)

    def test_converges(self):
        errors = [
            abs(wallis_log_sqrt_2pi(k) - 0.5 * math.log(2 * math.pi)) for k in (10, 100, 1000)
        ]
        assert errors == sorted(errors, reverse=True)

    def test_rejects_zero_terms(self):
        with pytest.raises(ValidationException):
            wallis_log_sqrt_2pi(0)
