"""Unit tests for the omega census and the exact bound."""

import math
from fractions import Fraction

import numpy as np
import pytest

from app.models.domain import SieveTable, TotientImage
from app.models.exceptions import DomainException, RangeException, ValidationException
from app.services.omega_census import (
    bound_chain,
    check_divisibility,
    check_kernel_divisibility,
    full_kmax,
    image_split,
    rho_monotonicity,
    rho_ratio,
    rho_table,
)
from app.services.sieve import build_sieve
from app.services.totient_image import totient_image_up_to
from tests.fixtures.oracles import omega_naive


class TestRhoTable:
    """Test cases for the census table."""

    def test_ten(self, small_table: SieveTable):
        table = rho_table(10, 3, small_table)
        assert table.counts == (7, 2, 0)
        assert table.rho(1) == 7
        assert table.rho(4) == 0
        assert table.census_sum(2) == 9

    def test_against_naive_recount(self, small_table: SieveTable):
        x = 10**4
        expected = [0] * 14
        for n in range(2, x + 1):
            expected[omega_naive(n)] += 1
        table = rho_table(x, 13, small_table)
        assert list(table.counts) == expected[1:]

    def test_thirty(self, small_table: SieveTable):
        assert rho_table(30, 4, small_table).rho(3) == 1
        assert rho_table(29, 4, small_table).rho(3) == 0

    @pytest.mark.parametrize("x", [1, 2, 30, 999, 10**4, 10**5])
    def test_partition(self, small_table: SieveTable, x):
        assert rho_table(x, full_kmax(x), small_table).total == x - 1

    def test_kmax_below_one(self, small_table: SieveTable):
        with pytest.raises(ValidationException):
            rho_table(10, 0, small_table)

    def test_range(self, small_table: SieveTable):
        with pytest.raises(RangeException):
            rho_table(10**5 + 1, 3, small_table)

    def test_full_kmax(self):
        assert full_kmax(1) == 1
        assert full_kmax(10) == 3
        assert full_kmax(1024) == 10


class TestDivisibility:
    """Test cases for the 2^k and kernel divisibility facts."""

    @pytest.mark.parametrize("k", range(1, 11))
    def test_power_of_two(self, small_table: SieveTable, k):
        assert check_divisibility(10**5, k, small_table) == []

    def test_k_zero(self, small_table: SieveTable):
        assert check_divisibility(100, 0, small_table) == []

    def test_kernel(self, small_table: SieveTable):
        assert check_kernel_divisibility(10**5, small_table) == []

    def test_detects_counterexample(self):
        table = build_sieve(30)
        phi = table.phi.copy()
        phi[30] = 9
        broken = SieveTable(
            limit=30, spf=table.spf.copy(), phi=phi,
            mobius=table.mobius.copy(), omega=table.omega.copy(),
        )
        assert check_divisibility(30, 2, broken) == [30]
        assert 30 in check_kernel_divisibility(30, broken)


class TestBoundChain:
    """Test cases for the exact census bound."""

    def test_hundred_k1(self, small_table: SieveTable):
        image = totient_image_up_to(100, small_table)
        report = bound_chain(100, 1, small_table, image)
        assert report.v_count == 38
        assert report.rho_k == 35
        assert report.census_sum == 35
        assert report.tail == Fraction(50)
        assert report.slack == Fraction(47)
        assert report.slack_den == 1

    def test_rational_tail(self, small_table: SieveTable):
        image = totient_image_up_to(100, small_table)
        report = bound_chain(100, 3, small_table, image)
        assert (report.tail_num, report.tail_den) == (25, 2)
        assert report.tail_ceiling == 13
        assert report.slack == report.census_sum + Fraction(25, 2) - 38

    @pytest.mark.parametrize("x", [10**2, 10**3, 10**4])
    def test_slack_nonnegative(self, oracle_table: SieveTable, x):
        image = totient_image_up_to(x, oracle_table)
        for k in range(1, 26):
            report = bound_chain(x, k, oracle_table, image)
            assert report.slack >= 0
            assert report.collapsed_bound == k * report.rho_k + Fraction(x, 2**k)

    def test_public_dict(self, small_table: SieveTable):
        image = totient_image_up_to(100, small_table)
        data = bound_chain(100, 2, small_table, image).public_dict()
        assert set(data) == {
            "x", "k", "v_count", "census_sum", "tail_num", "tail_den",
            "slack_num", "slack_den", "collapsed_holds",
        }

    def test_image_mismatch(self, small_table: SieveTable):
        image = totient_image_up_to(100, small_table)
        with pytest.raises(ValidationException):
            bound_chain(200, 1, small_table, image)

    def test_k_below_one(self, small_table: SieveTable):
        image = totient_image_up_to(100, small_table)
        with pytest.raises(ValidationException):
            bound_chain(100, 0, small_table, image)


class TestImageSplit:
    """Test cases for the omega split of the image."""

    @pytest.mark.parametrize("k", range(1, 6))
    def test_high_part_within_multiples(self, oracle_table: SieveTable, image_10k: TotientImage, k):
        split = image_split(10**4, k, oracle_table, image_10k)
        assert split.high_within_multiples
        assert split.multiples_of_2k == 10**4 // 2**k
        assert split.low_omega_values + split.high_omega_values >= image_10k.count

    def test_parts_cover_image(self, oracle_table: SieveTable, image_10k: TotientImage):
        split = image_split(10**4, 1, oracle_table, image_10k)
        assert split.low_omega_values <= image_10k.count
        assert split.high_omega_values <= image_10k.count


class TestRhoTrends:
    """Test cases for the normalized ratio and the monotone regime."""

    def test_ratio_domain(self, small_table: SieveTable):
        with pytest.raises(DomainException):
            rho_ratio(15, 1, small_table)

    def test_ratio_k1(self, small_table: SieveTable):
        ratio = rho_ratio(10**5, 1, small_table)
        expected = rho_table(10**5, 1, small_table).rho(1) * math.log(10**5) / 10**5
        assert ratio == pytest.approx(expected)
        assert 0.5 < ratio < 2.0

    def test_ratio_positive(self, small_table: SieveTable):
        assert all(rho_ratio(10**5, k, small_table) > 0 for k in (1, 2, 3, 4))

    def test_monotonicity_violations_are_real(self, small_table: SieveTable):
        x = 10**5
        table = rho_table(x, full_kmax(x) + 1, small_table)
        for k in rho_monotonicity(x, small_table):
            assert k < math.log(math.log(x))
            assert table.rho(k) > table.rho(k + 1)

    def test_monotonicity_domain(self, small_table: SieveTable):
        with pytest.raises(DomainException):
            rho_monotonicity(10, small_table)
