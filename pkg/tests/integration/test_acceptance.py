"""Property checks at desk scale (images up to 10^7, prime sums up to 10^7)."""

import math
from typing import Tuple

import pytest

from app.models.domain import GapRecord, SieveTable, TotientImage
from app.services.analytic import mertens_grid, prime_pi, stirling_eval
from app.services.bound_optimizer import empirical_bound
from app.services.omega_census import bound_chain, check_divisibility, rho_ratio, rho_table
from app.services.sieve import build_sieve
from app.services.totient_image import preimage_limit_for, record_gaps, totient_image_up_to
from app.services.verification_service import VerificationService
from tests.fixtures.oracles import (
    FIRST_RESIDUAL_BOUND,
    GOLDEN_ARG_SUP,
    GOLDEN_EMPIRICAL_RATIOS,
    GOLDEN_MERTENS,
    GOLDEN_PRIME_PI,
    GOLDEN_RECORD_GAPS,
    GOLDEN_RHO,
    GOLDEN_SUP_RATIO,
    GOLDEN_V_COUNT_AT_SCALE,
)

MEISSEL_MERTENS = 0.2614972128476428

pytestmark = [pytest.mark.integration, pytest.mark.slow]


@pytest.fixture(scope="module")
def scale_table() -> SieveTable:
    """Sieve at the certified bound for x = 10^7 (about 6.2 * 10^7 entries)."""
    return build_sieve(preimage_limit_for(10**7))


class TestCensusBoundAtScale:
    """The exact census bound and its divisibility input up to 10^6."""

    def test_slack_nonnegative(self, large_setup: Tuple[SieveTable, TotientImage]):
        table, image = large_setup
        for j in range(2, 7):
            x = 10**j
            sub_image = image if x == image.x else totient_image_up_to(x, table)
            for k in range(1, 26):
                assert bound_chain(x, k, table, sub_image).slack >= 0, (x, k)

    @pytest.mark.parametrize("k", range(1, 11))
    def test_divisibility(self, large_setup: Tuple[SieveTable, TotientImage], k):
        table, _ = large_setup
        assert check_divisibility(10**6, k, table) == []

    @pytest.mark.parametrize("x,k", sorted(GOLDEN_RHO))
    def test_rho_fixtures(self, large_setup: Tuple[SieveTable, TotientImage], x, k):
        table, _ = large_setup
        count, ratio = GOLDEN_RHO[(x, k)]
        assert rho_table(x, k, table).rho(k) == count
        assert rho_ratio(x, k, table) == pytest.approx(ratio, rel=1e-12)

    def test_rho_ratio_trend(self, large_setup: Tuple[SieveTable, TotientImage]):
        table, _ = large_setup
        small, large = rho_ratio(10**4, 2, table), rho_ratio(10**6, 2, table)
        assert abs(large - small) / small < 0.5


class TestImageAtScale:
    """Density and record gaps of the image up to 10^6."""

    def test_v_counts(self, large_setup: Tuple[SieveTable, TotientImage]):
        _, image = large_setup
        for x, expected in GOLDEN_V_COUNT_AT_SCALE.items():
            if x <= image.x:
                assert image.count_up_to(x) == expected, x

    def test_density_decreasing(self, large_setup: Tuple[SieveTable, TotientImage]):
        _, image = large_setup
        density = [image.count_up_to(10**j) / 10**j for j in range(2, 7)]
        assert all(a > b for a, b in zip(density, density[1:]))

    def test_record_gaps(self, large_setup: Tuple[SieveTable, TotientImage]):
        table, image = large_setup
        records = record_gaps(image)
        assert records == [GapRecord(*row) for row in GOLDEN_RECORD_GAPS]
        sizes = [r.gap for r in records]
        assert len(set(sizes)) >= 4
        assert all(a < b for a, b in zip(sizes, sizes[1:]))
        smaller = record_gaps(totient_image_up_to(10**4, table))
        assert records[: len(smaller)] == smaller

    def test_empirical_bound_reproducible(self, large_setup: Tuple[SieveTable, TotientImage]):
        table, _ = large_setup
        grid = [10**j for j in range(2, 7)]
        first = empirical_bound(grid, table)
        second = empirical_bound(grid, table)
        assert first.model_dump() == second.model_dump()
        assert first.sup_ratio < 1.0


class TestTenMillion:
    """The image, prime sums and Stirling's constant up to 10^7."""

    def test_v_count(self, scale_table: SieveTable):
        image = totient_image_up_to(10**7, scale_table)
        assert image.count == GOLDEN_V_COUNT_AT_SCALE[10**7]

    def test_empirical_bound(self, scale_table: SieveTable):
        grid = sorted(GOLDEN_EMPIRICAL_RATIOS)
        report = empirical_bound(grid, scale_table)
        assert report.v_counts == [GOLDEN_V_COUNT_AT_SCALE[x] for x in grid]
        assert report.ratios == pytest.approx(
            [GOLDEN_EMPIRICAL_RATIOS[x] for x in grid], rel=1e-9
        )
        assert report.sup_ratio == pytest.approx(GOLDEN_SUP_RATIO, rel=1e-9)
        assert report.arg_sup == GOLDEN_ARG_SUP
        tail = report.ratios[-3:]
        assert all(a > b for a, b in zip(tail, tail[1:]))

    def test_prime_pi(self, scale_table: SieveTable):
        assert prime_pi(10**7, scale_table) == GOLDEN_PRIME_PI[10**7]

    def test_mertens_fixtures(self, scale_table: SieveTable):
        grid = sorted(GOLDEN_MERTENS)
        for report in mertens_grid(grid, scale_table):
            m_estimate, first_residual = GOLDEN_MERTENS[report.x]
            assert report.m_estimate == pytest.approx(m_estimate, rel=1e-10)
            assert report.first_residual == pytest.approx(first_residual, rel=1e-10)
            assert abs(report.first_residual) <= FIRST_RESIDUAL_BOUND

    def test_mertens_constant(self, scale_table: SieveTable):
        near, far = mertens_grid([10**6, 10**7], scale_table)
        assert abs(near.m_estimate - far.m_estimate) < 3e-3
        assert abs(far.m_estimate - MEISSEL_MERTENS) < 3e-3

    def test_stirling_constant(self):
        assert abs(stirling_eval(10**7).c_estimate - 0.5 * math.log(2 * math.pi)) < 1e-6


class TestVerifySuite:
    """The full verification suite at 10^5."""

    def test_passes(self):
        report = VerificationService().run(10**5)
        assert report.passed, [c for c in report.checks if not c.passed]
