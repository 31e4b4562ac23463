"""
Omega census and the exact counting argument behind the density bound.

rho_k(x) counts n <= x with exactly k distinct prime factors. The bound

    V(x) <= rho_1(x) + ... + rho_k(x) + x / 2^k

rests on 2^k | phi(n) whenever omega(n) > k. Both are checked here as exact
integer statements; x / 2^k is carried as a Fraction.
"""

import math
from fractions import Fraction
from typing import List

import numpy as np
import structlog

from app.models.domain import RhoTable, SieveTable, TotientImage
from app.models.exceptions import CompletenessException, DomainException, ValidationException
from app.models.schemas import BoundReport, ImageSplitReport

logger = structlog.get_logger(__name__)


def _require_x(x: int, table: SieveTable) -> None:
    table.check_range(x, "x")


def full_kmax(x: int) -> int:
    """Largest possible omega(n) for n <= x is at most floor(log2 x)."""
    return max(1, x.bit_length() - 1)


def rho_table(x: int, kmax: int, table: SieveTable) -> RhoTable:
    """Exact rho_1(x) .. rho_kmax(x) from one pass over omega."""
    _require_x(x, table)
    if kmax < 1:
        raise ValidationException("kmax must be at least 1", "kmax", kmax)
    counts = np.bincount(table.omega[2 : x + 1], minlength=kmax + 1)
    return RhoTable(x=x, kmax=kmax, counts=tuple(int(c) for c in counts[1 : kmax + 1]))


def check_divisibility(x: int, k: int, table: SieveTable) -> List[int]:
    """Every n <= x with omega(n) >= k + 1 whose phi(n) is not divisible by 2^k.

    The list is empty for a correct table.
    """
    _require_x(x, table)
    if k < 0:
        raise ValidationException("k must be non-negative", "k", k)
    if k == 0:
        return []
    omega = table.omega[1 : x + 1]
    phi = table.phi[1 : x + 1]
    mask = np.uint64((1 << k) - 1) if k < 64 else np.uint64(2**64 - 1)
    bad = (omega >= k + 1) & ((phi.astype(np.uint64) & mask) != 0)
    return (np.flatnonzero(bad) + 1).tolist()


def check_kernel_divisibility(x: int, table: SieveTable) -> List[int]:
    """Every n <= x for which prod_{p | n} (p - 1) does not divide phi(n)."""
    _require_x(x, table)
    kernel = np.ones(x + 1, dtype=np.uint64)
    for p in table.primes(x).tolist():
        kernel[p::p] *= np.uint64(p - 1)
    phi = table.phi[: x + 1].astype(np.uint64)
    bad = phi[1:] % kernel[1:] != 0
    return (np.flatnonzero(bad) + 1).tolist()


def bound_chain(x: int, k: int, table: SieveTable, image: TotientImage) -> BoundReport:
    """V(x) against the census bound, with exact rational slack.

    The collapsed form k * rho_k(x) + x / 2^k is reported but not required
    to hold.
    """
    if image.x != x:
        raise ValidationException(f"image covers [1, {image.x}], not [1, {x}]", "image", image.x)
    if k < 1:
        raise ValidationException("k must be at least 1", "k", k)

    census = rho_table(x, max(k, full_kmax(x)), table)
    census_sum = census.census_sum(k)
    rho_k = census.rho(k)
    tail = Fraction(x, 2**k)
    slack = census_sum + tail - image.count
    collapsed = k * rho_k + tail

    report = BoundReport(
        x=x,
        k=k,
        v_count=image.count,
        census_sum=census_sum,
        rho_k=rho_k,
        tail_num=tail.numerator,
        tail_den=tail.denominator,
        tail_ceiling=math.ceil(tail),
        slack_num=slack.numerator,
        slack_den=slack.denominator,
        collapsed_num=collapsed.numerator,
        collapsed_den=collapsed.denominator,
        collapsed_holds=collapsed >= image.count,
    )
    if slack < 0:
        logger.error("Census bound violated", x=x, k=k, slack=str(slack))
    return report


def image_split(x: int, k: int, table: SieveTable, image: TotientImage) -> ImageSplitReport:
    """Sizes of phi(N_k) and phi(M_k) inside [1, x].

    N_k holds the n with omega(n) <= k, M_k the rest; n ranges over the
    image's certified preimage bound.
    """
    if image.x != x:
        raise ValidationException(f"image covers [1, {image.x}], not [1, {x}]", "image", image.x)
    if table.limit < image.preimage_limit:
        raise CompletenessException(x, image.preimage_limit, table.limit)
    if k < 1:
        raise ValidationException("k must be at least 1", "k", k)

    phi = table.phi[1 : image.preimage_limit + 1]
    omega = table.omega[1 : image.preimage_limit + 1]
    hit = phi <= x
    low = np.zeros(x + 1, dtype=bool)
    high = np.zeros(x + 1, dtype=bool)
    low[phi[hit & (omega <= k)]] = True
    high[phi[hit & (omega > k)]] = True

    census_sum = rho_table(x, max(k, full_kmax(x)), table).census_sum(k)
    multiples = x >> k
    low_count = int(np.count_nonzero(low))
    high_count = int(np.count_nonzero(high))
    return ImageSplitReport(
        x=x,
        k=k,
        low_omega_values=low_count,
        high_omega_values=high_count,
        multiples_of_2k=multiples,
        census_sum=census_sum,
        high_within_multiples=high_count <= multiples,
        low_within_census=low_count <= census_sum,
    )


def rho_ratio(x: int, k: int, table: SieveTable) -> float:
    """rho_k(x) (k-1)! ln x / (x (ln ln x)^(k-1))."""
    if x < 16:
        raise DomainException("rho_ratio needs x >= 16 so that ln ln x > 1", "x", x)
    _require_x(x, table)
    if k < 1:
        raise ValidationException("k must be at least 1", "k", k)
    rho = rho_table(x, k, table).rho(k)
    if rho == 0:
        return 0.0
    lnx = math.log(x)
    return rho * math.factorial(k - 1) * lnx / (x * math.log(lnx) ** (k - 1))


def rho_monotonicity(x: int, table: SieveTable) -> List[int]:
    """The k < ln ln x with rho_k(x) > rho_{k+1}(x)."""
    if x < 16:
        raise DomainException("rho_monotonicity needs x >= 16", "x", x)
    census = rho_table(x, full_kmax(x) + 1, table)
    lnlnx = math.log(math.log(x))
    return [
        k for k in range(1, census.kmax)
        if k < lnlnx and census.rho(k) > census.rho(k + 1)
    ]
