"""
Arithmetic-function sieve.

Builds immutable tables of the smallest prime factor, Euler's phi, the Mobius
function and omega (number of distinct prime factors) over [1, N], and the
queries that only need those tables:

- factorize: repeated division by the smallest prime factor
- coprime_count: inclusion-exclusion over the squarefree divisors of m
- euler_product_check: phi(n) against n * prod (1 - 1/p) in integer arithmetic

Two construction methods produce identical tables:

- linear: the one-pass smallest-prime-factor sieve, O(N), pure Python
- vectorized: numpy prime marking over p <= sqrt(N) plus a cofactor pass for
  the single prime factor above sqrt(N), O(N log log N)

Per-entry budget with w = 4 bytes (N < 2^32) or 8 bytes: the stored table
takes 2w + 2 bytes per entry (spf and phi at width w, mobius int8, omega
uint8). Vectorized construction adds w bytes for the cofactor array; every
other temporary is confined to blocks of SCRATCH_ENTRIES entries, charged
once as SCRATCH_BYTES. The linear method holds four Python lists plus one
int object per phi value until the arrays are filled, charged at
LINEAR_OVERHEAD bytes per entry.
"""

import math
import time
from enum import Enum
from typing import Iterable, Iterator, List, Optional, Tuple, Union

import numpy as np
import structlog

from app.config.settings import settings
from app.models.domain import Factorization, SieveTable
from app.models.exceptions import ResourceLimitException, ValidationException

logger = structlog.get_logger(__name__)


class SieveMethod(Enum):
    """Sieve construction methods."""
    VECTORIZED = "vectorized"
    LINEAR = "linear"


# entries per block of construction scratch
SCRATCH_ENTRIES = 1 << 16
SCRATCH_BYTES = 1 << 22
# four Python lists plus one int object per phi value
LINEAR_OVERHEAD = 80


def entry_width(limit: int) -> int:
    """Bytes needed for one spf/phi entry of a table with this limit."""
    return 4 if limit < 2**32 else 8


def entry_dtype(limit: int) -> type:
    return np.uint32 if entry_width(limit) == 4 else np.uint64


def stored_bytes(limit: int) -> int:
    """Bytes held by a finished (or loaded) table of this limit."""
    return (limit + 1) * (2 * entry_width(limit) + 2)


def _method(method: Union[SieveMethod, str, None]) -> SieveMethod:
    try:
        return SieveMethod(method or settings.sieve.method)
    except ValueError:
        raise ValidationException(f"unknown sieve method {method!r}", "method", method)


def bytes_per_entry(limit: int, method: Union[SieveMethod, str, None] = None) -> int:
    """Peak bytes per entry while building (stored table plus working arrays)."""
    width = entry_width(limit)
    if _method(method) is SieveMethod.LINEAR:
        return 2 * width + LINEAR_OVERHEAD
    return 3 * width + 2


def table_bytes(limit: int, method: Union[SieveMethod, str, None] = None) -> int:
    """Peak bytes needed to build a table of this limit."""
    return (limit + 1) * bytes_per_entry(limit, method) + SCRATCH_BYTES


def small_primes(bound: int) -> np.ndarray:
    """Primes <= bound by a plain boolean Eratosthenes sieve."""
    if bound < 2:
        return np.zeros(0, dtype=np.int64)
    is_prime = np.ones(bound + 1, dtype=bool)
    is_prime[:2] = False
    for i in range(2, math.isqrt(bound) + 1):
        if is_prime[i]:
            is_prime[i * i :: i] = False
    return np.flatnonzero(is_prime)


def _blocks(view: np.ndarray) -> Iterator[Tuple[int, np.ndarray]]:
    for start in range(0, view.size, SCRATCH_ENTRIES):
        yield start, view[start : start + SCRATCH_ENTRIES]


def _build_vectorized(limit: int) -> Tuple[np.ndarray, ...]:
    dtype = entry_dtype(limit)
    spf = np.zeros(limit + 1, dtype=dtype)
    phi = np.arange(limit + 1, dtype=dtype)
    rest = phi.copy()
    mobius = np.ones(limit + 1, dtype=np.int8)
    omega = np.zeros(limit + 1, dtype=np.uint8)
    quotient = np.empty(SCRATCH_ENTRIES, dtype=dtype)
    mask = np.empty(SCRATCH_ENTRIES, dtype=bool)

    for p in small_primes(math.isqrt(limit)).tolist():
        for _, marks in _blocks(spf[p * p :: p]):
            hit = np.equal(marks, 0, out=mask[: marks.size])
            marks[hit] = p
        for _, multiples in _blocks(phi[p::p]):
            q = np.floor_divide(multiples, p, out=quotient[: multiples.size])
            np.subtract(multiples, q, out=multiples)
        omega[p::p] += 1
        mobius[p::p] *= -1
        mobius[p * p :: p * p] = 0
        power = p
        while power <= limit:
            rest[power::power] //= p
            power *= p

    # rest is now 1 or the unique prime factor above sqrt(limit)
    for start, cofactor in _blocks(rest):
        stop = start + cofactor.size
        big = np.greater(cofactor, 1, out=mask[: cofactor.size])
        block = phi[start:stop]
        q = np.floor_divide(block, cofactor, out=quotient[: cofactor.size], where=big)
        np.subtract(block, q, out=block, where=big)
        counts, signs = omega[start:stop], mobius[start:stop]
        np.add(counts, 1, out=counts, where=big)
        np.negative(signs, out=signs, where=big)
    del rest

    for start, block in _blocks(spf):
        unmarked = np.equal(block, 0, out=mask[: block.size])
        index = np.flatnonzero(unmarked)
        index += start
        block[unmarked] = index
    spf[0] = 0
    phi[0] = 0
    mobius[0] = 0
    return spf, phi, mobius, omega


def _build_linear(limit: int) -> Tuple[np.ndarray, ...]:
    spf = [0] * (limit + 1)
    phi = [0] * (limit + 1)
    mobius = [0] * (limit + 1)
    omega = [0] * (limit + 1)
    spf[1] = phi[1] = mobius[1] = 1
    primes: List[int] = []

    for i in range(2, limit + 1):
        if spf[i] == 0:
            spf[i] = i
            phi[i] = i - 1
            mobius[i] = -1
            omega[i] = 1
            primes.append(i)
        least = spf[i]
        for p in primes:
            composite = i * p
            if p > least or composite > limit:
                break
            spf[composite] = p
            if p == least:
                phi[composite] = phi[i] * p
                mobius[composite] = 0
                omega[composite] = omega[i]
            else:
                phi[composite] = phi[i] * (p - 1)
                mobius[composite] = -mobius[i]
                omega[composite] = omega[i] + 1

    dtype = entry_dtype(limit)
    return (
        np.array(spf, dtype=dtype),
        np.array(phi, dtype=dtype),
        np.array(mobius, dtype=np.int8),
        np.array(omega, dtype=np.uint8),
    )


def build_sieve(
    limit: int,
    method: Union[SieveMethod, str, None] = None,
    memory_ceiling: Optional[int] = None,
) -> SieveTable:
    """Build the spf/phi/mobius/omega table over [1, limit].

    Raises:
        ValidationException: limit < 1 or unknown method
        ResourceLimitException: the build would exceed the memory ceiling
    """
    if limit < 1:
        raise ValidationException("limit must be at least 1", "limit", limit)
    method = _method(method)
    ceiling = settings.sieve.memory_ceiling_bytes if memory_ceiling is None else memory_ceiling
    requested = table_bytes(limit, method)
    if requested > ceiling:
        raise ResourceLimitException(limit, requested, ceiling)

    start_time = time.time()
    builder = _build_vectorized if method is SieveMethod.VECTORIZED else _build_linear
    spf, phi, mobius, omega = builder(limit)
    table = SieveTable(limit=limit, spf=spf, phi=phi, mobius=mobius, omega=omega)

    logger.info(
        "Sieve built",
        limit=limit,
        method=method.value,
        table_bytes=table.nbytes,
        duration_ms=(time.time() - start_time) * 1000,
    )
    return table


def factorize(table: SieveTable, n: int) -> Factorization:
    """Factor n <= table.limit by repeated division by its smallest prime factor."""
    table.check_range(n)
    original = n = int(n)
    factors = []
    spf = table.spf
    while n > 1:
        p = int(spf[n])
        exponent = 0
        while n % p == 0:
            n //= p
            exponent += 1
        factors.append((p, exponent))
    return Factorization(n=original, factors=tuple(factors))


def squarefree_divisors(table: SieveTable, m: int) -> List[Tuple[int, int]]:
    """(d, mu(d)) for the 2^omega(m) squarefree divisors d of m."""
    terms = [1]
    for p in factorize(table, m).primes:
        terms += [d * p for d in terms]
    return [(d, int(table.mobius[d])) for d in terms]


def coprime_count(x: int, m: int, table: SieveTable) -> int:
    """Number of n in [1, x] with gcd(n, m) = 1, as sum of mu(d) * floor(x / d)."""
    table.check_range(m, "m")
    if x < 1:
        raise ValidationException("x must be at least 1", "x", x)
    return sum(mu * (x // d) for d, mu in squarefree_divisors(table, m))


def coprime_counts(xs: Iterable[int], m: int, table: SieveTable) -> np.ndarray:
    """coprime_count for many x at once."""
    table.check_range(m, "m")
    xs = np.asarray(xs, dtype=np.int64)
    if xs.size and xs.min() < 1:
        raise ValidationException("x must be at least 1", "x", int(xs.min()))
    total = np.zeros(xs.shape, dtype=np.int64)
    for d, mu in squarefree_divisors(table, m):
        total += mu * (xs // d)
    return total


def euler_product_check(table: SieveTable, n: int) -> bool:
    """True iff the sieved phi(n) equals n * prod_{p | n} (p - 1) / p."""
    value = n
    for p in factorize(table, n).primes:
        value = value * (p - 1) // p
    return value == int(table.phi[n])
