"""Array-backed domain types.

These hold the results of the sieve, image and census computations. Every
array is made read-only on construction, so a finished object can be shared
between threads without locking.
"""

from dataclasses import dataclass
from functools import cached_property
from typing import Callable, Iterator, List, Optional, Tuple

import numpy as np

from app.models.exceptions import RangeException, ValidationException


# set bits per byte value
POPCOUNT = np.array([bin(i).count("1") for i in range(256)], dtype=np.uint8)
UNPACK_BLOCK = 1 << 16


def _freeze(array: np.ndarray) -> np.ndarray:
    array.flags.writeable = False
    return array


def popcount(bits: np.ndarray) -> int:
    """Number of set bits in a uint8 array."""
    return int(POPCOUNT[bits].sum(dtype=np.int64))


@dataclass(frozen=True)
class SieveTable:
    """Smallest prime factor, phi, mobius and omega over [1, limit].

    Arrays are indexed by n directly; index 0 is unused and holds 0.
    Conventions at n = 1: spf = 1, phi = 1, mobius = 1, omega = 0.
    """

    limit: int
    spf: np.ndarray
    phi: np.ndarray
    mobius: np.ndarray
    omega: np.ndarray

    def __post_init__(self) -> None:
        for name in ("spf", "phi", "mobius", "omega"):
            array = getattr(self, name)
            if array.shape != (self.limit + 1,):
                raise ValidationException(
                    f"{name} must have {self.limit + 1} entries, got {array.shape}",
                    name,
                    array.shape,
                )
            _freeze(array)

    def check_range(self, n: int, name: str = "n") -> None:
        """Raise RangeException unless 1 <= n <= limit."""
        if n < 1 or n > self.limit:
            raise RangeException(name, n, self.limit)

    def primes(self, upto: Optional[int] = None) -> np.ndarray:
        """Sorted array of primes <= upto (default: the whole table)."""
        upto = self.limit if upto is None else min(upto, self.limit)
        if upto < 2:
            return np.zeros(0, dtype=np.int64)
        n = np.arange(2, upto + 1, dtype=self.spf.dtype)
        return np.flatnonzero(self.spf[2 : upto + 1] == n).astype(np.int64) + 2

    @property
    def nbytes(self) -> int:
        return int(self.spf.nbytes + self.phi.nbytes + self.mobius.nbytes + self.omega.nbytes)


@dataclass(frozen=True)
class Factorization:
    """Prime factorization n = p1^a1 ... pk^ak with p1 < ... < pk."""

    n: int
    factors: Tuple[Tuple[int, int], ...]

    def __post_init__(self) -> None:
        value = 1
        previous = 1
        for prime, exponent in self.factors:
            if prime <= previous or exponent < 1:
                raise ValidationException("factors must have increasing primes", "factors", self.factors)
            previous = prime
            value *= prime**exponent
        if value != self.n:
            raise ValidationException(f"factors multiply to {value}, not {self.n}", "factors", self.factors)

    @property
    def omega(self) -> int:
        return len(self.factors)

    @property
    def primes(self) -> List[int]:
        return [p for p, _ in self.factors]

    def __iter__(self) -> Iterator[Tuple[int, int]]:
        return iter(self.factors)


@dataclass(frozen=True)
class GapRecord:
    """Two consecutive members of the totient image and their distance."""

    lower: int
    upper: int
    gap: int

    def to_dict(self) -> dict:
        return {"lower": self.lower, "upper": self.upper, "gap": self.gap}


@dataclass(frozen=True)
class TotientImage:
    """Totient values in [1, x], one bit per candidate value.

    `bits` is the little-endian packed membership map over 0..x. The sorted
    member array is only materialized when `values()` is first called.
    """

    x: int
    bits: np.ndarray
    count: int
    preimage_limit: int

    def __post_init__(self) -> None:
        if self.bits.shape != ((self.x + 8) // 8,):
            raise ValidationException(
                f"bits must hold {self.x + 1} values, got shape {self.bits.shape}",
                "bits",
                self.bits.shape,
            )
        _freeze(self.bits)
        members = popcount(self.bits)
        if members != self.count:
            raise ValidationException(
                f"count {self.count} disagrees with {members} set members", "count", self.count
            )

    def __contains__(self, m: object) -> bool:
        if not isinstance(m, (int, np.integer)) or m < 0 or m > self.x:
            return False
        return bool((self.bits[int(m) >> 3] >> (int(m) & 7)) & 1)

    @cached_property
    def _sorted_values(self) -> np.ndarray:
        parts = [np.zeros(0, dtype=np.int64)]
        for start in range(0, self.bits.size, UNPACK_BLOCK):
            block = np.unpackbits(self.bits[start : start + UNPACK_BLOCK], bitorder="little")
            parts.append(np.flatnonzero(block).astype(np.int64) + 8 * start)
        return _freeze(np.concatenate(parts))

    def values(self) -> np.ndarray:
        """Sorted member array."""
        return self._sorted_values

    def count_up_to(self, y: int) -> int:
        """V(y) for y <= x."""
        if y > self.x:
            raise RangeException("y", y, self.x)
        if y < 0:
            return 0
        whole, partial = divmod(y + 1, 8)
        total = popcount(self.bits[:whole])
        if partial:
            total += int(POPCOUNT[int(self.bits[whole]) & ((1 << partial) - 1)])
        return total


@dataclass(frozen=True)
class RhoTable:
    """Counts of n <= x with exactly k distinct prime factors, k = 1..kmax."""

    x: int
    kmax: int
    counts: Tuple[int, ...]

    def rho(self, k: int) -> int:
        if k < 1:
            raise ValidationException("k must be positive", "k", k)
        return self.counts[k - 1] if k <= self.kmax else 0

    def census_sum(self, k: int) -> int:
        """rho_1 + ... + rho_k."""
        return sum(self.counts[: min(k, self.kmax)])

    @property
    def total(self) -> int:
        return sum(self.counts)


@dataclass(frozen=True)
class AbelInput:
    """Points, weights and test function for a partial summation check.

    `f` and `f_prime` must accept numpy arrays. `segment_exact` says whether
    differences f(b) - f(a) may be used for the integral over each segment.
    """

    points: np.ndarray
    weights: np.ndarray
    f: Callable[[np.ndarray], np.ndarray]
    f_prime: Callable[[np.ndarray], np.ndarray]
    x: float
    segment_exact: bool = True

    def __post_init__(self) -> None:
        points = np.asarray(self.points, dtype=np.float64)
        weights = np.asarray(self.weights, dtype=np.float64)
        if points.ndim != 1 or points.size == 0:
            raise ValidationException("points must be a non-empty sequence", "points", points.shape)
        if weights.shape != points.shape:
            raise ValidationException("weights must match points", "weights", weights.shape)
        if np.any(points <= 0) or np.any(np.diff(points) <= 0):
            raise ValidationException("points must be positive and strictly increasing", "points", None)
        object.__setattr__(self, "points", _freeze(points))
        object.__setattr__(self, "weights", _freeze(weights))
