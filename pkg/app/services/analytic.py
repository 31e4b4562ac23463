"""
Analytic identities and estimates checked numerically.

- Abel (partial) summation as an identity on finite point sets
- prime counting and the prime-power formula for rho_1
- both Mertens sums, the second giving an estimate of the Mertens constant
- Stirling's expansion of ln n!, with ln sqrt(2 pi) recomputed from the
  Wallis product as an independent reference

Long real sums go through math.fsum. Nothing here hard-codes the Mertens
constant or ln sqrt(2 pi).
"""

import math
from typing import Callable, Dict, List, Optional, Sequence, Tuple

import numpy as np
import structlog

from app.config.settings import settings
from app.models.domain import AbelInput, SieveTable
from app.models.exceptions import DomainException, ValidationException
from app.models.schemas import ABEL_FAMILIES, AbelReport, MertensReport, StirlingReport
from app.services.omega_census import full_kmax, rho_table

logger = structlog.get_logger(__name__)

# Gauss-Legendre nodes per quadrature panel
GAUSS_NODES = 5

DEFAULT_ABEL_X: Dict[str, int] = {
    "constant": 100,
    "log-factorial": 100,
    "prime-reciprocal": 10_000,
    "prime-inverse-log": 10_000,
    "prime-log-over-p": 10_000,
}


def _segments(data: AbelInput) -> Tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Left ends, right ends and alpha values of the staircase on [lambda_1, x]."""
    inside = data.points <= data.x
    points = data.points[inside]
    alpha = np.cumsum(data.weights[inside])
    right = np.append(points[1:], data.x)
    return points, np.minimum(right, data.x), alpha


def _quadrature(
    f_prime: Callable[[np.ndarray], np.ndarray],
    left: np.ndarray,
    right: np.ndarray,
    alpha: np.ndarray,
    steps: int,
) -> float:
    nodes, node_weights = np.polynomial.legendre.leggauss(GAUSS_NODES)
    fractions = np.arange(steps + 1, dtype=np.float64) / steps
    total: List[float] = []
    # bounded batches keep the node grid small for long point lists
    batch = max(1, (1 << 20) // (steps * GAUSS_NODES))
    for start in range(0, left.size, batch):
        a = left[start : start + batch, None]
        b = right[start : start + batch, None]
        edges = a + (b - a) * fractions
        lo, hi = edges[:, :-1], edges[:, 1:]
        half = (hi - lo) / 2.0
        mid = (hi + lo) / 2.0
        t = mid[..., None] + half[..., None] * nodes
        panel = (f_prime(t) * node_weights).sum(axis=-1) * half
        total.extend((alpha[start : start + batch] * panel.sum(axis=-1)).tolist())
    return math.fsum(total)


def abel_sides(
    data: AbelInput, quadrature_steps: Optional[int] = None, mode: Optional[str] = None
) -> Tuple[float, float, str]:
    """(direct sum, boundary term minus integral, mode used).

    Exact mode integrates over each step of alpha as f(b) - f(a); it needs
    data.segment_exact. Otherwise each segment gets `quadrature_steps`
    Gauss-Legendre panels applied to f'.
    """
    if data.x < data.points[0]:
        raise DomainException(
            f"x = {data.x} lies below the first point {data.points[0]}", "x", data.x
        )
    steps = settings.numerics.quadrature_steps if quadrature_steps is None else quadrature_steps
    if steps < 1:
        raise ValidationException("quadrature_steps must be at least 1", "quadrature_steps", steps)
    if mode is None:
        mode = "exact" if data.segment_exact else "quadrature"
    if mode not in ("exact", "quadrature"):
        raise ValidationException(f"unknown mode {mode!r}", "mode", mode)
    if mode == "exact" and not data.segment_exact:
        logger.warning("Exact segments unavailable, using quadrature")
        mode = "quadrature"

    left, right, alpha = _segments(data)
    inside = data.weights[data.points <= data.x]
    lhs = math.fsum((inside * data.f(left)).tolist())

    boundary = float(alpha[-1]) * float(data.f(np.array([data.x]))[0])
    if mode == "exact":
        integral = math.fsum((alpha * (data.f(right) - data.f(left))).tolist())
    else:
        integral = _quadrature(data.f_prime, left, right, alpha, steps)
    return lhs, boundary - integral, mode


def abel_check(
    data: AbelInput, quadrature_steps: Optional[int] = None, mode: Optional[str] = None
) -> float:
    """|sum a_n f(lambda_n) - (alpha(x) f(x) - integral alpha f')| over lambda_n <= x."""
    lhs, rhs, _ = abel_sides(data, quadrature_steps, mode)
    return abs(lhs - rhs)


def _ones(t: np.ndarray) -> np.ndarray:
    return np.ones_like(t, dtype=np.float64)


def _zeros(t: np.ndarray) -> np.ndarray:
    return np.zeros_like(t, dtype=np.float64)


def abel_family(name: str, x: Optional[float] = None, table: Optional[SieveTable] = None) -> AbelInput:
    """Named test inputs.

    constant and log-factorial run over the integers 1..x; the three prime
    families run over the primes <= x and need a table covering x.
    """
    if name not in ABEL_FAMILIES:
        raise ValidationException(f"unknown Abel family {name!r}", "family", name)
    x = float(DEFAULT_ABEL_X[name] if x is None else x)
    if x < 2:
        raise DomainException("Abel families need x >= 2", "x", x)

    if name in ("constant", "log-factorial"):
        points = np.arange(1, math.floor(x) + 1, dtype=np.float64)
        weights = np.ones_like(points)
        if name == "constant":
            return AbelInput(points=points, weights=weights, f=_ones, f_prime=_zeros, x=x)
        return AbelInput(
            points=points, weights=weights, f=np.log, f_prime=lambda t: 1.0 / t, x=x
        )

    if table is None:
        raise ValidationException(f"family {name!r} needs a sieve table", "table", None)
    table.check_range(math.floor(x), "x")
    points = table.primes(math.floor(x)).astype(np.float64)
    weights = np.ones_like(points)
    if name == "prime-reciprocal":
        f, f_prime = (lambda t: 1.0 / t), (lambda t: -1.0 / (t * t))
    elif name == "prime-inverse-log":
        f = lambda t: 1.0 / np.log(t)  # noqa: E731
        f_prime = lambda t: -1.0 / (t * np.log(t) ** 2)  # noqa: E731
    else:
        f = lambda t: np.log(t) / t  # noqa: E731
        f_prime = lambda t: (1.0 - np.log(t)) / (t * t)  # noqa: E731
    return AbelInput(points=points, weights=weights, f=f, f_prime=f_prime, x=x)


def abel_report(
    family: str,
    x: Optional[float] = None,
    table: Optional[SieveTable] = None,
    mode: Optional[str] = None,
    quadrature_steps: Optional[int] = None,
) -> AbelReport:
    data = abel_family(family, x, table)
    lhs, rhs, used = abel_sides(data, quadrature_steps, mode)
    return AbelReport(family=family, x=data.x, mode=used, lhs=lhs, rhs=rhs, discrepancy=abs(lhs - rhs))


def prime_pi(x: int, table: SieveTable) -> int:
    """Number of primes <= x."""
    table.check_range(x, "x")
    return int(table.primes(x).size)


def prime_power_count(x: int, table: SieveTable) -> int:
    """sum over p <= x of max{e : p^e <= x}, in integer arithmetic."""
    table.check_range(x, "x")
    primes = table.primes(x)
    powers = primes.copy()
    total = 0
    while powers.size:
        alive = powers <= x
        total += int(np.count_nonzero(alive))
        primes = primes[alive]
        powers = powers[alive] * primes
    return total


def rho1_formula_check(x: int, table: SieveTable) -> bool:
    """Prime-power count against rho_1(x) from the omega census."""
    expected = rho_table(x, full_kmax(x), table).rho(1)
    return prime_power_count(x, table) == expected


def mertens_sums(x: int, table: SieveTable) -> MertensReport:
    """sum 1/p and sum ln p / p over p <= x, with their Mertens residuals."""
    if x < 3:
        raise DomainException("mertens_sums needs x >= 3", "x", x)
    table.check_range(x, "x")
    primes = table.primes(x).astype(np.float64)
    sum_inv_p = math.fsum((1.0 / primes).tolist())
    sum_logp_over_p = math.fsum((np.log(primes) / primes).tolist())
    lnx = math.log(x)
    return MertensReport(
        x=x,
        sum_inv_p=sum_inv_p,
        sum_logp_over_p=sum_logp_over_p,
        m_estimate=sum_inv_p - math.log(lnx),
        first_residual=sum_logp_over_p - lnx,
    )


def mertens_grid(xs: Sequence[int], table: SieveTable) -> List[MertensReport]:
    return [mertens_sums(int(x), table) for x in xs]


def stirling_eval(n: int) -> StirlingReport:
    """ln n! by compensated summation against n ln n - n + ln sqrt(n)."""
    if n < 1:
        raise ValidationException("n must be at least 1", "n", n)
    ln_factorial = math.fsum(np.log(np.arange(1, n + 1, dtype=np.float64)).tolist())
    lnn = math.log(n)
    main_term = n * lnn - n + 0.5 * lnn
    return StirlingReport(
        n=n,
        ln_factorial=ln_factorial,
        main_term=main_term,
        c_estimate=ln_factorial - main_term,
    )


def stirling_grid(ns: Sequence[int]) -> List[StirlingReport]:
    return [stirling_eval(int(n)) for n in ns]


def wallis_log_sqrt_2pi(terms: Optional[int] = None) -> float:
    """ln sqrt(2 pi) = ln 2 + ln(pi / 2) / 2 with pi / 2 from the Wallis product.

    ln(pi / 2) = -sum_k ln(1 - 1 / (4 k^2)); the tail beyond `terms` is
    replaced by its expansion 1 / (4K) - 1 / (8K^2).
    """
    terms = settings.numerics.wallis_terms if terms is None else terms
    if terms < 1:
        raise ValidationException("terms must be at least 1", "terms", terms)
    k = np.arange(1, terms + 1, dtype=np.float64)
    partial = math.fsum((-np.log1p(-1.0 / (4.0 * k * k))).tolist())
    tail = 1.0 / (4.0 * terms) - 1.0 / (8.0 * terms * terms)
    return math.log(2.0) + 0.5 * (partial + tail)
