"""
Balancing the two exponents of the density bound.

With k = ceil(c ln ln x), the census part of the bound decays like
(ln x)^-(1 - c + c ln c) and the tail x / 2^k like (ln x)^-(c ln 2). The
best exponent is where the two meet:

    g(c) = 1 - c + c ln c - c ln 2 = 0,    g'(c) = ln c - ln 2

g is positive near 0, negative near 1 and strictly decreasing on (0, 1), so
bisection finds it and Newton steps, kept inside the bracket, polish it.
"""

import math
import time
from typing import List, Optional, Sequence, Tuple

import numpy as np
import structlog

from app.config.settings import settings
from app.models.domain import SieveTable
from app.models.exceptions import DomainException, ToolkitException, ValidationException
from app.models.schemas import EmpiricalBoundReport, ExponentComparison, ExponentSolution
from app.services.totient_image import totient_image_up_to

logger = structlog.get_logger(__name__)

LN2 = math.log(2.0)
PILLAI_EXPONENT = LN2 / math.e
ERDOS_EXPONENT = 1.0
MIN_TOLERANCE = 1e-14


def g(c: float) -> float:
    return 1.0 - c + c * math.log(c) - c * LN2


def g_prime(c: float) -> float:
    return math.log(c) - LN2


def solve_cstar(tolerance: Optional[float] = None) -> ExponentSolution:
    """Root of g on (eps, 1 - eps): bisection, then bracketed Newton."""
    numerics = settings.numerics
    tolerance = numerics.default_tolerance if tolerance is None else tolerance
    if tolerance < MIN_TOLERANCE:
        raise ValidationException(
            f"tolerance must be at least {MIN_TOLERANCE}", "tolerance", tolerance
        )

    low, high = numerics.bisection_epsilon, 1.0 - numerics.bisection_epsilon
    if not (g(low) > 0.0 > g(high)):
        raise DomainException("g does not change sign on the bracket", "bracket", (low, high))
    if not (g_prime(low) < 0.0 and g_prime(high) < 0.0):
        raise DomainException("g is not decreasing at the bracket ends", "bracket", (low, high))

    start_time = time.time()
    trace: List[float] = []
    iterations = 0

    while high - low > numerics.polish_threshold:
        mid = 0.5 * (low + high)
        iterations += 1
        trace.append(mid)
        if g(mid) > 0.0:
            low = mid
        else:
            high = mid

    c = 0.5 * (low + high)
    value = g(c)
    while abs(value) >= tolerance:
        if iterations >= numerics.max_iterations:
            raise ToolkitException(
                "c* solver did not converge",
                "NO_CONVERGENCE",
                {"iterations": iterations, "residual": abs(value)},
            )
        iterations += 1
        candidate = c - value / g_prime(c)
        if not (low < candidate < high):
            candidate = 0.5 * (low + high)
        c = candidate
        trace.append(c)
        value = g(c)
        if value > 0.0:
            low = c
        elif value < 0.0:
            high = c
        else:
            low = high = c

    solution = ExponentSolution(
        c_star=c,
        exponent=c * LN2,
        residual=abs(value),
        iterations=iterations,
        bracket=(low, high),
        trace=trace,
    )
    logger.info(
        "Solver converged",
        c_star=c,
        iterations=iterations,
        residual=solution.residual,
        duration_ms=(time.time() - start_time) * 1000,
    )
    return solution


def exponent_branches(c: float) -> Tuple[float, float, float]:
    """(1 - c + c ln c, c ln 2, min of the two)."""
    if not (0.0 < c < 1.0):
        raise DomainException("c must lie in (0, 1)", "c", c)
    census = 1.0 - c + c * math.log(c)
    tail = c * LN2
    return census, tail, min(census, tail)


def branch_grid_maximum(points: Optional[int] = None) -> Tuple[float, float]:
    """(c, value) maximizing the branch minimum over c = i / (points + 1)."""
    points = settings.numerics.branch_grid_points if points is None else points
    if points < 1:
        raise ValidationException("points must be at least 1", "points", points)
    c = np.arange(1, points + 1, dtype=np.float64) / (points + 1)
    smaller = np.minimum(1.0 - c + c * np.log(c), c * LN2)
    best = int(np.argmax(smaller))
    return float(c[best]), float(smaller[best])


def k_of_x(x: float, c: float) -> int:
    """ceil(c ln ln x), at least 1."""
    if not (0.0 < c < 1.0):
        raise DomainException("c must lie in (0, 1)", "c", c)
    if x <= math.e:
        raise DomainException("k_of_x needs x > e", "x", x)
    return max(1, math.ceil(c * math.log(math.log(x))))


def compare_exponents(solution: ExponentSolution) -> ExponentComparison:
    return ExponentComparison(
        exponent=solution.exponent,
        pillai_exponent=PILLAI_EXPONENT,
        erdos_exponent=ERDOS_EXPONENT,
        improvement_over_pillai=solution.exponent - PILLAI_EXPONENT,
        gap_to_erdos=ERDOS_EXPONENT - solution.exponent,
    )


def empirical_bound(
    grid: Sequence[int],
    table: SieveTable,
    exponent: Optional[float] = None,
    refined: Optional[bool] = None,
) -> EmpiricalBoundReport:
    """V(x) (ln x)^exponent / x at each grid point.

    One image at max(grid) serves every point. The sup is a desk-scale
    estimate of the constant, not a proven one.
    """
    grid = [int(x) for x in grid]
    if not grid:
        raise ValidationException("grid must not be empty", "grid", grid)
    if min(grid) < 2:
        raise ValidationException("grid values must be at least 2", "grid", min(grid))
    if exponent is None:
        exponent = solve_cstar().exponent

    image = totient_image_up_to(max(grid), table, refined)
    v_counts = [image.count_up_to(x) for x in grid]
    ratios = [v * math.log(x) ** exponent / x for v, x in zip(v_counts, grid)]
    best = max(range(len(grid)), key=lambda i: (ratios[i], -i))
    return EmpiricalBoundReport(
        exponent=exponent,
        grid=grid,
        v_counts=v_counts,
        ratios=ratios,
        sup_ratio=ratios[best],
        arg_sup=grid[best],
    )
