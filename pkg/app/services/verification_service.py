"""
The `verify` suite: every checkable property at one scale.

Each check returns a CheckResult; a check that raises a toolkit error counts
as failed. Checks that only record an observation (rho monotonicity, the
omega <= k half of the image split) always pass and carry the observation in
their detail.
"""

import math
import time
from typing import Callable, List, Optional, Tuple

import numpy as np

from app.config.logging import LoggingMixin
from app.models.domain import SieveTable, TotientImage
from app.models.exceptions import ToolkitException
from app.models.schemas import CheckResult, VerificationReport
from app.services import analytic
from app.services import bound_optimizer as optimizer
from app.services import omega_census as census
from app.services.sieve import build_sieve, coprime_counts, euler_product_check
from app.services.sieve_cache import SieveProvider
from app.services.totient_image import (
    nontotients,
    preimage_limit_for,
    record_gaps,
    totient_image_up_to,
)

PUBLISHED_C_STAR = 0.3733646177
PUBLISHED_EXPONENT = 0.2587966
GOLDEN_V = {10: 6, 100: 38}

Outcome = Tuple[bool, str]


class VerificationService(LoggingMixin):
    """Runs the property suite against one sieve table."""

    def __init__(self, provider: Optional[SieveProvider] = None):
        super().__init__()
        self.provider = provider or SieveProvider()
        self.table: Optional[SieveTable] = None
        self.image: Optional[TotientImage] = None
        self.x_max = 0

    @staticmethod
    def required_limit(x_max: int) -> int:
        oracle_x = min(x_max, 1000)
        return max(preimage_limit_for(x_max), 2 * oracle_x * oracle_x, 10**4)

    def run(self, x_max: int, cache_path: Optional[str] = None, method: Optional[str] = None) -> VerificationReport:
        start_time = time.time()
        self.x_max = x_max
        self.table = self.provider.obtain(self.required_limit(x_max), cache_path, method)
        self.image = totient_image_up_to(x_max, self.table)

        checks: List[Tuple[str, Callable[[], Outcome]]] = [
            ("sieve_methods_agree", self.check_sieve_methods),
            ("euler_product", self.check_euler_product),
            ("mobius_sum", self.check_mobius_sum),
            ("gauss_phi_sum", self.check_gauss_sum),
            ("coprime_count_gcd_scan", self.check_coprime_counts),
            ("v_count_golden", self.check_v_golden),
            ("v_count_elementary_bound", self.check_v_elementary),
            ("smallest_even_nontotient", self.check_nontotients),
            ("divisibility_2k", self.check_divisibility),
            ("kernel_divisibility", self.check_kernel_divisibility),
            ("census_partition", self.check_census_partition),
            ("bound_slack_nonnegative", self.check_bound_slack),
            ("image_split", self.check_image_split),
            ("rho_monotonicity", self.check_rho_monotonicity),
            ("rho1_prime_powers", self.check_rho1_formula),
            ("density_decreasing", self.check_density),
            ("record_gaps", self.check_record_gaps),
            ("abel_exact", self.check_abel_exact),
            ("abel_quadrature", self.check_abel_quadrature),
            ("mertens", self.check_mertens),
            ("stirling", self.check_stirling),
            ("exponent_constant", self.check_constant),
            ("exponent_branches", self.check_branches),
        ]
        results = [self._run_check(name, check) for name, check in checks]
        report = VerificationReport(
            x_max=x_max, passed=all(r.passed for r in results), checks=results
        )
        self.log_info(
            "Verification finished",
            x_max=x_max,
            passed=report.passed,
            failed=[r.name for r in results if not r.passed],
            duration_ms=(time.time() - start_time) * 1000,
        )
        return report

    def _run_check(self, name: str, check: Callable[[], Outcome]) -> CheckResult:
        try:
            passed, detail = check()
        except ToolkitException as e:
            passed, detail = False, f"{e.error_code}: {e.message}"
        if passed:
            self.log_info("Check passed", check=name)
        else:
            self.log_error("Check failed", check=name, detail=detail)
        return CheckResult(name=name, passed=passed, detail=detail)

    def _powers_of_ten(self, start: int) -> List[int]:
        values = []
        x = 10**start
        while x <= self.x_max:
            values.append(x)
            x *= 10
        return values

    # sieve_core

    def check_sieve_methods(self) -> Outcome:
        n = min(self.table.limit, 10**5)
        linear = build_sieve(n, method="linear")
        vectorized = build_sieve(n, method="vectorized")
        for name in ("spf", "phi", "mobius", "omega"):
            if not np.array_equal(getattr(linear, name), getattr(vectorized, name)):
                return False, f"{name} differs below {n}"
        return True, f"n <= {n}"

    def check_euler_product(self) -> Outcome:
        n = min(self.table.limit, 10**4)
        bad = [m for m in range(1, n + 1) if not euler_product_check(self.table, m)]
        return not bad, f"n <= {n}, failures {bad[:5]}"

    def _divisor_sum(self, values: np.ndarray, n: int) -> np.ndarray:
        total = np.zeros(n + 1, dtype=np.int64)
        for d in range(1, n + 1):
            total[d::d] += int(values[d])
        return total

    def check_mobius_sum(self) -> Outcome:
        n = min(self.table.limit, 10**5)
        total = self._divisor_sum(self.table.mobius, n)
        expected = np.zeros(n + 1, dtype=np.int64)
        expected[1] = 1
        return bool(np.array_equal(total[1:], expected[1:])), f"n <= {n}"

    def check_gauss_sum(self) -> Outcome:
        n = min(self.table.limit, 10**5)
        total = self._divisor_sum(self.table.phi, n)
        return bool(np.array_equal(total[1:], np.arange(1, n + 1))), f"n <= {n}"

    def check_coprime_counts(self) -> Outcome:
        x = min(self.x_max, 10**4)
        xs = np.arange(1, x + 1)
        for m in range(1, min(300, self.table.limit) + 1):
            scan = np.cumsum(np.gcd(xs, m) == 1)
            if not np.array_equal(coprime_counts(xs, m, self.table), scan):
                return False, f"mismatch for m = {m}"
        return True, f"x <= {x}, m <= 300"

    # totient_image

    def check_v_golden(self) -> Outcome:
        observed = {x: self.image.count_up_to(x) for x in GOLDEN_V if x <= self.x_max}
        expected = {x: v for x, v in GOLDEN_V.items() if x <= self.x_max}
        return observed == expected, f"V = {observed}"

    def check_v_elementary(self) -> Outcome:
        x = min(self.x_max, 1000)
        refined = self.image.count_up_to(x)
        elementary = totient_image_up_to(x, self.table, refined=False).count
        return refined == elementary, f"x = {x}: {refined} vs {elementary}"

    def check_nontotients(self) -> Outcome:
        if self.x_max < 14:
            return True, "x_max below 14"
        missing = nontotients(self.image)
        first = int(missing[0]) if missing.size else None
        return first == 14, f"first even nontotient {first}"

    def check_record_gaps(self) -> Outcome:
        records = record_gaps(self.image)
        sizes = [r.gap for r in records]
        increasing = all(a < b for a, b in zip(sizes, sizes[1:]))
        smaller = max(10, self.x_max // 100)
        prefix = record_gaps(totient_image_up_to(smaller, self.table))
        extends = records[: len(prefix)] == prefix
        return increasing and extends, f"{len(sizes)} records, largest {sizes[-1] if sizes else None}"

    def check_density(self) -> Outcome:
        grid = self._powers_of_ten(2)
        density = [self.image.count_up_to(x) / x for x in grid]
        ok = all(a > b for a, b in zip(density, density[1:]))
        return ok, ", ".join(f"{x}: {d:.6f}" for x, d in zip(grid, density))

    # omega_census

    def check_divisibility(self) -> Outcome:
        bad = {k: census.check_divisibility(self.x_max, k, self.table) for k in range(1, 11)}
        bad = {k: v[:5] for k, v in bad.items() if v}
        return not bad, f"k = 1..10, counterexamples {bad}"

    def check_kernel_divisibility(self) -> Outcome:
        bad = census.check_kernel_divisibility(self.x_max, self.table)
        return not bad, f"counterexamples {bad[:5]}"

    def check_census_partition(self) -> Outcome:
        xs = sorted(set(self._powers_of_ten(1) + [self.x_max]))
        for x in xs:
            table = census.rho_table(x, census.full_kmax(x), self.table)
            if table.total != x - 1:
                return False, f"x = {x}: total {table.total}"
        return True, f"x in {xs}"

    def check_bound_slack(self) -> Outcome:
        xs = sorted(set(self._powers_of_ten(2) + [self.x_max]))
        worst = None
        for x in xs:
            image = self.image if x == self.x_max else totient_image_up_to(x, self.table)
            for k in range(1, 26):
                slack = census.bound_chain(x, k, self.table, image).slack
                if slack < 0:
                    return False, f"x = {x}, k = {k}: slack {slack}"
                worst = slack if worst is None else min(worst, slack)
        return True, f"x in {xs}, k = 1..25, least slack {worst}"

    def check_image_split(self) -> Outcome:
        notes = []
        for k in range(1, 6):
            split = census.image_split(self.x_max, k, self.table, self.image)
            if not split.high_within_multiples:
                return False, f"k = {k}: {split.high_omega_values} > {split.multiples_of_2k}"
            if not split.low_within_census:
                notes.append(k)
        return True, f"k = 1..5, omega <= k part above census for k in {notes}"

    def check_rho_monotonicity(self) -> Outcome:
        if self.x_max < 16:
            return True, "x_max below 16"
        violations = census.rho_monotonicity(self.x_max, self.table)
        return True, f"rho_k > rho_k+1 for k in {violations}"

    # analytic_checks

    def check_rho1_formula(self) -> Outcome:
        xs = sorted(set(self._powers_of_ten(1) + [self.x_max]))
        bad = [x for x in xs if not analytic.rho1_formula_check(x, self.table)]
        return not bad, f"x in {xs}, failures {bad}"

    def _abel(self, mode: str, tolerance: float) -> Outcome:
        worst = 0.0
        for family in ("log-factorial", "prime-reciprocal", "prime-inverse-log", "prime-log-over-p"):
            x = min(analytic.DEFAULT_ABEL_X[family], self.table.limit)
            report = analytic.abel_report(family, x, self.table, mode=mode)
            if report.discrepancy >= tolerance:
                return False, f"{family}: discrepancy {report.discrepancy:.3e}"
            worst = max(worst, report.discrepancy)
        return True, f"largest discrepancy {worst:.3e}"

    def check_abel_exact(self) -> Outcome:
        return self._abel("exact", 1e-9)

    def check_abel_quadrature(self) -> Outcome:
        return self._abel("quadrature", 1e-6)

    def check_mertens(self) -> Outcome:
        grid = [x for x in self._powers_of_ten(3)] or [self.x_max]
        reports = analytic.mertens_grid(grid, self.table)
        bounded = all(abs(r.first_residual) < 2 for r in reports)
        increasing = all(
            a.sum_inv_p < b.sum_inv_p and a.sum_logp_over_p < b.sum_logp_over_p
            for a, b in zip(reports, reports[1:])
        )
        return bounded and increasing, ", ".join(
            f"{r.x}: M ~ {r.m_estimate:.6f}" for r in reports
        )

    def check_stirling(self) -> Outcome:
        ns = [10**2, 10**3, 10**4, 10**5]
        c = {n: analytic.stirling_eval(n).c_estimate for n in ns + [2 * n for n in ns]}
        steps = [abs(c[2 * n] - c[n]) for n in ns]
        shrinking = all(a > b for a, b in zip(steps, steps[1:]))
        reference = analytic.wallis_log_sqrt_2pi()
        close = abs(c[10**5] - reference) < 1e-5
        return shrinking and close, f"c(1e5) = {c[10**5]:.9f}, Wallis {reference:.9f}"

    # bound_optimizer

    def check_constant(self) -> Outcome:
        first = optimizer.solve_cstar(1e-12)
        second = optimizer.solve_cstar(1e-12)
        census_branch, tail_branch, _ = optimizer.exponent_branches(first.c_star)
        ok = (
            first.c_star == second.c_star
            and first.residual < 1e-12
            and abs(first.c_star - PUBLISHED_C_STAR) < 1e-9
            and abs(first.exponent - PUBLISHED_EXPONENT) < 1e-6
            and abs(census_branch - tail_branch) < 1e-10
        )
        return ok, f"c* = {first.c_star:.10f}, exponent {first.exponent:.10f}"

    def check_branches(self) -> Outcome:
        solution = optimizer.solve_cstar()
        _, value = optimizer.branch_grid_maximum()
        at_root = optimizer.exponent_branches(solution.c_star)[2]
        comparison = optimizer.compare_exponents(solution)
        ok = (
            value <= at_root + 1e-8
            and comparison.improvement_over_pillai > 0
            and comparison.gap_to_erdos > 0
            and math.isfinite(at_root)
        )
        return ok, f"grid max {value:.10f}, at c* {at_root:.10f}"
