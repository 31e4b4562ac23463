"""Pydantic models for reports and command configuration."""

from fractions import Fraction
from typing import Dict, List, Literal, Optional, Any, Tuple
from pydantic import BaseModel, Field, field_validator, model_validator


ABEL_FAMILIES = (
    "constant", "log-factorial", "prime-reciprocal", "prime-inverse-log", "prime-log-over-p",
)


class BoundReport(BaseModel):
    """One exact instantiation of V(x) <= rho_1 + ... + rho_k + x / 2^k."""

    x: int = Field(..., ge=1)
    k: int = Field(..., ge=1)
    v_count: int = Field(..., ge=0)
    census_sum: int = Field(..., ge=0)
    rho_k: int = Field(..., ge=0)
    tail_num: int
    tail_den: int
    tail_ceiling: int
    slack_num: int
    slack_den: int
    collapsed_num: int
    collapsed_den: int
    collapsed_holds: bool

    @property
    def tail(self) -> Fraction:
        return Fraction(self.tail_num, self.tail_den)

    @property
    def slack(self) -> Fraction:
        return Fraction(self.slack_num, self.slack_den)

    @property
    def collapsed_bound(self) -> Fraction:
        return Fraction(self.collapsed_num, self.collapsed_den)

    def public_dict(self) -> Dict[str, Any]:
        return self.model_dump(
            include={
                "x", "k", "v_count", "census_sum", "tail_num", "tail_den",
                "slack_num", "slack_den", "collapsed_holds",
            }
        )


class ImageSplitReport(BaseModel):
    """Totient values in [1, x] split by the omega of their preimages."""

    x: int
    k: int
    low_omega_values: int = Field(..., description="|phi(N_k) cap [1,x]|, omega(n) <= k")
    high_omega_values: int = Field(..., description="|phi(M_k) cap [1,x]|, omega(n) > k")
    multiples_of_2k: int = Field(..., description="floor(x / 2^k)")
    census_sum: int
    high_within_multiples: bool
    low_within_census: bool


class MertensReport(BaseModel):
    """Prime reciprocal sums at one point."""

    x: int
    sum_inv_p: float
    sum_logp_over_p: float
    m_estimate: float
    first_residual: float


class StirlingReport(BaseModel):
    """ln n! against n ln n - n + ln sqrt(n)."""

    n: int
    ln_factorial: float
    main_term: float
    c_estimate: float


class AbelReport(BaseModel):
    """Both sides of a partial summation identity."""

    family: str
    x: float
    mode: Literal["exact", "quadrature"]
    lhs: float
    rhs: float
    discrepancy: float


class ExponentSolution(BaseModel):
    """Root of 1 - c + c ln c = c ln 2 and the resulting exponent."""

    c_star: float
    exponent: float
    residual: float
    iterations: int
    bracket: Tuple[float, float]
    trace: List[float] = Field(default_factory=list)

    @model_validator(mode="after")
    def check_bracket(self) -> "ExponentSolution":
        low, high = self.bracket
        if not (0.0 < low <= self.c_star <= high < 1.0):
            raise ValueError(f"c_star {self.c_star} not inside bracket {self.bracket}")
        return self

    def public_dict(self) -> Dict[str, Any]:
        return self.model_dump(include={"c_star", "exponent", "residual", "iterations"})


class ExponentComparison(BaseModel):
    """The balanced exponent against earlier and limiting exponents."""

    exponent: float
    pillai_exponent: float
    erdos_exponent: float
    improvement_over_pillai: float
    gap_to_erdos: float


class EmpiricalBoundReport(BaseModel):
    """V(x) (ln x)^exponent / x over a grid, with its supremum."""

    exponent: float
    grid: List[int]
    v_counts: List[int]
    ratios: List[float]
    sup_ratio: float
    arg_sup: int

    @model_validator(mode="after")
    def check_sup(self) -> "EmpiricalBoundReport":
        if len(self.grid) != len(self.ratios) or len(self.grid) != len(self.v_counts):
            raise ValueError("grid, v_counts and ratios must have equal length")
        if any(r > self.sup_ratio for r in self.ratios):
            raise ValueError("sup_ratio below a grid ratio")
        return self


class CheckResult(BaseModel):
    """Outcome of one verification check."""

    name: str
    passed: bool
    detail: str = ""


class VerificationReport(BaseModel):
    """Per-check table of the verification suite."""

    x_max: int
    passed: bool
    checks: List[CheckResult]


class RunConfig(BaseModel):
    """One validated command-line invocation."""

    command: Literal[
        "sieve", "vcount", "gaps", "rho", "bound", "constant",
        "mertens", "stirling", "abel", "verify",
    ]
    limit: Optional[int] = Field(None, ge=1)
    x: Optional[int] = Field(None, ge=1)
    n: Optional[int] = Field(None, ge=1)
    abel_x: Optional[float] = Field(None, ge=2.0)
    k: Optional[int] = Field(None, ge=1)
    kmax: Optional[int] = Field(None, ge=1)
    c: Optional[float] = Field(None, gt=0.0, lt=1.0)
    tolerance: float = Field(default=1e-12, ge=1e-14)
    grid: List[int] = Field(default_factory=list)
    x_max: Optional[int] = Field(None, ge=10)
    family: Optional[str] = None
    mode: Literal["exact", "quadrature"] = "exact"
    steps: int = Field(default=64, ge=1)
    records_only: bool = False
    elementary: bool = False
    method: Optional[Literal["vectorized", "linear"]] = None
    cache_path: Optional[str] = None
    output_format: Literal["csv", "json"] = "json"
    output_path: Optional[str] = None
    memory_ceiling: Optional[int] = Field(None, ge=1)
    log_level: Optional[str] = None

    @field_validator("family")
    @classmethod
    def validate_family(cls, v: Optional[str]) -> Optional[str]:
        if v is not None and v not in ABEL_FAMILIES:
            raise ValueError(f"family must be one of {list(ABEL_FAMILIES)}")
        return v

    @field_validator("grid")
    @classmethod
    def validate_grid(cls, v: List[int]) -> List[int]:
        if any(value < 1 for value in v):
            raise ValueError("grid values must be positive")
        return v

    @model_validator(mode="after")
    def check_required(self) -> "RunConfig":
        required = {
            "sieve": ("limit",),
            "vcount": ("x",),
            "gaps": ("x",),
            "rho": ("x",),
            "abel": ("family",),
            "verify": ("x_max",),
        }
        for name in required.get(self.command, ()):
            if getattr(self, name) is None:
                raise ValueError(f"command '{self.command}' requires --{name.replace('_', '-')}")
        if self.command == "bound":
            if (self.x is None) == (not self.grid):
                raise ValueError("command 'bound' takes either --x or --grid")
            if self.grid and any(value < 2 for value in self.grid):
                raise ValueError("--grid values must be at least 2")
            if self.k is not None and self.c is not None:
                raise ValueError("command 'bound' takes at most one of --k and --c")
        if self.command == "mertens" and not self.grid and self.x is None:
            raise ValueError("command 'mertens' needs --x or --grid")
        if self.command == "stirling" and not self.grid and self.n is None:
            raise ValueError("command 'stirling' needs --n or --grid")
        return self
