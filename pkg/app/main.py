"""
Command-line entry point.

    totient-gaps sieve --limit 1000000 --cache sieve.tatl
    totient-gaps vcount --x 1000
    totient-gaps gaps --x 1000000 --records-only --format csv
    totient-gaps rho --x 100000
    totient-gaps bound --x 100000 --k 3
    totient-gaps bound --grid 100 --grid 1000 --grid 10000
    totient-gaps constant --tol 1e-12
    totient-gaps mertens --grid 1000 --grid 1000000
    totient-gaps stirling --n 1000000
    totient-gaps abel --family log-factorial --x 100
    totient-gaps verify --x-max 100000

Exit status: 0 success, 1 computation or resource error (or a failed
verify), 2 usage error, 3 corrupt cache file.
"""

import sys
from typing import Any, Callable, Dict, List, Optional, Sequence, Tuple

import click
from pydantic import ValidationError

from app import __version__
from app.config.logging import configure_logging, get_logger
from app.config.settings import settings
from app.models.exceptions import CacheCorruptionException, ToolkitException
from app.models.schemas import ABEL_FAMILIES, RunConfig
from app.services import analytic
from app.services import bound_optimizer as optimizer
from app.services import omega_census as census
from app.services.report_writer import ReportWriter
from app.services.sieve import bytes_per_entry, table_bytes
from app.services.sieve_cache import SieveProvider
from app.services.totient_image import (
    gaps,
    preimage_limit_for,
    record_gaps,
    totient_image_up_to,
)
from app.services.verification_service import VerificationService

logger = get_logger(__name__)

EXIT_OK = 0
EXIT_FAILURE = 1
EXIT_USAGE = 2
EXIT_CACHE_CORRUPTED = 3

BOUND_SWEEP = range(1, 26)

# RunConfig field -> command-line flag
FLAG_NAMES = {
    "tolerance": "--tol",
    "output_format": "--format",
    "output_path": "--output",
    "cache_path": "--cache",
    "abel_x": "--x",
}

Report = Tuple[Any, Sequence[str], List[Dict[str, Any]], bool]


def _flag(field: str) -> str:
    return FLAG_NAMES.get(field, "--" + field.replace("_", "-"))


def _config(command: str, **values: Any) -> RunConfig:
    values = {k: v for k, v in values.items() if v is not None}
    if "grid" in values:
        values["grid"] = list(values["grid"])
    try:
        return RunConfig(command=command, **values)
    except ValidationError as e:
        error = e.errors()[0]
        location = [str(part) for part in error.get("loc", ()) if isinstance(part, str)]
        prefix = f"{_flag(location[0])}: " if location else ""
        raise click.UsageError(prefix + error["msg"], ctx=click.get_current_context(silent=True))


def common_options(func: Callable) -> Callable:
    """Output, cache and logging options shared by every subcommand."""
    options = [
        click.option("--format", "output_format", type=click.Choice(["csv", "json"]),
                     default="json", show_default=True, help="Report format"),
        click.option("--output", "output_path", type=click.Path(dir_okay=False),
                     help="Write the report here instead of standard output"),
        click.option("--cache", "cache_path", type=click.Path(dir_okay=False),
                     help="Sieve cache file (default: $TOTIENT_CACHE_DIR/sieve-<limit>.tatl)"),
        click.option("--method", type=click.Choice(["vectorized", "linear"]),
                     help="Sieve construction method"),
        click.option("--memory-ceiling", type=click.IntRange(min=1),
                     help="Largest sieve footprint in bytes"),
        click.option("--log-level",
                     type=click.Choice(["DEBUG", "INFO", "WARNING", "ERROR"], case_sensitive=False),
                     help="Diagnostics level (logs go to standard error)"),
    ]
    for option in reversed(options):
        func = option(func)
    return func


@click.group(name="totient-gaps")
@click.version_option(version=__version__, prog_name="totient-gaps")
def cli() -> None:
    """Exact verification toolkit for the density and gaps of Euler's totient image."""


@cli.command()
@click.option("--limit", type=click.IntRange(min=1), required=True, help="Sieve over [1, limit]")
@common_options
def sieve(**options: Any) -> RunConfig:
    """Build (or load) the spf/phi/mobius/omega table."""
    return _config("sieve", **options)


@cli.command()
@click.option("--x", type=click.IntRange(min=1), required=True)
@click.option("--elementary", is_flag=True, help="Use the 2x^2 preimage bound")
@common_options
def vcount(**options: Any) -> RunConfig:
    """Count totient values in [1, x]."""
    return _config("vcount", **options)


@cli.command(name="gaps")
@click.option("--x", type=click.IntRange(min=1), required=True)
@click.option("--records-only", is_flag=True, help="Only gaps larger than all earlier ones")
@click.option("--elementary", is_flag=True, help="Use the 2x^2 preimage bound")
@common_options
def gaps_command(**options: Any) -> RunConfig:
    """Gaps between consecutive totient values in [1, x]."""
    return _config("gaps", **options)


@cli.command()
@click.option("--x", type=click.IntRange(min=1), required=True)
@click.option("--kmax", type=click.IntRange(min=1), help="Largest k (default floor(log2 x))")
@common_options
def rho(**options: Any) -> RunConfig:
    """Census of n <= x by number of distinct prime factors."""
    return _config("rho", **options)


@cli.command()
@click.option("--x", type=click.IntRange(min=1), help="Single point for the exact census bound")
@click.option("--k", type=click.IntRange(min=1), help="Census depth (default: sweep 1..25)")
@click.option("--c", type=click.FloatRange(min=0.0, max=1.0, min_open=True, max_open=True),
              help="Choose k = ceil(c ln ln x) instead of --k")
@click.option("--grid", type=click.IntRange(min=2), multiple=True,
              help="Grid point for the empirical bound (repeatable)")
@click.option("--elementary", is_flag=True, help="Use the 2x^2 preimage bound")
@common_options
def bound(**options: Any) -> RunConfig:
    """Exact census bound at one x, or the empirical bound over a grid."""
    return _config("bound", **options)


@cli.command()
@click.option("--tol", "tolerance", type=click.FloatRange(min=1e-14), default=1e-12,
              show_default=True, help="Residual tolerance for g(c*)")
@common_options
def constant(**options: Any) -> RunConfig:
    """Solve 1 - c + c ln c = c ln 2 for c*."""
    return _config("constant", **options)


@cli.command()
@click.option("--x", type=click.IntRange(min=1))
@click.option("--grid", type=click.IntRange(min=1), multiple=True, help="Repeatable")
@common_options
def mertens(**options: Any) -> RunConfig:
    """Prime reciprocal sums and their Mertens residuals."""
    return _config("mertens", **options)


@cli.command()
@click.option("--n", type=click.IntRange(min=1))
@click.option("--grid", type=click.IntRange(min=1), multiple=True, help="Repeatable")
@common_options
def stirling(**options: Any) -> RunConfig:
    """ln n! against n ln n - n + ln sqrt(n)."""
    return _config("stirling", **options)


@cli.command()
@click.option("--family", type=click.Choice(list(ABEL_FAMILIES)), required=True)
@click.option("--x", "abel_x", type=click.FloatRange(min=2.0), help="Evaluation endpoint")
@click.option("--mode", type=click.Choice(["exact", "quadrature"]), default="exact", show_default=True)
@click.option("--steps", type=click.IntRange(min=1), default=64, show_default=True,
              help="Quadrature panels per segment")
@common_options
def abel(**options: Any) -> RunConfig:
    """Check a partial summation identity on a named family."""
    return _config("abel", **options)


@cli.command()
@click.option("--x-max", type=click.IntRange(min=10), required=True)
@common_options
def verify(**options: Any) -> RunConfig:
    """Run every property check at scale x-max."""
    return _config("verify", **options)


def parse_args(argv: Sequence[str]) -> RunConfig:
    """Parse argv into a RunConfig.

    Raises:
        click.UsageError: unknown command or flag, or an invalid value
        click.exceptions.Exit: --help or --version was handled
    """
    result = cli.main(args=list(argv), prog_name="totient-gaps", standalone_mode=False)
    if not isinstance(result, RunConfig):
        raise click.exceptions.Exit(result or 0)
    return result


# Command handlers: each returns (json payload, csv columns, csv rows, passed)


def _refined(config: RunConfig) -> bool:
    return not config.elementary


def _image_table(config: RunConfig, provider: SieveProvider, x: int):
    required = preimage_limit_for(x, _refined(config))
    return provider.obtain(required, config.cache_path, config.method)


def _sieve(config: RunConfig, provider: SieveProvider) -> Report:
    table = provider.obtain(config.limit, config.cache_path, config.method)
    payload = {
        "limit": config.limit,
        "method": config.method or settings.sieve.method,
        "bytes_per_entry": bytes_per_entry(config.limit, config.method),
        "table_bytes": table_bytes(config.limit, config.method),
        "prime_count": analytic.prime_pi(config.limit, table),
    }
    return payload, list(payload), [payload], True


def _vcount(config: RunConfig, provider: SieveProvider) -> Report:
    table = _image_table(config, provider, config.x)
    image = totient_image_up_to(config.x, table, _refined(config))
    payload = {"x": config.x, "v_count": image.count, "preimage_limit": image.preimage_limit}
    return payload, list(payload), [payload], True


def _gaps(config: RunConfig, provider: SieveProvider) -> Report:
    table = _image_table(config, provider, config.x)
    image = totient_image_up_to(config.x, table, _refined(config))
    records = record_gaps(image) if config.records_only else gaps(image)
    rows = [r.to_dict() for r in records]
    payload = {
        "x": config.x,
        "v_count": image.count,
        "preimage_limit": image.preimage_limit,
        "records": rows,
    }
    return payload, ["lower", "upper", "gap"], rows, True


def _rho(config: RunConfig, provider: SieveProvider) -> Report:
    table = provider.obtain(config.x, config.cache_path, config.method)
    counts = census.rho_table(config.x, config.kmax or census.full_kmax(config.x), table)
    rows = [{"x": config.x, "k": k, "rho_k": counts.rho(k)} for k in range(1, counts.kmax + 1)]
    payload = {
        "x": config.x,
        "kmax": counts.kmax,
        "total": counts.total,
        "rho": [{"k": row["k"], "rho_k": row["rho_k"]} for row in rows],
    }
    return payload, ["x", "k", "rho_k"], rows, True


BOUND_COLUMNS = [
    "x", "k", "v_count", "census_sum", "tail_num", "tail_den",
    "slack_num", "slack_den", "collapsed_holds",
]


def _bound(config: RunConfig, provider: SieveProvider) -> Report:
    if config.grid:
        table = _image_table(config, provider, max(config.grid))
        report = optimizer.empirical_bound(config.grid, table, refined=_refined(config))
        rows = [
            {"x": x, "v_count": v, "ratio": r}
            for x, v, r in zip(report.grid, report.v_counts, report.ratios)
        ]
        payload = {
            "exponent": report.exponent,
            "sup_ratio": report.sup_ratio,
            "arg_sup": report.arg_sup,
            "rows": rows,
        }
        return payload, ["x", "v_count", "ratio"], rows, True

    table = _image_table(config, provider, config.x)
    image = totient_image_up_to(config.x, table, _refined(config))
    if config.k is not None:
        ks: Sequence[int] = [config.k]
    elif config.c is not None:
        ks = [optimizer.k_of_x(config.x, config.c)]
    else:
        ks = BOUND_SWEEP
    reports = [census.bound_chain(config.x, k, table, image) for k in ks]
    rows = [r.public_dict() for r in reports]
    payload: Any = rows[0] if len(rows) == 1 else rows
    return payload, BOUND_COLUMNS, rows, all(r.slack >= 0 for r in reports)


def _constant(config: RunConfig, provider: SieveProvider) -> Report:
    solution = optimizer.solve_cstar(config.tolerance)
    payload = solution.public_dict()
    columns = ["c_star", "exponent", "residual", "iterations"]
    return payload, columns, [payload], True


def _mertens(config: RunConfig, provider: SieveProvider) -> Report:
    xs = list(config.grid) or [config.x]
    table = provider.obtain(max(xs), config.cache_path, config.method)
    rows = [r.model_dump() for r in analytic.mertens_grid(xs, table)]
    columns = ["x", "sum_inv_p", "sum_logp_over_p", "m_estimate", "first_residual"]
    return rows, columns, rows, True


def _stirling(config: RunConfig, provider: SieveProvider) -> Report:
    ns = list(config.grid) or [config.n]
    rows = [r.model_dump() for r in analytic.stirling_grid(ns)]
    columns = ["n", "ln_factorial", "main_term", "c_estimate"]
    return rows, columns, rows, True


def _abel(config: RunConfig, provider: SieveProvider) -> Report:
    x = config.abel_x if config.abel_x is not None else analytic.DEFAULT_ABEL_X[config.family]
    table = None
    if config.family.startswith("prime-"):
        table = provider.obtain(int(x), config.cache_path, config.method)
    report = analytic.abel_report(config.family, x, table, config.mode, config.steps)
    payload = report.model_dump()
    return payload, list(payload), [payload], True


def _verify(config: RunConfig, provider: SieveProvider) -> Report:
    report = VerificationService(provider).run(config.x_max, config.cache_path, config.method)
    rows = [check.model_dump() for check in report.checks]
    return report.model_dump(), ["name", "passed", "detail"], rows, report.passed


HANDLERS: Dict[str, Callable[[RunConfig, SieveProvider], Report]] = {
    "sieve": _sieve,
    "vcount": _vcount,
    "gaps": _gaps,
    "rho": _rho,
    "bound": _bound,
    "constant": _constant,
    "mertens": _mertens,
    "stirling": _stirling,
    "abel": _abel,
    "verify": _verify,
}


def run(config: RunConfig) -> int:
    """Execute one command and write its report; returns the exit status."""
    provider = SieveProvider(memory_ceiling=config.memory_ceiling)
    writer = ReportWriter(config.output_format, config.output_path)
    try:
        payload, columns, rows, passed = HANDLERS[config.command](config, provider)
        writer.write(payload, columns, rows, stream=sys.stdout)
    except CacheCorruptionException as e:
        logger.error("Cache corrupted", error_code=e.error_code, details=e.details)
        click.echo(f"Error: {e.message}", err=True)
        return EXIT_CACHE_CORRUPTED
    except ToolkitException as e:
        logger.error("Command failed", command=config.command, error_code=e.error_code, details=e.details)
        click.echo(f"Error: {e.message}", err=True)
        return EXIT_FAILURE
    except MemoryError:
        logger.error("Out of memory", command=config.command)
        click.echo("Error: out of memory", err=True)
        return EXIT_FAILURE
    return EXIT_OK if passed else EXIT_FAILURE


def main(argv: Optional[Sequence[str]] = None) -> int:
    argv = sys.argv[1:] if argv is None else argv
    try:
        config = parse_args(argv)
    except click.exceptions.Exit as e:
        return e.exit_code
    except click.exceptions.Abort:
        click.echo("Aborted!", err=True)
        return EXIT_FAILURE
    except click.ClickException as e:
        e.show()
        return e.exit_code

    configure_logging(config.log_level or settings.monitoring.log_level, settings.monitoring.log_format)
    return run(config)


if __name__ == "__main__":
    sys.exit(main())
