"""Test configuration and fixtures."""

import os
import tempfile
import shutil
from typing import Generator, Tuple
import pytest

# Set test environment variables before importing app modules
os.environ.pop("TOTIENT_CACHE_DIR", None)
os.environ["MONITORING_LOG_LEVEL"] = "ERROR"  # Reduce log noise in tests
os.environ["IMAGE_WORKERS"] = "2"
os.environ["IMAGE_CHUNK_SIZE"] = "4096"  # small chunks so the thread pool is exercised

from app.config.logging import configure_logging
from app.models.domain import SieveTable, TotientImage
from app.services.sieve import build_sieve
from app.services.totient_image import preimage_limit_for, totient_image_up_to

configure_logging("ERROR", "console")


@pytest.fixture(scope="function")
def temp_cache_dir() -> Generator[str, None, None]:
    """Create a temporary directory for sieve cache files."""
    temp_dir = tempfile.mkdtemp(prefix="totient_test_")
    yield temp_dir
    # Clean up
    if os.path.exists(temp_dir):
        shutil.rmtree(temp_dir, ignore_errors=True)


@pytest.fixture(scope="session")
def small_table() -> SieveTable:
    """Sieve over [1, 10^5] (covers elementary images up to x = 223)."""
    return build_sieve(10**5)


@pytest.fixture(scope="session")
def oracle_table() -> SieveTable:
    """Sieve long enough for the 2x^2 bound at x = 1000."""
    return build_sieve(2 * 1000 * 1000)


@pytest.fixture(scope="session")
def image_10k(oracle_table: SieveTable) -> TotientImage:
    """Totient image over [1, 10^4]."""
    return totient_image_up_to(10**4, oracle_table)


@pytest.fixture(scope="session")
def large_setup() -> Tuple[SieveTable, TotientImage]:
    """Sieve and image at x = 10^6 (slow)."""
    table = build_sieve(preimage_limit_for(10**6))
    return table, totient_image_up_to(10**6, table)
