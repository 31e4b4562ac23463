"""
Sieve cache files and sieve provisioning.

File layout (all integers little-endian):

    header   4 bytes  ASCII magic "TATL"
             1 byte   format version (1)
             8 bytes  limit N
    body     spf[1..N], phi[1..N]  unsigned, 4 bytes each if N < 2^32 else 8
             mobius[1..N]          signed bytes
             omega[1..N]           unsigned bytes
    trailer  8 bytes  checksum of the body

The checksum is BLAKE2b with an 8-byte digest over the body bytes, stored as
the digest bytes (equivalently, the digest read as a little-endian integer).
"""

import hashlib
import os
import struct
import tempfile
import time
from pathlib import Path
from typing import BinaryIO, Optional, Union

import numpy as np

from app.config.logging import LoggingMixin
from app.config.settings import settings
from app.models.domain import SieveTable
from app.models.exceptions import CacheCorruptionException, ResourceLimitException
from app.services.sieve import build_sieve, entry_width, stored_bytes

MAGIC = b"TATL"
FORMAT_VERSION = 1
HEADER = struct.Struct("<4sBQ")
CHECKSUM_BYTES = 8


def _body_dtypes(limit: int) -> tuple:
    wide = "<u4" if entry_width(limit) == 4 else "<u8"
    return (wide, wide, "<i1", "<u1")


def _new_checksum() -> "hashlib._Hash":
    return hashlib.blake2b(digest_size=CHECKSUM_BYTES)


class SieveCache(LoggingMixin):
    """Reads and writes sieve tables in the TATL cache format."""

    def save(self, table: SieveTable, path: Union[str, Path]) -> Path:
        """Write the table atomically (temporary file, then rename)."""
        path = Path(path)
        path.parent.mkdir(parents=True, exist_ok=True)
        start_time = time.time()
        checksum = _new_checksum()

        fd, temp_name = tempfile.mkstemp(dir=path.parent, prefix=f".{path.name}.")
        try:
            with os.fdopen(fd, "wb") as fh:
                fh.write(HEADER.pack(MAGIC, FORMAT_VERSION, table.limit))
                arrays = (table.spf, table.phi, table.mobius, table.omega)
                for array, dtype in zip(arrays, _body_dtypes(table.limit)):
                    chunk = np.ascontiguousarray(array[1:], dtype=dtype).view(np.uint8)
                    checksum.update(chunk)
                    fh.write(chunk)
                fh.write(checksum.digest())
            os.replace(temp_name, path)
        except BaseException:
            if os.path.exists(temp_name):
                os.unlink(temp_name)
            raise

        self.log_info(
            "Sieve cache saved",
            path=str(path),
            limit=table.limit,
            duration_ms=(time.time() - start_time) * 1000,
        )
        return path

    def load(self, path: Union[str, Path]) -> SieveTable:
        """Read and verify a cache file.

        Raises:
            CacheCorruptionException: wrong magic, version, size or checksum
        """
        path = Path(path)
        start_time = time.time()

        with path.open("rb") as fh:
            limit = self._read_header(fh, path)
            dtypes = _body_dtypes(limit)
            expected = HEADER.size + limit * sum(np.dtype(d).itemsize for d in dtypes) + CHECKSUM_BYTES
            actual = os.fstat(fh.fileno()).st_size
            if actual != expected:
                raise self._reject(path, f"size {actual} bytes, expected {expected}")

            checksum = _new_checksum()
            arrays = []
            for dtype in dtypes:
                array = np.zeros(limit + 1, dtype=dtype)
                raw = array[1:].view(np.uint8)
                if fh.readinto(raw) != raw.nbytes:
                    raise self._reject(path, "truncated body")
                checksum.update(raw)
                arrays.append(array)

            if fh.read(CHECKSUM_BYTES) != checksum.digest():
                raise self._reject(path, "checksum mismatch")

        spf, phi, mobius, omega = arrays
        table = SieveTable(limit=limit, spf=spf, phi=phi, mobius=mobius, omega=omega)
        self.log_info(
            "Sieve cache loaded",
            path=str(path),
            limit=limit,
            duration_ms=(time.time() - start_time) * 1000,
        )
        return table

    def read_limit(self, path: Union[str, Path]) -> int:
        """The table limit recorded in a cache file header, without reading the body."""
        path = Path(path)
        with path.open("rb") as fh:
            return self._read_header(fh, path)

    def _read_header(self, fh: BinaryIO, path: Path) -> int:
        header = fh.read(HEADER.size)
        if len(header) != HEADER.size:
            raise self._reject(path, "truncated header")
        magic, version, limit = HEADER.unpack(header)
        if magic != MAGIC:
            raise self._reject(path, f"bad magic {magic!r}")
        if version != FORMAT_VERSION:
            raise self._reject(path, f"unsupported version {version}")
        if limit < 1:
            raise self._reject(path, f"invalid limit {limit}")
        return limit

    def _reject(self, path: Path, reason: str) -> CacheCorruptionException:
        self.log_error("Sieve cache rejected", path=str(path), reason=reason)
        return CacheCorruptionException(str(path), reason)


class SieveProvider(LoggingMixin):
    """Hands out sieve tables, going through the cache when one is configured."""

    def __init__(self, cache: Optional[SieveCache] = None, memory_ceiling: Optional[int] = None):
        super().__init__()
        self.cache = cache or SieveCache()
        self.memory_ceiling = memory_ceiling

    @property
    def ceiling(self) -> int:
        if self.memory_ceiling is None:
            return settings.sieve.memory_ceiling_bytes
        return self.memory_ceiling

    def resolve_path(self, cache_path: Optional[Union[str, Path]], limit: int) -> Optional[Path]:
        """Explicit path, else `<TOTIENT_CACHE_DIR>/sieve-<limit>.tatl`, else None."""
        if cache_path:
            return Path(cache_path)
        if settings.cache.dir:
            return Path(settings.cache.dir) / f"sieve-{limit}.tatl"
        return None

    def obtain(
        self,
        limit: int,
        cache_path: Optional[Union[str, Path]] = None,
        method: Optional[str] = None,
    ) -> SieveTable:
        """A table with table.limit >= limit.

        A valid cache at least as long as `limit` is reused; a shorter one is
        rebuilt and overwritten. A corrupt cache raises and is left untouched,
        and so does one too large to load under the memory ceiling.
        """
        path = self.resolve_path(cache_path, limit)
        if path is not None and path.exists():
            cached = self.cache.read_limit(path)
            ceiling = self.ceiling
            if stored_bytes(cached) > ceiling:
                raise ResourceLimitException(cached, stored_bytes(cached), ceiling)
            table = self.cache.load(path)
            if table.limit >= limit:
                return table
            self.log_info("Sieve cache too short, rebuilding", path=str(path), cached=table.limit, limit=limit)

        table = build_sieve(limit, method=method, memory_ceiling=self.memory_ceiling)
        if path is not None:
            self.cache.save(table, path)
        return table
