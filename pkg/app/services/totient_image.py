"""
Totient image enumeration.

V(x) is computed by marking phi(n) for every n up to a certified preimage
bound N(x), i.e. a limit such that phi(n) <= x implies n <= N(x):

- elementary: phi(n) >= sqrt(n / 2) for all n, so N(x) = 2x^2
- refined: for n >= 3, n / phi(n) < e^gamma ln ln n + 3 / ln ln n
  (Rosser-Schoenfeld), so phi(n) <= x forces n < x * B(n) with that B;
  N(x) is the crossing point of n = x * B(n), rounded up, at least 100

Marking is split into chunks handled by a thread pool. Each worker reduces
its chunk to (byte, mask) pairs and the calling thread ORs them into the
packed bitset, so the image never takes more than one bit per value.
"""

import math
import time
from concurrent.futures import ThreadPoolExecutor
from typing import List, Optional, Tuple

import numpy as np
import structlog

from app.config.logging import log_function_call
from app.config.settings import settings
from app.models.domain import GapRecord, SieveTable, TotientImage, popcount
from app.models.exceptions import CompletenessException, ValidationException
from app.services.sieve import build_sieve

logger = structlog.get_logger(__name__)

EULER_GAMMA = 0.57721566490153286
REFINED_FLOOR = 100


def _refined_multiplier(n: float) -> float:
    lnln = math.log(math.log(n))
    return math.exp(EULER_GAMMA) * lnln + 3.0 / lnln


@log_function_call
def preimage_limit_for(x: int, refined: Optional[bool] = None) -> int:
    """Certified N with phi(n) <= x  =>  n <= N."""
    if x < 1:
        raise ValidationException("x must be at least 1", "x", x)
    if refined is None:
        refined = settings.image.refined_preimage_bound
    if not refined:
        return 2 * x * x

    # n - x*B(n) is increasing beyond its single crossing, so iterating
    # n <- x*B(n) from above converges down to it
    n = max(float(REFINED_FLOOR), 10.0 * x)
    for _ in range(200):
        following = x * _refined_multiplier(n)
        if abs(following - n) < 1e-9 * n:
            n = following
            break
        n = following
    bound = max(REFINED_FLOOR, math.ceil(n) + 1)
    while bound > REFINED_FLOOR and bound - 1 >= x * _refined_multiplier(bound - 1):
        bound -= 1
    while bound < x * _refined_multiplier(bound):
        bound += 1
    return bound


def _chunk_masks(phi: np.ndarray, x: int) -> Tuple[np.ndarray, np.ndarray]:
    """(byte index, OR mask) pairs for the values phi(n) <= x in one chunk."""
    values = np.unique(phi[phi <= x])
    if values.size == 0:
        return np.zeros(0, dtype=np.intp), np.zeros(0, dtype=np.uint8)
    index = (values >> 3).astype(np.intp)
    bit = np.left_shift(np.uint8(1), (values & 7).astype(np.uint8))
    starts = np.flatnonzero(np.concatenate(([True], index[1:] != index[:-1])))
    return index[starts], np.bitwise_or.reduceat(bit, starts)


def _membership(table: SieveTable, x: int, limit: int) -> np.ndarray:
    bits = np.zeros((x + 8) // 8, dtype=np.uint8)
    phi = table.phi[1 : limit + 1]
    chunk = max(1, settings.image.chunk_size)
    workers = max(1, settings.image.workers)
    chunks = (phi[start : start + chunk] for start in range(0, phi.size, chunk))
    # workers only read; merging stays on this thread
    if workers == 1 or phi.size <= chunk:
        for part in chunks:
            index, masks = _chunk_masks(part, x)
            bits[index] |= masks
    else:
        with ThreadPoolExecutor(max_workers=workers) as executor:
            for index, masks in executor.map(lambda part: _chunk_masks(part, x), chunks):
                bits[index] |= masks
    return bits


def totient_image_up_to(
    x: int, table: SieveTable, refined: Optional[bool] = None
) -> TotientImage:
    """All values phi(n) in [1, x].

    Raises:
        CompletenessException: table.limit is below the certified preimage bound
    """
    required = preimage_limit_for(x, refined)
    if table.limit < required:
        raise CompletenessException(x, required, table.limit)

    start_time = time.time()
    bits = _membership(table, x, required)
    image = TotientImage(
        x=x,
        bits=bits,
        count=popcount(bits),
        preimage_limit=required,
    )
    logger.info(
        "Totient image built",
        x=x,
        preimage_limit=required,
        v_count=image.count,
        duration_ms=(time.time() - start_time) * 1000,
    )
    return image


def build_image(
    x: int, refined: Optional[bool] = None, memory_ceiling: Optional[int] = None
) -> Tuple[SieveTable, TotientImage]:
    """Build a sieve at the certified bound for x, then the image."""
    table = build_sieve(preimage_limit_for(x, refined), memory_ceiling=memory_ceiling)
    return table, totient_image_up_to(x, table, refined)


def v_count(x: int, table: SieveTable, refined: Optional[bool] = None) -> int:
    """V(x), the number of totient values in [1, x]."""
    return totient_image_up_to(x, table, refined).count


def is_totient(
    m: int, table: SieveTable, refined: Optional[bool] = None
) -> Tuple[bool, Optional[int]]:
    """(True, least n with phi(n) = m) or (False, None)."""
    if m < 1:
        raise ValidationException("m must be at least 1", "m", m)
    required = preimage_limit_for(m, refined)
    if table.limit < required:
        raise CompletenessException(m, required, table.limit)
    hits = np.flatnonzero(table.phi[1 : required + 1] == m)
    if hits.size == 0:
        return False, None
    return True, int(hits[0]) + 1


def _gap_arrays(image: TotientImage) -> Tuple[np.ndarray, np.ndarray]:
    values = image.values()
    return values[:-1], np.diff(values)


def gaps(image: TotientImage) -> List[GapRecord]:
    """One record per pair of consecutive members."""
    lower, size = _gap_arrays(image)
    return [
        GapRecord(lower=low, upper=low + gap, gap=gap)
        for low, gap in zip(lower.tolist(), size.tolist())
    ]


def record_gaps(image: TotientImage) -> List[GapRecord]:
    """Gaps strictly larger than every gap below them."""
    lower, size = _gap_arrays(image)
    if size.size == 0:
        return []
    previous_max = np.concatenate(([0], np.maximum.accumulate(size)[:-1]))
    records = np.flatnonzero(size > previous_max)
    return [
        GapRecord(lower=int(lower[i]), upper=int(lower[i] + size[i]), gap=int(size[i]))
        for i in records.tolist()
    ]


def nontotients(image: TotientImage, even_only: bool = True) -> np.ndarray:
    """Values in [1, x] outside the image (even ones only by default)."""
    candidates = np.arange(1, image.x + 1, dtype=np.int64)
    missing = np.setdiff1d(candidates, image.values(), assume_unique=True)
    if even_only:
        missing = missing[missing % 2 == 0]
    return missing
