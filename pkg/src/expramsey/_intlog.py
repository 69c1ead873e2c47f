"""Exact and certified-interval base-2 logarithms on Python integers.

Everything here is integer arithmetic; no binary floating point enters any
certified path. Dyadic bounds are represented as scaled integers: the pair
``(lo, hi)`` at precision ``prec`` encloses a real x when
``lo <= x * 2**prec <= hi``.

Facts this module relies on (each is load-bearing and tested):

- The iterated-log thresholds are the tower numbers t_0 = 1, t_1 = 2,
  t_{j+1} = 2**t_j; the least-k test ``log2^(k)(x) <= 1`` ties exactly when x
  is one of them, and those are powers of two, detected by bit inspection.
- For an integer n >= 2: if n = 2**e then log_star(n) = 1 + log_star(e).
  Otherwise n has k+1 bits with k < log2(n) < k+1 and no tower number lies
  strictly inside (k, k+1) while any tower equal to k+1 still yields the same
  count, hence log_star(n) = 1 + log_star(bit_length(n)).
- log2 of a non-power-of-two integer is irrational, so certified comparisons
  against integers terminate at finite precision.
"""

from __future__ import annotations

from functools import lru_cache
from typing import Optional, Tuple

from .errors import UncertifiableComparison

# towers of 2: t_5 = 2**65536 is an 8 KiB integer, cheap to keep around;
# t_6 onward are handled by logarithmic descent instead of materialization
TOWERS = [1, 2, 4, 16, 65536, 2**65536]

PREC_SCHEDULE = (16, 32, 64, 128, 256, 512, 1024, 2048, 4096)


def log_star_int(n: int) -> int:
    """Exact iterated-log count: least k with log2^(k)(n) <= 1."""
    if n < 1:
        raise ValueError("log_star is defined for positive integers")
    k = 0
    while n > 1:
        bl = n.bit_length()
        n = bl - 1 if n & (n - 1) == 0 else bl
        k += 1
    return k


@lru_cache(maxsize=1 << 16)
def log2_scaled_bounds(n: int, prec: int) -> Tuple[int, int]:
    """Certified dyadic bounds on log2(n).

    Returns (lo, hi) with lo <= 2**prec * log2(n) <= hi. Exact (lo == hi) for
    powers of two; otherwise hi - lo is a few units, except when the interval
    squaring hits an undecided bit early, in which case the gap is larger and
    the caller should retry at higher precision.
    """
    if n < 1:
        raise ValueError("log2 of a non-positive integer")
    k = n.bit_length() - 1
    if n & (n - 1) == 0:
        return (k << prec, k << prec)
    wp = prec + 8
    # mantissa interval [mlo, mhi] / 2**wp enclosing n / 2**k, inside [1, 2)
    if k <= wp:
        mlo = mhi = n << (wp - k)
    else:
        mlo = n >> (k - wp)
        mhi = mlo + 1
    acc = 0
    frac_lo = frac_hi = None
    for i in range(prec):
        mlo *= mlo
        mhi *= mhi
        # mantissas are now scaled by 2**(2*wp); "value >= 2" means >= thresh
        thresh = 1 << (2 * wp + 1)
        if mlo >= thresh:
            bit = 1
            mlo >>= wp + 1
            mhi = (mhi >> (wp + 1)) + 1
        elif mhi < thresh:
            bit = 0
            mlo >>= wp
            mhi = (mhi >> wp) + 1
        else:
            # enclosure straddles 2: the remaining bits are undecided
            rem = prec - i
            frac_lo = acc << rem
            frac_hi = (acc + 1) << rem
            break
        acc = (acc << 1) | bit
    else:
        frac_lo = acc
        frac_hi = acc + 1
    return ((k << prec) + frac_lo, (k << prec) + frac_hi)


_tower_shift_cache: dict = {}


def _towers_scaled(prec: int):
    got = _tower_shift_cache.get(prec)
    if got is None:
        got = [t << prec for t in TOWERS]
        _tower_shift_cache[prec] = got
    return got


def log_star_of_scaled(x: int, prec: int) -> int:
    """log_star of the exact rational x / 2**prec (x >= 1)."""
    if x < 1:
        raise ValueError("log_star of a non-positive value")
    ts = _towers_scaled(prec)
    if x <= ts[0]:
        return 0
    for j in range(1, 6):
        if x <= ts[j]:
            return j
    # value v > t_5: log_star(v) = 1 + log_star(log2 v); log2 v lies between
    # the integers bl-1-prec and bl-prec and the power-of-two tie is exact
    bl = x.bit_length()
    if x & (x - 1) == 0:
        return 1 + log_star_int(bl - 1 - prec)
    return 1 + log_star_int(bl - prec)


def log_star_scaled(lo: int, hi: int, prec: int) -> Optional[int]:
    """log_star of a real enclosed by [lo, hi]/2**prec, or None if uncertified.

    Sound for any enclosure: log_star is monotone, so equal endpoint counts
    pin the value. Exact enclosures (lo == hi) always certify.
    """
    jlo = log_star_of_scaled(lo, prec)
    if lo == hi:
        return jlo
    jhi = log_star_of_scaled(hi, prec)
    return jlo if jlo == jhi else None


def _log2_interval_step(lo: int, hi: int, prec: int) -> Tuple[int, int]:
    """One certified log2 of an enclosure with lo > 2**prec (value > 1)."""
    llo, _ = log2_scaled_bounds(lo, prec)
    _, lhi = log2_scaled_bounds(hi, prec)
    shift = prec << prec
    return llo - shift, lhi - shift


def iter_log_le(a: int, r: int, b: int, max_prec: int = PREC_SCHEDULE[-1]) -> bool:
    """Certified decision of log2^(r)(a) <= b for integers a >= 1, b >= 1.

    Walks the exact power-of-two track as far as it goes (ties live there and
    only there), then switches to interval iteration; the remaining value is
    irrational so widening always terminates.
    """
    if r < 0:
        raise ValueError("r must be non-negative")
    cur = a
    steps = 0
    while steps < r:
        if cur <= 1:
            # the next log is <= 0 and everything after stays below 1 <= b
            return True
        if cur & (cur - 1) == 0:
            cur = cur.bit_length() - 1
            steps += 1
            continue
        break
    if steps == r:
        return cur <= b
    rem = r - steps
    for prec in PREC_SCHEDULE:
        if prec > max_prec:
            break
        one = 1 << prec
        lo, hi = log2_scaled_bounds(cur, prec)
        undecided = False
        for _ in range(rem - 1):
            if hi <= one:
                return True  # value certainly <= 1, later logs only shrink
            if lo <= one:
                undecided = True  # enclosure straddles 1, refine
                break
            lo, hi = _log2_interval_step(lo, hi, prec)
        if undecided:
            continue
        if hi <= b << prec:
            return True
        if lo > b << prec:
            return False
    raise UncertifiableComparison(
        f"iterated log comparison undecided at precision {max_prec}"
    )
