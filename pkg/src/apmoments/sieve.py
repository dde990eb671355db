"""Segmented prime sieve, progression filtering, and factorization support.

All operations are deterministic and pure given their inputs.  Prime
arrays returned here are read-only numpy views; a module-level cache
memoizes the largest sieved range so repeated sums over the same limit
do not pay for sieving twice.
"""

from __future__ import annotations

import math
import threading
from dataclasses import dataclass
from typing import Iterator

import numpy as np

from .config import PRIME_CACHE_MAX, PRIME_CHUNK, SIEVE_BLOCK, SIEVE_CEILING


class SegmentSizeError(ValueError):
    """Raised when a requested sieve segment size is outside the memory budget."""


@dataclass(frozen=True)
class Progression:
    """Arithmetic progression residue, residue+modulus, ... meeting [1, n].

    modulus=1, residue=0 denotes the full natural series.  For modulus > 1
    the residue must be coprime to the modulus, which also means no prime
    dividing the modulus can ever appear in a filtered prime range.
    """

    modulus: int = 1
    residue: int = 0

    def __post_init__(self) -> None:
        if self.modulus < 1:
            raise ValueError(f"modulus must be >= 1, got {self.modulus}")
        if not 0 <= self.residue < self.modulus:
            raise ValueError(
                f"residue must lie in [0, {self.modulus}), got {self.residue}"
            )
        if self.modulus > 1 and math.gcd(self.modulus, self.residue) != 1:
            raise ValueError(
                f"residue {self.residue} not coprime to modulus {self.modulus}"
            )

    @property
    def is_full(self) -> bool:
        return self.modulus == 1

    @property
    def first_member(self) -> int:
        return self.residue if self.residue >= 1 else 1

    def count(self, n: int) -> int:
        """Number of members m with 1 <= m <= n."""
        if n < self.first_member:
            return 0
        return (n - self.first_member) // self.modulus + 1

    def members(self, n: int) -> np.ndarray:
        """All members up to n as an int64 array (desk-scale use only)."""
        return np.arange(self.first_member, n + 1, self.modulus, dtype=np.int64)


@dataclass(frozen=True)
class PrimeRange:
    """Ascending primes up to `limit`, optionally filtered to a progression."""

    limit: int
    primes: np.ndarray
    progression: Progression | None = None

    def __len__(self) -> int:
        return int(self.primes.size)


def primes_upto_monolithic(limit: int) -> np.ndarray:
    """Plain one-array Eratosthenes sieve.

    Used for base primes inside the segmented sieve and as an independent
    cross-check implementation in tests.  Fine up to ~10^7.
    """
    if limit < 2:
        return np.empty(0, dtype=np.int64)
    flags = np.ones(limit + 1, dtype=bool)
    flags[:2] = False
    for p in range(2, math.isqrt(limit) + 1):
        if flags[p]:
            flags[p * p :: p] = False
    return np.flatnonzero(flags).astype(np.int64)


def _validate_limit(limit: int) -> None:
    if limit < 2:
        raise ValueError(f"sieve limit must be >= 2, got {limit}")
    if limit > SIEVE_CEILING:
        raise ValueError(f"sieve limit {limit} exceeds ceiling {SIEVE_CEILING}")


def _validate_block(block_size: int) -> None:
    # Segments below 2^10 thrash on base-prime setup; above 2^26 a single
    # odd-flag buffer exceeds the intended working-set budget.
    if not (1 << 10) <= block_size <= (1 << 26):
        raise SegmentSizeError(
            f"segment size {block_size} outside supported range [2^10, 2^26]"
        )


def _sieve_segments(limit: int, block_size: int) -> Iterator[np.ndarray]:
    """Yield ascending int64 prime arrays covering [2, limit] block by block."""
    base = primes_upto_monolithic(math.isqrt(limit))
    base_odd = [int(p) for p in base if p > 2]
    lo = 2
    while lo <= limit:
        hi = min(lo + block_size, limit + 1)  # half-open [lo, hi)
        o0 = lo | 1
        if o0 >= hi:
            if lo <= 2 < hi:
                yield np.array([2], dtype=np.int64)
            lo = hi
            continue
        flags = np.ones((hi - o0 + 1) // 2, dtype=bool)
        for p in base_odd:
            if p * p >= hi:
                break
            start = max(p * p, ((lo + p - 1) // p) * p)
            if start % 2 == 0:
                start += p
            if start >= hi:
                continue
            flags[(start - o0) >> 1 :: p] = False
        odds = o0 + 2 * np.flatnonzero(flags).astype(np.int64)
        if lo <= 2 < hi:
            yield np.concatenate((np.array([2], dtype=np.int64), odds))
        else:
            yield odds
        lo = hi


class _PrimeCache:
    """Memoizes the largest sieved prime array up to PRIME_CACHE_MAX."""

    def __init__(self) -> None:
        self._lock = threading.Lock()
        self._limit = 0
        self._primes = np.empty(0, dtype=np.int64)

    def primes_upto(self, limit: int) -> np.ndarray:
        with self._lock:
            if limit <= self._limit:
                cut = np.searchsorted(self._primes, limit, side="right")
                return self._primes[:cut]
        blocks = list(_sieve_segments(limit, SIEVE_BLOCK))
        arr = np.concatenate(blocks) if blocks else np.empty(0, dtype=np.int64)
        arr.flags.writeable = False
        if limit <= PRIME_CACHE_MAX:
            with self._lock:
                if limit > self._limit:
                    self._limit = limit
                    self._primes = arr
        return arr


_cache = _PrimeCache()


def sieve_primes(limit: int, block_size: int | None = None) -> PrimeRange:
    """All primes <= limit as one ascending array.

    Materializes the full list; for limits past the cache budget prefer
    :func:`iter_prime_blocks`.
    """
    _validate_limit(limit)
    if block_size is not None:
        _validate_block(block_size)
        blocks = list(_sieve_segments(limit, block_size))
        arr = np.concatenate(blocks) if blocks else np.empty(0, dtype=np.int64)
        return PrimeRange(limit, arr)
    return PrimeRange(limit, _cache.primes_upto(limit))


def primes_in_progression(
    limit: int, progression: Progression, block_size: int | None = None
) -> PrimeRange:
    """Primes p <= limit with p in the progression's residue class."""
    full = sieve_primes(limit, block_size)
    if progression.is_full:
        return PrimeRange(limit, full.primes, progression)
    mask = full.primes % progression.modulus == progression.residue
    return PrimeRange(limit, full.primes[mask], progression)


def iter_prime_blocks(
    limit: int,
    progression: Progression | None = None,
    block_size: int | None = None,
) -> Iterator[np.ndarray]:
    """Stream primes <= limit in ascending blocks, optionally filtered.

    Serves chunks from the cache when the limit fits the cache budget;
    otherwise sieves segment by segment so memory stays bounded.
    """
    _validate_limit(limit)
    bs = SIEVE_BLOCK if block_size is None else block_size
    _validate_block(bs)

    def _filtered(block: np.ndarray) -> np.ndarray:
        if progression is None or progression.is_full:
            return block
        return block[block % progression.modulus == progression.residue]

    if limit <= PRIME_CACHE_MAX and block_size is None:
        arr = _cache.primes_upto(limit)
        for i in range(0, arr.size, PRIME_CHUNK):
            blk = _filtered(arr[i : i + PRIME_CHUNK])
            if blk.size:
                yield blk
    else:
        for raw in _sieve_segments(limit, bs):
            blk = _filtered(raw)
            if blk.size:
                yield blk


# ---------------------------------------------------------------------------
# Smallest-prime-factor blocks and factorization


@dataclass(frozen=True)
class SpfBlock:
    """Smallest prime factor for every integer in [start, end).

    spf[i] is the smallest prime factor of start+i; equal to the number
    itself exactly when the number is prime (and 1 for m = 1).
    """

    start: int
    end: int
    spf: np.ndarray

    def spf_of(self, m: int) -> int:
        if not self.start <= m < self.end:
            raise IndexError(f"{m} outside block [{self.start}, {self.end})")
        return int(self.spf[m - self.start])


def spf_block(start: int, end: int) -> SpfBlock:
    """Build the SPF table for [start, end) with 32-bit entries when they fit."""
    if start < 1 or end <= start:
        raise ValueError(f"invalid SPF block bounds [{start}, {end})")
    dtype = np.uint32 if end - 1 < 2**32 else np.int64
    size = end - start
    spf = np.zeros(size, dtype=dtype)
    for p in primes_upto_monolithic(math.isqrt(end - 1)):
        p = int(p)
        first = max(p, ((start + p - 1) // p) * p)
        idx = np.arange(first - start, size, p)
        unset = spf[idx] == 0
        spf[idx[unset]] = p
    rest = np.flatnonzero(spf == 0)
    spf[rest] = (start + rest).astype(dtype)  # primes above sqrt(end), and 1
    return SpfBlock(start, end, spf)


class SpfProvider:
    """Block-cached SPF lookups backing on-demand factorization.

    Blocks are computed lazily and kept; a lock guards the cache so the
    provider can be shared across threads.
    """

    def __init__(self, block_size: int = SIEVE_BLOCK) -> None:
        _validate_block(block_size)
        self._bs = block_size
        self._blocks: dict[int, SpfBlock] = {}
        self._lock = threading.Lock()

    def _block_for(self, m: int) -> SpfBlock:
        i = m // self._bs
        with self._lock:
            blk = self._blocks.get(i)
        if blk is None:
            lo = max(1, i * self._bs)
            blk = spf_block(lo, (i + 1) * self._bs)
            with self._lock:
                blk = self._blocks.setdefault(i, blk)
        return blk

    def spf(self, m: int) -> int:
        if m < 2:
            raise ValueError(f"spf undefined for {m}")
        return self._block_for(m).spf_of(m)

    def factorize(self, m: int) -> list[tuple[int, int]]:
        """Ordered (prime, exponent) factorization; empty for m = 1."""
        if m < 1:
            raise ValueError(f"cannot factorize {m}; argument must be >= 1")
        out: list[tuple[int, int]] = []
        while m > 1:
            p = self.spf(m)
            a = 0
            while m % p == 0:
                m //= p
                a += 1
            out.append((p, a))
        return out


_default_provider: SpfProvider | None = None
_provider_lock = threading.Lock()


def default_provider() -> SpfProvider:
    global _default_provider
    if _default_provider is None:
        with _provider_lock:
            if _default_provider is None:
                _default_provider = SpfProvider()
    return _default_provider


def factorize(m: int, provider: SpfProvider | None = None) -> list[tuple[int, int]]:
    """Canonical factorization of m >= 1 into (prime, exponent) pairs."""
    return (provider or default_provider()).factorize(m)


def euler_phi(k: int) -> int:
    """Euler's totient: count of residues mod k coprime to k.  Rejects k < 1."""
    if k < 1:
        raise ValueError(f"euler_phi requires k >= 1, got {k}")
    result = k
    for p, _ in factorize(k):
        result -= result // p
    return result
