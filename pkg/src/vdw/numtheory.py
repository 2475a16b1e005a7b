"""Modular arithmetic, primality, factorization and primitive roots.

Everything here is exact and deterministic for 0 <= n < 2**64.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Iterator

import numpy as np

from .errors import DomainError, ResourceLimitError

U64_LIMIT = 1 << 64

# Witness set proven sufficient for all n < 2**64 (Jim Sinclair, 2011).
_MR_WITNESSES = (2, 325, 9375, 28178, 450775, 9780504, 1795265022)
_SMALL_PRIMES = (2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37, 41, 43, 47)

TRIAL_DIVISION_LIMIT = 10**6
SEGMENT_SIZE = 1 << 20
MAX_SIEVE_SPAN = 10**9


def _check_u64(n: int) -> None:
    if not 0 <= n < U64_LIMIT:
        raise DomainError(f"{n} is outside the supported range [0, 2**64)")


def is_prime(n: int) -> bool:
    """Deterministic Miller-Rabin over the full unsigned 64-bit range."""
    _check_u64(n)
    if n < 2:
        return False
    for q in _SMALL_PRIMES:
        if n % q == 0:
            return n == q
    d, s = n - 1, 0
    while d % 2 == 0:
        d //= 2
        s += 1
    for a in _MR_WITNESSES:
        a %= n
        if a == 0:
            continue
        x = pow(a, d, n)
        if x == 1 or x == n - 1:
            continue
        for _ in range(s - 1):
            x = x * x % n
            if x == n - 1:
                break
        else:
            return False
    return True


def _base_primes(limit: int) -> np.ndarray:
    """Primes <= limit by a plain sieve of Eratosthenes."""
    if limit < 2:
        return np.empty(0, dtype=np.int64)
    flags = np.ones(limit + 1, dtype=bool)
    flags[:2] = False
    for q in range(2, math.isqrt(limit) + 1):
        if flags[q]:
            flags[q * q :: q] = False
    return np.flatnonzero(flags).astype(np.int64)


def iter_prime_segments(lo: int, hi: int, segment: int = SEGMENT_SIZE) -> Iterator[np.ndarray]:
    """Yield ascending int64 arrays of the primes in [lo, hi), one per segment.

    Memory stays O(segment + sqrt(hi)) regardless of the span.
    """
    if lo > hi:
        raise DomainError(f"empty interval: lo={lo} > hi={hi}")
    lo = max(lo, 2)
    if hi <= lo:
        return
    _check_u64(hi - 1)
    base = _base_primes(math.isqrt(hi - 1))
    start = lo
    while start < hi:
        stop = min(start + segment, hi)
        flags = np.ones(stop - start, dtype=bool)
        for q in base.tolist():
            if q * q >= stop:
                break
            first = max(q * q, -(-start // q) * q)
            flags[first - start :: q] = False
        yield np.flatnonzero(flags).astype(np.int64) + start
        start = stop


def sieve_range(lo: int, hi: int, max_span: int = MAX_SIEVE_SPAN) -> list[int]:
    """All primes p with lo <= p < hi, ascending."""
    if lo > hi:
        raise DomainError(f"empty interval: lo={lo} > hi={hi}")
    if hi - lo > max_span:
        raise ResourceLimitError(
            f"range span {hi - lo} exceeds the sieve limit of {max_span}; "
            "use iter_prime_segments for streaming"
        )
    out: list[int] = []
    for seg in iter_prime_segments(lo, hi):
        out.extend(seg.tolist())
    return out


def mod_pow(base: int, exp: int, m: int) -> int:
    if m < 2:
        raise DomainError("modulus must be at least 2")
    return pow(base, exp, m)


def mod_inverse(d: int, p: int) -> int:
    """The e in 1..p-1 with d*e = 1 (mod p)."""
    if d % p == 0:
        raise DomainError(f"{d} has no inverse modulo {p}")
    return pow(d, -1, p)


@dataclass(frozen=True)
class PrimeFactorization:
    n: int
    factors: tuple[tuple[int, int], ...]

    def __post_init__(self):
        primes = [q for q, _ in self.factors]
        if primes != sorted(set(primes)):
            raise DomainError("factors must be strictly increasing")
        if math.prod(q**e for q, e in self.factors) != self.n:
            raise DomainError(f"factors do not multiply to {self.n}")

    @property
    def primes(self) -> list[int]:
        return [q for q, _ in self.factors]

    def as_dict(self) -> dict[int, int]:
        return dict(self.factors)


def _pollard_brent(n: int) -> int:
    """A nontrivial factor of the odd composite n (Brent's cycle detection)."""
    for c in range(1, n):
        y, m, g, r, q = 2, 128, 1, 1, 1
        x = ys = y
        while g == 1:
            x = y
            for _ in range(r):
                y = (y * y + c) % n
            k = 0
            while k < r and g == 1:
                ys = y
                for _ in range(min(m, r - k)):
                    y = (y * y + c) % n
                    q = q * abs(x - y) % n
                g = math.gcd(q, n)
                k += m
            r *= 2
        if g == n:
            g = 1
            while g == 1:
                ys = (ys * ys + c) % n
                g = math.gcd(abs(x - ys), n)
        if g != n:
            return g
    raise ArithmeticError(f"Pollard rho failed on {n}")


def factorize(n: int) -> PrimeFactorization:
    _check_u64(n)
    if n < 2:
        raise DomainError("factorize needs n >= 2")
    counts: dict[int, int] = {}
    m = n
    q = 2
    while q <= TRIAL_DIVISION_LIMIT and q * q <= m:
        while m % q == 0:
            counts[q] = counts.get(q, 0) + 1
            m //= q
        q += 1 if q == 2 else 2
    stack = [m] if m > 1 else []
    while stack:
        x = stack.pop()
        if is_prime(x):
            counts[x] = counts.get(x, 0) + 1
            continue
        f = _pollard_brent(x)
        stack += [f, x // f]
    return PrimeFactorization(n, tuple(sorted(counts.items())))


def is_primitive_root(g: int, p: int, _order_primes: list[int] | None = None) -> bool:
    if p == 2:
        return g % 2 == 1
    if g % p == 0:
        return False
    qs = _order_primes if _order_primes is not None else factorize(p - 1).primes
    return all(pow(g, (p - 1) // q, p) != 1 for q in qs)


def primitive_root(p: int) -> int:
    """Smallest generator of the multiplicative group mod the prime p."""
    if not is_prime(p):
        raise DomainError(f"{p} is not prime")
    if p == 2:
        return 1
    qs = factorize(p - 1).primes
    g = 2
    while not is_primitive_root(g, p, qs):
        g += 1
    return g
