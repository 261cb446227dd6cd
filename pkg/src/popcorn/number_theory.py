"""Exact integer kernels: gcd, Euler's totient and coprime residues."""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from .errors import DomainError, ResourceCapError

# Largest sieve we are willing to allocate (int64 entries).
SIEVE_LIMIT = 200_000_000


def gcd(a: int, b: int) -> int:
    if a < 1 or b < 1:
        raise DomainError(f"gcd expects positive integers, got ({a}, {b})")
    return math.gcd(a, b)


def _prime_factors(n: int) -> list[int]:
    out = []
    p = 2
    while p * p <= n:
        if n % p == 0:
            out.append(p)
            while n % p == 0:
                n //= p
        p += 1 if p == 2 else 2
    if n > 1:
        out.append(n)
    return out


def totient(n: int) -> int:
    """phi(n) = #{1 <= m < n : gcd(m, n) = 1}, for n >= 2."""
    if n < 2:
        raise DomainError(f"totient is defined here for n >= 2, got {n}")
    result = n
    for p in _prime_factors(n):
        result -= result // p
    return result


@dataclass(frozen=True)
class TotientTable:
    """phi(n) for 2 <= n <= limit; ``values[n]`` is phi(n) (entries 0, 1 unused)."""

    limit: int
    values: np.ndarray

    def __getitem__(self, n: int) -> int:
        if not 2 <= n <= self.limit:
            raise IndexError(f"{n} outside table range [2, {self.limit}]")
        return int(self.values[n])

    def __len__(self) -> int:
        return self.limit - 1

    def as_dict(self) -> dict[int, int]:
        return {n: int(self.values[n]) for n in range(2, self.limit + 1)}


def totient_sieve(N: int, max_entries: int = SIEVE_LIMIT) -> TotientTable:
    if N < 2:
        raise DomainError(f"sieve limit must be >= 2, got {N}")
    if N + 1 > max_entries:
        raise ResourceCapError("totient sieve exceeds memory budget", N + 1)
    phi = np.arange(N + 1, dtype=np.int64)
    is_composite = np.zeros(N + 1, dtype=bool)
    for p in range(2, N + 1):
        if is_composite[p]:
            continue
        if p * p <= N:
            is_composite[p * p :: p] = True
        phi[p::p] -= phi[p::p] // p
    phi[0] = 0
    phi[1] = 0  # not part of the table; see DomainError in totient()
    phi.setflags(write=False)
    return TotientTable(N, phi)


def totient_growth_ratio(n: int) -> float:
    """phi(n) * log(log n) / n, natural logs."""
    if n < 3:
        raise DomainError(f"growth ratio needs n >= 3 so that log log n > 0, got {n}")
    return totient(n) * math.log(math.log(n)) / n


def growth_ratio_scan(N: int, table: TotientTable | None = None) -> tuple[float, int]:
    """Minimum of the growth ratio over 3 <= n <= N and the n attaining it."""
    if N < 3:
        raise DomainError(f"scan needs N >= 3, got {N}")
    if table is None or table.limit < N:
        table = totient_sieve(N)
    n = np.arange(3, N + 1, dtype=np.float64)
    ratios = table.values[3 : N + 1] * np.log(np.log(n)) / n
    i = int(np.argmin(ratios))
    return float(ratios[i]), i + 3


@lru_cache(maxsize=4096)
def _coprime_array(q: int) -> np.ndarray:
    m = np.arange(1, q, dtype=np.int64)
    out = m[np.gcd(m, q) == 1]
    out.setflags(write=False)
    return out


def coprime_residues(q: int) -> list[int]:
    if q < 2:
        raise DomainError(f"coprime residues need q >= 2, got {q}")
    return [m for m in range(1, q) if math.gcd(m, q) == 1]


def coprime_array(q: int) -> np.ndarray:
    """Read-only int64 array version of :func:`coprime_residues` (cached)."""
    if q < 2:
        raise DomainError(f"coprime residues need q >= 2, got {q}")
    return _coprime_array(q)


def iroot(x: int, k: int) -> int:
    """Largest integer r >= 0 with r**k <= x."""
    if x < 0 or k < 1:
        raise DomainError(f"iroot needs x >= 0 and k >= 1, got ({x}, {k})")
    if x < 2 or k == 1:
        return x
    lo, hi = 1, 1 << (x.bit_length() // k + 1)
    while hi - lo > 1:
        mid = (lo + hi) // 2
        if mid**k <= x:
            lo = mid
        else:
            hi = mid
    return lo
