"""Budgeted integer factorization and small multiplicative helpers.

Trial division handles prime factors up to 10**6; whatever remains is split
by Brent's cycle-finding variant of Pollard's rho. The rho budget counts
iterations across the whole factorization and exhausting it raises
FactorizationBudgetExceeded rather than returning a wrong or partial answer.
"""

from __future__ import annotations

from functools import lru_cache
from math import gcd

from .errors import FactorizationBudgetExceeded

TRIAL_LIMIT = 10**6
DEFAULT_RHO_BUDGET = 2_000_000

# deterministic Miller-Rabin witness set for n < 3.3e24 (covers 64-bit inputs
# with a wide margin); beyond that the same witnesses make the test a strong
# probabilistic one, which is adequate for desk-scale cofactors
_MR_BASES = (2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37)

_SIEVE_LIMIT = TRIAL_LIMIT
_spf: list = []


def _sieve() -> list:
    """Smallest-prime-factor table up to TRIAL_LIMIT, built lazily once."""
    global _spf
    if not _spf:
        n = _SIEVE_LIMIT + 1
        spf = list(range(n))
        for p in range(2, int(n**0.5) + 1):
            if spf[p] == p:
                step = p
                for q in range(p * p, n, step):
                    if spf[q] == q:
                        spf[q] = p
        _spf = spf
    return _spf


@lru_cache(maxsize=None)
def small_primes() -> tuple:
    spf = _sieve()
    return tuple(p for p in range(2, _SIEVE_LIMIT + 1) if spf[p] == p)


def is_probable_prime(n: int) -> bool:
    if n < 2:
        return False
    for p in (2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37):
        if n % p == 0:
            return n == p
    d = n - 1
    s = 0
    while d % 2 == 0:
        d //= 2
        s += 1
    for a in _MR_BASES:
        x = pow(a, d, n)
        if x in (1, n - 1):
            continue
        for _ in range(s - 1):
            x = x * x % n
            if x == n - 1:
                break
        else:
            return False
    return True


def _brent_rho(n: int, budget: list) -> int:
    """A non-trivial factor of composite odd n, consuming budget[0] iterations."""
    if n % 2 == 0:
        return 2
    c = 1
    while True:
        y, m = 2, 128
        g = r = q = 1
        x = ys = y
        while g == 1:
            x = y
            for _ in range(r):
                y = (y * y + c) % n
            k = 0
            while k < r and g == 1:
                ys = y
                cnt = min(m, r - k)
                if budget[0] < cnt:
                    raise FactorizationBudgetExceeded(
                        f"rho budget exhausted while factoring {n}"
                    )
                budget[0] -= cnt
                for _ in range(cnt):
                    y = (y * y + c) % n
                    q = q * abs(x - y) % n
                g = gcd(q, n)
                k += m
            r *= 2
        if g == n:
            # backtrack one step at a time
            g = 1
            while g == 1:
                ys = (ys * ys + c) % n
                g = gcd(abs(x - ys), n)
                if budget[0] <= 0:
                    raise FactorizationBudgetExceeded(
                        f"rho budget exhausted while factoring {n}"
                    )
                budget[0] -= 1
        if g != n:
            return g
        c += 1  # rare: retry with a different polynomial


def factorint(n: int, rho_budget: int = DEFAULT_RHO_BUDGET) -> dict:
    """Full prime factorization {p: e} of n >= 1 (empty dict for 1)."""
    if n < 1:
        raise ValueError("factorint is defined for positive integers")
    out: dict = {}
    if n == 1:
        return out
    if n <= _SIEVE_LIMIT:
        spf = _sieve()
        while n > 1:
            p = spf[n]
            e = 0
            while n % p == 0:
                n //= p
                e += 1
            out[p] = e
        return out
    for p in (2, 3, 5):
        if n % p == 0:
            e = 0
            while n % p == 0:
                n //= p
                e += 1
            out[p] = e
    # wheel over 6k+-1 up to the trial limit
    f = 7
    inc = (4, 2, 4, 2, 4, 6, 2, 6)
    i = 0
    while f <= TRIAL_LIMIT and f * f <= n:
        if n % f == 0:
            e = 0
            while n % f == 0:
                n //= f
                e += 1
            out[f] = e
        f += inc[i]
        i = (i + 1) % 8
    if n == 1:
        return out
    if f * f > n:
        out[n] = out.get(n, 0) + 1
        return out
    budget = [rho_budget]
    stack = [n]
    while stack:
        m = stack.pop()
        if m == 1:
            continue
        if is_probable_prime(m):
            out[m] = out.get(m, 0) + 1
            continue
        d = _brent_rho(m, budget)
        stack.append(d)
        stack.append(m // d)
    return out


def gcd_of_exponents(n: int, rho_budget: int = DEFAULT_RHO_BUDGET) -> int:
    """gcd of the exponents in the prime factorization of n; 0 for n = 1."""
    fac = factorint(n, rho_budget)
    g = 0
    for e in fac.values():
        g = gcd(g, e)
    return g


@lru_cache(maxsize=4096)
def totient(m: int) -> int:
    if m < 1:
        raise ValueError("totient of a non-positive integer")
    out = m
    for p in factorint(m):
        out -= out // p
    return out


def nu(n: int, p: int) -> int:
    """Multiplicity of the prime p in n >= 1."""
    if n < 1:
        raise ValueError("valuation of a non-positive integer")
    e = 0
    while n % p == 0:
        n //= p
        e += 1
    return e
