"""Small number-theory helpers (primes, roots, budgets)."""

from __future__ import annotations

import os
from fractions import Fraction

from sympy import factorint, integer_nthroot, isprime, nextprime, primerange

DEFAULT_BUDGET = 10**9


def enumeration_budget(default: int = DEFAULT_BUDGET) -> int:
    """Enumeration cap, overridable through ``PATKIT_BUDGET``."""
    raw = os.environ.get("PATKIT_BUDGET")
    if raw is None:
        return default
    try:
        value = int(float(raw))
    except ValueError:
        raise ValueError(f"PATKIT_BUDGET must be an integer, got {raw!r}") from None
    if value < 1:
        raise ValueError("PATKIT_BUDGET must be positive")
    return value


class BudgetExceeded(RuntimeError):
    """Raised when an exact enumeration would exceed its evaluation budget."""


def is_prime(n: int) -> bool:
    return n >= 2 and bool(isprime(n))


def next_prime_at_least(n: int) -> int:
    """Smallest prime p with p >= n."""
    if n <= 2:
        return 2
    return n if isprime(n) else int(nextprime(n))


def primes_upto(n: int) -> list[int]:
    return [int(p) for p in primerange(2, n + 1)]


def factorize(n: int) -> dict[int, int]:
    return {int(p): int(e) for p, e in factorint(n).items()}


def floor_root(x: Fraction | int, n: int) -> int:
    """Largest integer m >= 0 with m**n <= x, computed exactly."""
    x = Fraction(x)
    if x < 0:
        raise ValueError("floor_root needs a non-negative argument")
    # m**n <= p/q  <=>  m**n * q <= p  <=> m <= floor((p // q) ** (1/n))
    m = int(integer_nthroot(x.numerator // x.denominator, n)[0])
    return m


def ceil_cube_root(w: int) -> int:
    """Smallest integer e with e**3 >= w."""
    e, exact = integer_nthroot(w, 3)
    return int(e) if exact else int(e) + 1
