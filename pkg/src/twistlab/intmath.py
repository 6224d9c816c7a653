"""Exact integer ceilings of logarithms and roots."""

from __future__ import annotations


def ceil_log(x: int, base: int) -> int:
    """Smallest c >= 0 with base**c >= x."""
    if base < 2:
        raise ValueError("base must be at least 2")
    c, p = 0, 1
    while p < x:
        p *= base
        c += 1
    return c


def ceil_root(x: int, m: int) -> int:
    """Smallest c >= 0 with c**m >= x."""
    if m < 1:
        raise ValueError("m must be positive")
    if x <= 0:
        return 0
    c = max(1, int(round(x ** (1.0 / m))) - 1) if x < 1 << 1000 else 1
    while c ** m < x:
        c += 1
    while c > 1 and (c - 1) ** m >= x:
        c -= 1
    return c


def ceil_log_ratio(num: int, den: int) -> int:
    """ceil(log num / log den) for integers num >= 1, den >= 2: smallest c with den**c >= num."""
    return ceil_log(num, den)


def is_prime(p: int) -> bool:
    if p < 2:
        return False
    i = 2
    while i * i <= p:
        if p % i == 0:
            return False
        i += 1
    return True
