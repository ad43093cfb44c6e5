"""Bernoulli numbers as exact rationals.

Computed from the defining recurrence

    sum_{j=0}^{n} C(n+1, j) * B_j = 0,        B_0 = 1,

with the B_1 = -1/2 convention.  Values are cached for the life of the
process; the cache only ever grows and extension is serialized, so
concurrent reads are safe.
"""

from __future__ import annotations

import threading
from fractions import Fraction
from math import comb

from .errors import InvalidIndex

__all__ = ["bernoulli", "bernoulli_table"]

_lock = threading.Lock()
_table: list[Fraction] = [Fraction(1), Fraction(-1, 2)]


def _extend(n: int) -> None:
    with _lock:
        while len(_table) <= n:
            m = len(_table)
            acc = Fraction(0)
            for j in range(m):
                if _table[j]:
                    acc += comb(m + 1, j) * _table[j]
            _table.append(-acc / (m + 1))


def bernoulli(n: int) -> Fraction:
    """The Bernoulli number B_n (B_1 = -1/2 convention) as a Fraction."""
    if not isinstance(n, int) or n < 0:
        raise InvalidIndex(f"Bernoulli index must be a nonnegative integer, got {n!r}")
    if n >= len(_table):
        _extend(n)
    return _table[n]


def bernoulli_table(n_max: int) -> tuple[Fraction, ...]:
    """B_0 .. B_{n_max} as an immutable tuple."""
    if not isinstance(n_max, int) or n_max < 0:
        raise InvalidIndex(f"Bernoulli index must be a nonnegative integer, got {n_max!r}")
    bernoulli(n_max)
    return tuple(_table[: n_max + 1])
