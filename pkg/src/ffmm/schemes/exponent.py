"""Exponent bounds implied by a scheme of given shape and rank."""

from __future__ import annotations

import math
from dataclasses import dataclass


def exponent_of(m: int, n: int, p: int, r: int) -> float:
    """3 log(r) / log(mnp); for a square scheme this is log_n(r)."""
    if min(m, n, p) < 1 or m * n * p <= 1:
        raise ValueError("need m, n, p >= 1 with mnp > 1")
    if r < 1:
        raise ValueError("rank must be positive")
    return 3 * math.log(r) / math.log(m * n * p)


def apa_exponent(m: int, n: int, p: int, r: int, s: int = 1) -> float:
    """Bound from border rank r for s disjoint copies of MM(m, n, p)."""
    if s < 1:
        raise ValueError("need at least one disjoint problem")
    if r <= s:
        raise ValueError("border rank must exceed the number of disjoint problems")
    if m * n * p <= 1:
        raise ValueError("need mnp > 1")
    return 3 * math.log(r / s) / math.log(m * n * p)


def aggregation_rank(n: int) -> int:
    """Rank (n^3 - 4n)/3 + 6n^2 of the square aggregation family."""
    num = n**3 - 4 * n
    if num % 3:
        raise ValueError("(n^3 - 4n) must be divisible by 3")
    return num // 3 + 6 * n * n


@dataclass(frozen=True)
class ExponentPoint:
    label: str
    m: int
    n: int
    p: int
    rank: float
    disjoint: int = 1

    @property
    def omega(self) -> float:
        if self.disjoint == 1 and float(self.rank).is_integer():
            return exponent_of(self.m, self.n, self.p, int(self.rank))
        return 3 * math.log(self.rank / self.disjoint) / math.log(self.m * self.n * self.p)


KNOWN_POINTS = (
    ExponentPoint("classical", 2, 2, 2, 8),
    ExponentPoint("2x2 rank 7", 2, 2, 2, 7),
    ExponentPoint("n=34 aggregation, 0.5n^3+3n^2", 34, 34, 34, 0.5 * 34**3 + 3 * 34**2),
    ExponentPoint("n=70 aggregation", 70, 70, 70, aggregation_rank(70)),
    ExponentPoint("APA pair (7,1,7), border rank 63", 7, 1, 7, 63, 2),
)
