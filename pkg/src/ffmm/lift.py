"""Exact rational solutions of integer linear systems by p-adic lifting.

One LU factorization modulo a random word-size prime is reused for every
lifting step.  After k steps the truncated p-adic expansion determines
the solution modulo p^k; rational reconstruction then recovers each
entry once p^k exceeds twice the product of the Cramer numerator bound
and the determinant bound.
"""

from __future__ import annotations

import random
from dataclasses import dataclass, field as dc_field
from fractions import Fraction
from math import gcd, isqrt
from typing import Sequence

import numpy as np

from .dense import DenseMatrix
from .factor import GenericRankProfileViolation, lu, trsm_lower, trsm_upper
from .field import NotInvertible, PrimeField, is_prime
from .multiply import CascadeConfig


class ReconstructionFailure(ArithmeticError):
    pass


class SingularSystem(ArithmeticError):
    pass


@dataclass
class PadicSeries:
    p: int
    digits: list = dc_field(default_factory=list)

    @property
    def k(self) -> int:
        return len(self.digits)

    def value(self) -> list[int]:
        """sum_i digits[i] * p**i, entrywise."""
        if not self.digits:
            return []
        acc = [0] * len(self.digits[0])
        for d in reversed(self.digits):
            acc = [a * self.p + int(x) for a, x in zip(acc, d)]
        return acc


@dataclass(frozen=True)
class RationalVector:
    entries: tuple

    def __post_init__(self):
        for x in self.entries:
            if not isinstance(x, Fraction):
                raise TypeError("entries must be Fractions")

    def __len__(self):
        return len(self.entries)

    def __iter__(self):
        return iter(self.entries)

    def __getitem__(self, i):
        return self.entries[i]

    def lines(self) -> list[str]:
        return [f"{x.numerator}/{x.denominator}" for x in self.entries]


def _ceil_sqrt(x: int) -> int:
    s = isqrt(x)
    return s if s * s == x else s + 1


def hadamard_bound(A) -> int:
    """ceil(prod_i ||row_i||_2), an upper bound on |det A|."""
    rows = _int_rows(A)
    if any(len(r) != len(rows) for r in rows):
        raise ValueError("Hadamard bound needs a square matrix")
    prod = 1
    for r in rows:
        prod *= sum(x * x for x in r)
    return _ceil_sqrt(prod)


def cramer_numerator_bound(A, b: Sequence[int]) -> int:
    """Bound on |det A_i| where column i of A is replaced by b.

    Column-wise Hadamard: |det A_i| <= ||b|| * prod_{j != i} ||col_j||, and
    every column of a nonsingular integer matrix has norm at least 1.
    """
    rows = _int_rows(A)
    n = len(rows)
    prod = sum(int(x) ** 2 for x in b)
    for j in range(n):
        prod *= sum(rows[i][j] ** 2 for i in range(n))
    return _ceil_sqrt(prod)


def _int_rows(A) -> list[list[int]]:
    if isinstance(A, DenseMatrix):
        return [[int(x) for x in r] for r in A.data]
    return [[int(x) for x in r] for r in A]


def rational_reconstruction(a: int, M: int, num_bound: int | None = None,
                            den_bound: int | None = None) -> Fraction:
    """n/d with n = a*d (mod M), |n| <= N, 0 < d <= D.

    Default bounds are N = D = floor(sqrt((M-1)/2)), which makes the
    answer unique when it exists.
    """
    if M < 2 or not 0 <= a < M:
        raise ValueError("need 0 <= a < M")
    N = isqrt((M - 1) // 2) if num_bound is None else num_bound
    D = isqrt((M - 1) // 2) if den_bound is None else den_bound
    r0, r1 = M, a
    t0, t1 = 0, 1
    while r1 > N:
        q = r0 // r1
        r0, r1 = r1, r0 - q * r1
        t0, t1 = t1, t0 - q * t1
    if t1 == 0 or abs(t1) > D or gcd(r1, abs(t1)) != 1:
        raise ReconstructionFailure(f"no fraction with |n| <= {N}, d <= {D} matches {a} mod {M}")
    if t1 < 0:
        r1, t1 = -r1, -t1
    return Fraction(r1, t1)


def random_prime(bits: int, rng: random.Random) -> int:
    if bits < 3:
        raise ValueError("need at least 3 bits")
    while True:
        c = rng.randrange(1 << (bits - 1), 1 << bits) | 1
        if is_prime(c):
            return c


@dataclass
class DixonStats:
    prime: int = 0
    retries: int = 0
    lu_calls: int = 0
    steps: int = 0
    target_steps: int = 0
    divisibility_checks: int = 0
    preconditioned: bool = False


def _unit_lower(n: int, rng: random.Random) -> list[list[int]]:
    return [[1 if i == j else (rng.randint(-4, 4) if j < i else 0) for j in range(n)]
            for i in range(n)]


def _matmul_int(A: list[list[int]], B: list[list[int]]) -> list[list[int]]:
    Bt = list(zip(*B))
    return [[sum(a * b for a, b in zip(r, c)) for c in Bt] for r in A]


def dixon_solve(A, b: Sequence[int], prime_bits: int = 20, seed: int | None = None,
                max_retries: int = 10, cfg: CascadeConfig | None = None,
                stats: DixonStats | None = None) -> RationalVector:
    """Solve A x = b exactly over the rationals for a nonsingular integer matrix A."""
    rows = _int_rows(A)
    n = len(rows)
    if n == 0 or any(len(r) != n for r in rows):
        raise ValueError("A must be square and nonempty")
    b = [int(x) for x in b]
    if len(b) != n:
        raise ValueError("b has the wrong length")
    stats = stats if stats is not None else DixonStats()
    rng = random.Random(seed)
    cfg = cfg or CascadeConfig(base_threshold=32)
    for attempt in range(max_retries + 1):
        # retries also randomize the column space so a non-generic rank profile cannot persist
        P = _unit_lower(n, rng) if attempt else None
        work = _matmul_int(rows, P) if P is not None else rows
        p = random_prime(prime_bits, rng)
        F = PrimeField(p)
        Ap = DenseMatrix.from_rows(work, F)
        try:
            stats.lu_calls += 1
            fac = lu(Ap, cfg)
            if any(fac.U.data[i, i] == 0 for i in range(n)):
                raise GenericRankProfileViolation("singular modulo p")
        except (GenericRankProfileViolation, NotInvertible):
            stats.retries += 1
            continue
        stats.prime = p
        stats.preconditioned = P is not None
        y = _lift(work, b, F, fac, cfg, stats)
        if P is None:
            return RationalVector(tuple(y))
        x = [sum(P[i][j] * y[j] for j in range(n)) for i in range(n)]
        return RationalVector(tuple(x))
    raise SingularSystem(f"no usable prime after {max_retries} retries (A is probably singular)")


def _lift(rows, b, F: PrimeField, fac, cfg, stats: DixonStats) -> list[Fraction]:
    n = len(rows)
    p = F.p
    N = cramer_numerator_bound(rows, b)
    D = hadamard_bound(rows)
    if D == 0:
        raise SingularSystem("zero row")
    k = 1
    while p**k <= 2 * N * D:
        k += 1
    stats.target_steps = k
    A64 = np.array(rows, dtype=object)
    small = max((abs(x) for r in rows for x in r), default=0) * n * p < (1 << 62)
    if small:
        A64 = np.array(rows, dtype=np.int64)
    series = PadicSeries(p)
    rhs = list(b)
    modulus = 1
    while True:
        while series.k < k:
            col = DenseMatrix(F.reduce_array(np.array(rhs, dtype=object)).astype(np.int64).reshape(n, 1), F)
            xi = trsm_upper(fac.U, trsm_lower(fac.L, col, cfg), cfg).data[:, 0]
            series.digits.append(xi)
            Ax = A64 @ xi if small else A64 @ xi.astype(object)
            nxt = []
            for r, ax in zip(rhs, Ax):
                diff = r - int(ax)
                if diff % p:
                    raise AssertionError("lifting residual not divisible by p")
                nxt.append(diff // p)
            stats.divisibility_checks += 1
            rhs = nxt
            modulus *= p
            stats.steps += 1
        X = series.value()
        try:
            x = [rational_reconstruction(v % modulus, modulus, N, D) for v in X]
        except ReconstructionFailure:
            k += 1
            continue
        if all(sum(Fraction(a) * xv for a, xv in zip(r, x)) == bv for r, bv in zip(rows, b)):
            return x
        k += 1


def solve_check(A, b, x: Sequence[Fraction]) -> bool:
    rows = _int_rows(A)
    return all(sum(Fraction(a) * xv for a, xv in zip(r, x)) == int(bv) for r, bv in zip(rows, b))
