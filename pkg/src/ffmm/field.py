"""Word-size prime fields with delayed modular reduction.

Residues are stored either in the balanced range ``-(p-1)/2 .. (p-1)/2``
(the default) or in the unsigned range ``0 .. p-1``.  The accumulator used
for delayed reduction is described by its mantissa width ``m``: a dot
product may be accumulated without reduction as long as every partial sum
stays strictly below ``2**m`` in absolute value.
"""

from __future__ import annotations

from dataclasses import dataclass, field as dc_field
from typing import Sequence

import numpy as np

BALANCED = "balanced"
UNSIGNED = "unsigned"

# deterministic Miller-Rabin witnesses for n < 3.3e24
_MR_BASES = (2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37, 41)


class FieldError(ValueError):
    pass


class NotInvertible(ArithmeticError):
    pass


class AccumulatorTooSmall(FieldError):
    """No inner dimension k >= 1 fits the accumulator for this modulus."""


def is_prime(n: int) -> bool:
    if n < 2:
        return False
    for q in _MR_BASES:
        if n % q == 0:
            return n == q
    d, s = n - 1, 0
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


@dataclass
class OpCounter:
    """Scalar operation counts for one instrumented computation."""

    mults: int = 0
    adds: int = 0
    reductions: int = 0
    row_adds: int = 0
    word_ops: int = 0

    @property
    def field_ops(self) -> int:
        return self.mults + self.adds

    def merge(self, other: "OpCounter") -> None:
        self.mults += other.mults
        self.adds += other.adds
        self.reductions += other.reductions
        self.row_adds += other.row_adds
        self.word_ops += other.word_ops

    def snapshot(self) -> dict:
        return {
            "mults": self.mults,
            "adds": self.adds,
            "reductions": self.reductions,
            "row_adds": self.row_adds,
            "word_ops": self.word_ops,
        }


@dataclass(frozen=True)
class PrimeField:
    p: int
    rep: str = BALANCED
    mantissa_bits: int = 63

    def __post_init__(self):
        if self.rep not in (BALANCED, UNSIGNED):
            raise FieldError(f"unknown representation {self.rep!r}")
        if not is_prime(self.p):
            raise FieldError(f"{self.p} is not prime")
        if self.rep == BALANCED and self.p == 2:
            raise FieldError("balanced representation needs an odd prime")
        if self.mantissa_bits > 63:
            raise FieldError("accumulator wider than 63 bits is not supported")
        # raises AccumulatorTooSmall if even one product overflows
        delayed_bound(self.p, self.mantissa_bits, 0, rep=self.rep)

    @property
    def half(self) -> int:
        """Largest absolute value of a canonical residue."""
        return (self.p - 1) // 2 if self.rep == BALANCED else self.p - 1

    @property
    def limit(self) -> int:
        return 1 << self.mantissa_bits

    def reduce(self, x: int) -> int:
        r = x % self.p
        if self.rep == BALANCED and r > self.half:
            r -= self.p
        return r

    def reduce_array(self, a: np.ndarray) -> np.ndarray:
        """Canonical residues of an int64 (or object) array, as a new array."""
        if self.rep == BALANCED:
            h = self.half
            return (a + h) % self.p - h
        return a % self.p

    def reduce_inplace(self, a: np.ndarray) -> None:
        if self.rep == BALANCED:
            h = self.half
            a += h
            np.remainder(a, self.p, out=a)
            a -= h
        else:
            np.remainder(a, self.p, out=a)

    def __call__(self, x: int) -> "FieldElem":
        return FieldElem(self.reduce(int(x)), self)

    def zero(self) -> "FieldElem":
        return FieldElem(0, self)

    def one(self) -> "FieldElem":
        return FieldElem(1, self)

    def inv(self, x: int) -> int:
        x %= self.p
        if x == 0:
            raise NotInvertible("zero has no inverse")
        return self.reduce(pow(x, -1, self.p))

    def __repr__(self):
        return f"PrimeField({self.p}, rep={self.rep!r}, m={self.mantissa_bits})"


@dataclass(frozen=True)
class FieldElem:
    value: int
    field: PrimeField = dc_field(repr=False)

    def _check(self, other: "FieldElem") -> None:
        if not isinstance(other, FieldElem) or other.field != self.field:
            raise FieldError("operands belong to different fields")

    def __add__(self, other):
        return ff_arith(self, other, "add")

    def __sub__(self, other):
        return ff_arith(self, other, "sub")

    def __mul__(self, other):
        return ff_arith(self, other, "mul")

    def __neg__(self):
        return ff_arith(self, self, "neg")

    def __int__(self):
        return self.value

    def inverse(self) -> "FieldElem":
        return ff_inv(self)


def ff_arith(a: FieldElem, b: FieldElem, op: str, counter: OpCounter | None = None) -> FieldElem:
    a._check(b)
    f = a.field
    if op == "add":
        v = a.value + b.value
    elif op == "sub":
        v = a.value - b.value
    elif op == "mul":
        v = a.value * b.value
    elif op == "neg":
        v = -a.value
    else:
        raise ValueError(f"unknown operation {op!r}")
    if counter is not None:
        if op == "mul":
            counter.mults += 1
        else:
            counter.adds += 1
        counter.reductions += 1
    return FieldElem(f.reduce(v), f)


def ff_inv(a: FieldElem, counter: OpCounter | None = None) -> FieldElem:
    v = a.field.inv(a.value)
    if counter is not None:
        counter.mults += 1
    return FieldElem(v, a.field)


def delayed_bound(p: int, m: int, levels: int = 0, rep: str = BALANCED) -> int:
    """Largest inner dimension k whose dot products need only a final reduction.

    ``levels == 0`` is the classical bound ``k * h**2 < 2**m`` where ``h`` is
    the largest canonical residue magnitude.  For ``levels`` recursive
    Winograd levels the condition becomes
    ``9**levels * floor(k / 2**levels) * h**2 < 2**m``.
    """
    if p < (3 if rep == BALANCED else 2) or m < 1 or levels < 0:
        raise FieldError("need an odd prime for balanced residues, m >= 1, levels >= 0")
    h = (p - 1) // 2 if rep == BALANCED else p - 1
    h2 = h * h
    # largest q with 9**levels * q * h2 < 2**m, i.e. q * c <= 2**m - 1
    q = ((1 << m) - 1) // (9**levels * h2)
    if q < 1:
        raise AccumulatorTooSmall(
            f"p={p} too large for a {m}-bit accumulator at {levels} levels"
        )
    if levels == 0:
        return q
    return (q + 1) * (1 << levels) - 1


def delayed_dot(
    u: Sequence[int],
    v: Sequence[int],
    field: PrimeField,
    counter: OpCounter | None = None,
) -> FieldElem:
    """Dot product of canonical residue vectors with delayed reduction.

    The first block holds ``k = delayed_bound(p, m, 0)`` products.  After a
    reduction the running sum carries up to ``h`` into the next block, so
    later blocks shrink until ``h + j*h**2 < 2**m`` holds.
    """
    if len(u) != len(v):
        raise FieldError("length mismatch")
    n = len(u)
    h = field.half
    limit = field.limit
    k = delayed_bound(field.p, field.mantissa_bits, 0, rep=field.rep)
    k_next = min(k, (limit - 1 - h) // (h * h)) if h else k
    k_next = max(k_next, 1)
    uu = np.asarray(u, dtype=np.int64)
    vv = np.asarray(v, dtype=np.int64)
    s = 0
    i = 0
    block = k
    reductions = 0
    while True:
        j = min(n, i + block)
        part = int(np.dot(uu[i:j], vv[i:j])) if j > i else 0
        s += part
        if abs(s) >= limit:
            raise OverflowError("accumulator overflow; bound violated")
        s = field.reduce(s)
        reductions += 1
        i = j
        block = k_next
        if i >= n:
            break
    if counter is not None:
        counter.mults += n
        counter.adds += max(n - 1, 0)
        counter.reductions += reductions
    return FieldElem(s, field)
