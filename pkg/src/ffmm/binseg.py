"""Binary segmentation: many small integer operations in one big-integer product."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

from .field import OpCounter


class SlotOverflow(ValueError):
    pass


@dataclass(frozen=True)
class PackedInt:
    """n slots of k bits each.  ``bound`` is an inclusive upper bound on every
    slot value; sums of packed vectors grow it, and once it reaches 2^k the
    slots may have carried into each other."""

    value: int
    k: int
    n: int
    bound: int | None = None

    def __post_init__(self):
        if self.k < 1 or self.n < 0:
            raise ValueError("slot width must be positive and slot count nonnegative")
        if self.overflowed:
            return
        if not 0 <= self.value < (1 << (self.k * self.n)) and not (self.n == 0 and self.value == 0):
            raise SlotOverflow("packed value does not fit in k*n bits")

    @property
    def overflowed(self) -> bool:
        return self.bound is not None and self.bound >= (1 << self.k)

    def slot(self, i: int) -> int:
        return (self.value >> (i * self.k)) & ((1 << self.k) - 1)


def pack(v: Sequence[int], k: int) -> PackedInt:
    """sum_i v_i 2^(k i); every entry must lie in [0, 2^k)."""
    if k < 1:
        raise ValueError("slot width must be positive")
    top = 1 << k
    value = 0
    for i in reversed(range(len(v))):
        x = int(v[i])
        if not 0 <= x < top:
            raise SlotOverflow(f"entry {i} = {x} outside [0, 2^{k})")
        value = (value << k) | x
    return PackedInt(value, k, len(v))


def unpack(P: PackedInt) -> list[int]:
    if P.overflowed:
        raise SlotOverflow(f"slot bound {P.bound} does not fit in {P.k} bits")
    mask = (1 << P.k) - 1
    out, x = [], P.value
    for _ in range(P.n):
        out.append(x & mask)
        x >>= P.k
    return out


def ceil_log2(n: int) -> int:
    return (n - 1).bit_length() if n > 1 else 0


def slot_width(g: int, h: int, n: int) -> int:
    return g + h + ceil_log2(n)


def _check_range(v: Sequence[int], bits: int, name: str) -> None:
    top = 1 << bits
    for i, x in enumerate(v):
        if not 0 <= x < top:
            raise SlotOverflow(f"{name}[{i}] = {x} outside [0, 2^{bits})")


def binseg_inner(u: Sequence[int], v: Sequence[int], g: int, h: int,
                 counter: OpCounter | None = None, k: int | None = None) -> int:
    """u.v from the middle coefficient of one product of packed integers.

    u is packed in ascending slots and v in descending slots, so slot n-1
    of the product collects exactly sum_i u_i v_i.  Passing ``k`` overrides
    the safe slot width (used to show that a narrower slot breaks).
    """
    n = len(u)
    if len(v) != n:
        raise ValueError("vectors differ in length")
    if g < 0 or h < 0:
        raise ValueError("bit bounds must be nonnegative")
    _check_range(u, g, "u")
    _check_range(v, h, "v")
    return _middle_coefficient(u, v, slot_width(g, h, n) if k is None else k, counter)


def _middle_coefficient(u, v, k: int, counter: OpCounter | None) -> int:
    n = len(u)
    if n == 0:
        return 0
    k = max(k, 1)
    pu = pack(u, k)
    pv = pack(list(reversed(v)), k)
    prod = pu.value * pv.value
    if counter is not None:
        counter.mults += 1
    return (prod >> (k * (n - 1))) & ((1 << k) - 1)


def binseg_sum(v: Sequence[int], h: int, counter: OpCounter | None = None) -> int:
    """Sum of entries in [0, 2^h) using the all-ones vector as the other factor.

    The ones have g = 0 bits of excess, so the slot width is h + ceil(log2 n).
    """
    _check_range(v, h, "v")
    return _middle_coefficient([1] * len(v), v, slot_width(0, h, len(v)), counter)


def _bits_for(span: int) -> int:
    return max(span - 1, 0).bit_length()


def binseg_sum_signed(v: Sequence[int], q: int, r: int, counter: OpCounter | None = None) -> int:
    """Sum of integers in [q, r) after shifting them to [0, r - q)."""
    if q >= r:
        raise ValueError("need q < r")
    for i, x in enumerate(v):
        if not q <= x < r:
            raise SlotOverflow(f"v[{i}] = {x} outside [{q}, {r})")
    return binseg_sum([x - q for x in v], _bits_for(r - q), counter) + len(v) * q


def binseg_inner_signed(u: Sequence[int], v: Sequence[int], ru: tuple[int, int], rv: tuple[int, int],
                        counter: OpCounter | None = None) -> int:
    """u.v for u in [q1, r1) and v in [q2, r2) via the double shift identity."""
    (q1, r1), (q2, r2) = ru, rv
    n = len(u)
    if len(v) != n:
        raise ValueError("vectors differ in length")
    if q1 >= r1 or q2 >= r2:
        raise ValueError("empty range")
    for name, w, q, r in (("u", u, q1, r1), ("v", v, q2, r2)):
        for i, x in enumerate(w):
            if not q <= x < r:
                raise SlotOverflow(f"{name}[{i}] = {x} outside [{q}, {r})")
    us = [x - q1 for x in u]
    vs = [x - q2 for x in v]
    core = binseg_inner(us, vs, _bits_for(r1 - q1), _bits_for(r2 - q2), counter)
    return (core + q2 * binseg_sum_signed(u, q1, r1, counter)
            + q1 * binseg_sum_signed(v, q2, r2, counter) - n * q1 * q2)
