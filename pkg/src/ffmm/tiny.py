"""Kernels for tiny fields: packed GF(2), bit-sliced GF(3), Kronecker packing."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .binseg import PackedInt, SlotOverflow, pack, unpack
from .dense import DimensionError
from .field import OpCounter

WORD = 64


def _nwords(n: int) -> int:
    return (n + WORD - 1) // WORD


def _pack_bits(bits: np.ndarray) -> np.ndarray:
    """Rows of 0/1 to uint64 words, column c at bit c % 64 of word c // 64."""
    rows, cols = bits.shape
    padded = np.zeros((rows, _nwords(cols) * WORD), dtype=np.uint8)
    padded[:, :cols] = bits
    return np.packbits(padded, axis=1, bitorder="little").view("<u8").astype(np.uint64).reshape(rows, -1)


def _unpack_bits(words: np.ndarray, cols: int) -> np.ndarray:
    raw = np.ascontiguousarray(words.astype("<u8")).view(np.uint8)
    return np.unpackbits(raw, axis=1, bitorder="little")[:, :cols]


@dataclass(eq=False)
class PackedF2Matrix:
    rows: int
    cols: int
    words: np.ndarray

    def __post_init__(self):
        self.words = np.asarray(self.words, dtype=np.uint64).reshape(self.rows, _nwords(self.cols))
        tail = self.cols % WORD
        if tail and self.rows and np.any(self.words[:, -1] >> np.uint64(tail)):
            raise ValueError("padding bits must be zero")

    @classmethod
    def from_dense(cls, M) -> "PackedF2Matrix":
        bits = np.asarray(M, dtype=np.int64) & 1
        if bits.ndim != 2:
            raise DimensionError("need a 2-d array")
        return cls(bits.shape[0], bits.shape[1], _pack_bits(bits.astype(np.uint8)))

    @classmethod
    def zeros(cls, rows: int, cols: int) -> "PackedF2Matrix":
        return cls(rows, cols, np.zeros((rows, _nwords(cols)), dtype=np.uint64))

    @classmethod
    def identity(cls, n: int) -> "PackedF2Matrix":
        return cls.from_dense(np.eye(n, dtype=np.uint8))

    @classmethod
    def random(cls, rows: int, cols: int, rng: np.random.Generator) -> "PackedF2Matrix":
        return cls.from_dense(rng.integers(0, 2, size=(rows, cols)))

    def to_dense(self) -> np.ndarray:
        return _unpack_bits(self.words, self.cols).astype(np.int64)

    @property
    def nwords(self) -> int:
        return self.words.shape[1]

    def __eq__(self, other):
        return (isinstance(other, PackedF2Matrix) and self.rows == other.rows
                and self.cols == other.cols and np.array_equal(self.words, other.words))


def default_stripe(n: int) -> int:
    """ceil(log2 n) capped to [1, 16]."""
    return min(16, max(1, (max(n, 2) - 1).bit_length()))


def _check_f2(A: PackedF2Matrix, B: PackedF2Matrix) -> None:
    if A.cols != B.rows:
        raise DimensionError(f"cannot multiply {A.rows}x{A.cols} by {B.rows}x{B.cols}")


def f2_mm_naive(A: PackedF2Matrix, B: PackedF2Matrix, counter: OpCounter | None = None) -> PackedF2Matrix:
    """C_i ^= B_j for every set bit A_ij: the packed triple loop."""
    _check_f2(A, B)
    c = counter if counter is not None else OpCounter()
    C = PackedF2Matrix.zeros(A.rows, B.cols)
    bits = _unpack_bits(A.words, A.cols)
    for i in range(A.rows):
        js = np.flatnonzero(bits[i])
        if js.size:
            C.words[i] = np.bitwise_xor.reduce(B.words[js], axis=0)
        c.row_adds += int(js.size)
        c.word_ops += int(js.size) * B.nwords
    return C


def f2_mm_four_russians(A: PackedF2Matrix, B: PackedF2Matrix, k: int | None = None,
                        counter: OpCounter | None = None,
                        table_costs: list | None = None) -> PackedF2Matrix:
    """C = AB over GF(2) with a table of all combinations of k rows of B per stripe.

    Each table is filled in Gray-code order so every entry costs one row
    addition.  ``table_costs`` receives the row additions spent on each stripe.
    """
    _check_f2(A, B)
    k = default_stripe(A.cols) if k is None else k
    if not 1 <= k <= 16:
        raise ValueError("stripe width must be in [1, 16]")
    c = counter if counter is not None else OpCounter()
    C = PackedF2Matrix.zeros(A.rows, B.cols)
    bits = _unpack_bits(A.words, A.cols).astype(np.int64)
    w = B.nwords
    for s0 in range(0, A.cols, k):
        kk = min(k, A.cols - s0)
        size = 1 << kk
        T = np.zeros((size, w), dtype=np.uint64)
        prev = 0
        for i in range(1, size):
            g = i ^ (i >> 1)
            flipped = (g ^ prev).bit_length() - 1
            T[g] = T[prev] ^ B.words[s0 + flipped]
            prev = g
        c.row_adds += size - 1
        c.word_ops += (size - 1) * w
        if table_costs is not None:
            table_costs.append(size - 1)
        idx = bits[:, s0:s0 + kk] @ (1 << np.arange(kk, dtype=np.int64))
        C.words ^= T[idx]
        c.word_ops += A.rows * w
    return C


@dataclass(eq=False)
class SlicedF3Vector:
    """GF(3) vector as bit-planes: 0 = [0,0], 1 = [1,0], -1 = [1,1]."""

    x0: np.ndarray
    x1: np.ndarray
    n: int

    def __post_init__(self):
        self.x0 = np.asarray(self.x0, dtype=np.uint64)
        self.x1 = np.asarray(self.x1, dtype=np.uint64)
        if self.x0.shape != self.x1.shape or self.x0.shape != (_nwords(self.n),):
            raise DimensionError("bit-planes must both hold n bits")

    def valid(self) -> bool:
        if np.any(~self.x0 & self.x1):
            return False
        tail = self.n % WORD
        if tail and (self.x0[-1] >> np.uint64(tail) or self.x1[-1] >> np.uint64(tail)):
            return False
        return True

    def __eq__(self, other):
        return (isinstance(other, SlicedF3Vector) and self.n == other.n
                and np.array_equal(self.x0, other.x0) and np.array_equal(self.x1, other.x1))


def f3_slice(values: Sequence[int]) -> SlicedF3Vector:
    v = np.asarray(values, dtype=np.int64) % 3
    bits0 = (v != 0).astype(np.uint8)[None, :]
    bits1 = (v == 2).astype(np.uint8)[None, :]
    n = v.size
    return SlicedF3Vector(_pack_bits(bits0)[0], _pack_bits(bits1)[0], n)


def f3_unslice(x: SlicedF3Vector) -> list[int]:
    """Residues in {0, 1, 2}."""
    b0 = _unpack_bits(x.x0[None, :], x.n)[0].astype(np.int64)
    b1 = _unpack_bits(x.x1[None, :], x.n)[0].astype(np.int64)
    if np.any((b0 == 0) & (b1 == 1)):
        raise ValueError("forbidden encoding [0,1]")
    return (b0 + b1).tolist()


def _same_len(x: SlicedF3Vector, y: SlicedF3Vector) -> None:
    if x.n != y.n:
        raise DimensionError("vectors differ in length")


def f3_add(x: SlicedF3Vector, y: SlicedF3Vector, counter: OpCounter | None = None) -> SlicedF3Vector:
    _same_len(x, y)
    s = x.x0 ^ y.x1
    t = x.x1 ^ y.x0
    # the nonzero flag is the OR term and the sign flag is the AND term
    z0 = (s ^ x.x1) | (t ^ y.x1)
    z1 = s & t
    if counter is not None:
        counter.word_ops += 6
    return SlicedF3Vector(z0, z1, x.n)


def f3_sub(x: SlicedF3Vector, y: SlicedF3Vector, counter: OpCounter | None = None) -> SlicedF3Vector:
    _same_len(x, y)
    t = x.x0 ^ y.x0
    z0 = t | (x.x1 ^ y.x1)
    z1 = (t ^ y.x1) & (y.x0 ^ x.x1)
    if counter is not None:
        counter.word_ops += 6
    return SlicedF3Vector(z0, z1, x.n)


def f3_neg(x: SlicedF3Vector, counter: OpCounter | None = None) -> SlicedF3Vector:
    if counter is not None:
        counter.word_ops += 1
    return SlicedF3Vector(x.x0.copy(), x.x0 ^ x.x1, x.n)


def f3_zeros(n: int) -> SlicedF3Vector:
    z = np.zeros(_nwords(n), dtype=np.uint64)
    return SlicedF3Vector(z, z.copy(), n)


def f3_mm(A: Sequence[SlicedF3Vector], B: Sequence[SlicedF3Vector],
          counter: OpCounter | None = None) -> list[SlicedF3Vector]:
    """Rows of AB over GF(3): each output row adds or subtracts rows of B."""
    if not B:
        raise DimensionError("B has no rows")
    out = []
    for a in A:
        if a.n != len(B):
            raise DimensionError("inner dimensions differ")
        acc = f3_zeros(B[0].n)
        for j, coef in enumerate(f3_unslice(a)):
            if coef == 1:
                acc = f3_add(acc, B[j], counter)
            elif coef == 2:
                acc = f3_sub(acc, B[j], counter)
        out.append(acc)
    return out


def kron_pack(v: Sequence[int], p: int, slot_bits: int) -> PackedInt:
    """Residues in [0, p) as one integer with slot_bits per entry."""
    for i, x in enumerate(v):
        if not 0 <= x < p:
            raise ValueError(f"v[{i}] = {x} is not a canonical residue mod {p}")
    if (p - 1) >> slot_bits:
        raise SlotOverflow(f"p - 1 does not fit in {slot_bits} bits")
    P = pack(v, slot_bits)
    return PackedInt(P.value, slot_bits, P.n, p - 1)


def kron_add(P: PackedInt, Q: PackedInt) -> PackedInt:
    """Slotwise sum by one integer addition; the slot bound adds up."""
    if P.k != Q.k or P.n != Q.n:
        raise DimensionError("packed vectors differ in layout")
    top = (1 << P.k) - 1
    bound = (P.bound if P.bound is not None else top) + (Q.bound if Q.bound is not None else top)
    return PackedInt(P.value + Q.value, P.k, P.n, bound)


def kron_unpack(P: PackedInt) -> list[int]:
    return unpack(P)


def simultaneous_reduce(P: PackedInt, p: int) -> PackedInt:
    """Every slot replaced by its residue mod p (unpack, reduce, repack)."""
    vals = [x % p for x in unpack(P)]
    return PackedInt(pack(vals, P.k).value, P.k, P.n, p - 1)
