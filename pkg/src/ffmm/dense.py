"""Row-major dense matrices backed by numpy arrays, with zero-copy block views."""

from __future__ import annotations

from dataclasses import dataclass
from pathlib import Path
from typing import Iterable

import numpy as np

from .field import FieldError, OpCounter, PrimeField


class DimensionError(ValueError):
    pass


@dataclass(eq=False)
class DenseMatrix:
    """A matrix over a prime field (``field`` set) or over the integers.

    Integer matrices use ``int64`` storage when ``bigint`` is false and
    Python-object storage otherwise.  Field matrices always hold canonical
    residues in ``int64``.
    """

    data: np.ndarray
    field: PrimeField | None = None

    def __post_init__(self):
        if self.data.ndim != 2:
            raise DimensionError("matrix data must be two-dimensional")

    @property
    def rows(self) -> int:
        return self.data.shape[0]

    @property
    def cols(self) -> int:
        return self.data.shape[1]

    @property
    def shape(self) -> tuple[int, int]:
        return self.data.shape

    @property
    def stride(self) -> int:
        """Leading dimension in elements (distance between row starts)."""
        return max(self.data.strides[0] // self.data.itemsize, self.cols)

    @property
    def is_bigint(self) -> bool:
        return self.data.dtype == object

    # construction helpers

    @classmethod
    def zeros(cls, rows: int, cols: int, field: PrimeField | None = None, bigint: bool = False):
        dtype = object if bigint else np.int64
        data = np.zeros((rows, cols), dtype=dtype)
        if bigint:
            data[...] = 0
        return cls(data, field)

    @classmethod
    def identity(cls, n: int, field: PrimeField | None = None, bigint: bool = False):
        m = cls.zeros(n, n, field, bigint)
        for i in range(n):
            m.data[i, i] = 1
        return m

    @classmethod
    def from_rows(cls, rows: Iterable[Iterable[int]], field: PrimeField | None = None, bigint: bool = False):
        rows = [list(r) for r in rows]
        if not rows:
            raise DimensionError("empty matrix")
        width = len(rows[0])
        if any(len(r) != width for r in rows):
            raise DimensionError("ragged rows")
        if field is not None:
            rows = [[field.reduce(int(x)) for x in r] for r in rows]
            data = np.array(rows, dtype=np.int64)
        elif bigint:
            data = np.empty((len(rows), width), dtype=object)
            for i, r in enumerate(rows):
                for j, x in enumerate(r):
                    data[i, j] = int(x)
        else:
            data = np.array(rows, dtype=np.int64)
        return cls(data, field)

    @classmethod
    def random(cls, rows: int, cols: int, field: PrimeField, rng: np.random.Generator):
        lo = -field.half if field.rep == "balanced" else 0
        hi = field.half
        return cls(rng.integers(lo, hi + 1, size=(rows, cols), dtype=np.int64), field)

    def copy(self) -> "DenseMatrix":
        return DenseMatrix(self.data.copy(), self.field)

    def tolist(self) -> list[list[int]]:
        return [[int(x) for x in r] for r in self.data]

    def __eq__(self, other):
        if not isinstance(other, DenseMatrix):
            return NotImplemented
        return (
            self.shape == other.shape
            and self.field == other.field
            and bool(np.all(self.data == other.data))
        )

    def __getitem__(self, ij):
        return int(self.data[ij])

    def __repr__(self):
        return f"DenseMatrix({self.rows}x{self.cols}, field={self.field})"


def block(M: DenseMatrix, row0: int, col0: int, nrows: int, ncols: int) -> DenseMatrix:
    """A view of the window ``M[row0:row0+nrows, col0:col0+ncols]`` sharing storage."""
    if min(row0, col0, nrows, ncols) < 0 or row0 + nrows > M.rows or col0 + ncols > M.cols:
        raise DimensionError(
            f"window ({row0},{col0},{nrows},{ncols}) outside {M.rows}x{M.cols}"
        )
    return DenseMatrix(M.data[row0:row0 + nrows, col0:col0 + ncols], M.field)


def _check_same(A: DenseMatrix, B: DenseMatrix) -> None:
    if A.shape != B.shape:
        raise DimensionError(f"shape mismatch {A.shape} vs {B.shape}")
    if A.field != B.field:
        raise FieldError("operands belong to different fields")


def mat_addsub(A: DenseMatrix, B: DenseMatrix, op: str = "add", counter: OpCounter | None = None) -> DenseMatrix:
    _check_same(A, B)
    if op == "add":
        out = A.data + B.data
    elif op == "sub":
        out = A.data - B.data
    else:
        raise ValueError(f"unknown operation {op!r}")
    if A.field is not None:
        out = A.field.reduce_array(out)
        if counter is not None:
            counter.reductions += A.rows * A.cols
    if counter is not None:
        counter.adds += A.rows * A.cols
    return DenseMatrix(out, A.field)


# text file format: "rows cols modulus" then row-major entries

def format_matrix(M: DenseMatrix) -> str:
    mod = 0 if M.field is None else M.field.p
    lines = [f"{M.rows} {M.cols} {mod}"]
    p = None if M.field is None else M.field.p
    lines += [" ".join(str(int(x) if p is None else int(x) % p) for x in r) for r in M.data]
    return "\n".join(lines) + "\n"


def parse_matrix(text: str, rep: str = "balanced") -> DenseMatrix:
    tokens = text.split()
    if len(tokens) < 3:
        raise ValueError("missing header 'rows cols modulus'")
    try:
        rows, cols, mod = (int(t) for t in tokens[:3])
        entries = [int(t) for t in tokens[3:]]
    except ValueError as exc:
        raise ValueError(f"non-integer token: {exc}") from None
    if rows < 1 or cols < 1 or mod < 0:
        raise ValueError("bad header")
    if len(entries) != rows * cols:
        raise ValueError(f"expected {rows * cols} entries, found {len(entries)}")
    grid = [entries[i * cols:(i + 1) * cols] for i in range(rows)]
    if mod == 0:
        big = any(abs(x) >= 1 << 62 for x in entries)
        return DenseMatrix.from_rows(grid, None, bigint=big)
    return DenseMatrix.from_rows(grid, PrimeField(mod, rep=rep))


def read_matrix(path: str | Path, rep: str = "balanced") -> DenseMatrix:
    return parse_matrix(Path(path).read_text(), rep)


def write_matrix(path: str | Path, M: DenseMatrix) -> None:
    Path(path).write_text(format_matrix(M))
