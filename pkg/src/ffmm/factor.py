"""Triangular solves and pivot-free LU, with every large update done by fast MM."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .dense import DenseMatrix, DimensionError
from .field import NotInvertible, OpCounter, PrimeField
from .multiply import CascadeConfig, mm_fast_acc


class GenericRankProfileViolation(ArithmeticError):
    """A leading principal minor vanishes, so LU without pivoting does not exist."""


@dataclass
class LuResult:
    L: DenseMatrix
    U: DenseMatrix


@dataclass
class _Run:
    field: PrimeField
    cfg: CascadeConfig
    counter: OpCounter
    mm_counter: OpCounter

    def mm_sub(self, C: np.ndarray, A: np.ndarray, B: np.ndarray) -> None:
        """C <- C - A @ B in place."""
        negA = -A
        self.counter.adds += negA.size
        local = OpCounter()
        f = self.field
        mm_fast_acc(DenseMatrix(C, f), DenseMatrix(negA, f), DenseMatrix(B, f), 1, self.cfg, local)
        self.counter.merge(local)
        self.mm_counter.merge(local)

    def scale_row(self, row: np.ndarray, pivot: int) -> None:
        inv = self.field.inv(int(pivot))
        row *= inv
        self.field.reduce_inplace(row)
        self.counter.mults += row.size + 1
        self.counter.reductions += row.size


def _run(field, cfg, counter, mm_counter) -> _Run:
    return _Run(field, cfg or CascadeConfig(), counter if counter is not None else OpCounter(),
                mm_counter if mm_counter is not None else OpCounter())


def _split(n: int) -> int:
    # first block n//2, the odd row/column goes to the second block
    return n // 2


def _trsm_upper(run: _Run, U: np.ndarray, B: np.ndarray) -> None:
    """Overwrite B with U^-1 B."""
    n = U.shape[0]
    if n == 1:
        if U[0, 0] == 0:
            raise NotInvertible("zero on the diagonal")
        run.scale_row(B[0], U[0, 0])
        return
    n1 = _split(n)
    _trsm_upper(run, U[n1:, n1:], B[n1:])
    run.mm_sub(B[:n1], U[:n1, n1:], B[n1:])
    _trsm_upper(run, U[:n1, :n1], B[:n1])


def _trsm_lower(run: _Run, L: np.ndarray, B: np.ndarray) -> None:
    """Overwrite B with L^-1 B."""
    n = L.shape[0]
    if n == 1:
        if L[0, 0] == 0:
            raise NotInvertible("zero on the diagonal")
        if L[0, 0] != 1:
            run.scale_row(B[0], L[0, 0])
        return
    n1 = _split(n)
    _trsm_lower(run, L[:n1, :n1], B[:n1])
    run.mm_sub(B[n1:], L[n1:, :n1], B[:n1])
    _trsm_lower(run, L[n1:, n1:], B[n1:])


def _check_tri(T: DenseMatrix, B: DenseMatrix) -> PrimeField:
    if T.rows != T.cols:
        raise DimensionError("triangular factor must be square")
    if T.rows != B.rows:
        raise DimensionError("right-hand side has the wrong number of rows")
    if T.field is None or T.field != B.field:
        raise DimensionError("operands must share a prime field")
    return T.field


def trsm_upper(U: DenseMatrix, B: DenseMatrix, cfg: CascadeConfig | None = None,
               counter: OpCounter | None = None, mm_counter: OpCounter | None = None) -> DenseMatrix:
    """X with U X = B for upper triangular U (entries below the diagonal are ignored)."""
    f = _check_tri(U, B)
    X = B.copy()
    _trsm_upper(_run(f, cfg, counter, mm_counter), U.data, X.data)
    return X


def trsm_lower(L: DenseMatrix, B: DenseMatrix, cfg: CascadeConfig | None = None,
               counter: OpCounter | None = None, mm_counter: OpCounter | None = None) -> DenseMatrix:
    """X with L X = B for lower triangular L (entries above the diagonal are ignored)."""
    f = _check_tri(L, B)
    X = B.copy()
    _trsm_lower(_run(f, cfg, counter, mm_counter), L.data, X.data)
    return X


def _lu(run: _Run, A: np.ndarray, L: np.ndarray, U: np.ndarray) -> None:
    n = A.shape[0]
    if n == 1:
        if A[0, 0] == 0:
            raise GenericRankProfileViolation("zero pivot")
        L[0, 0] = 1
        U[0, 0] = A[0, 0]
        return
    n1 = _split(n)
    _lu(run, A[:n1, :n1], L[:n1, :n1], U[:n1, :n1])
    # G = A3 U1^-1, computed as the transpose of U1^T \ A3^T
    G = A[n1:, :n1].T.copy()
    _trsm_lower(run, U[:n1, :n1].T, G)
    L[n1:, :n1] = G.T
    # H = L1^-1 A2
    H = A[:n1, n1:].copy()
    _trsm_lower(run, L[:n1, :n1], H)
    U[:n1, n1:] = H
    Z = A[n1:, n1:].copy()
    run.mm_sub(Z, L[n1:, :n1], H)
    _lu(run, Z, L[n1:, n1:], U[n1:, n1:])


def lu(A: DenseMatrix, cfg: CascadeConfig | None = None, counter: OpCounter | None = None,
       mm_counter: OpCounter | None = None) -> LuResult:
    """A = L U with L unit lower and U upper triangular, no pivoting."""
    if A.rows != A.cols:
        raise DimensionError("LU needs a square matrix")
    if A.field is None:
        raise DimensionError("LU works over a prime field")
    n = A.rows
    L = DenseMatrix.zeros(n, n, A.field)
    U = DenseMatrix.zeros(n, n, A.field)
    _lu(_run(A.field, cfg, counter, mm_counter), A.data, L.data, U.data)
    return LuResult(L, U)


def det(A: DenseMatrix, cfg: CascadeConfig | None = None, counter: OpCounter | None = None):
    from .field import FieldElem

    res = lu(A, cfg, counter)
    f = A.field
    d = 1
    for i in range(A.rows):
        d = f.reduce(d * int(res.U.data[i, i]))
    if counter is not None:
        counter.mults += A.rows
    return FieldElem(d, f)


def inverse(A: DenseMatrix, cfg: CascadeConfig | None = None, counter: OpCounter | None = None,
            mm_counter: OpCounter | None = None) -> DenseMatrix:
    res = lu(A, cfg, counter, mm_counter)
    eye = DenseMatrix.identity(A.rows, A.field)
    Y = trsm_lower(res.L, eye, cfg, counter, mm_counter)
    return trsm_upper(res.U, Y, cfg, counter, mm_counter)
