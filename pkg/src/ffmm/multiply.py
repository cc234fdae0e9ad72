"""Matrix multiplication kernels over word-size prime fields.

The cascade recurses with a 2x2 bilinear scheme (Winograd by default) and
falls back to the classical kernel once a dimension drops to the base
threshold.  Odd dimensions are peeled: the even core recurses and the
fringe row, column and inner slice are patched with classical products.

Every intermediate array carries an upper bound on the magnitude of its
entries.  Reductions are applied only when a bound would make the next
accumulation overflow, which is how delayed reduction is realised here.
"""

from __future__ import annotations

from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field as dc_field
from fractions import Fraction
from typing import Callable

import numpy as np

from .dense import DenseMatrix, DimensionError, block
from .field import FieldError, OpCounter, PrimeField

FLOAT_EXACT = 1 << 53
# sums of two values below this cannot overflow int64
ADD_CAP = 1 << 61


@dataclass
class CascadeConfig:
    base_threshold: int = 64
    scheme: object = "winograd"
    max_levels: int = 64
    parallel_tasks: int = 1

    def __post_init__(self):
        if self.base_threshold < 1:
            raise ValueError("base_threshold must be >= 1")
        if self.max_levels < 0:
            raise ValueError("max_levels must be >= 0")
        if self.parallel_tasks < 1:
            raise ValueError("parallel_tasks must be >= 1")
        if isinstance(self.scheme, str) and self.scheme not in ("winograd", "strassen"):
            raise ValueError(f"unknown scheme {self.scheme!r}")


@dataclass
class Workspace:
    """Tracks live temporaries per recursion depth and their peaks."""

    live: dict = dc_field(default_factory=dict)
    peak: dict = dc_field(default_factory=dict)
    # largest temporary seen at each depth, as a fraction of its parent operand
    max_fraction: dict = dc_field(default_factory=dict)

    def alloc(self, depth: int, shape: tuple, parent_shape: tuple) -> None:
        n = self.live.get(depth, 0) + 1
        self.live[depth] = n
        self.peak[depth] = max(self.peak.get(depth, 0), n)
        frac = Fraction(shape[0] * shape[1], max(parent_shape[0] * parent_shape[1], 1))
        self.max_fraction[depth] = max(self.max_fraction.get(depth, Fraction(0)), frac)

    def free(self, depth: int) -> None:
        self.live[depth] -= 1

    @property
    def max_live(self) -> int:
        return max(self.peak.values(), default=0)


@dataclass
class _Ctx:
    field: PrimeField
    counter: OpCounter
    cfg: CascadeConfig
    ws: Workspace | None

    @property
    def h(self) -> int:
        return self.field.half

    @property
    def float_limit(self) -> int:
        return min(FLOAT_EXACT, self.field.limit)

    @property
    def int_limit(self) -> int:
        return self.field.limit

    def reduce(self, a: np.ndarray) -> None:
        self.field.reduce_inplace(a)
        self.counter.reductions += a.size


# ---------------------------------------------------------------- helpers

def _check_mul(A: DenseMatrix, B: DenseMatrix) -> PrimeField | None:
    if A.cols != B.rows:
        raise DimensionError(f"cannot multiply {A.rows}x{A.cols} by {B.rows}x{B.cols}")
    if A.field != B.field:
        raise FieldError("operands belong to different fields")
    return A.field


def _add(ctx: _Ctx, out: np.ndarray, x: np.ndarray, bx: int, y: np.ndarray, by: int, sign: int = 1) -> int:
    """out <- x + sign*y; returns the bound of out (out must be owned)."""
    if sign > 0:
        np.add(x, y, out=out)
    else:
        np.subtract(x, y, out=out)
    ctx.counter.adds += out.size
    b = bx + by
    if b > ADD_CAP:
        ctx.reduce(out)
        b = ctx.h
    return b


def _fit(ctx: _Ctx, a: np.ndarray, ba: int, bb: int, n: int, limit: int) -> tuple[np.ndarray, int]:
    """Reduce a copy of ``a`` if that brings ``ba*bb*n`` under ``limit``."""
    if ba * bb * n < limit or ba <= ctx.h:
        return a, ba
    a = a.copy()
    ctx.reduce(a)
    return a, ctx.h


def _leaf(ctx: _Ctx, out: np.ndarray, a: np.ndarray, ba: int, b: np.ndarray, bb: int,
          acc: bool = False, bo: int = 0) -> int:
    """Classical product (or accumulation) with delayed reduction.

    The inner dimension is summed in as few blocks as the accumulator
    allows, with one reduction of the output per block.
    """
    m, n = a.shape
    p = b.shape[1]
    c = ctx.counter
    c.mults += m * n * p
    c.adds += m * p * (n - 1) + (m * p if acc else 0)
    if m == 0 or p == 0:
        return bo if acc else 0
    if n == 0:
        if not acc:
            out[...] = 0
        return bo if acc else 0
    flim = ctx.float_limit
    if ba * bb * n >= flim:
        a, ba = _fit(ctx, a, ba, bb, n, flim)
        b, bb = _fit(ctx, b, bb, ba, n, flim)
    if ba * bb * n < flim:
        res = (a.astype(np.float64) @ b.astype(np.float64)).astype(np.int64)
        ctx.reduce(res)
    else:
        # chunked integer accumulation; first chunk k, later chunks leave room for the carry
        ilim = ctx.int_limit
        k = max((ilim - 1) // (ba * bb), 1)
        h = ctx.h
        res = None
        i = 0
        while i < n:
            j = min(n, i + k)
            part = a[:, i:j] @ b[i:j, :]
            if res is not None:
                part += res
            ctx.reduce(part)
            res = part
            i = j
            k = max((ilim - 1 - h) // (ba * bb), 1)
    if acc:
        out += res
        bo = bo + ctx.h
        if bo > ADD_CAP:
            ctx.reduce(out)
            bo = ctx.h
        return bo
    out[...] = res
    return ctx.h


def _negate(ctx: _Ctx, out: np.ndarray) -> None:
    np.negative(out, out=out)
    ctx.counter.adds += out.size


def _dims(ctx: _Ctx) -> tuple[int, int, int]:
    s = ctx.cfg.scheme
    if isinstance(s, str):
        return 2, 2, 2
    return s.m, s.n, s.p


def _is_base(ctx: _Ctx, m: int, n: int, p: int, depth: int) -> bool:
    dm, dn, dp = _dims(ctx)
    t = ctx.cfg.base_threshold
    return (
        min(m, n, p) <= t
        or depth >= ctx.cfg.max_levels
        or m < dm or n < dn or p < dp
    )


# ---------------------------------------------------------------- recursion

def _rec(ctx: _Ctx, out, a, ba, b, bb, depth: int, acc: bool = False, bo: int = 0) -> int:
    """out <- a@b (or out += a@b); returns the entry bound of out."""
    m, n = a.shape
    p = b.shape[1]
    if _is_base(ctx, m, n, p, depth):
        return _leaf(ctx, out, a, ba, b, bb, acc, bo)
    dm, dn, dp = _dims(ctx)
    m0, n0, p0 = m - m % dm, n - n % dn, p - p % dp
    if (m0, n0, p0) == (m, n, p):
        return _core(ctx, out, a, ba, b, bb, depth, acc, bo)
    # dynamic peeling: even core recursion plus classical fringe patches
    bc = _core(ctx, out[:m0, :p0], a[:m0, :n0], ba, b[:n0, :p0], bb, depth, acc, bo)
    if n0 < n:
        bc = _leaf(ctx, out[:m0, :p0], a[:m0, n0:], ba, b[n0:, :p0], bb, True, bc)
    bound = bc
    if p0 < p:
        bound = max(bound, _leaf(ctx, out[:m0, p0:], a[:m0, :], ba, b[:, p0:], bb, acc, bo))
    if m0 < m:
        bound = max(bound, _leaf(ctx, out[m0:, :], a[m0:, :], ba, b, bb, acc, bo))
    return bound


def _core(ctx, out, a, ba, b, bb, depth, acc, bo):
    s = ctx.cfg.scheme
    if isinstance(s, str) and s == "winograd":
        if acc:
            return _winograd_acc(ctx, out, a, ba, b, bb, depth, bo)
        return _winograd(ctx, out, a, ba, b, bb, depth)
    if isinstance(s, str) and s == "strassen":
        if acc:
            return _via_temp_acc(ctx, out, a, ba, b, bb, depth, bo, _strassen)
        return _strassen(ctx, out, a, ba, b, bb, depth)
    if acc:
        return _via_temp_acc(ctx, out, a, ba, b, bb, depth, bo, _generic)
    return _generic(ctx, out, a, ba, b, bb, depth)


def _quads(x: np.ndarray):
    r, c = x.shape[0] // 2, x.shape[1] // 2
    return x[:r, :c], x[:r, c:], x[r:, :c], x[r:, c:]


class _Temps:
    """Allocates quarter-size temporaries and reports them to the workspace."""

    def __init__(self, ctx: _Ctx, depth: int, parent_shapes: dict):
        self.ctx, self.depth, self.parent = ctx, depth, parent_shapes

    def new(self, kind: str, shape: tuple) -> np.ndarray:
        if self.ctx.ws is not None:
            self.ctx.ws.alloc(self.depth, shape, self.parent[kind])
        return np.empty(shape, dtype=np.int64)

    def free(self) -> None:
        if self.ctx.ws is not None:
            self.ctx.ws.free(self.depth)


def _winograd(ctx, out, a, ba, b, bb, depth):
    """Product schedule with two temporaries: 7 recursive products, 15 additions."""
    u11, u12, u21, u22 = _quads(a)
    v11, v12, v21, v22 = _quads(b)
    c11, c12, c21, c22 = _quads(out)
    T = _Temps(ctx, depth, {"A": a.shape, "B": b.shape, "C": out.shape})
    d = depth + 1
    X = T.new("A", u11.shape)
    Y = T.new("B", v11.shape)
    bs3 = _add(ctx, X, u11, ba, u21, ba, -1)
    bs7 = _add(ctx, Y, v22, bb, v12, bb, -1)
    b21 = _rec(ctx, c21, X, bs3, Y, bs7, d)                       # p4
    bs1 = _add(ctx, X, u21, ba, u22, ba)
    bs5 = _add(ctx, Y, v12, bb, v11, bb, -1)
    b22 = _rec(ctx, c22, X, bs1, Y, bs5, d)                       # p5
    bs2 = _add(ctx, X, X, bs1, u11, ba, -1)
    bs6 = _add(ctx, Y, v22, bb, Y, bs5, -1)
    b12 = _rec(ctx, c12, X, bs2, Y, bs6, d)                       # p1
    bs4 = _add(ctx, X, u12, ba, X, bs2, -1)
    b11 = _rec(ctx, c11, X, bs4, v22, bb, d)                      # p6
    T.free()
    Z = T.new("C", c11.shape)
    bz = _rec(ctx, Z, u11, ba, v11, bb, d)                        # p2
    b12 = _add(ctx, c12, c12, b12, Z, bz)                         # t1
    b21 = _add(ctx, c21, c12, b12, c21, b21)                      # t2
    b12 = _add(ctx, c12, c12, b12, c22, b22)                      # t3
    b22 = _add(ctx, c22, c21, b21, c22, b22)                      # x22
    b12 = _add(ctx, c12, c12, b12, c11, b11)                      # x12
    bs8 = _add(ctx, Y, Y, bs6, v21, bb, -1)
    b11 = _rec(ctx, c11, u22, ba, Y, bs8, d)                      # p7
    T.free()
    b21 = _add(ctx, c21, c21, b21, c11, b11, -1)                  # x21
    b11 = _rec(ctx, c11, u12, ba, v21, bb, d)                     # p3
    b11 = _add(ctx, c11, Z, bz, c11, b11)                         # x11
    T.free()
    return max(b11, b12, b21, b22)


def _winograd_acc(ctx, out, a, ba, b, bb, depth, bo):
    """out += a@b with two temporaries.

    The output quadrants are first mapped to a basis in which every product
    lands in at most two places, then mapped back.
    """
    u11, u12, u21, u22 = _quads(a)
    v11, v12, v21, v22 = _quads(b)
    c11, c12, c21, c22 = _quads(out)
    T = _Temps(ctx, depth, {"A": a.shape, "B": b.shape, "C": out.shape})
    d = depth + 1
    b11 = b12 = b21 = b22 = bo
    b22 = _add(ctx, c22, c22, b22, c21, b21, -1)
    b12 = _add(ctx, c12, c12, b12, c22, b22, -1)
    b21 = _add(ctx, c21, c21, b21, c12, b12, -1)
    X = T.new("A", u11.shape)
    Y = T.new("B", v11.shape)
    bs3 = _add(ctx, X, u11, ba, u21, ba, -1)
    bs7 = _add(ctx, Y, v22, bb, v12, bb, -1)
    b21 = _rec(ctx, c21, X, bs3, Y, bs7, d, True, b21)            # += p4
    bs1 = _add(ctx, X, u21, ba, u22, ba)
    bs5 = _add(ctx, Y, v12, bb, v11, bb, -1)
    b22 = _rec(ctx, c22, X, bs1, Y, bs5, d, True, b22)            # += p5
    bs2 = _add(ctx, X, X, bs1, u11, ba, -1)
    bs6 = _add(ctx, Y, v22, bb, Y, bs5, -1)
    b12 = _rec(ctx, c12, X, bs2, Y, bs6, d, True, b12)            # += p1
    T.free()
    bs4 = _add(ctx, X, u12, ba, X, bs2, -1)
    Z = T.new("C", c11.shape)
    bz = _rec(ctx, Z, X, bs4, v22, bb, d)                         # p6
    T.free()
    b12 = _add(ctx, c12, c12, b12, Z, bz)
    b21 = _add(ctx, c21, c21, b21, Z, bz, -1)
    bz = _rec(ctx, Z, u11, ba, v11, bb, d)                        # p2
    b11 = _add(ctx, c11, c11, b11, Z, bz)
    b12 = _add(ctx, c12, c12, b12, Z, bz)
    T.free()
    b11 = _rec(ctx, c11, u12, ba, v21, bb, d, True, b11)          # += p3
    Y = T.new("B", v11.shape)
    bs5 = _add(ctx, Y, v12, bb, v11, bb, -1)
    bs6 = _add(ctx, Y, v22, bb, Y, bs5, -1)
    bs8 = _add(ctx, Y, Y, bs6, v21, bb, -1)
    Z = T.new("C", c11.shape)
    bz = _rec(ctx, Z, u22, ba, Y, bs8, d)                         # p7
    T.free()
    b12 = _add(ctx, c12, c12, b12, Z, bz, -1)
    b22 = _add(ctx, c22, c22, b22, Z, bz)
    T.free()
    b21 = _add(ctx, c21, c21, b21, c12, b12)
    b12 = _add(ctx, c12, c12, b12, c22, b22)
    b22 = _add(ctx, c22, c22, b22, c21, b21)
    return max(b11, b12, b21, b22)


def _strassen(ctx, out, a, ba, b, bb, depth):
    """Product schedule with two temporaries: 7 recursive products, 18 additions."""
    u11, u12, u21, u22 = _quads(a)
    v11, v12, v21, v22 = _quads(b)
    c11, c12, c21, c22 = _quads(out)
    T = _Temps(ctx, depth, {"A": a.shape, "B": b.shape, "C": out.shape})
    d = depth + 1
    X = T.new("A", u11.shape)
    Y = T.new("B", v11.shape)
    bx = _add(ctx, X, u11, ba, u22, ba)
    by = _add(ctx, Y, v11, bb, v22, bb)
    b11 = _rec(ctx, c11, X, bx, Y, by, d)                         # p1
    bx = _add(ctx, X, u21, ba, u11, ba, -1)
    by = _add(ctx, Y, v11, bb, v12, bb)
    b22 = _rec(ctx, c22, X, bx, Y, by, d)                         # p4
    b22 = _add(ctx, c22, c22, b22, c11, b11)
    bx = _add(ctx, X, u12, ba, u22, ba, -1)
    by = _add(ctx, Y, v21, bb, v22, bb)
    b21 = _rec(ctx, c21, X, bx, Y, by, d)                         # p7
    b11 = _add(ctx, c11, c11, b11, c21, b21)
    bx = _add(ctx, X, u21, ba, u22, ba)
    b21 = _rec(ctx, c21, X, bx, v11, bb, d)                       # p2
    b22 = _add(ctx, c22, c22, b22, c21, b21, -1)
    T.free()
    by = _add(ctx, Y, v12, bb, v22, bb, -1)
    b12 = _rec(ctx, c12, u11, ba, Y, by, d)                       # p3
    b22 = _add(ctx, c22, c22, b22, c12, b12)
    by = _add(ctx, Y, v21, bb, v11, bb, -1)
    Z = T.new("C", c11.shape)
    bz = _rec(ctx, Z, u22, ba, Y, by, d)                          # p6
    T.free()
    b21 = _add(ctx, c21, c21, b21, Z, bz)
    b11 = _add(ctx, c11, c11, b11, Z, bz)
    X = T.new("A", u11.shape)
    bx = _add(ctx, X, u11, ba, u12, ba)
    bz = _rec(ctx, Z, X, bx, v22, bb, d)                          # p5
    T.free()
    b12 = _add(ctx, c12, c12, b12, Z, bz)
    b11 = _add(ctx, c11, c11, b11, Z, bz, -1)
    T.free()
    return max(b11, b12, b21, b22)


def _via_temp_acc(ctx, out, a, ba, b, bb, depth, bo, product):
    T = _Temps(ctx, depth, {"C": out.shape})
    Z = T.new("C", out.shape)
    bz = product(ctx, Z, a, ba, b, bb, depth)
    bo = _add(ctx, out, out, bo, Z, bz)
    T.free()
    return bo


def _field_coeff(field: PrimeField, c) -> int:
    c = Fraction(c)
    return field.reduce(c.numerator * pow(c.denominator, -1, field.p))


def _lin_form(ctx, dst, blocks, bnd, coeffs, field) -> int:
    """dst <- sum of coeff*block over the nonzero coefficients."""
    first = True
    bound = 0
    for blk, bblk, c in zip(blocks, bnd, coeffs):
        if c == 0:
            continue
        cf = _field_coeff(field, c)
        if cf in (1, -1):
            term, bt = blk, bblk
            sign = cf
        else:
            if bblk * abs(cf) > ADD_CAP:
                term = blk.copy()
                ctx.reduce(term)
                bblk = ctx.h
            else:
                term = blk
            term = term * cf
            ctx.counter.mults += term.size
            bt = bblk * abs(cf)
            sign = 1
        if first:
            if sign > 0:
                dst[...] = term
            else:
                np.negative(term, out=dst)
                ctx.counter.adds += dst.size
            bound = bt
            first = False
        else:
            bound = _add(ctx, dst, dst, bound, term, bt, sign)
    if first:
        dst[...] = 0
    return bound


def _generic(ctx, out, a, ba, b, bb, depth):
    """Product using an arbitrary verified bilinear scheme."""
    s = ctx.cfg.scheme
    sm, sn, sp = s.m, s.n, s.p
    rm, rn, rp = a.shape[0] // sm, a.shape[1] // sn, b.shape[1] // sp
    ablk = [a[i * rm:(i + 1) * rm, j * rn:(j + 1) * rn] for i in range(sm) for j in range(sn)]
    bblk = [b[j * rn:(j + 1) * rn, k * rp:(k + 1) * rp] for j in range(sn) for k in range(sp)]
    cblk = [out[i * rm:(i + 1) * rm, k * rp:(k + 1) * rp] for i in range(sm) for k in range(sp)]
    T = _Temps(ctx, depth, {"A": a.shape, "B": b.shape, "C": out.shape})
    X = T.new("A", (rm, rn))
    Y = T.new("B", (rn, rp))
    P = T.new("C", (rm, rp))
    cb = [0] * len(cblk)
    touched = [False] * len(cblk)
    d = depth + 1
    for q in range(s.rank):
        bx = _lin_form(ctx, X, ablk, [ba] * len(ablk), s.A[q], ctx.field)
        by = _lin_form(ctx, Y, bblk, [bb] * len(bblk), s.B[q], ctx.field)
        bp = _rec(ctx, P, X, bx, Y, by, d)
        for t in range(len(cblk)):
            g = s.C[t][q]
            if g == 0:
                continue
            cf = _field_coeff(ctx.field, g)
            if cf in (1, -1):
                term, bt, sign = P, bp, cf
            else:
                term = P * cf
                ctx.counter.mults += term.size
                bt, sign = bp * abs(cf), 1
                if bt > ADD_CAP:
                    ctx.reduce(term)
                    bt = ctx.h
            if not touched[t]:
                if sign > 0:
                    cblk[t][...] = term
                else:
                    np.negative(term, out=cblk[t])
                cb[t] = bt
                touched[t] = True
            else:
                cb[t] = _add(ctx, cblk[t], cblk[t], cb[t], term, bt, sign)
    for t in range(len(cblk)):
        if not touched[t]:
            cblk[t][...] = 0
    for _ in range(3):
        T.free()
    return max(cb)


# ---------------------------------------------------------------- public API

def _prepare(A: DenseMatrix, B: DenseMatrix, counter, cfg, ws):
    f = _check_mul(A, B)
    if f is None:
        raise FieldError("fast multiplication needs field matrices")
    return _Ctx(f, counter if counter is not None else OpCounter(), cfg or CascadeConfig(), ws)


def _finish(ctx: _Ctx, out: np.ndarray, bound: int) -> None:
    if bound > ctx.h:
        ctx.reduce(out)


def mm_classic(A: DenseMatrix, B: DenseMatrix, counter: OpCounter | None = None) -> DenseMatrix:
    """Triple-loop product, one reduction per accumulator-sized inner block.

    Integer matrices (no field) are multiplied exactly with Python integers.
    """
    f = _check_mul(A, B)
    if f is None:
        a = A.data.astype(object)
        b = B.data.astype(object)
        if counter is not None:
            counter.mults += A.rows * A.cols * B.cols
            counter.adds += A.rows * B.cols * (A.cols - 1)
        return DenseMatrix(a @ b, None)
    ctx = _Ctx(f, counter if counter is not None else OpCounter(), CascadeConfig(), None)
    out = np.empty((A.rows, B.cols), dtype=np.int64)
    h = f.half
    _leaf(ctx, out, A.data, h, B.data, h)
    return DenseMatrix(out, f)


def mm_fast(A: DenseMatrix, B: DenseMatrix, cfg: CascadeConfig | None = None,
            counter: OpCounter | None = None, workspace: Workspace | None = None) -> DenseMatrix:
    ctx = _prepare(A, B, counter, cfg, workspace)
    out = np.empty((A.rows, B.cols), dtype=np.int64)
    h = ctx.h
    bound = _rec(ctx, out, A.data, h, B.data, h, 0)
    _finish(ctx, out, bound)
    return DenseMatrix(out, ctx.field)


def _split_winograd(u, v, f):
    u11, u12, u21, u22 = u[:, :f, :f], u[:, :f, f:], u[:, f:, :f], u[:, f:, f:]
    v11, v12, v21, v22 = v[:, :f, :f], v[:, :f, f:], v[:, f:, :f], v[:, f:, f:]
    s1 = u21 + u22
    s2 = s1 - u11
    s3 = u11 - u21
    s4 = u12 - s2
    t1 = v12 - v11
    t2 = v22 - t1
    t3 = v22 - v12
    t4 = t2 - v21
    return [s2, u11, u12, s3, s1, s4, u22], [t2, v11, v21, t3, t1, v22, t4], 8


def _join_winograd(p):
    p1, p2, p3, p4, p5, p6, p7 = p
    t1 = p1 + p2
    t2 = t1 + p4
    t3 = t1 + p5
    return (p2 + p3, t3 + p6, t2 - p7, t2 + p5), 7


def _split_strassen(u, v, f):
    u11, u12, u21, u22 = u[:, :f, :f], u[:, :f, f:], u[:, f:, :f], u[:, f:, f:]
    v11, v12, v21, v22 = v[:, :f, :f], v[:, :f, f:], v[:, f:, :f], v[:, f:, f:]
    left = [u11 + u22, u21 + u22, u11, u22, u11 + u12, u21 - u11, u12 - u22]
    right = [v11 + v22, v11, v12 - v22, v21 - v11, v22, v11 + v12, v21 + v22]
    return left, right, 10


def _join_strassen(p):
    p1, p2, p3, p4, p5, p6, p7 = p
    return (p1 + p4 - p5 + p7, p3 + p5, p2 + p4, p1 - p2 + p3 + p6), 8


_BATCHED = {"winograd": (_split_winograd, _join_winograd), "strassen": (_split_strassen, _join_strassen)}


def mm_fast_batched(A: DenseMatrix, B: DenseMatrix, scheme: str = "winograd",
                    counter: OpCounter | None = None) -> DenseMatrix:
    """Full recursion down to 1x1 on square power-of-two matrices, one level at a time.

    All 7**l subproblems of level l are stacked into one array, so the work
    per level is a handful of numpy calls.  The arithmetic and its counts
    match ``mm_fast`` with ``base_threshold=1``; only the evaluation order
    differs (breadth-first instead of depth-first).
    """
    f = _check_mul(A, B)
    n = A.rows
    if f is None or not (A.cols == B.rows == B.cols == n) or n & (n - 1):
        raise DimensionError("batched recursion needs square power-of-two field matrices")
    split, join = _BATCHED[scheme]
    counter = counter if counter is not None else OpCounter()
    u, v = A.data[None].copy(), B.data[None].copy()
    size = n
    while size > 1:
        half = size // 2
        left, right, adds = split(u, v, half)
        counter.adds += adds * u.shape[0] * half * half
        u = f.reduce_array(np.stack(left, axis=1).reshape(-1, half, half))
        v = f.reduce_array(np.stack(right, axis=1).reshape(-1, half, half))
        counter.reductions += 2 * u.size
        size = half
    c = f.reduce_array(u * v)
    counter.mults += c.shape[0]
    counter.reductions += c.size
    while c.shape[0] > 1:
        half = c.shape[1]
        p = c.reshape(-1, 7, half, half)
        quads, adds = join([p[:, i] for i in range(7)])
        counter.adds += adds * p.shape[0] * half * half
        top = np.concatenate(quads[:2], axis=2)
        bottom = np.concatenate(quads[2:], axis=2)
        c = f.reduce_array(np.concatenate([top, bottom], axis=1))
        counter.reductions += c.size
    return DenseMatrix(c[0], f)


def mm_fast_acc(C: DenseMatrix, A: DenseMatrix, B: DenseMatrix, beta: int = 1,
                cfg: CascadeConfig | None = None, counter: OpCounter | None = None,
                workspace: Workspace | None = None) -> DenseMatrix:
    """C <- beta*C + A@B in place (beta in {0, 1, -1}); returns C."""
    ctx = _prepare(A, B, counter, cfg, workspace)
    if C.shape != (A.rows, B.cols):
        raise DimensionError("accumulator shape does not match the product")
    if C.field != ctx.field:
        raise FieldError("accumulator belongs to a different field")
    h = ctx.h
    if beta == 0:
        bound = _rec(ctx, C.data, A.data, h, B.data, h, 0)
    elif beta in (1, -1):
        if beta == -1:
            _negate(ctx, C.data)
        bound = _rec(ctx, C.data, A.data, h, B.data, h, 0, True, h)
    else:
        raise ValueError("beta must be 0, 1 or -1")
    _finish(ctx, C.data, bound)
    return C


def winograd_step(U: DenseMatrix, V: DenseMatrix, counter: OpCounter | None = None,
                  schedule: str = "product") -> DenseMatrix:
    """One 2x2 Winograd step whose seven block products use the classical kernel."""
    return _one_step(U, V, counter, "winograd", schedule)


def strassen_step(U: DenseMatrix, V: DenseMatrix, counter: OpCounter | None = None) -> DenseMatrix:
    return _one_step(U, V, counter, "strassen", "product")


def _one_step(U, V, counter, scheme, schedule):
    if U.rows % 2 or U.cols % 2 or V.cols % 2:
        raise DimensionError("a 2x2 step needs even dimensions")
    cfg = CascadeConfig(base_threshold=1, scheme=scheme, max_levels=1)
    if schedule == "product":
        return mm_fast(U, V, cfg, counter)
    if schedule == "accumulate":
        C = DenseMatrix.zeros(U.rows, V.cols, U.field)
        return mm_fast_acc(C, U, V, 1, cfg, counter)
    raise ValueError(f"unknown schedule {schedule!r}")


def mm_waksman(A: DenseMatrix, B: DenseMatrix, counter: OpCounter | None = None) -> DenseMatrix:
    """Commutative product with about half the multiplications.

    Each pair of inner indices (2j, 2j+1) contributes
    ``(a[i,2j] + b[2j+1,k]) * (a[i,2j+1] + b[2j,k])`` minus the row term
    ``a[i,2j]*a[i,2j+1]`` and the column term ``b[2j,k]*b[2j+1,k]``.  This
    relies on scalars commuting, so only prime-field residues are accepted.
    """
    for M in (A, B):
        if not isinstance(M, DenseMatrix) or M.field is None or M.data.dtype != np.int64:
            raise TypeError("mm_waksman needs commutative field scalars")
    f = _check_mul(A, B)
    m, n = A.shape
    p = B.cols
    if n % 2:
        raise DimensionError("mm_waksman needs an even inner dimension")
    ctx = _Ctx(f, counter if counter is not None else OpCounter(), CascadeConfig(), None)
    c = ctx.counter
    h = f.half
    a, b = A.data, B.data
    half = n // 2
    # factor sums stay below 2h; reduce them if their product could overflow
    fb = 2 * h
    reduce_factors = fb * fb >= ctx.int_limit
    if reduce_factors:
        fb = h
    per_block = max((ctx.int_limit - 1 - h) // (fb * fb), 1)
    acc = np.zeros((m, p), dtype=np.int64)
    pending = 0
    for j in range(half):
        x = a[:, 2 * j][:, None] + b[2 * j + 1, :][None, :]
        y = a[:, 2 * j + 1][:, None] + b[2 * j, :][None, :]
        if reduce_factors:
            ctx.reduce(x)
            ctx.reduce(y)
        acc += x * y
        pending += 1
        if pending == per_block:
            ctx.reduce(acc)
            pending = 0
    c.mults += m * p * half
    c.adds += 2 * m * p * half + m * p * (half - 1)
    ctx.reduce(acc)
    # correction terms, computed once per row of A and once per column of B
    row = np.zeros(m, dtype=np.int64)
    col = np.zeros(p, dtype=np.int64)
    for j in range(half):
        row = f.reduce_array(row + f.reduce_array(a[:, 2 * j] * a[:, 2 * j + 1]))
        col = f.reduce_array(col + f.reduce_array(b[2 * j, :] * b[2 * j + 1, :]))
    c.reductions += (m + p) * half
    c.mults += (m + p) * half
    c.adds += (m + p) * (half - 1)
    acc -= row[:, None]
    acc -= col[None, :]
    c.adds += 2 * m * p
    ctx.reduce(acc)
    return DenseMatrix(acc, f)


_POOLS: dict[int, ThreadPoolExecutor] = {}


def _pool(workers: int) -> ThreadPoolExecutor:
    # one long-lived executor per width; creating threads per call dominates small products
    if workers not in _POOLS:
        _POOLS[workers] = ThreadPoolExecutor(max_workers=workers, thread_name_prefix="ffmm")
    return _POOLS[workers]


def split_tasks(m: int, p: int, tasks: int) -> list[tuple[int, int, int, int]]:
    """Output windows (row0, rows, col0, cols) from halving the larger side."""
    windows = [(0, m, 0, p)]
    while len(windows) < tasks:
        # split the window with the largest outer dimension
        idx = max(range(len(windows)), key=lambda i: max(windows[i][1], windows[i][3]))
        r0, nr, c0, nc = windows[idx]
        if max(nr, nc) < 2:
            break
        if nr >= nc:
            h = nr // 2
            parts = [(r0, h, c0, nc), (r0 + h, nr - h, c0, nc)]
        else:
            h = nc // 2
            parts = [(r0, nr, c0, h), (r0, nr, c0 + h, nc - h)]
        windows[idx:idx + 1] = parts
    return windows


def mm_parallel(A: DenseMatrix, B: DenseMatrix, cfg: CascadeConfig | None = None,
                counter: OpCounter | None = None, trace: list | None = None) -> DenseMatrix:
    """Task-parallel product: disjoint output windows, each computed by ``mm_fast``."""
    cfg = cfg or CascadeConfig()
    f = _check_mul(A, B)
    if f is None:
        raise FieldError("parallel multiplication needs field matrices")
    windows = split_tasks(A.rows, B.cols, cfg.parallel_tasks)
    if trace is not None:
        trace.extend(windows)
    out = DenseMatrix.zeros(A.rows, B.cols, f)
    counters = [OpCounter() for _ in windows]

    def run(i: int) -> None:
        r0, nr, c0, nc = windows[i]
        res = mm_fast(block(A, r0, 0, nr, A.cols), block(B, 0, c0, B.rows, nc), cfg, counters[i])
        out.data[r0:r0 + nr, c0:c0 + nc] = res.data

    if len(windows) == 1:
        run(0)
    else:
        list(_pool(len(windows)).map(run, range(len(windows))))
    if counter is not None:
        for c in counters:
            counter.merge(c)
    return out


MULTIPLIERS: dict[str, Callable] = {
    "classic": lambda A, B, cfg=None, counter=None: mm_classic(A, B, counter),
    "waksman": lambda A, B, cfg=None, counter=None: mm_waksman(A, B, counter),
    "fast": lambda A, B, cfg=None, counter=None: mm_fast(A, B, cfg, counter),
    "parallel": lambda A, B, cfg=None, counter=None: mm_parallel(A, B, cfg, counter),
}
