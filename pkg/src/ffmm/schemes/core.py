"""Bilinear and trilinear schemes with exact (rational) verification.

Conventions for matrix multiplication MM(m, n, p), X = U V:

* ``U`` is m x n, flattened as ``i*n + j``;
* ``V`` is n x p, flattened as ``j*p + k``;
* ``X`` is m x p, flattened as ``i*p + k``;
* in the trilinear form trace(U V W) the third matrix ``W`` is p x m,
  flattened as ``k*m + i``, so that ``w_ki`` pairs with ``x_ik``.

A bilinear scheme of rank r stores ``A`` (r x mn), ``B`` (r x np) and
``C`` (mp x r): product ``q`` is ``(A[q] . U) * (B[q] . V)`` and
``x_ik = sum_q C[ik][q] * product_q``.
"""

from __future__ import annotations

from dataclasses import dataclass, field as dc_field
from fractions import Fraction
from math import lcm
from typing import Iterable, Sequence

import numpy as np

Matrix = tuple  # tuple of tuples of Fraction


def _fracs(rows: Iterable[Iterable]) -> Matrix:
    return tuple(tuple(Fraction(x) for x in r) for r in rows)


def _transpose(M: Sequence[Sequence]) -> Matrix:
    return tuple(zip(*M)) if M else ()


# ---------------------------------------------------------------- tensor engine

def _scaled(F: Sequence[Sequence[Fraction]]) -> tuple[np.ndarray, int]:
    """Integer matrix and common denominator L with F = M / L."""
    L = 1
    for row in F:
        for x in row:
            if x.denominator != 1:
                L = lcm(L, x.denominator)
    M = np.empty((len(F), len(F[0]) if F else 0), dtype=object)
    for q, row in enumerate(F):
        for a, x in enumerate(row):
            M[q, a] = int(x * L)
    return M, L


def _maxabs(M: np.ndarray) -> int:
    return max((abs(int(x)) for x in M.flat), default=0)


def expand_triple(F1, F2, F3) -> tuple[np.ndarray, int]:
    """Coefficient tensor of sum_q F1[q] (x) F2[q] (x) F3[q], scaled to integers.

    Returns ``(T, L)`` with ``T[a, b, c] / L`` the exact coefficient.
    """
    M1, L1 = _scaled(F1)
    M2, L2 = _scaled(F2)
    M3, L3 = _scaled(F3)
    return _expand_int(M1, M2, M3), L1 * L2 * L3


def _expand_int(M1: np.ndarray, M2: np.ndarray, M3: np.ndarray) -> np.ndarray:
    r, n1 = M1.shape
    n2, n3 = M2.shape[1], M3.shape[1]
    if r == 0:
        return np.zeros((n1, n2, n3), dtype=object)
    big = _maxabs(M1) * _maxabs(M2) * _maxabs(M3) * r
    if big < (1 << 53):
        # exact in float64; BLAS keeps this fast for large schemes
        m1, m2, m3 = (M.astype(np.float64) for M in (M1, M2, M3))
        K = (m1[:, :, None] * m2[:, None, :]).reshape(r, n1 * n2)
        T = (m3.T @ K).reshape(n3, n1, n2)
        return np.rint(T).astype(np.int64).astype(object).transpose(1, 2, 0)
    K = (M1[:, :, None] * M2[:, None, :]).reshape(r, n1 * n2)
    T = (M3.T @ K).reshape(n3, n1, n2)
    return T.transpose(1, 2, 0)


def _first_mismatch(T: np.ndarray, L: int, target: dict, shape: tuple):
    """First (a, b, c) where T/L differs from the sparse target, or None."""
    want = np.zeros(shape, dtype=object)
    want[...] = 0
    for (a, b, c), v in target.items():
        want[a, b, c] = v * L
    diff = np.argwhere(T != want)
    if len(diff):
        return tuple(int(x) for x in diff[0])
    return None


# ---------------------------------------------------------------- trilinear

@dataclass(frozen=True)
class TrilinearScheme:
    """Rank-r decomposition sum_q l_q * l'_q * l''_q of a trilinear form.

    ``slots`` names the variables of each of the three factors; ``target``
    maps index triples (one index per slot) to coefficients.  ``dims`` is
    set when the target is trace(UVW) for MM(m, n, p) in the layout above.
    """

    slots: tuple
    F1: Matrix
    F2: Matrix
    F3: Matrix
    target: dict = dc_field(compare=False)
    dims: tuple | None = None
    name: str = dc_field(default="", compare=False)

    @property
    def rank(self) -> int:
        return len(self.F1)

    r = rank

    def expand(self) -> tuple[np.ndarray, int]:
        return expand_triple(self.F1, self.F2, self.F3)

    def residual(self):
        T, L = self.expand()
        return _first_mismatch(T, L, self.target, tuple(len(s) for s in self.slots))

    def verify(self) -> bool:
        return self.residual() is None

    def terms(self):
        """Each product as three {variable: coefficient} dicts."""
        out = []
        for q in range(self.rank):
            out.append(tuple(
                {v: c for v, c in zip(slot, F[q]) if c != 0}
                for slot, F in zip(self.slots, (self.F1, self.F2, self.F3))
            ))
        return out


def trilinear_verify(t: TrilinearScheme) -> bool:
    return t.verify()


def mm_slot_names(m: int, n: int, p: int, letters: str = "uvw") -> tuple:
    a, b, c = letters
    return (
        tuple((a, i, j) for i in range(m) for j in range(n)),
        tuple((b, j, k) for j in range(n) for k in range(p)),
        tuple((c, k, i) for k in range(p) for i in range(m)),
    )


def mm_trilinear_target(m: int, n: int, p: int) -> dict:
    return {
        (i * n + j, j * p + k, k * m + i): Fraction(1)
        for i in range(m) for j in range(n) for k in range(p)
    }


def trilinear_from_terms(slots: tuple, terms: Sequence, target: dict,
                         dims=None, name: str = "") -> TrilinearScheme:
    """Build a scheme from products given as ({var: coeff}, {var: coeff}, {var: coeff})."""
    index = [{v: i for i, v in enumerate(s)} for s in slots]
    mats = [[], [], []]
    for term in terms:
        for s in range(3):
            row = [Fraction(0)] * len(slots[s])
            for v, c in term[s].items():
                row[index[s][v]] += Fraction(c)
            mats[s].append(tuple(row))
    return TrilinearScheme(tuple(tuple(s) for s in slots), tuple(mats[0]), tuple(mats[1]),
                           tuple(mats[2]), target, dims, name)


def target_from_monomials(slots: tuple, monomials: Iterable) -> dict:
    """Target dict from (coeff, var1, var2, var3) monomials; repeats add up."""
    index = [{v: i for i, v in enumerate(s)} for s in slots]
    tgt: dict = {}
    for c, a, b, d in monomials:
        key = (index[0][a], index[1][b], index[2][d])
        tgt[key] = tgt.get(key, Fraction(0)) + Fraction(c)
    return {k: v for k, v in tgt.items() if v != 0}


# ---------------------------------------------------------------- bilinear MM

@dataclass(frozen=True)
class BilinearScheme:
    m: int
    n: int
    p: int
    A: Matrix
    B: Matrix
    C: Matrix
    name: str = dc_field(default="", compare=False)
    meta: dict = dc_field(default_factory=dict, compare=False)

    def __post_init__(self):
        r = len(self.A)
        if r < 1 or len(self.B) != r:
            raise ValueError("A and B need the same positive number of rows")
        if any(len(row) != self.m * self.n for row in self.A):
            raise ValueError("A rows must have m*n entries")
        if any(len(row) != self.n * self.p for row in self.B):
            raise ValueError("B rows must have n*p entries")
        if len(self.C) != self.m * self.p or any(len(row) != r for row in self.C):
            raise ValueError("C must be (m*p) x r")

    @classmethod
    def make(cls, m, n, p, A, B, C, name="", **meta) -> "BilinearScheme":
        return cls(m, n, p, _fracs(A), _fracs(B), _fracs(C), name, dict(meta))

    @property
    def rank(self) -> int:
        return len(self.A)

    r = rank

    @property
    def dims(self) -> tuple:
        return (self.m, self.n, self.p)

    def __repr__(self):
        return f"BilinearScheme({self.name or 'MM'}{self.dims}, r={self.rank})"


def brent_residual(s: BilinearScheme):
    """First index tuple (i, j, j', k, i', k') violating the Brent equations, or None."""
    m, n, p = s.dims
    T, L = expand_triple(s.A, s.B, _transpose(s.C))
    target = {
        (i * n + j, j * p + k, i * p + k): Fraction(1)
        for i in range(m) for j in range(n) for k in range(p)
    }
    bad = _first_mismatch(T, L, target, (m * n, n * p, m * p))
    if bad is None:
        return None
    a, b, c = bad
    i, j = divmod(a, n)
    j2, k = divmod(b, p)
    i2, k2 = divmod(c, p)
    return (i, j, j2, k, i2, k2)


def brent_verify(s: BilinearScheme) -> bool:
    return brent_residual(s) is None


def apply_scheme(s: BilinearScheme, U, V, field=None):
    """Evaluate the scheme on U (m x n) and V (n x p).

    Entries may be numbers (Fraction/int), numpy blocks, or prime-field
    residues when ``field`` is given (coefficients are then mapped into
    the field).  Returns an m x p nested list (or array for DenseMatrix).
    """
    from ..dense import DenseMatrix

    if isinstance(U, DenseMatrix):
        field = field or U.field
        res = apply_scheme(s, U.data.tolist(), V.data.tolist(), field)
        return DenseMatrix.from_rows(res, field)
    m, n, p = s.dims
    if len(U) != m or any(len(r) != n for r in U) or len(V) != n or any(len(r) != p for r in V):
        raise ValueError(f"operands do not match MM{s.dims}")

    def coef(c):
        if field is None:
            return c
        return field.reduce(c.numerator * pow(c.denominator, -1, field.p))

    u = [U[i][j] for i in range(m) for j in range(n)]
    v = [V[j][k] for j in range(n) for k in range(p)]
    prods = []
    for q in range(s.rank):
        lu = sum((coef(c) * x for c, x in zip(s.A[q], u) if c != 0), 0)
        lv = sum((coef(c) * x for c, x in zip(s.B[q], v) if c != 0), 0)
        prods.append(lu * lv)
    out = []
    for i in range(m):
        row = []
        for k in range(p):
            x = sum((coef(c) * pr for c, pr in zip(s.C[i * p + k], prods) if c != 0), 0)
            row.append(field.reduce(x) if field is not None else x)
        out.append(row)
    return out


# ---------------------------------------------------------------- general bilinear maps

@dataclass(frozen=True)
class BilinearMap:
    """A bilinear algorithm for an arbitrary bilinear map (not necessarily MM).

    ``target[(o, a, b)]`` is the coefficient of ``left[a]*right[b]`` in output ``o``.
    """

    A: Matrix
    B: Matrix
    C: Matrix
    target: dict = dc_field(compare=False)
    names: tuple = dc_field(default=((), (), ()), compare=False)
    name: str = dc_field(default="", compare=False)

    @property
    def rank(self) -> int:
        return len(self.A)

    r = rank

    def verify(self) -> bool:
        T, L = expand_triple(self.A, self.B, _transpose(self.C))
        tgt = {(a, b, o): v for (o, a, b), v in self.target.items()}
        shape = (len(self.A[0]), len(self.B[0]), len(self.C))
        return _first_mismatch(T, L, tgt, shape) is None

    def apply(self, left, right, field=None):
        def coef(c):
            if field is None:
                return c
            return field.reduce(c.numerator * pow(c.denominator, -1, field.p))

        prods = []
        for q in range(self.rank):
            lu = sum((coef(c) * x for c, x in zip(self.A[q], left) if c != 0), 0)
            lv = sum((coef(c) * x for c, x in zip(self.B[q], right) if c != 0), 0)
            prods.append(lu * lv)
        out = []
        for row in self.C:
            x = sum((coef(c) * pr for c, pr in zip(row, prods) if c != 0), 0)
            out.append(field.reduce(x) if field is not None else x)
        return out


# ---------------------------------------------------------------- conversions

def bilinear_to_trilinear(s: BilinearScheme) -> TrilinearScheme:
    m, n, p = s.dims
    W = tuple(
        tuple(s.C[i * p + k][q] for k in range(p) for i in range(m))
        for q in range(s.rank)
    )
    return TrilinearScheme(mm_slot_names(m, n, p), s.A, s.B, W,
                           mm_trilinear_target(m, n, p), (m, n, p), s.name)


def _rotate_tri(t: TrilinearScheme) -> TrilinearScheme:
    """trace(UVW) = trace(VWU): the slots move one place to the left."""
    m, n, p = t.dims
    return TrilinearScheme(mm_slot_names(n, p, m), t.F2, t.F3, t.F1,
                           mm_trilinear_target(n, p, m), (n, p, m), t.name)


def trilinear_to_bilinear(t: TrilinearScheme, role: str = "w"):
    """Read a decomposition as a bilinear algorithm computing the ``role`` slot.

    For an MM target the result is a :class:`BilinearScheme`: role ``w``
    gives MM(m, n, p), ``u`` the dual MM(n, p, m) and ``v`` MM(p, m, n).
    For other targets a :class:`BilinearMap` whose outputs are indexed by
    the variables of the chosen slot.
    """
    order = {"w": (0, 1, 2), "u": (1, 2, 0), "v": (2, 0, 1)}
    if role not in order:
        raise ValueError("role must be one of 'u', 'v', 'w'")
    if t.dims is not None:
        tt = t
        for _ in range({"w": 0, "u": 1, "v": 2}[role]):
            tt = _rotate_tri(tt)
        m, n, p = tt.dims
        C = tuple(
            tuple(tt.F3[q][k * m + i] for q in range(tt.rank))
            for i in range(m) for k in range(p)
        )
        return BilinearScheme(m, n, p, tt.F1, tt.F2, C, t.name)
    a, b, c = order[role]
    mats = (t.F1, t.F2, t.F3)
    target = {}
    for key, v in t.target.items():
        target[(key[c], key[a], key[b])] = v
    return BilinearMap(mats[a], mats[b], _transpose(mats[c]), target,
                       (t.slots[a], t.slots[b], t.slots[c]), t.name)


def _transpose_scheme(s: BilinearScheme) -> BilinearScheme:
    """trace(UVW) = trace(W^T V^T U^T): MM(m,n,p) -> MM(m,p,n)."""
    m, n, p = s.dims
    r = s.rank
    A = tuple(tuple(s.C[i * p + k][q] for i in range(m) for k in range(p)) for q in range(r))
    B = tuple(tuple(s.B[q][j * p + k] for k in range(p) for j in range(n)) for q in range(r))
    C = tuple(tuple(s.A[q][i * n + j] for q in range(r)) for i in range(m) for j in range(n))
    return BilinearScheme(m, p, n, A, B, C, s.name)


def _rotate_scheme(s: BilinearScheme) -> BilinearScheme:
    return trilinear_to_bilinear(_rotate_tri(bilinear_to_trilinear(s)), "w")


PERMUTATIONS = ((0, 1, 2), (1, 2, 0), (2, 0, 1), (0, 2, 1), (1, 0, 2), (2, 1, 0))


def dualize(s: BilinearScheme, perm: tuple = (1, 2, 0)) -> BilinearScheme:
    """Scheme of the same rank for MM(d[perm[0]], d[perm[1]], d[perm[2]]) with d = (m, n, p)."""
    perm = tuple(perm)
    if perm not in PERMUTATIONS:
        raise ValueError(f"{perm} is not a permutation of (0, 1, 2)")
    rotations = {(0, 1, 2): 0, (1, 2, 0): 1, (2, 0, 1): 2, (0, 2, 1): 0, (1, 0, 2): 1, (2, 1, 0): 2}
    out = s
    for _ in range(rotations[perm]):
        out = _rotate_scheme(out)
    if perm in ((0, 2, 1), (1, 0, 2), (2, 1, 0)):
        out = _transpose_scheme(out)
    name = f"{s.name}^{''.join(map(str, perm))}" if s.name else ""
    return BilinearScheme(out.m, out.n, out.p, out.A, out.B, out.C, name, dict(s.meta))


def canonical_form(s) -> tuple:
    """Term-order and scaling insensitive form of a bilinear scheme or map.

    Each product is rescaled so the first nonzero entries of its A and B
    rows equal 1 (C absorbs the factors); products are then sorted.
    """
    if isinstance(s, BilinearScheme):
        head = ("MM", s.dims)
    else:
        head = ("map", len(s.A[0]), len(s.B[0]), len(s.C))
    terms = []
    for q in range(s.rank):
        a = list(s.A[q])
        b = list(s.B[q])
        c = [row[q] for row in s.C]
        for vec in (a, b):
            lead = next((x for x in vec if x != 0), Fraction(1))
            for i in range(len(vec)):
                vec[i] /= lead
            c = [x * lead for x in c]
        terms.append((tuple(a), tuple(b), tuple(c)))
    return head + (tuple(sorted(terms)),)


def as_bilinear_map(s: BilinearScheme) -> BilinearMap:
    m, n, p = s.dims
    target = {
        (i * p + k, i * n + j, j * p + k): Fraction(1)
        for i in range(m) for j in range(n) for k in range(p)
    }
    return BilinearMap(s.A, s.B, s.C, target, name=s.name)
