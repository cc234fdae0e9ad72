"""Approximate (APA) schemes with Laurent-polynomial coefficients in lambda.

A scheme is valid when its expansion equals the target plus terms carrying
strictly positive powers of lambda.  Evaluating at 2d+1 distinct nonzero
values and combining with Vandermonde weights isolates the lambda^0 part
and yields an exact scheme of rank (2d+1) r.
"""

from __future__ import annotations

import re
from dataclasses import dataclass, field as dc_field
from fractions import Fraction
from itertools import product
from math import lcm
from typing import Iterable, Sequence

import numpy as np

from .core import (
    BilinearScheme,
    TrilinearScheme,
    _expand_int,
    _first_mismatch,
    bilinear_to_trilinear,
    mm_slot_names,
    target_from_monomials,
    trilinear_to_bilinear,
)


class Laurent:
    """Sparse Laurent polynomial in lambda with rational coefficients."""

    __slots__ = ("c",)

    def __init__(self, coeffs: dict | int | Fraction | None = None):
        if coeffs is None:
            coeffs = {}
        elif not isinstance(coeffs, dict):
            coeffs = {0: coeffs}
        self.c = {int(e): Fraction(v) for e, v in coeffs.items() if v != 0}

    @classmethod
    def mono(cls, coeff, exp: int = 0) -> "Laurent":
        return cls({exp: coeff})

    def __bool__(self):
        return bool(self.c)

    def __eq__(self, other):
        if not isinstance(other, Laurent):
            other = Laurent(other)
        return self.c == other.c

    def __hash__(self):
        return hash(tuple(sorted(self.c.items())))

    def __add__(self, other):
        other = other if isinstance(other, Laurent) else Laurent(other)
        out = dict(self.c)
        for e, v in other.c.items():
            out[e] = out.get(e, 0) + v
        return Laurent(out)

    __radd__ = __add__

    def __neg__(self):
        return Laurent({e: -v for e, v in self.c.items()})

    def __sub__(self, other):
        return self + (-(other if isinstance(other, Laurent) else Laurent(other)))

    def __mul__(self, other):
        other = other if isinstance(other, Laurent) else Laurent(other)
        out: dict = {}
        for (e1, v1), (e2, v2) in product(self.c.items(), other.c.items()):
            out[e1 + e2] = out.get(e1 + e2, 0) + v1 * v2
        return Laurent(out)

    __rmul__ = __mul__

    def __call__(self, lam) -> Fraction:
        lam = Fraction(lam)
        return sum((v * lam**e for e, v in self.c.items()), Fraction(0))

    @property
    def exponents(self) -> list[int]:
        return sorted(self.c)

    def __str__(self):
        if not self.c:
            return "0"
        parts = []
        for e in sorted(self.c):
            v = self.c[e]
            if e == 0:
                parts.append(str(v))
            elif v == 1:
                parts.append(f"L^{e}")
            elif v == -1:
                parts.append(f"-L^{e}")
            else:
                parts.append(f"{v}*L^{e}")
        return "+".join(parts).replace("+-", "-")

    __repr__ = __str__

    @classmethod
    def parse(cls, text: str) -> "Laurent":
        """Parse sums of terms like ``3``, ``-1/2``, ``2*L^-1``, ``L``, ``-L^2``."""
        text = text.replace(" ", "")
        if not text:
            raise ValueError("empty coefficient")
        pieces = [x for x in re.split(r"(?<!\^)(?=[+-])", text) if x]
        out = Laurent()
        for piece in pieces:
            m = re.fullmatch(r"([+-]?)(?:(\d+(?:/\d+)?)\*?)?(L(?:\^(-?\d+))?)?", piece)
            if not m or (m.group(2) is None and m.group(3) is None):
                raise ValueError(f"cannot parse term {piece!r}")
            sign = -1 if m.group(1) == "-" else 1
            coeff = Fraction(m.group(2)) if m.group(2) else Fraction(1)
            if m.group(3):
                exp = int(m.group(4)) if m.group(4) is not None else 1
            else:
                exp = 0
            out = out + Laurent.mono(sign * coeff, exp)
        return out


LMatrix = tuple  # tuple of tuples of Laurent


@dataclass(frozen=True)
class ApaScheme:
    """Trilinear decomposition with Laurent coefficients (border rank = number of products)."""

    slots: tuple
    F1: LMatrix
    F2: LMatrix
    F3: LMatrix
    target: dict = dc_field(compare=False)
    dims: tuple | None = None
    name: str = dc_field(default="", compare=False)

    @property
    def border_rank(self) -> int:
        return len(self.F1)

    rank = border_rank

    @property
    def degree(self) -> int:
        """Largest |lambda exponent| among the monomials of any expanded product."""
        d = 0
        for q in range(self.border_rank):
            lo = hi = 0
            for F in (self.F1, self.F2, self.F3):
                exps = [e for x in F[q] for e in x.exponents]
                if not exps:
                    lo = hi = None
                    break
                lo += min(exps)
                hi += max(exps)
            if lo is not None:
                d = max(d, abs(lo), abs(hi))
        return d

    def expansion(self) -> tuple[dict, int]:
        """{power: integer tensor} and common scale L: coefficient = tensor / L."""
        scaled = []
        L = 1
        for F in (self.F1, self.F2, self.F3):
            den = 1
            exps = set()
            for row in F:
                for x in row:
                    exps.update(x.c)
                    for v in x.c.values():
                        den = lcm(den, v.denominator)
            mats = {}
            for e in exps:
                M = np.zeros((len(F), len(F[0])), dtype=object)
                M[...] = 0
                for q, row in enumerate(F):
                    for a, x in enumerate(row):
                        v = x.c.get(e)
                        if v:
                            M[q, a] = int(v * den)
                mats[e] = M
            scaled.append(mats)
            L *= den
        shape = tuple(len(s) for s in self.slots)
        out: dict = {}
        for (e1, M1), (e2, M2), (e3, M3) in product(*(s.items() for s in scaled)):
            T = _expand_int(M1, M2, M3)
            e = e1 + e2 + e3
            out[e] = out[e] + T if e in out else T
        zero = np.zeros(shape, dtype=object)
        zero[...] = 0
        return {e: T for e, T in out.items() if np.any(T != zero)}, L

    def evaluate(self, lam) -> TrilinearScheme:
        ev = lambda F: tuple(tuple(x(lam) for x in row) for row in F)
        return TrilinearScheme(self.slots, ev(self.F1), ev(self.F2), ev(self.F3),
                               self.target, self.dims, self.name)


def apa_verify(a: ApaScheme) -> bool:
    terms, L = a.expansion()
    if any(e < 0 for e in terms):
        return False
    shape = tuple(len(s) for s in a.slots)
    T0 = terms.get(0)
    if T0 is None:
        T0 = np.zeros(shape, dtype=object)
        T0[...] = 0
    return _first_mismatch(T0, L, a.target, shape) is None


def lift_exact(s) -> ApaScheme:
    """An exact bilinear or trilinear scheme viewed as a degree-0 APA scheme."""
    t = bilinear_to_trilinear(s) if isinstance(s, BilinearScheme) else s
    lift = lambda F: tuple(tuple(Laurent(x) for x in row) for row in F)
    return ApaScheme(t.slots, lift(t.F1), lift(t.F2), lift(t.F3), t.target, t.dims, t.name)


def apa_from_terms(slots, terms: Iterable, target: dict, dims=None, name="") -> ApaScheme:
    index = [{v: i for i, v in enumerate(s)} for s in slots]
    mats = [[], [], []]
    for term in terms:
        for s in range(3):
            row = [Laurent() for _ in slots[s]]
            for v, c in term[s].items():
                i = index[s][v]
                row[i] = row[i] + (c if isinstance(c, Laurent) else Laurent(c))
            mats[s].append(tuple(row))
    return ApaScheme(tuple(slots), tuple(mats[0]), tuple(mats[1]), tuple(mats[2]), target, dims, name)


def apa_pair_scheme(m: int, n: int, p: int) -> ApaScheme:
    """Border rank mnp + mn + np scheme for two disjoint MM problems.

    Aggregates ``L^-2 (x_ij + L u_jk)(y_jk + L v_ki)(L^2 z_ki + w_ij)`` leave
    ``x w y`` and ``u y w`` at negative powers; the correction products
    ``L^-2 x_ij w_ij sum_k (y_jk + L v_ki)`` and
    ``L^-1 u_jk y_jk sum_i (L^2 z_ki + w_ij)`` cancel them.  What remains
    besides the target is ``L x v z + L^2 u v z``.
    """
    if min(m, n, p) < 1:
        raise ValueError("dimensions must be positive")
    L = Laurent.mono
    slots = (
        tuple(("x", i, j) for i in range(m) for j in range(n))
        + tuple(("u", j, k) for j in range(n) for k in range(p)),
        tuple(("y", j, k) for j in range(n) for k in range(p))
        + tuple(("v", k, i) for k in range(p) for i in range(m)),
        tuple(("z", k, i) for k in range(p) for i in range(m))
        + tuple(("w", i, j) for i in range(m) for j in range(n)),
    )
    mons = []
    for i, j, k in product(range(m), range(n), range(p)):
        mons.append((1, ("x", i, j), ("y", j, k), ("z", k, i)))
        mons.append((1, ("u", j, k), ("v", k, i), ("w", i, j)))
    target = target_from_monomials(slots, mons)
    terms = []
    for i, j, k in product(range(m), range(n), range(p)):
        terms.append((
            {("x", i, j): L(1, -2), ("u", j, k): L(1, -1)},
            {("y", j, k): L(1), ("v", k, i): L(1, 1)},
            {("z", k, i): L(1, 2), ("w", i, j): L(1)},
        ))
    for i, j in product(range(m), range(n)):
        second: dict = {}
        for k in range(p):
            second[("y", j, k)] = L(1)
            second[("v", k, i)] = L(1, 1)
        terms.append(({("x", i, j): L(-1, -2)}, second, {("w", i, j): L(1)}))
    for j, k in product(range(n), range(p)):
        third: dict = {}
        for i in range(m):
            third[("z", k, i)] = L(1, 2)
            third[("w", i, j)] = L(1)
        terms.append(({("u", j, k): L(-1, -1)}, {("y", j, k): L(1)}, third))
    return apa_from_terms(slots, terms, target, None, f"apa-pair{(m, n, p)}")


def interpolation_weights(points: Sequence[Fraction], d: int) -> list[Fraction]:
    """Weights w with sum_t w_t * points_t**e = [e == 0] for e in -d..d."""
    size = 2 * d + 1
    pts = [Fraction(x) for x in points]
    M = [[pt**e for pt in pts] + [Fraction(int(e == 0))] for e in range(-d, d + 1)]
    # Gauss-Jordan over the rationals
    for col in range(size):
        piv = next(r for r in range(col, size) if M[r][col] != 0)
        M[col], M[piv] = M[piv], M[col]
        inv = 1 / M[col][col]
        M[col] = [x * inv for x in M[col]]
        for r in range(size):
            if r != col and M[r][col] != 0:
                f = M[r][col]
                M[r] = [x - f * y for x, y in zip(M[r], M[col])]
    return [M[r][size] for r in range(size)]


class InterpolationError(ValueError):
    pass


def apa_to_trilinear(a: ApaScheme, points: Sequence | None = None,
                     modulus: int | None = None) -> TrilinearScheme:
    """Exact decomposition of rank (2d+1) r via evaluation at 2d+1 points."""
    d = a.degree
    need = 2 * d + 1
    if modulus is not None and modulus - 1 < need:
        raise InterpolationError(
            f"only {modulus - 1} nonzero elements mod {modulus}, need {need} points"
        )
    if points is None:
        points = [Fraction(t) for t in range(1, need + 1)]
    pts = sorted({Fraction(x) for x in points if Fraction(x) != 0})
    if len(pts) < need:
        raise InterpolationError(f"need {need} distinct nonzero points, got {len(pts)}")
    pts = pts[:need]
    weights = interpolation_weights(pts, d)
    if modulus is not None:
        for wt in weights:
            if wt.denominator % modulus == 0:
                raise InterpolationError("interpolation weights not invertible modulo p")
    F1, F2, F3 = [], [], []
    for lam, wt in zip(pts, weights):
        ev = a.evaluate(lam)
        F1 += ev.F1
        F2 += ev.F2
        F3 += [tuple(wt * x for x in row) for row in ev.F3]
    return TrilinearScheme(a.slots, tuple(F1), tuple(F2), tuple(F3), a.target, a.dims,
                           f"{a.name}-exact" if a.name else "")


def apa_to_bilinear(a: ApaScheme, points: Sequence | None = None, modulus: int | None = None):
    """Exact bilinear algorithm of rank (2d+1) r (a BilinearScheme for plain MM targets)."""
    return trilinear_to_bilinear(apa_to_trilinear(a, points, modulus), "w")


def apa_dims_scheme(m: int, n: int, p: int, terms, name="") -> ApaScheme:
    """APA scheme for a single MM(m, n, p) problem in the standard slot layout."""
    from .core import mm_trilinear_target

    return apa_from_terms(mm_slot_names(m, n, p), terms, mm_trilinear_target(m, n, p),
                          (m, n, p), name)
