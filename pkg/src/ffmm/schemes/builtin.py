"""Hand-entered rank-7 schemes for MM(2) and the rank-3 complex product."""

from __future__ import annotations

from fractions import Fraction

from .core import (
    BilinearMap,
    BilinearScheme,
    TrilinearScheme,
    mm_slot_names,
    mm_trilinear_target,
    trilinear_from_terms,
)

# 2x2 index helpers: U/V/X entry (a, b) with 1-based subscripts
_U = {(1, 1): 0, (1, 2): 1, (2, 1): 2, (2, 2): 3}


def _form(**coeffs) -> list:
    """Length-4 coefficient row from keyword names like u11=1, v22=-1."""
    row = [0] * 4
    for name, c in coeffs.items():
        row[_U[(int(name[1]), int(name[2]))]] = c
    return row


def _from_products(products, outputs, name, **meta) -> BilinearScheme:
    A = [_form(**a) for a, _ in products]
    B = [_form(**b) for _, b in products]
    C = [[0] * len(products) for _ in range(4)]
    for (i, k), terms in outputs.items():
        for q, c in terms.items():
            C[_U[(i, k)]][q - 1] = c
    return BilinearScheme.make(2, 2, 2, A, B, C, name, **meta)


def winograd_scheme() -> BilinearScheme:
    s1 = dict(u21=1, u22=1)
    s2 = dict(u21=1, u22=1, u11=-1)
    s3 = dict(u11=1, u21=-1)
    s4 = dict(u12=1, u21=-1, u22=-1, u11=1)
    s5 = dict(v12=1, v11=-1)
    s6 = dict(v22=1, v12=-1, v11=1)
    s7 = dict(v22=1, v12=-1)
    s8 = dict(v22=1, v12=-1, v11=1, v21=-1)
    products = [
        (s2, s6),                    # p1
        (dict(u11=1), dict(v11=1)),  # p2
        (dict(u12=1), dict(v21=1)),  # p3
        (s3, s7),                    # p4
        (s1, s5),                    # p5
        (s4, dict(v22=1)),           # p6
        (dict(u22=1), s8),           # p7
    ]
    outputs = {
        (1, 1): {2: 1, 3: 1},
        (1, 2): {1: 1, 2: 1, 5: 1, 6: 1},
        (2, 1): {1: 1, 2: 1, 4: 1, 7: -1},
        (2, 2): {1: 1, 2: 1, 4: 1, 5: 1},
    }
    return _from_products(products, outputs, "winograd", additions=15)


def strassen_scheme() -> BilinearScheme:
    products = [
        (dict(u11=1, u22=1), dict(v11=1, v22=1)),
        (dict(u21=1, u22=1), dict(v11=1)),
        (dict(u11=1), dict(v12=1, v22=-1)),
        (dict(u21=1, u11=-1), dict(v11=1, v12=1)),
        (dict(u11=1, u12=1), dict(v22=1)),
        (dict(u22=1), dict(v21=1, v11=-1)),
        (dict(u12=1, u22=-1), dict(v21=1, v22=1)),
    ]
    outputs = {
        (1, 1): {1: 1, 6: 1, 7: 1, 5: -1},
        (1, 2): {3: 1, 5: 1},
        (2, 1): {2: 1, 6: 1},
        (2, 2): {1: 1, 3: 1, 4: 1, 2: -1},
    }
    return _from_products(products, outputs, "strassen", additions=18)


def trilinear_mm2_scheme() -> TrilinearScheme:
    """Rank-7 decomposition of trace(UVW) for 2x2 matrices.

    The third factor is written with the subscripts of the output entry it
    collects, so ``w(a, b)`` below is the trace variable ``w_ba``.
    """
    def u(a, b):
        return ("u", a - 1, b - 1)

    def v(a, b):
        return ("v", a - 1, b - 1)

    def w(a, b):
        return ("w", b - 1, a - 1)

    terms = [
        ({u(1, 1): 1, u(2, 2): 1}, {v(1, 1): 1, v(2, 2): 1}, {w(1, 1): 1, w(2, 2): 1}),
        ({u(2, 1): 1, u(2, 2): 1}, {v(1, 1): 1}, {w(2, 1): 1, w(2, 2): -1}),
        ({u(1, 1): 1}, {v(1, 2): 1, v(2, 2): -1}, {w(1, 2): 1, w(2, 2): 1}),
        ({u(2, 1): 1, u(1, 1): -1}, {v(1, 1): 1, v(1, 2): 1}, {w(2, 2): 1}),
        ({u(1, 1): 1, u(1, 2): 1}, {v(2, 2): 1}, {w(1, 2): 1, w(1, 1): -1}),
        ({u(2, 2): 1}, {v(2, 1): 1, v(1, 1): -1}, {w(1, 1): 1, w(2, 1): 1}),
        ({u(1, 2): 1, u(2, 2): -1}, {v(2, 1): 1, v(2, 2): 1}, {w(1, 1): 1}),
    ]
    return trilinear_from_terms(mm_slot_names(2, 2, 2), terms, mm_trilinear_target(2, 2, 2),
                                (2, 2, 2), "trilinear-mm2")


COMPLEX_SLOTS = (("u1", "u2"), ("v1", "v2"), ("w1", "w2"))


def trilinear_complex_scheme() -> TrilinearScheme:
    """u1 v1 (w1 - w2) - u2 v2 (w1 + w2) + (u1 + u2)(v1 + v2) w2."""
    terms = [
        ({"u1": 1}, {"v1": 1}, {"w1": 1, "w2": -1}),
        ({"u2": -1}, {"v2": 1}, {"w1": 1, "w2": 1}),
        ({"u1": 1, "u2": 1}, {"v1": 1, "v2": 1}, {"w2": 1}),
    ]
    # real part u1 v1 - u2 v2 pairs with w1, imaginary part u1 v2 + u2 v1 with w2
    target = {
        (0, 0, 0): Fraction(1), (1, 1, 0): Fraction(-1),
        (0, 1, 1): Fraction(1), (1, 0, 1): Fraction(1),
    }
    return trilinear_from_terms(COMPLEX_SLOTS, terms, target, None, "complex")


def complex_mult_scheme() -> BilinearMap:
    """Three real products for (u1 + i u2)(v1 + i v2)."""
    A = ((1, 0), (0, -1), (1, 1))
    B = ((1, 0), (0, 1), (1, 1))
    C = ((1, 1, 0), (-1, 1, 1))
    target = {
        (0, 0, 0): Fraction(1), (0, 1, 1): Fraction(-1),
        (1, 0, 1): Fraction(1), (1, 1, 0): Fraction(1),
    }
    fr = lambda M: tuple(tuple(Fraction(x) for x in r) for r in M)
    return BilinearMap(fr(A), fr(B), fr(C), target, COMPLEX_SLOTS, "complex")


def classical_scheme(m: int, n: int, p: int) -> BilinearScheme:
    """The straightforward rank-mnp scheme, one product per u_ij v_jk."""
    A, B = [], []
    C = [[0] * (m * n * p) for _ in range(m * p)]
    q = 0
    for i in range(m):
        for j in range(n):
            for k in range(p):
                A.append([int(a == i * n + j) for a in range(m * n)])
                B.append([int(b == j * p + k) for b in range(n * p)])
                C[i * p + k][q] = 1
                q += 1
    return BilinearScheme.make(m, n, p, A, B, C, f"classical{(m, n, p)}")
