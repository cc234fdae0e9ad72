import random
from fractions import Fraction
from math import gcd, isqrt

import pytest
from hypothesis import given, settings, strategies as st

from ffmm import (
    DixonStats,
    PadicSeries,
    RationalVector,
    ReconstructionFailure,
    SingularSystem,
    dixon_solve,
    hadamard_bound,
    rational_reconstruction,
)
from ffmm.lift import cramer_numerator_bound, solve_check


def gauss_oracle(A, b):
    """Exact rational Gauss-Jordan elimination with row swaps."""
    n = len(A)
    M = [[Fraction(x) for x in row] + [Fraction(bi)] for row, bi in zip(A, b)]
    for c in range(n):
        piv = next(r for r in range(c, n) if M[r][c] != 0)
        M[c], M[piv] = M[piv], M[c]
        for r in range(n):
            if r != c and M[r][c] != 0:
                f = M[r][c] / M[c][c]
                M[r] = [x - f * y for x, y in zip(M[r], M[c])]
    return [M[i][n] / M[i][i] for i in range(n)]


def det_oracle(A):
    n = len(A)
    M = [[Fraction(x) for x in r] for r in A]
    d = Fraction(1)
    for c in range(n):
        piv = next((r for r in range(c, n) if M[r][c] != 0), None)
        if piv is None:
            return 0
        if piv != c:
            M[c], M[piv] = M[piv], M[c]
            d = -d
        d *= M[c][c]
        for r in range(c + 1, n):
            f = M[r][c] / M[c][c]
            M[r] = [x - f * y for x, y in zip(M[r], M[c])]
    return d


def test_hadamard_examples():
    assert hadamard_bound([[1, 0], [0, 1]]) == 1
    assert hadamard_bound([[1, 2], [3, 4]]) == 12
    assert hadamard_bound([[0, 0], [3, 4]]) == 0


@settings(max_examples=60)
@given(st.integers(1, 5), st.data())
def test_hadamard_bounds_det(n, data):
    A = [[data.draw(st.integers(-50, 50)) for _ in range(n)] for _ in range(n)]
    h = hadamard_bound(A)
    assert abs(det_oracle(A)) <= h
    prod = 1
    for r in A:
        prod *= sum(x * x for x in r)
    assert (h - 1) ** 2 < prod <= h * h or prod == 0


def test_reconstruction_examples():
    # 1/2 needs a denominator bound of 2; the symmetric default for M = 7 allows only 1
    assert rational_reconstruction(4, 7, 1, 2) == Fraction(1, 2)
    with pytest.raises(ReconstructionFailure):
        rational_reconstruction(4, 7)
    assert rational_reconstruction(3, 1000003) == 3
    assert rational_reconstruction(1000003 - 3, 1000003) == -3


def brute_force(a, M, N, D):
    return [Fraction(n, d) for d in range(1, D + 1) for n in range(-N, N + 1)
            if gcd(abs(n), d) == 1 and (n - a * d) % M == 0]


def test_reconstruction_failure_confirmed_by_search():
    M = 1009
    N = D = isqrt((M - 1) // 2)
    misses = [a for a in range(M) if not brute_force(a, M, N, D)]
    assert misses
    for a in misses[:20]:
        with pytest.raises(ReconstructionFailure):
            rational_reconstruction(a, M)


@settings(max_examples=200)
@given(st.integers(-300, 300), st.integers(1, 300))
def test_reconstruction_recovers_small_fractions(n, d):
    M = 1000003
    x = Fraction(n, d)
    a = x.numerator * pow(x.denominator, -1, M) % M
    assert rational_reconstruction(a, M) == x


@settings(max_examples=100)
@given(st.integers(0, 1008))
def test_reconstruction_matches_search(a):
    M = 1009
    N = D = isqrt((M - 1) // 2)
    found = brute_force(a, M, N, D)
    if found:
        assert rational_reconstruction(a, M) == found[0]
        assert len(found) == 1
    else:
        with pytest.raises(ReconstructionFailure):
            rational_reconstruction(a, M)


def test_dixon_examples():
    assert list(dixon_solve([[1, 0], [0, 1]], [7, -9], seed=0)) == [7, -9]
    x = dixon_solve([[2, 0], [0, 3]], [1, 1], seed=0)
    assert list(x) == [Fraction(1, 2), Fraction(1, 3)]
    assert x.lines() == ["1/2", "1/3"]


def test_dixon_random_small_systems():
    rng = random.Random(8)
    for _ in range(100):
        A = [[rng.randint(-2**16, 2**16) for _ in range(8)] for _ in range(8)]
        b = [rng.randint(-2**16, 2**16) for _ in range(8)]
        if det_oracle(A) == 0:
            continue
        stats = DixonStats()
        x = dixon_solve(A, b, seed=rng.randrange(2**30), stats=stats)
        assert list(x) == gauss_oracle(A, b)
        assert stats.lu_calls == 1 + stats.retries
        assert stats.divisibility_checks == stats.steps


def test_dixon_uses_lu_once_without_retries():
    rng = random.Random(1)
    A = [[rng.randint(-99, 99) for _ in range(12)] for _ in range(12)]
    b = [rng.randint(-99, 99) for _ in range(12)]
    stats = DixonStats()
    dixon_solve(A, b, seed=5, stats=stats)
    assert stats.retries == 0 and stats.lu_calls == 1
    assert stats.steps >= stats.target_steps
    assert stats.prime ** stats.target_steps > 2 * cramer_numerator_bound(A, b) * hadamard_bound(A)


def test_dixon_non_generic_profile_preconditioned():
    stats = DixonStats()
    x = dixon_solve([[0, 1], [1, 0]], [3, 5], seed=2, stats=stats)
    assert list(x) == [5, 3]
    assert stats.preconditioned and stats.retries >= 1


def test_dixon_numerator_bound_counterexample():
    # x3 = -3B, so |numerator| exceeds hadamard(A) * max|b| = 2B
    B = 10**6
    A = [[1, 0, 0], [0, 1, 0], [1, 1, 1]]
    b = [B, B, -B]
    assert hadamard_bound(A) * B < 3 * B
    assert list(dixon_solve(A, b, seed=3)) == [B, B, -3 * B]


def test_dixon_singular():
    with pytest.raises(SingularSystem):
        dixon_solve([[1, 2], [2, 4]], [1, 1], seed=0, max_retries=3)


def test_dixon_shape_errors():
    with pytest.raises(ValueError):
        dixon_solve([[1, 2]], [1])
    with pytest.raises(ValueError):
        dixon_solve([[1]], [1, 2])


@settings(max_examples=30, deadline=None)
@given(st.integers(1, 10), st.data())
def test_dixon_property(n, data):
    A = [[data.draw(st.integers(-1000, 1000)) for _ in range(n)] for _ in range(n)]
    b = [data.draw(st.integers(-10**9, 10**9)) for _ in range(n)]
    if det_oracle(A) == 0:
        return
    x = dixon_solve(A, b, seed=data.draw(st.integers(0, 2**20)))
    assert solve_check(A, b, list(x))
    assert all(gcd(v.numerator, v.denominator) == 1 and v.denominator > 0 for v in x)


def test_padic_series_value():
    s = PadicSeries(7, [[1, 2], [3, 0], [6, 1]])
    assert s.k == 3
    assert s.value() == [1 + 3 * 7 + 6 * 49, 2 + 0 + 49]


def test_rational_vector_type():
    with pytest.raises(TypeError):
        RationalVector((1, 2))
