import itertools

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from ffmm import (
    OpCounter,
    PackedF2Matrix,
    SlicedF3Vector,
    SlotOverflow,
    f2_mm_four_russians,
    f2_mm_naive,
    f3_add,
    f3_mm,
    f3_neg,
    f3_slice,
    f3_sub,
    f3_unslice,
    kron_add,
    kron_pack,
    kron_unpack,
    simultaneous_reduce,
    unpack,
)
from ffmm.dense import DimensionError
from ffmm.tiny import default_stripe


def f2_oracle(A, B):
    a, b = A.to_dense(), B.to_dense()
    n, k, m = a.shape[0], a.shape[1], b.shape[1]
    out = np.zeros((n, m), dtype=np.int64)
    for i in range(n):
        for j in range(m):
            s = 0
            for t in range(k):
                s ^= int(a[i, t] & b[t, j])
            out[i, j] = s
    return out


def test_f2_identity():
    rng = np.random.default_rng(0)
    B = PackedF2Matrix.random(70, 130, rng)
    assert f2_mm_four_russians(PackedF2Matrix.identity(70), B) == B
    assert f2_mm_naive(PackedF2Matrix.identity(70), B) == B


@pytest.mark.parametrize("k", [4, 8])
def test_f2_256_against_triple_loop(k):
    rng = np.random.default_rng(k)
    A, B = PackedF2Matrix.random(256, 256, rng), PackedF2Matrix.random(256, 256, rng)
    ref = (A.to_dense() @ B.to_dense()) % 2
    costs = []
    C = f2_mm_four_russians(A, B, k, table_costs=costs)
    assert np.array_equal(C.to_dense(), ref)
    assert costs == [2**k - 1] * (256 // k)


def test_f2_small_triple_loop_oracle():
    rng = np.random.default_rng(1)
    A, B = PackedF2Matrix.random(9, 13, rng), PackedF2Matrix.random(13, 70, rng)
    assert np.array_equal(f2_mm_four_russians(A, B, 3).to_dense(), f2_oracle(A, B))


@settings(max_examples=40, deadline=None)
@given(st.integers(1, 150), st.integers(1, 150), st.integers(1, 150), st.integers(1, 10), st.integers(0, 2**32))
def test_f2_four_russians_matches_naive(n, k_dim, m, k, seed):
    rng = np.random.default_rng(seed)
    A, B = PackedF2Matrix.random(n, k_dim, rng), PackedF2Matrix.random(k_dim, m, rng)
    c = OpCounter()
    costs = []
    C = f2_mm_four_russians(A, B, k, c, costs)
    assert C == f2_mm_naive(A, B)
    full, tail = divmod(k_dim, k)
    assert costs == [2**k - 1] * full + ([2**tail - 1] if tail else [])
    assert c.row_adds == sum(costs)


def test_f2_dimension_mismatch():
    with pytest.raises(DimensionError):
        f2_mm_four_russians(PackedF2Matrix.zeros(3, 4), PackedF2Matrix.zeros(5, 3))
    with pytest.raises(ValueError):
        f2_mm_four_russians(PackedF2Matrix.zeros(3, 4), PackedF2Matrix.zeros(4, 3), k=17)


def test_f2_padding_invariant():
    with pytest.raises(ValueError):
        PackedF2Matrix(1, 3, np.array([[0b1000]], dtype=np.uint64))


def test_four_russians_word_ops_scale_below_naive():
    rng = np.random.default_rng(2)
    ratios = []
    for n in (512, 1024):
        A, B = PackedF2Matrix.random(n, n, rng), PackedF2Matrix.random(n, n, rng)
        fr, nv = OpCounter(), OpCounter()
        f2_mm_four_russians(A, B, default_stripe(n), fr)
        f2_mm_naive(A, B, nv)
        assert fr.word_ops < nv.word_ops
        ratios.append(fr.word_ops / nv.word_ops)
    assert ratios[1] < ratios[0]


def test_default_stripe():
    assert default_stripe(256) == 8
    assert default_stripe(257) == 9
    assert default_stripe(10**9) == 16
    assert default_stripe(1) == 1


def test_f3_exhaustive_scalar():
    for a, b in itertools.product(range(3), repeat=2):
        x, y = f3_slice([a]), f3_slice([b])
        ca, cs, cn = OpCounter(), OpCounter(), OpCounter()
        assert f3_unslice(f3_add(x, y, ca)) == [(a + b) % 3]
        assert f3_unslice(f3_sub(x, y, cs)) == [(a - b) % 3]
        assert f3_unslice(f3_neg(x, cn)) == [(-a) % 3]
        assert (ca.word_ops, cs.word_ops, cn.word_ops) == (6, 6, 1)


def test_f3_encoding():
    x = f3_slice([0, 1, 2])
    assert [int(x.x0[0] >> i & 1) for i in range(3)] == [0, 1, 1]
    assert [int(x.x1[0] >> i & 1) for i in range(3)] == [0, 0, 1]
    bad = SlicedF3Vector(np.array([0], dtype=np.uint64), np.array([1], dtype=np.uint64), 1)
    assert not bad.valid()
    with pytest.raises(ValueError):
        f3_unslice(bad)


def test_f3_identities():
    rng = np.random.default_rng(3)
    v = rng.integers(0, 3, size=200).tolist()
    x = f3_slice(v)
    assert f3_add(x, f3_slice([0] * 200)) == x
    assert f3_unslice(f3_sub(x, x)) == [0] * 200
    assert f3_neg(f3_neg(x)) == x


@settings(max_examples=200)
@given(st.integers(1, 300), st.integers(0, 2**32))
def test_f3_homomorphism_and_closure(n, seed):
    rng = np.random.default_rng(seed)
    u = rng.integers(0, 3, size=n).tolist()
    v = rng.integers(0, 3, size=n).tolist()
    x, y = f3_slice(u), f3_slice(v)
    for out, ref in [
        (f3_add(x, y), [(a + b) % 3 for a, b in zip(u, v)]),
        (f3_sub(x, y), [(a - b) % 3 for a, b in zip(u, v)]),
        (f3_neg(x), [(-a) % 3 for a in u]),
    ]:
        assert out.valid()
        assert f3_unslice(out) == ref


def test_f3_closure_on_random_words():
    rng = np.random.default_rng(4)
    for _ in range(10**4 // 64):
        u = rng.integers(0, 3, size=64).tolist()
        v = rng.integers(0, 3, size=64).tolist()
        x, y = f3_slice(u), f3_slice(v)
        assert f3_add(x, y).valid() and f3_sub(x, y).valid() and f3_neg(x).valid()


def test_f3_mm():
    rng = np.random.default_rng(5)
    A = rng.integers(0, 3, size=(7, 9))
    B = rng.integers(0, 3, size=(9, 70))
    C = f3_mm([f3_slice(r) for r in A], [f3_slice(r) for r in B])
    assert [f3_unslice(r) for r in C] == ((A @ B) % 3).tolist()


def test_kron_round_trip_and_add():
    rng = np.random.default_rng(6)
    v = rng.integers(0, 37, size=50).tolist()
    w = rng.integers(0, 37, size=50).tolist()
    P, Q = kron_pack(v, 37, 16), kron_pack(w, 37, 16)
    assert kron_unpack(P) == v
    S = kron_add(P, Q)
    assert S.value == P.value + Q.value
    assert [x % 37 for x in kron_unpack(S)] == [(a + b) % 37 for a, b in zip(v, w)]
    assert kron_pack([0] * 5, 37, 16).value == 0


def test_kron_overflow_detected():
    P = kron_pack([36, 36], 37, 7)
    S = kron_add(kron_add(P, P), kron_add(P, P))
    with pytest.raises(SlotOverflow):
        kron_unpack(S)
    with pytest.raises(ValueError):
        kron_pack([37], 37, 16)


def test_simultaneous_reduce():
    p = 37
    P = kron_pack([1, 2, 3], p, 8)
    assert unpack(simultaneous_reduce(P, p)) == [1, 2, 3]
    from ffmm.binseg import pack
    assert unpack(simultaneous_reduce(pack([p, p + 1, 2 * p - 1], 8), p)) == [0, 1, p - 1]
    rng = np.random.default_rng(7)
    vals = rng.integers(0, 2**12, size=40).tolist()
    assert unpack(simultaneous_reduce(pack(vals, 12), p)) == [x % p for x in vals]
