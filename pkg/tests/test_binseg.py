import pytest
from hypothesis import given, settings, strategies as st

from ffmm import (
    OpCounter,
    PackedInt,
    SlotOverflow,
    binseg_inner,
    binseg_inner_signed,
    binseg_sum,
    binseg_sum_signed,
    pack,
    unpack,
)
from ffmm.binseg import ceil_log2, slot_width


def test_pack_examples():
    assert pack([1, 2, 3], 4).value == 801
    assert pack([0, 0, 0], 5).value == 0
    with pytest.raises(SlotOverflow):
        pack([16], 4)
    with pytest.raises(SlotOverflow):
        pack([-1], 4)


@given(st.integers(1, 16), st.data())
def test_pack_round_trip(k, data):
    v = data.draw(st.lists(st.integers(0, 2**k - 1), max_size=40))
    P = pack(v, k)
    assert unpack(P) == v
    assert P.value < 2 ** (k * len(v)) or not v


def test_inner_examples():
    assert slot_width(2, 3, 3) == 7
    assert binseg_inner([1, 2, 3], [4, 5, 6], 2, 3) == 32
    assert binseg_inner([0, 0], [3, 1], 1, 2) == 0
    v = [9, 14, 3, 0, 15]
    assert binseg_inner([1] * 5, v, 1, 4) == sum(v)


def test_sum_examples():
    assert binseg_sum([5, 7, 9], 4) == 21
    assert binseg_sum([], 4) == 0
    for n in (1, 2, 3, 7, 8, 64, 255, 256):
        for h in (1, 5, 12):
            assert binseg_sum([2**h - 1] * n, h) == n * (2**h - 1)


def test_bound_violations():
    with pytest.raises(SlotOverflow):
        binseg_inner([4], [1], 2, 1)
    with pytest.raises(SlotOverflow):
        binseg_sum([16], 4)
    with pytest.raises(ValueError):
        binseg_inner([1, 2], [1], 2, 2)


@settings(max_examples=300)
@given(st.integers(1, 12), st.integers(1, 12), st.integers(1, 256), st.data())
def test_inner_matches_direct(g, h, n, data):
    u = data.draw(st.lists(st.integers(0, 2**g - 1), min_size=n, max_size=n))
    v = data.draw(st.lists(st.integers(0, 2**h - 1), min_size=n, max_size=n))
    c = OpCounter()
    assert binseg_inner(u, v, g, h, c) == sum(a * b for a, b in zip(u, v))
    assert c.mults == 1


@settings(max_examples=100)
@given(st.integers(1, 12), st.lists(st.integers(0, 4095), max_size=256))
def test_sum_matches_direct(h, v):
    v = [x % 2**h for x in v]
    assert binseg_sum(v, h) == sum(v)


def test_one_bit_short_fails_on_maximal_input():
    failures = 0
    # tiny shapes such as g = h = 1, n = 2 never reach the top bit, so they are excluded
    for g, h, n in [(4, 4, 4), (12, 12, 256), (8, 8, 8), (7, 3, 16)]:
        u, v = [2**g - 1] * n, [2**h - 1] * n
        exact = n * (2**g - 1) * (2**h - 1)
        k = slot_width(g, h, n)
        assert binseg_inner(u, v, g, h) == exact
        short = binseg_inner(u, v, g, h, k=k - 1)
        assert short != exact
        failures += 1
    assert failures == 4


def test_signed_sum_examples():
    assert binseg_sum_signed([-2, 0, 3], -2, 4) == 1
    with pytest.raises(SlotOverflow):
        binseg_sum_signed([4], -2, 4)


@settings(max_examples=200)
@given(st.integers(-500, 500), st.integers(1, 600), st.data())
def test_signed_sum_property(q, span, data):
    v = data.draw(st.lists(st.integers(q, q + span - 1), max_size=100))
    assert binseg_sum_signed(v, q, q + span) == sum(v)


@settings(max_examples=200)
@given(st.integers(-100, 100), st.integers(1, 200), st.integers(-100, 100), st.integers(1, 200), st.data())
def test_signed_inner_property(q1, s1, q2, s2, data):
    n = data.draw(st.integers(0, 60))
    u = [data.draw(st.integers(q1, q1 + s1 - 1)) for _ in range(n)]
    v = [data.draw(st.integers(q2, q2 + s2 - 1)) for _ in range(n)]
    assert binseg_inner_signed(u, v, (q1, q1 + s1), (q2, q2 + s2)) == sum(a * b for a, b in zip(u, v))


def test_ceil_log2():
    assert [ceil_log2(n) for n in (1, 2, 3, 4, 5, 256, 257)] == [0, 1, 2, 2, 3, 8, 9]


def test_packed_int_bound_flag():
    P = PackedInt(pack([3, 3], 2).value, 2, 2, bound=3)
    assert not P.overflowed
    with pytest.raises(SlotOverflow):
        unpack(PackedInt(0, 2, 2, bound=4))
