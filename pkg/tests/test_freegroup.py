import pytest
from hypothesis import given, strategies as st

from gmboundary.errors import DomainError, MalformedWordError
from gmboundary.freegroup import (
    BlockElement,
    SurfaceData,
    block_element,
    block_mul,
    count_reduced_words,
    cyclic_reduce,
    format_block,
    free_reduce,
    is_conjugate_to_power,
    is_peripheral,
    iter_reduced_words,
    parse_block,
    strip_trailing,
    surface_relation,
    word_inv,
    word_mul,
    word_pow,
)

letters = st.lists(st.sampled_from([1, -1, 2, -2, 3, -3]), max_size=12)


def test_reduce_cancels():
    assert free_reduce([1, 2, -2, -1, 3]) == (3,)
    assert free_reduce([(1, 1), (1, -1)]) == ()
    with pytest.raises(MalformedWordError):
        free_reduce([4], rank=3)
    with pytest.raises(MalformedWordError):
        free_reduce([0])


@given(letters, letters, letters)
def test_group_laws(a, b, c):
    a, b, c = free_reduce(a), free_reduce(b), free_reduce(c)
    assert word_mul(word_mul(a, b), c) == word_mul(a, word_mul(b, c))
    assert word_mul(a, word_inv(a)) == ()
    assert free_reduce(a) == a


def test_powers_and_strip():
    assert word_pow((1, 2), -2) == (-2, -1, -2, -1)
    assert strip_trailing((2, 1, 1), 1) == ((2,), 2)
    assert strip_trailing((2, -1), 1) == ((2,), -1)
    assert cyclic_reduce((1, 2, -1)) == (2,)


def test_reduced_word_counts():
    # 2k (2k-1)^(n-1) words of length n
    assert count_reduced_words(2, 3) == 36
    assert len(list(iter_reduced_words(2, 3))) == sum(count_reduced_words(2, n) for n in range(4))
    assert len(set(iter_reduced_words(3, 2))) == 1 + 6 + 30


def test_surface_layout():
    s = SurfaceData(1, 2)
    assert s.rank == 3 and s.euler_characteristic == -2
    assert s.boundary_letter(1) == 3
    with pytest.raises(IndexError):
        s.boundary_letter(2)
    # last boundary circle is the product relation; it is still peripheral
    pants = SurfaceData(0, 3)
    rel = surface_relation(pants)
    assert is_peripheral(pants, rel)
    assert is_peripheral(pants, (1, 2))
    assert not is_peripheral(pants, (1, -2))
    assert is_conjugate_to_power((2, 1, 1, -2), (1,))
    assert not is_conjugate_to_power((1, 2), (1,))


def test_block_product():
    s = SurfaceData(0, 3)
    x = block_element(s, [1, 2], 3)
    y = block_element(s, [-2], -1)
    assert block_mul(x, y) == BlockElement((1,), 2, 2)
    assert (x * ~x).is_identity
    with pytest.raises(DomainError):
        block_mul(x, BlockElement((), 0, 3))


@given(letters, st.integers(-5, 5))
def test_block_tokens_roundtrip(w, f):
    s = SurfaceData(0, 4)
    x = block_element(s, w, f)
    assert parse_block(s, format_block(s, x)) == x


def test_block_tokens():
    s = SurfaceData(0, 3)
    assert format_block(s, BlockElement((), 0, 2)) == "1"
    assert parse_block(s, "c1^2 c2^-1 z^3") == BlockElement((1, 1, -2), 3, 2)
    with pytest.raises(MalformedWordError):
        parse_block(s, "c3")
