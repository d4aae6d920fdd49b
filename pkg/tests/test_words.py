import pytest
from hypothesis import given
from hypothesis import strategies as st

from ncmarkov.errors import GuardError
from ncmarkov.words import (
    WordIndex,
    check_word,
    concat,
    enumerate_words,
    parse_word,
    reverse,
    word_count,
    word_text,
)


def test_word_count_closed_form():
    assert word_count(1, 4) == 5
    assert word_count(2, 3) == 15
    assert word_count(3, 2) == 13


def test_enumeration_order_is_length_then_lexicographic():
    assert enumerate_words(2, 2) == [(), (1,), (2,), (1, 1), (1, 2), (2, 1), (2, 2)]


@given(st.integers(1, 4), st.integers(0, 5))
def test_index_roundtrip(d, n):
    idx = WordIndex(d, n)
    words = idx.words()
    assert len(words) == idx.total == word_count(d, n)
    for i, w in enumerate(words):
        assert idx.word_to_index(w) == i
        assert idx.index_to_word(i) == w


@given(st.integers(1, 4), st.integers(1, 5))
def test_levels_partition_the_index(d, n):
    idx = WordIndex(d, n)
    covered = [i for m in range(n + 1) for i in idx.level(m)]
    assert covered == list(range(idx.total))
    for m in range(n + 1):
        assert all(len(idx.index_to_word(i)) == m for i in idx.level(m))


def test_prefixes_precede_words():
    idx = WordIndex(3, 3)
    for w in idx.words():
        for k in range(len(w)):
            assert idx.word_to_index(w[:k]) < idx.word_to_index(w)


def test_guard_refuses_huge_enumerations():
    with pytest.raises(GuardError):
        WordIndex(3, 30)
    with pytest.raises(ValueError):
        WordIndex(0, 2)


def test_out_of_range():
    idx = WordIndex(2, 2)
    with pytest.raises(ValueError):
        idx.word_to_index((3,))
    with pytest.raises(ValueError):
        idx.word_to_index((1, 1, 1))
    with pytest.raises(IndexError):
        idx.index_to_word(idx.total)
    with pytest.raises(ValueError):
        check_word((0,), 2)


def test_text_roundtrip_and_helpers():
    assert word_text(()) == "-"
    assert word_text((1, 2, 2)) == "1.2.2"
    assert parse_word("1.2.2") == (1, 2, 2)
    assert parse_word("-") == ()
    assert concat((1,), (2, 3)) == (1, 2, 3)
    assert reverse((1, 2, 3)) == (3, 2, 1)
