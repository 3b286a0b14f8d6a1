from itertools import permutations
from math import comb

import pytest
from hypothesis import given, strategies as st

from mosaic.errors import IndexOutOfRange, RankCap, RankMismatch
from mosaic.shuffles import (MAX_RANK, Shuffle, all_shuffles, convert_shuffle, enumerate_shuffles, flat_word,
                             identity_shuffle, lower_shuffle, raise_shuffle, remainder_shuffle,
                             sharp_instantaneous_slots, sharp_word)


def is_shuffle(image, alpha):
    left, right = image[:alpha], image[alpha:]
    return list(left) == sorted(left) and list(right) == sorted(right)


@st.composite
def shuffles(draw, max_n=6):
    n = draw(st.integers(0, max_n))
    subset = draw(st.sets(st.integers(1, n), max_size=n)) if n else set()
    return Shuffle(n, tuple(sorted(subset)))


@pytest.mark.parametrize("n", range(0, 7))
def test_counts_match_binomials(n):
    for a in range(n + 1):
        assert len(enumerate_shuffles(n, a)) == comb(n, a)
    assert len(all_shuffles(n)) == 2 ** n


@pytest.mark.parametrize("n", range(1, 6))
def test_enumeration_equals_brute_force(n):
    for a in range(n + 1):
        brute = {p[:a] for p in permutations(range(1, n + 1)) if is_shuffle(p, a)}
        assert {s.transversal for s in enumerate_shuffles(n, a)} == brute


def test_canonical_order():
    assert [str(s) for s in all_shuffles(2)] == ["(|1 2)", "(1|2)", "(2|1)", "(1 2|)"]
    keys = [s.sort_key() for s in all_shuffles(5)]
    assert keys == sorted(keys)


def test_notation_round_trip():
    s = Shuffle.parse("(3 5|1 2 4)")
    assert s.image == (3, 5, 1, 2, 4)
    assert s(2) == 5 and s.inverse(5) == 2
    assert str(s) == "(3 5|1 2 4)"
    assert s.word() == "SSτSτ"
    assert Shuffle.from_word("SSτSτ") == s
    assert Shuffle.from_word(s.flat_word()) == s


def test_parse_rejects_non_shuffles():
    with pytest.raises(ValueError):
        Shuffle.parse("(1|3 2)")
    with pytest.raises(ValueError):
        Shuffle.parse("1 2")
    with pytest.raises(ValueError):
        Shuffle.from_word("SxS")


def test_rank_cap():
    assert len(all_shuffles(MAX_RANK)) == 2 ** MAX_RANK
    with pytest.raises(RankCap):
        all_shuffles(MAX_RANK + 1)


def test_special_words():
    assert sharp_word(3).flat_word() == "♯♯♯"
    assert flat_word(3).flat_word() == "♭♭♭"
    assert identity_shuffle(4, 2).image == (1, 2, 3, 4)


def test_raise_lower_examples():
    s = Shuffle.parse("(2 4|1 3)")
    up, p = raise_shuffle(s, 2)
    assert str(up) == "(2|1 3 4)" and p == 3
    down, q = lower_shuffle(s, 1)
    assert str(down) == "(1 2 4|3)" and q == 1
    with pytest.raises(IndexOutOfRange):
        raise_shuffle(s, 3)
    with pytest.raises(IndexOutOfRange):
        lower_shuffle(s, 0)
    with pytest.raises(ValueError):
        convert_shuffle(s, 1, "sideways")


@given(shuffles())
def test_raise_then_lower_round_trips(s):
    for beta in range(1, s.alpha + 1):
        up, p = raise_shuffle(s, beta)
        assert up.alpha == s.alpha - 1
        back, q = lower_shuffle(up, p)
        assert back == s and q == beta
    for beta in range(1, s.n - s.alpha + 1):
        down, p = lower_shuffle(s, beta)
        back, q = raise_shuffle(down, p)
        assert back == s and q == beta


@pytest.mark.parametrize("n", range(0, 7))
def test_remainder_identity_exhaustive(n):
    for st_ in all_shuffles(n):
        for s in all_shuffles(n):
            r = remainder_shuffle(st_, s)
            assert r.n == n - s.alpha
            assert sharp_instantaneous_slots(st_, s) == set(r.transversal)


def test_remainder_of_self_is_pure_instantaneous():
    for s in all_shuffles(4):
        assert remainder_shuffle(s, s).alpha == 0


def test_remainder_rank_mismatch():
    with pytest.raises(RankMismatch):
        remainder_shuffle(all_shuffles(2)[0], all_shuffles(3)[0])
