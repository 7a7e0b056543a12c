import pytest
from hypothesis import given, strategies as st

from rauzylab.words import (InfiniteWordStream, InsufficientData, Word, abelianize, balance_check,
                            complexity, count_factors, factors, parse_word, render)

words3 = st.lists(st.integers(1, 3), max_size=60).map(bytes)


def test_abelianize_examples():
    assert abelianize("", 3) == (0, 0, 0)
    assert abelianize("1213121", 3) == (4, 2, 1)
    assert abelianize("121", 2) == (2, 1)


def test_abelianize_rejects_foreign_letters():
    with pytest.raises(ValueError):
        abelianize("14", 3)


@given(words3)
def test_abelianize_sums_to_length(w):
    assert sum(abelianize(w, 3)) == len(w)


def test_factors_examples():
    assert factors("12131", 2) == {parse_word(x) for x in ("12", "21", "13", "31")}
    assert factors("12131", 0) == {b""}
    with pytest.raises(InsufficientData):
        factors("12", 3)


@given(words3, st.integers(0, 8))
def test_count_factors_matches_set(w, n):
    if n > len(w):
        return
    assert count_factors(w, n) == len(factors(w, n))


@given(words3, st.integers(1, 6))
def test_factor_language_is_extendable(w, n):
    if n + 1 > len(w):
        return
    longer = factors(w, n + 1)
    assert {u[:n] for u in longer} <= factors(w, n)


def test_sturmian_prefix_has_six_factors_of_length_five(fibonacci_word):
    assert count_factors(fibonacci_word[:10_000], 5) == 6


def test_complexity_examples(fibonacci_word, tribonacci_word):
    assert complexity(fibonacci_word, 7, 10_000).count == 8
    assert complexity(tribonacci_word, 4, 10_000).count == 9
    assert complexity(b"\x01" * 100, 3, 100).count == 1


def test_complexity_nondecreasing_on_periodic_word():
    w = parse_word("1123" * 50)
    counts = [complexity(w, n, len(w)).count for n in range(1, 10)]
    assert counts == sorted(counts)
    assert counts[-1] == 4


def test_balance_examples(fibonacci_word):
    assert balance_check(fibonacci_word[:5000], 1).balanced
    wit = balance_check(parse_word("1212"), 0).witness
    assert wit is not None and len(wit[0]) == 1
    v = balance_check(parse_word("3212313"), 1)
    assert not v.balanced
    u, w, letter = v.witness
    assert (abelianize(u, 3)[letter - 1] - abelianize(w, 3)[letter - 1]) == 2


@given(words3, st.integers(1, 3))
def test_balance_monotone_in_C(w, C):
    if balance_check(w, C, 3).balanced:
        assert balance_check(w, C + 1, 3).balanced


def test_word_type_and_render():
    w = Word.from_string("1213", 3)
    assert str(w[1:]) == "213"
    assert render(parse_word("1a")) == "1a"
    with pytest.raises(ValueError):
        Word(b"\x04", w.alphabet)


def test_stream_is_consistent_and_cached():
    calls = []

    def producer(k):
        calls.append(k)
        return bytes((i % 2) + 1 for i in range(2 * k))

    s = InfiniteWordStream(producer, 2)
    assert s.prefix(3) == b"\x01\x02\x01"
    assert s.prefix(2) == b"\x01\x02"
    assert len(calls) == 1
    assert s[5] == 2


def test_stream_detects_changed_prefix():
    state = {"n": 0}

    def producer(k):
        state["n"] += 1
        return bytes([state["n"]] * k)

    s = InfiniteWordStream(producer, 3)
    s.prefix(2)
    with pytest.raises(RuntimeError):
        s.prefix(5)
