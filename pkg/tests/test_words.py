from __future__ import annotations

from fractions import Fraction
from itertools import product

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from hitorder.errors import AlphabetMismatch, AlphabetTooSmall
from hitorder.hitting import expected_hitting, hitting_cdf
from hitorder.matrix_core import validate
from hitorder.stochastic_order import Verdict, rowwise_dominates, triangle_leq
from hitorder.matrix_core import mat_pow
from hitorder.words import (
    ExtensionCheck,
    LeadingNumber,
    Word,
    alphabet_extension_preserves,
    compare_words,
    conway_mean,
    extremal_words,
    failure_function,
    leading_number,
    minimal_alphabet,
    substitute_by_leading,
    word_chain,
    words_with_leading,
)
from oracles import first_hit_pmf_bruteforce, naive_word_chain

F = Fraction


def W(text: str, N: int = 2) -> Word:
    return Word.parse(text, N)


def words_st(max_k: int = 6, max_n: int = 3):
    return st.integers(2, max_n).flatmap(
        lambda N: st.lists(st.integers(1, N), min_size=1, max_size=max_k).map(lambda xs: Word(tuple(xs), N))
    )


def test_word_parsing_and_rendering():
    w = W("abbba")
    assert w.letters == (1, 2, 2, 2, 1)
    assert str(w) == "ABBBA"
    assert w.k == len(w) == 5
    with pytest.raises(AlphabetTooSmall):
        W("ABC", 2)
    with pytest.raises(ValueError):
        W("", 2)
    with pytest.raises(ValueError):
        W("A1", 2)


@pytest.mark.parametrize(
    "text, bits",
    [("ABBBA", "10001"), ("AAAAB", "00001"), ("AAAAA", "11111"), ("ABABA", "10101"), ("ABAAB", "01001")],
)
def test_leading_numbers(text, bits):
    assert str(leading_number(W(text))) == bits


def test_leading_number_invariant():
    with pytest.raises(ValueError):
        LeadingNumber((1, 0))
    with pytest.raises(ValueError):
        LeadingNumber((2, 1))
    assert LeadingNumber.parse("0101").bits == (0, 1, 0, 1)


@pytest.mark.parametrize("text, mean", [("ABBBA", 34), ("AAAAB", 32), ("AAAAA", 62), ("ABABA", 42), ("ABAAB", 36)])
def test_conway_means(text, mean):
    assert conway_mean(W(text)) == mean


def test_small_chains():
    assert word_chain(W("AA")) == validate([["1/2", "1/2", 0], ["1/2", 0, "1/2"], [0, 0, 1]])
    assert word_chain(W("AB")) == validate([["1/2", "1/2", 0], [0, "1/2", "1/2"], [0, 0, 1]])


@pytest.mark.parametrize("k, N", [(1, 2), (3, 2), (4, 3), (5, 4)])
def test_constant_word_chain(k, N):
    m = word_chain(Word((1,) * k, N))
    for i in range(k):
        assert m[i, i + 1] == F(1, N)
        assert m[i, 0] == 1 - F(1, N)


def test_non_absorbing_chain_keeps_scanning():
    m = word_chain(W("ABA"), absorbing=False)
    # After a full match ABA, reading B leaves AB matched, reading A leaves A.
    assert m.row(3) == (0, F(1, 2), F(1, 2), 0)
    assert word_chain(W("AA"), absorbing=False).row(2) == (F(1, 2), 0, F(1, 2))


@settings(max_examples=200, deadline=None)
@given(words_st())
def test_chain_matches_naive_construction(w):
    assert [list(r) for r in word_chain(w).rows] == naive_word_chain(w.letters, w.alphabet_size)


@settings(max_examples=100, deadline=None)
@given(words_st())
def test_feeding_next_letter_advances(w):
    m = word_chain(w)
    for i in range(w.k):
        assert m[i, i + 1] >= F(1, w.alphabet_size)


@settings(max_examples=100, deadline=None)
@given(words_st())
def test_failure_function_is_longest_border(w):
    a = w.letters
    f = failure_function(a)
    for i in range(1, w.k + 1):
        expected = max(h for h in range(i) if a[:h] == a[i - h:i])
        assert f[i] == expected


@settings(max_examples=60, deadline=None)
@given(words_st(max_k=6))
def test_conway_mean_equals_chain_mean(w):
    assert expected_hitting(word_chain(w)) == conway_mean(w)


@pytest.mark.parametrize("N", [2, 3])
def test_enumeration_oracle(N):
    for k in range(1, 5):
        for letters in product(range(1, N + 1), repeat=k):
            pmf = hitting_cdf(word_chain(Word(letters, N)), horizon=12).pmf()
            assert pmf == first_hit_pmf_bruteforce(letters, N, 12), letters


def test_leading_number_determines_law():
    for N in (2, 3):
        groups: dict = {}
        for letters in product(range(1, N + 1), repeat=4):
            w = Word(letters, N)
            groups.setdefault(leading_number(w).bits, []).append(w)
        for members in groups.values():
            ref = hitting_cdf(word_chain(members[0]), horizon=60).cdf
            for w in members[1:]:
                assert hitting_cdf(word_chain(w), horizon=60).cdf == ref


def test_minimal_alphabet():
    assert minimal_alphabet(W("ABBBA")) == {1, 2}
    assert minimal_alphabet(W("AAAAA")) == {1}
    assert minimal_alphabet(W("ABC", 5)) == {1, 2, 3}


def test_extremal_words():
    slow, fast = extremal_words(3, 2)
    assert str(slow) == "AAA" and fast is None
    slow, fast = extremal_words(3, 3)
    assert (str(slow), str(fast)) == ("AAA", "ABC")
    slow, fast = extremal_words(1, 2)
    assert (str(slow), str(fast)) == ("A", "A")
    with pytest.raises(ValueError):
        extremal_words(3, 1)


def test_alphabet_extension():
    w, w_prime = W("ABAAB"), W("ABABA")
    assert rowwise_dominates(word_chain(w), word_chain(w_prime))
    assert alphabet_extension_preserves(w, w_prime, 3) is ExtensionCheck.PRESERVED
    assert alphabet_extension_preserves(W("AB"), W("AA"), 4) is ExtensionCheck.PRESERVED
    # Not ordered at the base alphabet: nothing to preserve.
    result = alphabet_extension_preserves(W("AAAAB"), W("ABBBA"), 3)
    assert result is ExtensionCheck.NOT_APPLICABLE and bool(result)
    with pytest.raises(AlphabetTooSmall):
        alphabet_extension_preserves(W("ABC", 3), W("AAA", 3), 2)
    with pytest.raises(AlphabetMismatch):
        alphabet_extension_preserves(W("AB", 2), W("AB", 3), 3)


def test_alphabet_extension_corpus():
    pairs = []
    for N in (2, 3):
        for k in (3, 4):
            words = [Word(letters, N) for letters in product(range(1, N + 1), repeat=k)]
            for w in words:
                for w_prime in words:
                    if w != w_prime and rowwise_dominates(word_chain(w), word_chain(w_prime)):
                        pairs.append((w, w_prime))
    pairs = pairs[:: max(1, len(pairs) // 50)][:50]
    assert len(pairs) == 50
    for w, w_prime in pairs:
        for N_hat in range(w.alphabet_size, w.alphabet_size + 4):
            assert alphabet_extension_preserves(w, w_prime, N_hat) is ExtensionCheck.PRESERVED


def test_substitute_by_leading():
    z = substitute_by_leading(W("AAAAB"), (0, 0, 0, 0, 1), exclude=[W("AAAAB")])
    assert z is not None and leading_number(z).bits == (0, 0, 0, 0, 1)
    assert str(substitute_by_leading(W("ABBBA"), (1, 1, 1, 1, 1))) == "AAAAA"
    assert substitute_by_leading(W("AB"), (1, 1, 0)) is None
    with pytest.raises(ValueError):
        substitute_by_leading(Word((1,) * 11, 2), (0,) * 10 + (1,))


def test_unrealizable_leading_numbers():
    # eps(1) = eps(2) = 1 forces w1 = w2 = w(k-1) = wk; at k = 4 that makes the word constant.
    assert substitute_by_leading(W("ABAB"), (1, 1, 0, 1)) is None
    assert str(substitute_by_leading(W("ABABA"), (1, 1, 0, 0, 1))) == "AABAA"
    for N in (2, 3):
        for k in range(3, 7):
            realized = {leading_number(Word(l, N)).bits for l in product(range(1, N + 1), repeat=k)}
            for tail in product((0, 1), repeat=k - 3):
                bits = (1, 1) + tail + (1,)
                found = next(words_with_leading(bits, N), None)
                assert (found is not None) == (bits in realized)


def test_compare_words_rowwise_pair():
    report = compare_words(W("ABAAB"), W("ABABA"))
    assert report.verdict is Verdict.ST_CERTIFIED
    assert (report.fast_mean, report.slow_mean) == (36, 42)
    assert report.falsified_at is None
    d = report.to_dict()
    assert d["verdict"] == "StCertified"
    assert d["fast_leading"] == "01001"


def test_compare_words_incomparable_powers():
    fast, slow = W("AAAAB"), W("ABBBA")
    P, P_tilde = word_chain(fast), word_chain(slow)
    for n in range(1, 31):
        assert not triangle_leq(mat_pow(P_tilde, n), mat_pow(P, n))
    report = compare_words(fast, slow)
    assert report.verdict is Verdict.INCONCLUSIVE
    sub = report.substitution
    assert sub is not None
    assert sub.certificate.verdict is Verdict.ST_CERTIFIED
    assert leading_number(sub.fast) == leading_number(fast) or leading_number(sub.slow) == leading_number(slow)


def test_substitute_from_example():
    # BAAAA shares the leading number of AAAAB and its powers dominate those of ABBBA.
    z, slow = W("BAAAA"), W("ABBBA")
    assert leading_number(z) == leading_number(W("AAAAB"))
    P, P_tilde = word_chain(z), word_chain(slow)
    for n in range(1, 31):
        assert triangle_leq(mat_pow(P_tilde, n), mat_pow(P, n))


def test_compare_word_with_itself():
    for text in ("ABBA", "AAAB"):
        report = compare_words(W(text), W(text))
        assert report.verdict is Verdict.ST_CERTIFIED


def test_compare_words_errors():
    with pytest.raises(AlphabetMismatch):
        compare_words(W("AB", 2), W("AB", 3))
    with pytest.raises(ValueError):
        compare_words(W("AB"), W("ABA"))
