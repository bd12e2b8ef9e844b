from __future__ import annotations

from fractions import Fraction
from math import gcd

import pytest
from hypothesis import HealthCheck, assume, given, settings
from hypothesis import strategies as st

from conftest import example_one, same_size_pairs, skip_free_pairs, stoch_matrices, triangle_pairs, two_level
from hitorder.errors import LengthMismatch, NotAbsorbing, NotCoprime, NotSkipFree, SizeMismatch
from hitorder.matrix_core import delta, identity, mat_pow, validate
from hitorder.stochastic_order import (
    OrderCertificate,
    PrefixCheck,
    VedereWitness,
    Verdict,
    absorption_probabilities,
    certify_st_order,
    check_serve,
    check_vedere,
    find_coprime_pair,
    frobenius_threshold,
    is_stoch_monotone,
    rowwise_dominates,
    serve_check,
    st_leq,
    tail_sums,
    triangle_leq,
    witness_holds,
)
from hitorder.words import Word, word_chain
from oracles import absorption_naive, representable_from, triangle_naive

F = Fraction


def test_st_leq_basics():
    assert st_leq(delta(0, 3), delta(2, 3))
    assert not st_leq(delta(2, 3), delta(0, 3))
    p = (F(1, 2), F(1, 2), F(0))
    assert st_leq(p, p)
    assert tail_sums(p) == [1, F(1, 2), 0]
    with pytest.raises(LengthMismatch):
        st_leq(p, (F(1),))


@settings(max_examples=100, deadline=None)
@given(stoch_matrices(size=4))
def test_st_leq_is_a_partial_order_on_rows(m):
    a, b, c = m.row(0), m.row(1), m.row(2)
    assert st_leq(a, a)
    if st_leq(a, b) and st_leq(b, c):
        assert st_leq(a, c)
    if st_leq(a, b) and st_leq(b, a):
        assert a == b


@settings(max_examples=100, deadline=None)
@given(same_size_pairs())
def test_triangle_matches_naive(pair):
    a, b = pair
    assert triangle_leq(a, b) == triangle_naive(a.rows, b.rows)


def test_triangle_size_mismatch():
    with pytest.raises(SizeMismatch):
        triangle_leq(identity(2), identity(3))


def test_identity_is_monotone():
    assert is_stoch_monotone(identity(3))
    assert not is_stoch_monotone(validate([[0, 1], [1, 0]]))


@settings(max_examples=80, deadline=None)
@given(st.integers(2, 4).flatmap(lambda s: st.tuples(triangle_pairs(s), triangle_pairs(s))))
def test_triangle_closed_under_products(pairs):
    (a_prime, a), (b_prime, b) = pairs
    assert triangle_leq(a_prime, a) and triangle_leq(b_prime, b)
    assert triangle_leq(a_prime @ b_prime, a @ b)


def test_frobenius_threshold_values():
    assert frobenius_threshold(3, 4) == 6
    assert frobenius_threshold(4, 5) == 12
    assert frobenius_threshold(1, 7) == 0
    with pytest.raises(NotCoprime):
        frobenius_threshold(4, 6)


@pytest.mark.parametrize("n1", range(1, 13))
def test_frobenius_threshold_brute_force(n1):
    for n2 in range(1, 13):
        if gcd(n1, n2) != 1:
            continue
        r = frobenius_threshold(n1, n2)
        assert r == representable_from(n1, n2)
        assert r <= n1 * n2


def test_find_coprime_pair_lexicographic():
    P = word_chain(Word.parse("ABAAB", 2))
    P_tilde = word_chain(Word.parse("ABABA", 2))
    assert find_coprime_pair(P_tilde, P) == (2, 3)
    assert find_coprime_pair(P_tilde, P, n_max=2) is None
    with pytest.raises(ValueError):
        find_coprime_pair(P_tilde, P, n_max=1)


@settings(max_examples=40, deadline=None, suppress_health_check=[HealthCheck.filter_too_much])
@given(skip_free_pairs())
def test_certified_pairs_close_under_powers(pair):
    P, P_tilde = pair
    pair = find_coprime_pair(P_tilde, P, n_max=12)
    assume(pair is not None)
    n_hat = frobenius_threshold(*pair)
    for n in range(max(n_hat, 1), n_hat + 11):
        assert triangle_leq(mat_pow(P_tilde, n), mat_pow(P, n))


@settings(max_examples=40, deadline=None, suppress_health_check=[HealthCheck.filter_too_much])
@given(skip_free_pairs())
def test_st_certificate_implies_cdf_order(pair):
    P, P_tilde = pair
    cert = certify_st_order(P, P_tilde, n_max=12)
    assume(cert.verdict is Verdict.ST_CERTIFIED)
    horizon = (cert.n_hat or 0) + 20
    fast = absorption_naive([list(r) for r in P.rows], horizon)
    slow = absorption_naive([list(r) for r in P_tilde.rows], horizon)
    assert all(s <= f for s, f in zip(slow, fast))


def test_certificate_requires_absorbing():
    m = validate([["1/2", "1/2"], ["1/2", "1/2"]])
    with pytest.raises(NotAbsorbing):
        certify_st_order(m, m)


def test_identical_matrices_certified():
    P = two_level(F(1, 3), F(1, 2))
    cert = certify_st_order(P, P)
    assert cert.verdict is Verdict.ST_CERTIFIED


def test_supplied_pair_is_verified():
    P = word_chain(Word.parse("ABAAB", 2))
    P_tilde = word_chain(Word.parse("ABABA", 2))
    cert = certify_st_order(P, P_tilde, pair=(3, 4))
    assert (cert.verdict, cert.pair, cert.n_hat) == (Verdict.ST_CERTIFIED, (3, 4), 6)
    assert [c.n for c in cert.prefix_checks] == [1, 2, 3, 4, 5]
    with pytest.raises(ValueError):
        certify_st_order(P, P_tilde, pair=(1, 2))
    with pytest.raises(NotCoprime):
        certify_st_order(P, P_tilde, pair=(2, 4))


def test_falsified_certificate():
    # The slow chain jumps straight to the target more often.
    P = validate([["1/2", "1/2", 0], [0, "1/2", "1/2"], [0, 0, 1]])
    P_tilde = validate([["1/2", 0, "1/2"], [0, 1, 0], [0, 0, 1]])
    cert = certify_st_order(P, P_tilde, n_max=10)
    assert cert.verdict is Verdict.FALSIFIED
    assert cert.falsified_at == 1
    assert cert.falsified_values == (0, F(1, 2))


def test_certificate_invariants():
    with pytest.raises(ValueError):
        OrderCertificate(Verdict.FALSIFIED)
    with pytest.raises(ValueError):
        OrderCertificate(Verdict.FALSIFIED, falsified_at=1, falsified_values=(F(1, 2), F(1, 4)))
    with pytest.raises(ValueError):
        OrderCertificate(Verdict.ST_CERTIFIED)
    assert PrefixCheck(1, F(1, 2), F(1, 3)).holds


def test_rowwise_and_vedere_on_example_one():
    P, P_tilde = example_one()
    assert not rowwise_dominates(P, P_tilde)
    assert check_vedere(P, P_tilde) == VedereWitness((2, 1, 1))
    assert witness_holds(P, P_tilde, (2, 1, 1))
    assert not witness_holds(P, P_tilde, (1, 1, 1))
    assert check_vedere(P_tilde, P) is None
    assert check_vedere(P, P_tilde, m_max=1) is None


def test_vedere_respects_initial_laws():
    P, P_tilde = example_one()
    assert check_vedere(P, P_tilde, pi=delta(0, 4), pi_tilde=delta(1, 4)) is None
    assert check_vedere(P, P_tilde, pi=delta(1, 4), pi_tilde=delta(0, 4)) is not None


def test_vedere_requires_skip_free():
    jumpy = validate([["1/2", 0, "1/2"], [0, 1, 0], [0, 0, 1]])
    with pytest.raises(NotSkipFree):
        check_vedere(jumpy, jumpy)


def test_witness_bounds():
    assert VedereWitness((3, 2, 1)).k == 3
    with pytest.raises(ValueError):
        VedereWitness((4, 1, 1))
    with pytest.raises(ValueError):
        VedereWitness((1, 3, 1))
    with pytest.raises(ValueError):
        VedereWitness((0, 1, 1))


@settings(max_examples=40, deadline=None, suppress_health_check=[HealthCheck.filter_too_much])
@given(skip_free_pairs(min_size=3))
def test_vedere_witness_implies_cdf_order(pair):
    P, P_tilde = pair
    w = check_vedere(P, P_tilde)
    assume(w is not None)
    fast = absorption_probabilities(P, 40)
    slow = absorption_probabilities(P_tilde, 40)
    assert all(s <= f for s, f in zip(slow, fast))


@settings(max_examples=40, deadline=None, suppress_health_check=[HealthCheck.filter_too_much])
@given(skip_free_pairs(min_size=3))
def test_serve_implies_cdf_order(pair):
    P, P_tilde = pair
    assume(any(check_serve(P, P_tilde, m, n_max=12) for m in range(1, P.k)))
    fast = absorption_probabilities(P, 40)
    slow = absorption_probabilities(P_tilde, 40)
    assert all(s <= f for s, f in zip(slow, fast))


def test_serve_on_words():
    P = word_chain(Word.parse("ABAAB", 2))
    P_tilde = word_chain(Word.parse("ABABA", 2))
    check = serve_check(P, P_tilde, 4)
    assert check.tail_condition and check.holds
    with pytest.raises(ValueError):
        serve_check(P, P_tilde, 5)


def test_absorption_probabilities_match_naive():
    P, _ = example_one()
    assert absorption_probabilities(P, 12) == absorption_naive([list(r) for r in P.rows], 12)
