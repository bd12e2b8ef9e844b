"""Order relations between distributions and transition matrices.

Conventions used throughout: ``P`` drives the chain claimed to be *fast*
and ``P_tilde`` the one claimed to be *slow*, so the target statement is
``T_k <=_st T~_k``. The triangle relation ``A' ⊴ A`` asks every row ``i``
of ``A'`` to be stochastically below every row ``j >= i`` of ``A``.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass, field
from fractions import Fraction
from math import gcd
from typing import Sequence

from .errors import NotAbsorbing, NotCoprime, NotSkipFree, LengthMismatch, SizeMismatch
from .matrix_core import (
    StochMatrix,
    collapse_above,
    delta,
    is_absorbing,
    is_skip_free,
    mat_pow,
    vec_mat,
)

DEFAULT_N_MAX = 64


def tail_sums(p: Sequence[Fraction]) -> list[Fraction]:
    """``out[j] = sum(p[j:])``."""
    out = [Fraction(0)] * len(p)
    acc = Fraction(0)
    for j in range(len(p) - 1, -1, -1):
        acc += p[j]
        out[j] = acc
    return out


def st_leq(p: Sequence[Fraction], q: Sequence[Fraction]) -> bool:
    """Usual stochastic order ``p <=_st q``: every tail of ``p`` is at most that of ``q``."""
    if len(p) != len(q):
        raise LengthMismatch(f"vectors of length {len(p)} and {len(q)}")
    return all(a <= b for a, b in zip(tail_sums(p), tail_sums(q)))


def _same_size(a: StochMatrix, b: StochMatrix) -> None:
    if a.size != b.size:
        raise SizeMismatch(f"matrices of size {a.size} and {b.size}")


def rowwise_dominates(P: StochMatrix, P_tilde: StochMatrix) -> bool:
    """Row ``i`` of ``P`` dominates row ``i`` of ``P_tilde`` for every ``i < k``."""
    _same_size(P, P_tilde)
    return all(st_leq(P_tilde.row(i), P.row(i)) for i in range(P.k))


def _triangle_tails(A_prime_tails, A_tails) -> bool:
    s = len(A_tails)
    for j in range(s):
        upper = A_tails[j]
        for i in range(j + 1):
            if any(a > b for a, b in zip(A_prime_tails[i], upper)):
                return False
    return True


def triangle_leq(A_prime: StochMatrix, A: StochMatrix) -> bool:
    """``A_prime ⊴ A``."""
    _same_size(A_prime, A)
    return _triangle_tails(
        [tail_sums(r) for r in A_prime.rows], [tail_sums(r) for r in A.rows]
    )


def is_stoch_monotone(P: StochMatrix) -> bool:
    return triangle_leq(P, P)


def _check_pair(n1: int, n2: int) -> None:
    if n1 < 1 or n2 < 1:
        raise ValueError("pair entries must be positive")
    if gcd(n1, n2) != 1:
        raise NotCoprime(f"gcd({n1}, {n2}) = {gcd(n1, n2)}")


def frobenius_threshold(n1: int, n2: int) -> int:
    """Smallest ``r`` such that every integer ``>= r`` is ``a*n1 + b*n2`` with ``a, b >= 0``.

    For coprime inputs this is one more than the Frobenius number, i.e.
    ``(n1 - 1) * (n2 - 1)``.
    """
    _check_pair(n1, n2)
    return (n1 - 1) * (n2 - 1)


def triangle_powers(P_tilde: StochMatrix, P: StochMatrix, n_max: int):
    """Yield ``(n, holds)`` with ``holds = P_tilde**n ⊴ P**n`` for ``n = 1..n_max``."""
    _same_size(P_tilde, P)
    A, B = P_tilde, P
    for n in range(1, n_max + 1):
        yield n, triangle_leq(A, B)
        if n < n_max:
            A, B = A @ P_tilde, B @ P


def find_coprime_pair(
    P_tilde: StochMatrix, P: StochMatrix, n_max: int = DEFAULT_N_MAX
) -> tuple[int, int] | None:
    """Lexicographically smallest coprime ``n1 < n2 <= n_max`` with both powers in ⊴.

    Powers are generated in increasing order and the scan stops as soon as
    the first holding exponent has found a coprime partner, since no pair
    with a smaller ``n1`` can exist after that.
    """
    if n_max < 2:
        raise ValueError("n_max must be at least 2")
    holding: list[int] = []
    best: tuple[int, int] | None = None
    for n, ok in triangle_powers(P_tilde, P, n_max):
        if not ok:
            continue
        for c in holding:
            if gcd(c, n) == 1:
                if best is None or c < best[0]:
                    best = (c, n)
                break
        holding.append(n)
        if best is not None and best[0] == holding[0]:
            return best
    return best


class Verdict(str, enum.Enum):
    ST_CERTIFIED = "StCertified"
    AST_CERTIFIED = "AstCertified"
    FALSIFIED = "Falsified"
    INCONCLUSIVE = "Inconclusive"


@dataclass(frozen=True)
class PrefixCheck:
    n: int
    fast: Fraction  # P(T_k <= n) for the fast chain
    slow: Fraction

    @property
    def holds(self) -> bool:
        return self.slow <= self.fast

    def to_dict(self) -> dict:
        return {"n": self.n, "fast": str(self.fast), "slow": str(self.slow), "holds": self.holds}


@dataclass(frozen=True)
class OrderCertificate:
    """Outcome of an order check with the evidence that supports it.

    ``falsified_at`` may accompany an ``AstCertified`` verdict: the tail
    order is proven while the usual order fails at that exponent.
    """

    verdict: Verdict
    pair: tuple[int, int] | None = None
    n_hat: int | None = None
    prefix_checks: tuple[PrefixCheck, ...] = ()
    falsified_at: int | None = None
    falsified_values: tuple[Fraction, Fraction] | None = None
    identical: bool = False

    def __post_init__(self):
        if self.verdict is Verdict.FALSIFIED:
            if self.falsified_at is None or self.falsified_values is None:
                raise ValueError("a falsification needs the violating exponent and values")
            fast, slow = self.falsified_values
            if not slow > fast:
                raise ValueError("falsified_values do not witness a violation")
        if self.verdict is Verdict.ST_CERTIFIED and not self.identical:
            if self.pair is None or self.n_hat is None:
                raise ValueError("a usual-order certificate carries its coprime pair")

    @property
    def n1(self) -> int | None:
        return self.pair[0] if self.pair else None

    @property
    def n2(self) -> int | None:
        return self.pair[1] if self.pair else None

    def to_dict(self) -> dict:
        fv = self.falsified_values
        return {
            "verdict": self.verdict.value,
            "n1": self.n1,
            "n2": self.n2,
            "n_hat": self.n_hat,
            "prefix_checks": [c.to_dict() for c in self.prefix_checks],
            "falsified_at": self.falsified_at,
            "falsified_fast": str(fv[0]) if fv else None,
            "falsified_slow": str(fv[1]) if fv else None,
            "identical": self.identical,
        }


def require_absorbing(M: StochMatrix, which: str, target: int | None = None) -> int:
    target = M.k if target is None else target
    if not is_absorbing(M, target):
        raise NotAbsorbing(which, target)
    return target


def absorption_probabilities(M: StochMatrix, horizon: int, target: int | None = None):
    """``[p^(n)_{0,target} for n in 0..horizon]`` by repeated vector products."""
    target = M.k if target is None else target
    vec = delta(0, M.size)
    out = [vec[target]]
    for _ in range(horizon):
        vec = vec_mat(vec, M)
        out.append(vec[target])
    return out


def first_violation(P: StochMatrix, P_tilde: StochMatrix, horizon: int):
    """Smallest ``1 <= n <= horizon`` with ``p~^(n)_{0,k} > p^(n)_{0,k}``, with both values."""
    fast = absorption_probabilities(P, horizon)
    slow = absorption_probabilities(P_tilde, horizon)
    for n in range(1, horizon + 1):
        if slow[n] > fast[n]:
            return n, fast[n], slow[n]
    return None


def certify_st_order(
    P: StochMatrix,
    P_tilde: StochMatrix,
    n_max: int = DEFAULT_N_MAX,
    pair: tuple[int, int] | None = None,
) -> OrderCertificate:
    """Certify ``T_k <=_st T~_k`` through a coprime pair plus a finite prefix check.

    Both chains start at 0 and must have ``k`` absorbing. ``pair`` can be
    given to verify a specific pair instead of searching for the smallest.
    """
    _same_size(P, P_tilde)
    require_absorbing(P, "P")
    require_absorbing(P_tilde, "P_tilde")
    if pair is not None:
        n1, n2 = pair
        _check_pair(n1, n2)
        for n in (n1, n2):
            if not triangle_leq(mat_pow(P_tilde, n), mat_pow(P, n)):
                raise ValueError(f"supplied pair fails the triangle relation at n={n}")
    else:
        pair = find_coprime_pair(P_tilde, P, n_max)

    if pair is None:
        hit = first_violation(P, P_tilde, n_max)
        if hit is not None:
            n, fast, slow = hit
            return OrderCertificate(Verdict.FALSIFIED, falsified_at=n, falsified_values=(fast, slow))
        if P == P_tilde:
            return OrderCertificate(Verdict.ST_CERTIFIED, identical=True)
        return OrderCertificate(Verdict.INCONCLUSIVE)

    n_hat = frobenius_threshold(*pair)
    fast = absorption_probabilities(P, max(n_hat - 1, 0))
    slow = absorption_probabilities(P_tilde, max(n_hat - 1, 0))
    checks = tuple(PrefixCheck(n, fast[n], slow[n]) for n in range(1, n_hat))
    bad = next((c for c in checks if not c.holds), None)
    if bad is None:
        return OrderCertificate(Verdict.ST_CERTIFIED, pair=pair, n_hat=n_hat, prefix_checks=checks)
    return OrderCertificate(
        Verdict.AST_CERTIFIED,
        pair=pair,
        n_hat=n_hat,
        prefix_checks=checks,
        falsified_at=bad.n,
        falsified_values=(bad.fast, bad.slow),
    )


@dataclass(frozen=True)
class VedereWitness:
    """Per-state block lengths ``m(0..k-1)`` with ``i + m(i) <= k``."""

    m: tuple[int, ...]

    def __post_init__(self):
        k = len(self.m)
        for i, mi in enumerate(self.m):
            if mi < 1 or i + mi > k:
                raise ValueError(f"m({i}) = {mi} is outside [1, {k - i}]")

    @property
    def k(self) -> int:
        return len(self.m)

    def __getitem__(self, i: int) -> int:
        return self.m[i]

    def __iter__(self):
        return iter(self.m)


def check_vedere(
    P: StochMatrix,
    P_tilde: StochMatrix,
    m_max: int | None = None,
    pi: Sequence[Fraction] | None = None,
    pi_tilde: Sequence[Fraction] | None = None,
) -> VedereWitness | None:
    """Search the smallest block lengths under which ``P`` dominates ``P_tilde`` row by row.

    For every transient level ``i`` the returned ``m(i)`` is the least
    ``m <= min(m_max, k - i)`` with ``P_tilde**m[i] <=_st P**m[i]``. Returns
    ``None`` when some level has no such ``m`` or when the initial laws are
    not ordered.
    """
    _same_size(P, P_tilde)
    if not is_skip_free(P):
        raise NotSkipFree("P")
    if not is_skip_free(P_tilde):
        raise NotSkipFree("P_tilde")
    k = P.k
    m_max = k if m_max is None else m_max
    if pi is not None or pi_tilde is not None:
        pi = delta(0, P.size) if pi is None else pi
        pi_tilde = delta(0, P.size) if pi_tilde is None else pi_tilde
        if not st_leq(pi_tilde, pi):
            return None
    top = min(m_max, k)
    fast_pows = [None, P]
    slow_pows = [None, P_tilde]
    for _ in range(2, top + 1):
        fast_pows.append(fast_pows[-1] @ P)
        slow_pows.append(slow_pows[-1] @ P_tilde)
    witness = []
    for i in range(k):
        for m in range(1, min(m_max, k - i) + 1):
            if st_leq(slow_pows[m].row(i), fast_pows[m].row(i)):
                witness.append(m)
                break
        else:
            return None
    return VedereWitness(tuple(witness))


def witness_holds(P: StochMatrix, P_tilde: StochMatrix, witness: Sequence[int]) -> bool:
    """Whether a given block-length vector satisfies both conditions at every level."""
    k = P.k
    if len(witness) != k:
        return False
    for i, m in enumerate(witness):
        if m < 1 or i + m > k:
            return False
        if not st_leq(mat_pow(P_tilde, m).row(i), mat_pow(P, m).row(i)):
            return False
    return True


@dataclass(frozen=True)
class ServeCheck:
    m: int
    tail_condition: bool  # rows m..k-1 of P_tilde only move up one or reset, and move up less often
    prefix_certificate: OrderCertificate | None = field(default=None)

    @property
    def holds(self) -> bool:
        return (
            self.tail_condition
            and self.prefix_certificate is not None
            and self.prefix_certificate.verdict is Verdict.ST_CERTIFIED
        )

    @property
    def inconclusive(self) -> bool:
        return (
            self.tail_condition
            and self.prefix_certificate is not None
            and self.prefix_certificate.verdict is not Verdict.ST_CERTIFIED
            and self.prefix_certificate.falsified_at is None
        )

    def to_dict(self) -> dict:
        return {
            "m": self.m,
            "holds": self.holds,
            "tail_condition": self.tail_condition,
            "inconclusive": self.inconclusive,
            "prefix_certificate": (
                self.prefix_certificate.to_dict() if self.prefix_certificate else None
            ),
        }


def serve_check(
    P: StochMatrix, P_tilde: StochMatrix, m: int, n_max: int = DEFAULT_N_MAX
) -> ServeCheck:
    """Detailed form of :func:`check_serve`."""
    _same_size(P, P_tilde)
    if not is_skip_free(P):
        raise NotSkipFree("P")
    if not is_skip_free(P_tilde):
        raise NotSkipFree("P_tilde")
    k = P.k
    if not 1 <= m <= k - 1:
        raise ValueError(f"m must lie in [1, {k - 1}]")
    tail_ok = all(
        P_tilde[i, i + 1] <= P[i, i + 1] and P_tilde[i, 0] + P_tilde[i, i + 1] == 1
        for i in range(m, k)
    )
    if not tail_ok:
        return ServeCheck(m, False)
    cert = certify_st_order(collapse_above(P, m), collapse_above(P_tilde, m), n_max)
    return ServeCheck(m, True, cert)


def check_serve(
    P: StochMatrix, P_tilde: StochMatrix, m: int, n_max: int = DEFAULT_N_MAX
) -> bool:
    """Sufficient test for ``T_k <=_st T~_k`` by splitting at level ``m``.

    Levels ``m..k-1`` of ``P_tilde`` must either climb one step or fall back
    to 0, never climbing more often than ``P``. Below ``m`` the hitting
    times of level ``m`` must be ordered; that part is decided by
    :func:`certify_st_order` on the chains with ``m..k`` merged, so an
    inconclusive certificate counts as ``False``.
    """
    return serve_check(P, P_tilde, m, n_max).holds
