"""First occurrence of a word in i.i.d. uniform letters.

Letters are 1-based integer indices into an alphabet of size ``N``; the
strings ``"A"``, ``"B"``, ... are only a rendering. The occurrence chain
sits in state ``i`` when ``i`` is the length of the longest prefix of the
word that is a suffix of the letters read so far, which is exactly the
Knuth-Morris-Pratt matching automaton.
"""

from __future__ import annotations

import enum
import string
from dataclasses import dataclass, field
from fractions import Fraction
from itertools import product
from typing import Iterator, Sequence

from .errors import AlphabetMismatch, AlphabetTooSmall
from .hitting import DEFAULT_HORIZON, certify_ast_order, falsify_order
from .matrix_core import StochMatrix
from .spectral import Prediction, vicev_predict
from .stochastic_order import (
    DEFAULT_N_MAX,
    OrderCertificate,
    ServeCheck,
    VedereWitness,
    Verdict,
    certify_st_order,
    check_vedere,
    rowwise_dominates,
    serve_check,
)

SEARCH_MAX_K = 10
SEARCH_MAX_N = 4
_SYMBOLS = string.ascii_uppercase


@dataclass(frozen=True)
class Word:
    letters: tuple[int, ...]
    alphabet_size: int

    def __post_init__(self):
        if not self.letters:
            raise ValueError("a word has at least one letter")
        if self.alphabet_size < 1:
            raise ValueError("alphabet size must be positive")
        bad = [a for a in self.letters if not 1 <= a <= self.alphabet_size]
        if bad:
            raise AlphabetTooSmall(
                f"letters {sorted(set(bad))} do not fit an alphabet of size {self.alphabet_size}"
            )

    @classmethod
    def parse(cls, text: str, alphabet_size: int) -> Word:
        """``Word.parse("ABBBA", 2)``; ``A`` is letter 1."""
        text = text.strip().upper()
        if not text or any(ch not in _SYMBOLS for ch in text):
            raise ValueError(f"word {text!r} must use letters A-Z")
        return cls(tuple(_SYMBOLS.index(ch) + 1 for ch in text), alphabet_size)

    @property
    def k(self) -> int:
        return len(self.letters)

    def __len__(self) -> int:
        return len(self.letters)

    def __str__(self) -> str:
        if self.alphabet_size <= len(_SYMBOLS):
            return "".join(_SYMBOLS[a - 1] for a in self.letters)
        return "-".join(map(str, self.letters))

    def on_alphabet(self, alphabet_size: int) -> Word:
        return Word(self.letters, alphabet_size)


@dataclass(frozen=True)
class LeadingNumber:
    bits: tuple[int, ...]

    def __post_init__(self):
        if not self.bits or self.bits[-1] != 1:
            raise ValueError("the last bit of a leading number is always 1")
        if any(b not in (0, 1) for b in self.bits):
            raise ValueError("leading numbers are binary")

    @classmethod
    def parse(cls, text: str) -> LeadingNumber:
        return cls(tuple(int(ch) for ch in text.strip()))

    def __str__(self) -> str:
        return "".join(map(str, self.bits))

    def __len__(self) -> int:
        return len(self.bits)


def leading_number(w: Word) -> LeadingNumber:
    """Bit ``u`` is set when the last ``u`` letters repeat the first ``u``."""
    a, k = w.letters, w.k
    return LeadingNumber(tuple(int(a[k - u:] == a[:u]) for u in range(1, k + 1)))


def conway_mean(w: Word) -> Fraction:
    """Expected waiting time ``sum_u N**u * eps(u)``."""
    N = w.alphabet_size
    return Fraction(sum(N ** u for u, bit in enumerate(leading_number(w).bits, start=1) if bit))


def failure_function(letters: Sequence[int]) -> list[int]:
    """``f[i]`` = length of the longest proper border of ``letters[:i]`` (``f[0] = 0``)."""
    k = len(letters)
    f = [0] * (k + 1)
    b = 0
    for i in range(1, k):
        while b and letters[i] != letters[b]:
            b = f[b]
        if letters[i] == letters[b]:
            b += 1
        f[i + 1] = b
    return f


def transition_table(w: Word) -> list[list[int]]:
    """``table[i][c - 1]`` is the state reached from ``i`` on letter ``c``, for ``i = 0..k``."""
    a, k, N = w.letters, w.k, w.alphabet_size
    f = failure_function(a)
    table: list[list[int]] = []
    for i in range(k + 1):
        row = []
        for c in range(1, N + 1):
            if i < k and a[i] == c:
                row.append(i + 1)
            elif i == 0:
                row.append(0)
            else:
                row.append(table[f[i]][c - 1])
        table.append(row)
    return table


def word_chain(w: Word, absorbing: bool = True) -> StochMatrix:
    """Transition matrix of the matched-prefix chain on states ``0..k``.

    With ``absorbing=False`` the full-match state keeps scanning, so the
    chain also describes later occurrences.
    """
    k, N = w.k, w.alphabet_size
    step = Fraction(1, N)
    rows = []
    for i, targets in enumerate(transition_table(w)):
        row = [Fraction(0)] * (k + 1)
        if absorbing and i == k:
            row[k] = Fraction(1)
        else:
            for t in targets:
                row[t] += step
        rows.append(tuple(row))
    return StochMatrix(tuple(rows))


def minimal_alphabet(w: Word) -> frozenset[int]:
    return frozenset(w.letters)


def extremal_words(k: int, N: int) -> tuple[Word, Word | None]:
    """``(a**k, a1 a2 ... ak)``: slowest word, and the fastest one when ``N >= k``."""
    if k < 1 or N < 2:
        raise ValueError("need k >= 1 and N >= 2")
    slowest = Word((1,) * k, N)
    fastest = Word(tuple(range(1, k + 1)), N) if N >= k else None
    return slowest, fastest


def _relabel_jointly(w: Word, w2: Word) -> tuple[tuple[int, ...], tuple[int, ...]]:
    mapping: dict[int, int] = {}
    for a in w.letters + w2.letters:
        mapping.setdefault(a, len(mapping) + 1)
    return tuple(mapping[a] for a in w.letters), tuple(mapping[a] for a in w2.letters)


class ExtensionCheck(str, enum.Enum):
    PRESERVED = "Preserved"
    VIOLATED = "Violated"
    NOT_APPLICABLE = "NotApplicable"

    def __bool__(self) -> bool:
        return self is not ExtensionCheck.VIOLATED


def alphabet_extension_preserves(w: Word, w_prime: Word, N_hat: int) -> ExtensionCheck:
    """Recheck row-wise dominance of ``w``'s chain over ``w_prime``'s on an alphabet of size ``N_hat``.

    Letters are relabeled jointly so any ``N_hat`` covering both minimal
    alphabets is allowed, even one smaller than the original.
    """
    if w.alphabet_size != w_prime.alphabet_size:
        raise AlphabetMismatch("words live on different alphabets")
    union = minimal_alphabet(w) | minimal_alphabet(w_prime)
    if N_hat < len(union):
        raise AlphabetTooSmall(f"N_hat={N_hat} cannot hold {len(union)} distinct letters")
    if not rowwise_dominates(word_chain(w), word_chain(w_prime)):
        return ExtensionCheck.NOT_APPLICABLE
    a, b = _relabel_jointly(w, w_prime)
    ok = rowwise_dominates(word_chain(Word(a, N_hat)), word_chain(Word(b, N_hat)))
    return ExtensionCheck.PRESERVED if ok else ExtensionCheck.VIOLATED


def _check_search_size(k: int, N: int) -> None:
    if k > SEARCH_MAX_K or N > SEARCH_MAX_N:
        raise ValueError(
            f"exhaustive word search is limited to k <= {SEARCH_MAX_K} and N <= {SEARCH_MAX_N}"
        )


def words_with_leading(target: LeadingNumber | Sequence[int], N: int) -> Iterator[Word]:
    """All words of the right length over ``N`` letters with this leading number, in lexicographic order."""
    bits = tuple(target.bits if isinstance(target, LeadingNumber) else target)
    k = len(bits)
    _check_search_size(k, N)
    for letters in product(range(1, N + 1), repeat=k):
        if tuple(int(letters[k - u:] == letters[:u]) for u in range(1, k + 1)) == bits:
            yield Word(letters, N)


def substitute_by_leading(
    w: Word, target_epsilon: LeadingNumber | Sequence[int], exclude: Sequence[Word] = ()
) -> Word | None:
    """First word (lexicographically) on ``w``'s alphabet with the requested leading number.

    Exhaustive, so limited to short words on small alphabets.
    """
    bits = tuple(target_epsilon.bits if isinstance(target_epsilon, LeadingNumber) else target_epsilon)
    if len(bits) != w.k or not bits or bits[-1] != 1:
        return None
    skip = {x.letters for x in exclude}
    for z in words_with_leading(bits, w.alphabet_size):
        if z.letters not in skip:
            return z
    return None


@dataclass(frozen=True)
class Substitution:
    fast: Word
    slow: Word
    certificate: OrderCertificate
    via: str

    def to_dict(self) -> dict:
        return {
            "fast": str(self.fast),
            "slow": str(self.slow),
            "via": self.via,
            "certificate": self.certificate.to_dict(),
        }


@dataclass(frozen=True)
class WordComparison:
    """Every check run by :func:`compare_words` plus the strongest conclusion."""

    fast: Word
    slow: Word
    fast_leading: LeadingNumber
    slow_leading: LeadingNumber
    fast_mean: Fraction
    slow_mean: Fraction
    rowwise: bool
    vedere: VedereWitness | None
    serve: tuple[ServeCheck, ...]
    st_certificate: OrderCertificate
    ast_certificate: OrderCertificate
    vicev: Prediction
    falsified_at: int | None
    verdict: Verdict
    via: str | None
    substitution: Substitution | None = field(default=None)

    def to_dict(self) -> dict:
        return {
            "fast": str(self.fast),
            "slow": str(self.slow),
            "alphabet": self.fast.alphabet_size,
            "fast_leading": str(self.fast_leading),
            "slow_leading": str(self.slow_leading),
            "fast_mean": str(self.fast_mean),
            "fast_mean_decimal": float(self.fast_mean),
            "slow_mean": str(self.slow_mean),
            "slow_mean_decimal": float(self.slow_mean),
            "rowwise": self.rowwise,
            "vedere": list(self.vedere.m) if self.vedere else None,
            "serve": [s.to_dict() for s in self.serve],
            "st_certificate": self.st_certificate.to_dict(),
            "ast_certificate": self.ast_certificate.to_dict(),
            "vicev": self.vicev.value,
            "falsified_at": self.falsified_at,
            "verdict": self.verdict.value,
            "via": self.via,
            "substitution": self.substitution.to_dict() if self.substitution else None,
            # Convenience copies of the usual-order certificate's evidence.
            "n1": self.st_certificate.n1,
            "n2": self.st_certificate.n2,
            "n_hat": self.st_certificate.n_hat,
        }


def strongest_verdict(
    rowwise: bool,
    vedere: VedereWitness | None,
    serve: Sequence[ServeCheck],
    st_cert: OrderCertificate,
    ast_cert: OrderCertificate,
    falsified_at: int | None,
) -> tuple[Verdict, str | None]:
    if rowwise:
        return Verdict.ST_CERTIFIED, "rowwise"
    if vedere is not None:
        return Verdict.ST_CERTIFIED, "vedere"
    if any(s.holds for s in serve):
        return Verdict.ST_CERTIFIED, "serve"
    if st_cert.verdict is Verdict.ST_CERTIFIED:
        return Verdict.ST_CERTIFIED, "identical" if st_cert.identical else "coprime-powers"
    if falsified_at is not None or st_cert.falsified_at is not None:
        return Verdict.FALSIFIED, "exact-cdf"
    if ast_cert.verdict is Verdict.AST_CERTIFIED:
        return Verdict.AST_CERTIFIED, "coprime-powers"
    return Verdict.INCONCLUSIVE, None


def _serve_checks(P: StochMatrix, P_tilde: StochMatrix, n_max: int) -> tuple[ServeCheck, ...]:
    checks = []
    for m in range(1, P.k):
        check = serve_check(P, P_tilde, m, n_max)
        if check.tail_condition:
            checks.append(check)
            if check.holds:
                break
    return tuple(checks)


def _certify_words(fast: Word, slow: Word, n_max: int) -> tuple[OrderCertificate, str] | None:
    P, P_tilde = word_chain(fast), word_chain(slow)
    if rowwise_dominates(P, P_tilde):
        cert = certify_st_order(P, P_tilde, n_max)
        return cert, "rowwise"
    cert = certify_st_order(P, P_tilde, n_max)
    if cert.verdict is Verdict.ST_CERTIFIED:
        return cert, "coprime-powers"
    return None


def suggest_substitution(
    fast: Word, slow: Word, n_max: int = DEFAULT_N_MAX, max_candidates: int = 64
) -> Substitution | None:
    """Swap either word for another with the same leading number so the order becomes certifiable.

    Words with equal leading numbers (same alphabet size) have identical
    occurrence-time laws, so a certificate for the substitute transfers.
    """
    if fast.k > SEARCH_MAX_K or fast.alphabet_size > SEARCH_MAX_N:
        return None
    tried = 0
    for z in words_with_leading(leading_number(fast), fast.alphabet_size):
        if z.letters == fast.letters:
            continue
        found = _certify_words(z, slow, n_max)
        if found:
            return Substitution(z, slow, found[0], found[1])
        tried += 1
        if tried >= max_candidates:
            break
    tried = 0
    for z in words_with_leading(leading_number(slow), slow.alphabet_size):
        if z.letters == slow.letters:
            continue
        found = _certify_words(fast, z, n_max)
        if found:
            return Substitution(fast, z, found[0], found[1])
        tried += 1
        if tried >= max_candidates:
            break
    return None


def compare_words(
    fast: Word,
    slow: Word,
    n_max: int = DEFAULT_N_MAX,
    horizon: int = DEFAULT_HORIZON,
    suggest: bool = True,
) -> WordComparison:
    """Run every available check for ``T_fast <=_st T_slow``.

    Order of evaluation: leading numbers and means, row-wise dominance,
    block-length witness, the split-level test, coprime-power certificates,
    the spectral prediction, and finally a direct search for a violation.
    """
    if fast.alphabet_size != slow.alphabet_size:
        raise AlphabetMismatch(
            f"alphabet sizes differ: {fast.alphabet_size} vs {slow.alphabet_size}"
        )
    if fast.k != slow.k:
        raise ValueError("words must have the same length")
    P, P_tilde = word_chain(fast), word_chain(slow)
    rowwise = rowwise_dominates(P, P_tilde)
    vedere = check_vedere(P, P_tilde)
    serve = _serve_checks(P, P_tilde, n_max)
    st_cert = certify_st_order(P, P_tilde, n_max)
    ast_cert = certify_ast_order(P, P_tilde, n_max)
    vicev = vicev_predict(P_tilde, P)
    falsified_at = falsify_order(P, P_tilde, horizon)
    verdict, via = strongest_verdict(rowwise, vedere, serve, st_cert, ast_cert, falsified_at)
    substitution = None
    if suggest and verdict in (Verdict.INCONCLUSIVE, Verdict.AST_CERTIFIED):
        substitution = suggest_substitution(fast, slow, n_max)
    return WordComparison(
        fast=fast,
        slow=slow,
        fast_leading=leading_number(fast),
        slow_leading=leading_number(slow),
        fast_mean=conway_mean(fast),
        slow_mean=conway_mean(slow),
        rowwise=rowwise,
        vedere=vedere,
        serve=serve,
        st_certificate=st_cert,
        ast_certificate=ast_cert,
        vicev=vicev,
        falsified_at=falsified_at,
        verdict=verdict,
        via=via,
        substitution=substitution,
    )
