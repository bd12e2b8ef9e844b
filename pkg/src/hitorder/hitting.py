"""Exact hitting-time laws and means for absorbing chains started at state 0."""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from math import lcm
from typing import Sequence

from .errors import Divergent, NotAbsorbing
from .matrix_core import StochMatrix, reachable_from
from .stochastic_order import (
    DEFAULT_N_MAX,
    OrderCertificate,
    Verdict,
    absorption_probabilities,
    find_coprime_pair,
    first_violation,
    frobenius_threshold,
    require_absorbing,
    _same_size,
)

DEFAULT_HORIZON = 200


@dataclass(frozen=True)
class HittingDistribution:
    target: int
    cdf: tuple[Fraction, ...]  # cdf[n] = P(T <= n)

    @property
    def horizon(self) -> int:
        return len(self.cdf) - 1

    def pmf(self) -> list[Fraction]:
        """``P(T = n)`` for ``n = 0..horizon``."""
        return [self.cdf[0]] + [b - a for a, b in zip(self.cdf, self.cdf[1:])]

    def survival(self) -> list[Fraction]:
        return [1 - c for c in self.cdf]

    def dominated_by(self, other: HittingDistribution) -> bool:
        """Pointwise ``self.cdf <= other.cdf`` over the common horizon."""
        return all(a <= b for a, b in zip(self.cdf, other.cdf))


def hitting_cdf(M: StochMatrix, target: int | None = None, horizon: int = DEFAULT_HORIZON) -> HittingDistribution:
    """Law of the first visit to an absorbing ``target`` from state 0, up to ``horizon``."""
    target = M.k if target is None else target
    if M[target, target] != 1:
        raise NotAbsorbing("M", target)
    return HittingDistribution(target, tuple(absorption_probabilities(M, horizon, target)))


def solve_exact(A: Sequence[Sequence[Fraction]], b: Sequence[Fraction]) -> list[Fraction]:
    """Solve ``A x = b`` exactly with fraction-free (Bareiss) elimination.

    Rows are first scaled to integers. Raises ``ZeroDivisionError`` for a
    singular system.
    """
    n = len(A)
    aug = []
    for row, rhs in zip(A, b):
        scale = lcm(*(x.denominator for x in row), rhs.denominator)
        aug.append([int(x * scale) for x in row] + [int(rhs * scale)])
    prev = 1
    for c in range(n):
        piv = next((r for r in range(c, n) if aug[r][c] != 0), None)
        if piv is None:
            raise ZeroDivisionError("singular system")
        if piv != c:
            aug[c], aug[piv] = aug[piv], aug[c]
        pc = aug[c][c]
        for r in range(c + 1, n):
            arc = aug[r][c]
            row_r, row_c = aug[r], aug[c]
            for j in range(c + 1, n + 1):
                row_r[j] = (pc * row_r[j] - arc * row_c[j]) // prev
            row_r[c] = 0
        prev = pc
    x = [Fraction(0)] * n
    for r in range(n - 1, -1, -1):
        acc = Fraction(aug[r][n])
        for j in range(r + 1, n):
            acc -= aug[r][j] * x[j]
        x[r] = acc / aug[r][r]
    return x


def expected_hitting(M: StochMatrix, target: int | None = None) -> Fraction:
    """Exact ``E[T]`` from state 0 via the fundamental-matrix linear system.

    Raises ``Divergent`` when some state reachable from 0 cannot reach the
    target, since then ``T = inf`` with positive probability.
    """
    target = M.k if target is None else target
    if M[target, target] != 1:
        raise NotAbsorbing("M", target)
    if target == 0:
        return Fraction(0)
    live = sorted(reachable_from(M, 0) - {target})
    for i in live:
        if target not in reachable_from(M, i):
            raise Divergent(f"state {i} is reachable from 0 but cannot reach {target}")
    pos = {s: idx for idx, s in enumerate(live)}
    A = [
        [(1 if i == j else 0) - M[i, j] for j in live]
        for i in live
    ]
    A = [[Fraction(x) for x in row] for row in A]
    try:
        t = solve_exact(A, [Fraction(1)] * len(live))
    except ZeroDivisionError as exc:
        raise Divergent("fundamental system is singular") from exc
    return t[pos[0]]


def certify_ast_order(
    P: StochMatrix, P_tilde: StochMatrix, n_max: int = DEFAULT_N_MAX
) -> OrderCertificate:
    """Certify ``T_k`` below ``T~_k`` in the tail order via a coprime pair of ⊴ powers."""
    _same_size(P, P_tilde)
    require_absorbing(P, "P")
    require_absorbing(P_tilde, "P_tilde")
    pair = find_coprime_pair(P_tilde, P, n_max)
    if pair is not None:
        return OrderCertificate(Verdict.AST_CERTIFIED, pair=pair, n_hat=frobenius_threshold(*pair))
    if P == P_tilde:
        return OrderCertificate(Verdict.AST_CERTIFIED, identical=True)
    return OrderCertificate(Verdict.INCONCLUSIVE)


def falsify_order(
    P: StochMatrix, P_tilde: StochMatrix, horizon: int = DEFAULT_HORIZON
) -> int | None:
    """Smallest ``n <= horizon`` at which the slow chain is strictly more likely absorbed."""
    _same_size(P, P_tilde)
    require_absorbing(P, "P")
    require_absorbing(P_tilde, "P_tilde")
    hit = first_violation(P, P_tilde, horizon)
    return None if hit is None else hit[0]
