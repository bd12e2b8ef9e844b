"""Floating-point spectral quantities of absorbing chains.

This is the only module that leaves exact arithmetic. For small matrices
the characteristic polynomial is formed exactly, split into square-free
factors, and its roots refined at high precision, so repeated eigenvalues
(common in word chains) keep full accuracy. Larger matrices fall back to
LAPACK's Hessenberg QR.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass

import numpy as np

from .errors import DegenerateTail, EigenFailure, NotAbsorbing, TabooDegenerate
from .matrix_core import StochMatrix, is_ergodic, taboo
from .stochastic_order import absorption_probabilities

GAP_TOL = 1e-9
EXACT_CHARPOLY_MAX = 16


@dataclass(frozen=True)
class SpectralSummary:
    moduli: tuple[float, ...]  # descending
    gap: float
    ergodic_taboo: bool

    @property
    def mu(self) -> float:
        """Modulus of the second eigenvalue."""
        return 1.0 - self.gap

    def to_dict(self) -> dict:
        return {
            "moduli": list(self.moduli),
            "mu": self.mu,
            "gap": self.gap,
            "ergodic_taboo": self.ergodic_taboo,
        }


def _charpoly_moduli(M: StochMatrix) -> list[float]:
    import sympy

    x = sympy.Symbol("x")
    exact = sympy.Matrix([[sympy.Rational(v.numerator, v.denominator) for v in r] for r in M.rows])
    poly = sympy.Poly(exact.charpoly(x).as_expr(), x)
    out = []
    for factor, mult in poly.sqf_list()[1]:
        try:
            roots = factor.nroots(n=30, maxsteps=500)
        except sympy.polys.polyerrors.NoConvergence as exc:
            raise EigenFailure(str(exc)) from exc
        out.extend(float(abs(r)) for r in roots for _ in range(mult))
    return out


def eigen_moduli(M: StochMatrix) -> tuple[float, ...]:
    """Eigenvalue moduli in descending order, with multiplicity."""
    if M.size <= EXACT_CHARPOLY_MAX:
        moduli = _charpoly_moduli(M)
    else:
        try:
            values = np.linalg.eigvals(M.to_float())
        except np.linalg.LinAlgError as exc:
            raise EigenFailure(str(exc)) from exc
        if not np.all(np.isfinite(values)):
            raise EigenFailure("non-finite eigenvalues")
        moduli = [float(abs(v)) for v in values]
    if len(moduli) != M.size:
        raise EigenFailure(f"found {len(moduli)} eigenvalues for a {M.size}-state matrix")
    return tuple(sorted(moduli, reverse=True))


def taboo_is_ergodic(M: StochMatrix, target: int) -> bool:
    try:
        return is_ergodic(taboo(M, target))
    except TabooDegenerate:
        return False


def spectral_summary(M: StochMatrix, target: int | None = None) -> SpectralSummary:
    target = M.k if target is None else target
    if M[target, target] != 1:
        raise NotAbsorbing("M", target)
    moduli = eigen_moduli(M)
    mu = moduli[1] if len(moduli) > 1 else 0.0
    gap = min(max(1.0 - mu, 0.0), 1.0)
    return SpectralSummary(moduli, gap, taboo_is_ergodic(M, target))


class Prediction(str, enum.Enum):
    PREDICTED = "Predicted"
    NOT_PREDICTED = "NotPredicted"


def vicev_predict(
    P_tilde: StochMatrix, P: StochMatrix, target: int | None = None, tol: float = GAP_TOL
) -> Prediction:
    """Spectral sufficient condition for ``P_tilde**n ⊴ P**n`` eventually.

    Needs an ergodic taboo chain for ``P_tilde`` and a strictly smaller gap
    than ``P``. ``NotPredicted`` carries no information either way.
    """
    slow = spectral_summary(P_tilde, target)
    if not slow.ergodic_taboo:
        return Prediction.NOT_PREDICTED
    fast = spectral_summary(P, target)
    if slow.gap < fast.gap - tol:
        return Prediction.PREDICTED
    return Prediction.NOT_PREDICTED


def large_deviation_rate(M: StochMatrix, target: int | None = None, n: int = 200) -> float:
    """``log(P(T > n)) / n`` from the exact ``n``-step absorption probability."""
    target = M.k if target is None else target
    if M[target, target] != 1:
        raise NotAbsorbing("M", target)
    if n < 1:
        raise ValueError("n must be positive")
    tail = 1 - absorption_probabilities(M, n, target)[n]
    if tail == 0:
        raise DegenerateTail(f"absorbed with probability 1 by step {n}")
    # Logs of the integer parts avoid float underflow for tiny tails.
    return (math.log(tail.numerator) - math.log(tail.denominator)) / n
