"""Pathwise coupling of a fast and a slow skip-free chain.

Both chains are driven by one shared uniform per block, so the fast
chain's block position ``I(n)`` always sits at or above the slow chain's
``Y(n)``. Between blocks the slow chain climbs from ``Y(n)`` to ``I(n)``
along an independent bridge chain started at 0; the time it spends there
is ``N2 - N1`` and these bridge times add up to the hitting-time gap.

Uniforms come from numpy's PCG64 seeded by ``SeedSequence(seed,
spawn_key=(index, stream))``: stream 0 feeds the shared block draws,
stream 1 the bridges. A 64-bit draw ``u`` stands for the uniform
``(u + 1) / 2**64``, and inverse-CDF lookups compare it against exact
integer thresholds ``floor(C * 2**64)`` so no rounding is involved.
"""

from __future__ import annotations

import math
from bisect import bisect_left
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass
from fractions import Fraction
from typing import Iterator, NamedTuple, Sequence

import numpy as np

from .errors import NonTermination, NotSkipFree, SizeMismatch, WitnessInvalid
from .matrix_core import StochMatrix, delta, is_skip_free, mat_pow, prob_vector
from .stochastic_order import VedereWitness, st_leq, witness_holds

STEP_CAP = 10**7
Z95 = 1.959963984540054
_SCALE = 1 << 64
_CHUNK = 64


@dataclass(frozen=True)
class CoupledPath:
    t_fast: int
    t_slow: int
    bridge_total: int
    block_trace: tuple[tuple[int, int, int, int], ...]  # (I(n), Y(n), N1, N2), n = 0..L

    @property
    def diff(self) -> int:
        return self.t_slow - self.t_fast


def _thresholds(row: Sequence[Fraction]) -> tuple[int, ...]:
    acc = Fraction(0)
    out = []
    for p in row:
        acc += p
        out.append(acc.numerator * _SCALE // acc.denominator)
    return tuple(out)


def _inverse_cdf(thresholds: Sequence[int], u: int) -> int:
    # inf{s : C_s >= (u + 1) / 2**64}; ties go to the lower state.
    return bisect_left(thresholds, u + 1)


class _Uniforms:
    """Buffered raw 64-bit draws from one PCG64 stream."""

    def __init__(self, seed: int, index: int, stream: int):
        ss = np.random.SeedSequence(seed, spawn_key=(index, stream))
        self._bits = np.random.PCG64(ss)
        self._buf: list[int] = []
        self._pos = 0

    def next(self) -> int:
        if self._pos == len(self._buf):
            self._buf = self._bits.random_raw(_CHUNK).tolist()
            self._pos = 0
        u = self._buf[self._pos]
        self._pos += 1
        return u


@dataclass(frozen=True)
class _Plan:
    """Everything a path needs, precomputed once per batch."""

    k: int
    m: tuple[int, ...]
    fast_block: tuple[tuple[int, ...], ...]  # row i of P**m(i)
    slow_block: tuple[tuple[int, ...], ...]  # row i of P_tilde**m(i)
    slow_step: tuple[tuple[int, ...], ...]  # rows of P_tilde
    pi: tuple[int, ...]
    pi_tilde: tuple[int, ...]


def prepare(
    P: StochMatrix,
    P_tilde: StochMatrix,
    witness: VedereWitness | Sequence[int],
    pi: Sequence | None = None,
    pi_tilde: Sequence | None = None,
) -> _Plan:
    """Check the preconditions and tabulate the inverse-CDF thresholds."""
    if P.size != P_tilde.size:
        raise SizeMismatch(f"matrices of size {P.size} and {P_tilde.size}")
    if not is_skip_free(P):
        raise NotSkipFree("P")
    if not is_skip_free(P_tilde):
        raise NotSkipFree("P_tilde")
    m = tuple(witness.m if isinstance(witness, VedereWitness) else witness)
    if not witness_holds(P, P_tilde, m):
        raise WitnessInvalid(f"block lengths {m} do not order the block transitions")
    pi = delta(0, P.size) if pi is None else prob_vector(pi)
    pi_tilde = delta(0, P.size) if pi_tilde is None else prob_vector(pi_tilde)
    if len(pi) != P.size or len(pi_tilde) != P.size:
        raise SizeMismatch("initial laws must match the number of states")
    if not st_leq(pi_tilde, pi):
        raise WitnessInvalid("the slow initial law must be stochastically below the fast one")
    fast_pows: dict[int, StochMatrix] = {}
    slow_pows: dict[int, StochMatrix] = {}
    for mi in set(m):
        fast_pows[mi] = mat_pow(P, mi)
        slow_pows[mi] = mat_pow(P_tilde, mi)
    k = P.k
    return _Plan(
        k=k,
        m=m,
        fast_block=tuple(_thresholds(fast_pows[m[i]].row(i)) for i in range(k)),
        slow_block=tuple(_thresholds(slow_pows[m[i]].row(i)) for i in range(k)),
        slow_step=tuple(_thresholds(r) for r in P_tilde.rows),
        pi=_thresholds(pi),
        pi_tilde=_thresholds(pi_tilde),
    )


def _run_path(plan: _Plan, seed: int, index: int) -> CoupledPath:
    k, m = plan.k, plan.m
    main = _Uniforms(seed, index, 0)
    bridges = _Uniforms(seed, index, 1)
    steps = 0

    u = main.next()
    I = _inverse_cdf(plan.pi, u)
    Y = _inverse_cdf(plan.pi_tilde, u)
    trace = []
    glued: list[int | None] = []  # slow states at times 1, 2, ...; None where not materialized
    t_fast = 0
    while True:
        # Bridge for this block: a fresh slow chain from 0 until it reaches I.
        b = 0
        n = 0
        n1 = 0 if Y == 0 else None
        n2 = 0 if I == 0 else None
        while n1 is None or n2 is None:
            b = _inverse_cdf(plan.slow_step[b], bridges.next())
            n += 1
            steps += 1
            if steps > STEP_CAP:
                raise NonTermination(f"path {index} exceeded {STEP_CAP} steps")
            if n1 is None and b == Y:
                n1 = n
            if n2 is None and b == I:
                n2 = n
            if n1 is not None and n > n1 and (n2 is None or n == n2):
                glued.append(b)
        trace.append((I, Y, n1, n2))
        if I == k:
            break
        # Block move: m(I) steps of each chain from the same uniform.
        mi = m[I]
        u = main.next()
        I_next = _inverse_cdf(plan.fast_block[I], u)
        Y = _inverse_cdf(plan.slow_block[I], u)
        t_fast += mi
        steps += mi
        if steps > STEP_CAP:
            raise NonTermination(f"path {index} exceeded {STEP_CAP} steps")
        # The slow chain's intermediate states inside a block are not materialized.
        glued.extend([None] * (mi - 1))
        glued.append(Y)
        I = I_next

    # Slow hitting time read off the glued trajectory: the first k at or after time 0.
    states = [trace[0][1]] + glued
    t_slow = next(t for t, s in enumerate(states) if s == k)
    bridge_total = sum(n2 - n1 for _, _, n1, n2 in trace)
    return CoupledPath(t_fast, t_slow, bridge_total, tuple(trace))


def sample_coupled(
    P: StochMatrix,
    P_tilde: StochMatrix,
    witness: VedereWitness | Sequence[int],
    pi: Sequence | None = None,
    pi_tilde: Sequence | None = None,
    seed: int = 0,
    index: int = 0,
) -> CoupledPath:
    """One coupled path; ``(seed, index)`` fixes it completely."""
    return _run_path(prepare(P, P_tilde, witness, pi, pi_tilde), seed, index)


def sample_paths(plan: _Plan, seed: int, n_samples: int, start: int = 0) -> Iterator[CoupledPath]:
    for index in range(start, start + n_samples):
        yield _run_path(plan, seed, index)


@dataclass(frozen=True)
class PathwiseReport:
    n: int
    sum_diff: int
    sum_sq_diff: int
    order: int = 0  # t_fast > t_slow
    identity: int = 0  # t_slow != t_fast + bridge_total
    block: int = 0  # Y(n) > I(n)
    bridge: int = 0  # N1 > N2

    def merge(self, other: PathwiseReport) -> PathwiseReport:
        return PathwiseReport(
            self.n + other.n,
            self.sum_diff + other.sum_diff,
            self.sum_sq_diff + other.sum_sq_diff,
            self.order + other.order,
            self.identity + other.identity,
            self.block + other.block,
            self.bridge + other.bridge,
        )

    @property
    def violations(self) -> dict[str, int]:
        return {
            "order": self.order,
            "identity": self.identity,
            "block": self.block,
            "bridge": self.bridge,
        }

    @property
    def total_violations(self) -> int:
        return sum(self.violations.values())

    @property
    def mean_diff(self) -> float:
        return float(Fraction(self.sum_diff, self.n)) if self.n else math.nan

    @property
    def ci_halfwidth(self) -> float:
        """95% normal-approximation half-width for the mean of ``t_slow - t_fast``."""
        if self.n < 2:
            return math.inf
        var = Fraction(self.sum_sq_diff * self.n - self.sum_diff**2, self.n * (self.n - 1))
        return Z95 * math.sqrt(var / self.n)

    def to_dict(self) -> dict:
        return {
            "n": self.n,
            "mean_diff": self.mean_diff,
            "ci": self.ci_halfwidth if math.isfinite(self.ci_halfwidth) else None,
            "violations": self.violations,
        }


def tally(paths) -> PathwiseReport:
    n = s1 = s2 = order = identity = block = bridge = 0
    for p in paths:
        d = p.t_slow - p.t_fast
        n += 1
        s1 += d
        s2 += d * d
        order += p.t_fast > p.t_slow
        identity += p.t_slow != p.t_fast + p.bridge_total
        block += any(y > i for i, y, _, _ in p.block_trace)
        bridge += any(n1 > n2 for _, _, n1, n2 in p.block_trace)
    return PathwiseReport(n, s1, s2, order, identity, block, bridge)


def _tally_range(args) -> PathwiseReport:
    plan, seed, start, count = args
    return tally(sample_paths(plan, seed, count, start))


def run_batch(
    P: StochMatrix,
    P_tilde: StochMatrix,
    witness: VedereWitness | Sequence[int],
    n_samples: int,
    seed: int = 0,
    pi: Sequence | None = None,
    pi_tilde: Sequence | None = None,
    workers: int = 1,
) -> PathwiseReport:
    """Simulate ``n_samples`` paths and tally the gap and every invariant.

    Sample ``i`` always uses ``(seed, i)``, so the result does not depend
    on ``workers``.
    """
    if n_samples < 1:
        raise ValueError("n_samples must be positive")
    plan = prepare(P, P_tilde, witness, pi, pi_tilde)
    if workers <= 1 or n_samples < 2 * workers:
        return tally(sample_paths(plan, seed, n_samples))
    size = -(-n_samples // workers)
    jobs = [(plan, seed, s, min(size, n_samples - s)) for s in range(0, n_samples, size)]
    report = PathwiseReport(0, 0, 0)
    with ProcessPoolExecutor(max_workers=workers) as pool:
        for part in pool.map(_tally_range, jobs):
            report = report.merge(part)
    return report


class GapEstimate(NamedTuple):
    mean_diff: float
    ci_halfwidth: float


def estimate_gap(
    P: StochMatrix,
    P_tilde: StochMatrix,
    witness: VedereWitness | Sequence[int],
    n_samples: int,
    seed: int = 0,
    pi: Sequence | None = None,
    pi_tilde: Sequence | None = None,
    workers: int = 1,
) -> GapEstimate:
    """Monte Carlo estimate of ``E[T~_k] - E[T_k]`` with a 95% half-width."""
    report = run_batch(P, P_tilde, witness, n_samples, seed, pi, pi_tilde, workers)
    return GapEstimate(report.mean_diff, report.ci_halfwidth)


def verify_pathwise(
    P: StochMatrix,
    P_tilde: StochMatrix,
    witness: VedereWitness | Sequence[int],
    n_samples: int,
    seed: int = 0,
    pi: Sequence | None = None,
    pi_tilde: Sequence | None = None,
    workers: int = 1,
) -> PathwiseReport:
    """Count violations of the coupling invariants over a batch; all should be 0."""
    return run_batch(P, P_tilde, witness, n_samples, seed, pi, pi_tilde, workers)
