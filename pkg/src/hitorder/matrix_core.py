"""Exact-rational stochastic matrices.

Entries are ``fractions.Fraction`` throughout. A :class:`StochMatrix` is
immutable and always row-stochastic; states are ``0..k`` where ``k`` is
``size - 1``.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from fractions import Fraction
from math import lcm
from typing import Iterable, Iterator, Sequence

from .errors import (
    MatrixError,
    NegativeEntry,
    NotSquare,
    RowSumError,
    SizeMismatch,
    TabooDegenerate,
)

Rational = Fraction
ProbVector = tuple[Fraction, ...]

_ZERO = Fraction(0)
_ONE = Fraction(1)


def to_fraction(value) -> Fraction:
    """Parse an int, Fraction, float, or a ``"a/b"`` / decimal string.

    Floats go through their shortest repr so ``0.1`` becomes ``1/10``.
    """
    if isinstance(value, Fraction):
        return value
    if isinstance(value, bool):
        raise TypeError("booleans are not probabilities")
    if isinstance(value, int):
        return Fraction(value)
    if isinstance(value, float):
        return Fraction(repr(value))
    if isinstance(value, str):
        return Fraction(value.strip())
    raise TypeError(f"cannot interpret {value!r} as a rational")


@dataclass(frozen=True)
class StochMatrix:
    rows: tuple[tuple[Fraction, ...], ...]

    def __post_init__(self):
        _check_stochastic(self.rows)

    @classmethod
    def _trusted(cls, rows) -> StochMatrix:
        # Skips validation; only for results of operations that preserve stochasticity.
        obj = object.__new__(cls)
        object.__setattr__(obj, "rows", rows)
        return obj

    @property
    def size(self) -> int:
        return len(self.rows)

    @property
    def k(self) -> int:
        """Index of the highest state."""
        return len(self.rows) - 1

    def __getitem__(self, ij: tuple[int, int]) -> Fraction:
        i, j = ij
        return self.rows[i][j]

    def row(self, i: int) -> ProbVector:
        return self.rows[i]

    def __matmul__(self, other: StochMatrix) -> StochMatrix:
        if not isinstance(other, StochMatrix):
            return NotImplemented
        return StochMatrix._trusted(_matmul(self.rows, other.rows))

    def __iter__(self) -> Iterator[tuple[Fraction, ...]]:
        return iter(self.rows)

    def __str__(self) -> str:
        width = max(len(str(x)) for r in self.rows for x in r)
        return "\n".join(" ".join(str(x).rjust(width) for x in r) for r in self.rows)

    def to_float(self):
        import numpy as np

        return np.array([[float(x) for x in r] for r in self.rows], dtype=float)

    def to_dict(self) -> dict:
        return {"size": self.size, "rows": [[str(x) for x in r] for r in self.rows]}

    def to_json(self, **kwargs) -> str:
        return json.dumps(self.to_dict(), **kwargs)


def _check_stochastic(rows) -> None:
    s = len(rows)
    if s == 0:
        raise NotSquare("matrix must have at least one state")
    for i, r in enumerate(rows):
        if len(r) != s:
            raise NotSquare(f"row {i} has length {len(r)}, expected {s}")
        for j, x in enumerate(r):
            if not isinstance(x, Fraction):
                raise MatrixError(f"entry ({i}, {j}) is not a Fraction")
            if x < 0 or x > 1:
                raise NegativeEntry(i, j, x)
        total = sum(r, _ZERO)
        if total != 1:
            raise RowSumError(i, total)


def validate(entries: Iterable[Iterable]) -> StochMatrix:
    """Build a :class:`StochMatrix` from a square grid of rational-like values.

    Raises ``NegativeEntry`` for entries outside ``[0, 1]`` and
    ``RowSumError`` for rows that do not sum exactly to one.
    """
    rows = tuple(tuple(to_fraction(x) for x in r) for r in entries)
    return StochMatrix(rows)


def from_dict(data: dict) -> StochMatrix:
    """Inverse of :meth:`StochMatrix.to_dict`; ``size`` is cross-checked."""
    m = validate(data["rows"])
    if "size" in data and int(data["size"]) != m.size:
        raise SizeMismatch(f"declared size {data['size']} but found {m.size} rows")
    return m


def load_matrix(path) -> StochMatrix:
    with open(path) as fh:
        return from_dict(json.load(fh))


def identity(size: int) -> StochMatrix:
    return StochMatrix._trusted(
        tuple(tuple(_ONE if i == j else _ZERO for j in range(size)) for i in range(size))
    )


def prob_vector(entries: Iterable) -> ProbVector:
    vec = tuple(to_fraction(x) for x in entries)
    for j, x in enumerate(vec):
        if x < 0 or x > 1:
            raise NegativeEntry(0, j, x)
    total = sum(vec, _ZERO)
    if total != 1:
        raise RowSumError(0, total)
    return vec


def delta(state: int, size: int) -> ProbVector:
    """Point mass at ``state``."""
    return tuple(_ONE if j == state else _ZERO for j in range(size))


def _as_int_grid(rows):
    denom = 1
    for r in rows:
        for x in r:
            denom = lcm(denom, x.denominator)
    grid = [[x.numerator * (denom // x.denominator) for x in r] for r in rows]
    return grid, denom


def _matmul(a_rows, b_rows):
    # Scale both operands to integer grids, multiply in ints, then reduce once.
    if any(len(r) != len(b_rows) for r in a_rows):
        raise SizeMismatch("inner dimensions differ")
    a, da = _as_int_grid(a_rows)
    b, db = _as_int_grid(b_rows)
    cols = list(zip(*b))
    d = da * db
    out = []
    for ar in a:
        nz = [(l, x) for l, x in enumerate(ar) if x]
        out.append(tuple(Fraction(sum(x * col[l] for l, x in nz), d) for col in cols))
    return tuple(out)


def vec_mat(vec: Sequence[Fraction], m: StochMatrix) -> ProbVector:
    """Row vector times matrix, exactly."""
    if len(vec) != m.size:
        raise SizeMismatch(f"vector of length {len(vec)} against {m.size}-state matrix")
    return _matmul((tuple(vec),), m.rows)[0]


def is_absorbing(m: StochMatrix, state: int) -> bool:
    return m.rows[state][state] == 1


def is_skip_free(m: StochMatrix) -> bool:
    """True iff no row jumps up by more than one level."""
    return all(x == 0 for i, r in enumerate(m.rows) for x in r[i + 2:])


def make_absorbing(m: StochMatrix, target: int) -> StochMatrix:
    if not 0 <= target < m.size:
        raise IndexError(f"state {target} out of range for {m.size}-state matrix")
    rows = list(m.rows)
    rows[target] = delta(target, m.size)
    return StochMatrix._trusted(tuple(rows))


def taboo(m: StochMatrix, target: int) -> StochMatrix:
    """Chain conditioned on never entering ``target``; ``target`` is removed.

    Row ``i`` becomes ``p[i, j] / (1 - p[i, target])`` over ``j != target``.
    """
    if not 0 <= target < m.size:
        raise IndexError(f"state {target} out of range for {m.size}-state matrix")
    keep = [j for j in range(m.size) if j != target]
    rows = []
    for i in keep:
        stay = 1 - m.rows[i][target]
        if stay == 0:
            raise TabooDegenerate(i)
        rows.append(tuple(m.rows[i][j] / stay for j in keep))
    return StochMatrix._trusted(tuple(rows))


def mat_pow(m: StochMatrix, n: int) -> StochMatrix:
    """Exact ``n``-th power by repeated squaring; ``n = 0`` is the identity."""
    if n < 0:
        raise ValueError("negative exponent")
    result = identity(m.size)
    base = m
    while n:
        if n & 1:
            result = result @ base
        n >>= 1
        if n:
            base = base @ base
    return result


def powers(m: StochMatrix, start: int = 1) -> Iterator[tuple[int, StochMatrix]]:
    """Yield ``(n, m**n)`` for ``n = start, start + 1, ...`` without end."""
    current = mat_pow(m, start)
    n = start
    while True:
        yield n, current
        current = current @ m
        n += 1


def wielandt_bound(size: int) -> int:
    return size * size - 2 * size + 2


def _support_masks(m: StochMatrix) -> list[int]:
    return [sum(1 << j for j, x in enumerate(r) if x) for r in m.rows]


def _mask_product(a: list[int], b: list[int]) -> list[int]:
    out = []
    for row in a:
        acc = 0
        j = 0
        while row:
            if row & 1:
                acc |= b[j]
            row >>= 1
            j += 1
        out.append(acc)
    return out


def is_ergodic(m: StochMatrix) -> bool:
    """Primitivity: some power up to the Wielandt bound is entrywise positive."""
    full = (1 << m.size) - 1
    base = _support_masks(m)
    current = base
    for _ in range(wielandt_bound(m.size)):
        if all(r == full for r in current):
            return True
        current = _mask_product(current, base)
    return False


def reachable_from(m: StochMatrix, start: int) -> set[int]:
    """States reachable from ``start`` in zero or more steps."""
    seen = {start}
    stack = [start]
    while stack:
        i = stack.pop()
        for j, x in enumerate(m.rows[i]):
            if x and j not in seen:
                seen.add(j)
                stack.append(j)
    return seen


def collapse_above(m: StochMatrix, level: int) -> StochMatrix:
    """Merge states ``level..k`` into a single absorbing state ``level``."""
    if not 0 <= level < m.size:
        raise IndexError(f"level {level} out of range for {m.size}-state matrix")
    rows = []
    for i in range(level):
        r = m.rows[i]
        rows.append(tuple(r[:level]) + (sum(r[level:], _ZERO),))
    rows.append(delta(level, level + 1))
    return StochMatrix._trusted(tuple(rows))
