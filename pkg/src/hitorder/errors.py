"""Exception types raised across the package."""

from __future__ import annotations

from fractions import Fraction


class HitOrderError(Exception):
    """Base class for every error raised by this package."""


class MatrixError(HitOrderError, ValueError):
    pass


class RowSumError(MatrixError):
    def __init__(self, row: int, total: Fraction):
        self.row = row
        self.total = total
        super().__init__(f"row {row} sums to {total}, expected 1")


class NegativeEntry(MatrixError):
    def __init__(self, row: int, col: int, value: Fraction):
        self.row = row
        self.col = col
        self.value = value
        super().__init__(f"entry ({row}, {col}) is {value}, outside [0, 1]")


class NotSquare(MatrixError):
    pass


class SizeMismatch(HitOrderError, ValueError):
    pass


class LengthMismatch(HitOrderError, ValueError):
    pass


class TabooDegenerate(MatrixError):
    def __init__(self, row: int):
        self.row = row
        super().__init__(f"row {row} moves to the taboo state with probability 1")


class NotAbsorbing(HitOrderError, ValueError):
    def __init__(self, which: str, state: int):
        self.which = which
        self.state = state
        super().__init__(f"state {state} is not absorbing in {which}")


class NotSkipFree(HitOrderError, ValueError):
    def __init__(self, which: str):
        self.which = which
        super().__init__(f"{which} is not skip-free")


class NotCoprime(HitOrderError, ValueError):
    pass


class Divergent(HitOrderError, ArithmeticError):
    """The target is not reached almost surely, so the mean is infinite."""


class EigenFailure(HitOrderError, ArithmeticError):
    pass


class DegenerateTail(HitOrderError, ArithmeticError):
    pass


class WitnessInvalid(HitOrderError, ValueError):
    pass


class NonTermination(HitOrderError, RuntimeError):
    pass


class AlphabetTooSmall(HitOrderError, ValueError):
    pass


class AlphabetMismatch(HitOrderError, ValueError):
    pass
