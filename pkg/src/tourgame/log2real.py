"""Nonnegative reals carried as base-2 logarithms.

Quantities such as ``2**(4*k*k)`` overflow any fixed-width float long before
the interesting values of ``k`` are reached, so every certificate quantity in
this package is a :class:`Log2Real`.  Zero is represented explicitly by a
``log2`` of ``-inf``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from numbers import Real

_NEG_INF = float("-inf")


@dataclass(frozen=True, order=False)
class Log2Real:
    """A nonnegative real ``x`` stored as ``log2(x)``.

    Multiplication adds logs; addition uses ``max + log2(1 + 2**(min - max))``.
    Each operation contributes at most a few ulps of the log value, so chains
    of a few hundred operations on logs below ``2**20`` stay far inside a
    ``1e-9`` relative error on the represented value.
    """

    log2: float = _NEG_INF

    def __post_init__(self):
        object.__setattr__(self, "log2", float(self.log2))

    # -- construction -------------------------------------------------------
    @classmethod
    def zero(cls) -> Log2Real:
        return cls(_NEG_INF)

    @classmethod
    def one(cls) -> Log2Real:
        return cls(0.0)

    @classmethod
    def pow2(cls, exponent: float) -> Log2Real:
        return cls(float(exponent))

    @classmethod
    def of(cls, value: Real | int | Fraction | Log2Real) -> Log2Real:
        """Convert an int, Fraction, float or Log2Real.

        Python ints of any size are converted without overflow.
        """
        if isinstance(value, Log2Real):
            return value
        if isinstance(value, Fraction):
            if value < 0:
                raise ValueError(f"Log2Real must be nonnegative, got {value}")
            if value == 0:
                return cls.zero()
            return cls(math.log2(value.numerator) - math.log2(value.denominator))
        if value < 0:
            raise ValueError(f"Log2Real must be nonnegative, got {value}")
        if value == 0:
            return cls.zero()
        return cls(math.log2(value))

    # -- inspection ---------------------------------------------------------
    @property
    def is_zero(self) -> bool:
        return self.log2 == _NEG_INF

    def __float__(self) -> float:
        if self.is_zero:
            return 0.0
        try:
            return 2.0 ** self.log2
        except OverflowError:
            return math.inf

    def __repr__(self) -> str:
        if self.is_zero:
            return "Log2Real(0)"
        return f"Log2Real(2**{self.log2!r})"

    # -- arithmetic ---------------------------------------------------------
    def __mul__(self, other) -> Log2Real:
        other = Log2Real.of(other)
        if self.is_zero or other.is_zero:
            return Log2Real.zero()
        return Log2Real(self.log2 + other.log2)

    __rmul__ = __mul__

    def __truediv__(self, other) -> Log2Real:
        other = Log2Real.of(other)
        if other.is_zero:
            raise ZeroDivisionError("division of Log2Real by zero")
        if self.is_zero:
            return self
        return Log2Real(self.log2 - other.log2)

    def __rtruediv__(self, other) -> Log2Real:
        return Log2Real.of(other) / self

    def __add__(self, other) -> Log2Real:
        other = Log2Real.of(other)
        if self.is_zero:
            return other
        if other.is_zero:
            return self
        hi, lo = (self.log2, other.log2) if self.log2 >= other.log2 else (other.log2, self.log2)
        return Log2Real(hi + math.log2(1.0 + 2.0 ** (lo - hi)))

    __radd__ = __add__

    def __sub__(self, other) -> Log2Real:
        """Difference; the result must stay nonnegative."""
        other = Log2Real.of(other)
        if other.is_zero:
            return self
        if other.log2 > self.log2:
            raise ValueError("Log2Real subtraction would go negative")
        if other.log2 == self.log2:
            return Log2Real.zero()
        return Log2Real(self.log2 + math.log2(1.0 - 2.0 ** (other.log2 - self.log2)))

    def __pow__(self, exponent: float) -> Log2Real:
        if self.is_zero:
            if exponent <= 0:
                raise ValueError("zero raised to a nonpositive power")
            return self
        return Log2Real(self.log2 * float(exponent))

    # -- comparison ---------------------------------------------------------
    def _cmp_key(self, other) -> tuple[float, float]:
        return self.log2, Log2Real.of(other).log2

    def __eq__(self, other) -> bool:
        if not isinstance(other, (Log2Real, int, float, Fraction)):
            return NotImplemented
        a, b = self._cmp_key(other)
        return a == b

    def __hash__(self) -> int:
        return hash(self.log2)

    def __lt__(self, other) -> bool:
        a, b = self._cmp_key(other)
        return a < b

    def __le__(self, other) -> bool:
        a, b = self._cmp_key(other)
        return a <= b

    def __gt__(self, other) -> bool:
        a, b = self._cmp_key(other)
        return a > b

    def __ge__(self, other) -> bool:
        a, b = self._cmp_key(other)
        return a >= b

    def isclose(self, other, rel_tol: float = 1e-9) -> bool:
        """Relative closeness of the represented values (not of the logs)."""
        other = Log2Real.of(other)
        if self.is_zero or other.is_zero:
            return self.is_zero and other.is_zero
        # |x/y - 1| <= rel_tol  <=>  |log2 x - log2 y| <= log2(1 + rel_tol)
        return abs(self.log2 - other.log2) <= math.log2(1.0 + rel_tol)

    def to_record(self) -> dict:
        """JSON-friendly form: log2 plus a decimal value when it fits."""
        if self.is_zero:
            return {"log2": None, "value": 0.0}
        record: dict = {"log2": self.log2}
        if abs(self.log2) < 49.8:  # below 10**15 either way
            record["value"] = float(self)
        return record


def log2_comb(n: int, r: int) -> float:
    """Exact-then-rounded log2 of a binomial coefficient (``-inf`` if zero)."""
    c = math.comb(n, r) if 0 <= r <= n else 0
    return math.log2(c) if c else _NEG_INF


def log_sum(values) -> Log2Real:
    total = Log2Real.zero()
    for v in values:
        total = total + v
    return total
