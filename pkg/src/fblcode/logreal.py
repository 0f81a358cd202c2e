"""Nonnegative reals stored in the log domain.

Quantities like the fixed-block failure bound phi or the per-symbol
disagreement probability live at scales (exp(-1e126) and below) where IEEE
doubles are useless, while the decisions that consume them are O(1)
comparisons.  LogReal keeps log(x) as a float (-inf encodes exact zero),
adds via log-sum-exp, and only folds to a plain float at the edges.
"""

from __future__ import annotations

import math

__all__ = ["LogReal"]

_NEG_INF = float("-inf")


class LogReal:
    """A nonnegative real number x represented by log(x)."""

    __slots__ = ("log",)

    def __init__(self, log_value: float):
        if math.isnan(log_value):
            raise ValueError("log value must not be NaN")
        object.__setattr__(self, "log", float(log_value))

    def __setattr__(self, name, value):
        raise AttributeError("LogReal is immutable")

    # constructors

    @classmethod
    def from_value(cls, x) -> "LogReal":
        if x < 0:
            raise ValueError("LogReal represents nonnegative reals, got %r" % (x,))
        if x == 0:
            return cls(_NEG_INF)
        return cls(math.log(x))

    @classmethod
    def zero(cls) -> "LogReal":
        return cls(_NEG_INF)

    @classmethod
    def one(cls) -> "LogReal":
        return cls(0.0)

    # views

    @property
    def value(self) -> float:
        """Plain float value; underflows to 0.0 and overflows to inf."""
        if self.log == _NEG_INF:
            return 0.0
        try:
            return math.exp(self.log)
        except OverflowError:
            return math.inf

    @property
    def is_zero(self) -> bool:
        return self.log == _NEG_INF

    # arithmetic

    def __add__(self, other: "LogReal") -> "LogReal":
        if not isinstance(other, LogReal):
            return NotImplemented
        a, b = self.log, other.log
        if a == _NEG_INF:
            return other
        if b == _NEG_INF:
            return self
        if a < b:
            a, b = b, a
        # a >= b, so b - a <= 0 and exp is safe
        return LogReal(a + math.log1p(math.exp(b - a)))

    def sub(self, other: "LogReal") -> "LogReal":
        """self - other, which must be nonnegative."""
        a, b = self.log, other.log
        if b == _NEG_INF:
            return self
        if b > a:
            raise ValueError("LogReal subtraction would be negative")
        if b == a:
            return LogReal(_NEG_INF)
        return LogReal(a + math.log1p(-math.exp(b - a)))

    def __mul__(self, other: "LogReal") -> "LogReal":
        if not isinstance(other, LogReal):
            return NotImplemented
        if self.log == _NEG_INF or other.log == _NEG_INF:
            return LogReal(_NEG_INF)
        return LogReal(self.log + other.log)

    def __truediv__(self, other: "LogReal") -> "LogReal":
        if not isinstance(other, LogReal):
            return NotImplemented
        if other.log == _NEG_INF:
            raise ZeroDivisionError("LogReal division by zero")
        if self.log == _NEG_INF:
            return LogReal(_NEG_INF)
        return LogReal(self.log - other.log)

    def __pow__(self, exponent) -> "LogReal":
        if self.log == _NEG_INF:
            if exponent == 0:
                return LogReal.one()
            if exponent < 0:
                raise ZeroDivisionError("zero to a negative power")
            return LogReal(_NEG_INF)
        return LogReal(self.log * float(exponent))

    # comparisons compare the represented values, i.e. the logs

    def __eq__(self, other):
        return isinstance(other, LogReal) and self.log == other.log

    def __lt__(self, other: "LogReal") -> bool:
        return self.log < other.log

    def __le__(self, other: "LogReal") -> bool:
        return self.log <= other.log

    def __gt__(self, other: "LogReal") -> bool:
        return self.log > other.log

    def __ge__(self, other: "LogReal") -> bool:
        return self.log >= other.log

    def __hash__(self):
        return hash(("LogReal", self.log))

    def __repr__(self):
        if self.log == _NEG_INF:
            return "LogReal(0)"
        return "LogReal(log=%r)" % (self.log,)

    # serialization

    def to_json(self) -> dict:
        log = None if self.log == _NEG_INF else self.log
        v = self.value
        value = None if math.isinf(v) else v
        return {"log": log, "value": value}

    @classmethod
    def from_json(cls, obj: dict) -> "LogReal":
        log = obj.get("log")
        if log is None:
            return cls(_NEG_INF)
        return cls(float(log))
