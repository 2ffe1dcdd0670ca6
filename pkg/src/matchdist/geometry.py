"""Extended reals, filtering lines and the one-parameter restriction formulas.

A filtering line is parametrised by ``(a, b)`` with ``0 <= a <= 1``::

    r_(a,b) = { t * (a, 1 - a) + (b, -b) : t real }      for 0 < a < 1
    r_(0,b) = { x = b }      (vertical)
    r_(1,b) = { y = -b }     (horizontal)
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Union

import numpy as np

__all__ = [
    "InfiniteArithmeticError",
    "ExtendedReal",
    "INF",
    "ExtendedPoint",
    "LineParam",
    "RotationSegment",
    "restrict_value",
    "normalized_value",
    "normalized_values",
    "line_through",
]


class InfiniteArithmeticError(ArithmeticError):
    """Raised for undefined operations on the infinity marker, e.g. inf - inf."""


Number = Union[int, float]


class ExtendedReal:
    """A real number or the positive infinity marker.

    Infinity is a tag, never a float ``inf``, so that ``inf - inf`` raises
    instead of silently producing NaN.
    """

    __slots__ = ("_value",)

    def __init__(self, value: "Number | ExtendedReal | str"):
        if isinstance(value, ExtendedReal):
            self._value = value._value
            return
        if isinstance(value, str):
            value = float(value)
        value = float(value)
        if math.isnan(value):
            raise ValueError("NaN is not an extended real")
        if value == -math.inf:
            raise ValueError("negative infinity is not an extended real")
        self._value = None if value == math.inf else value

    @classmethod
    def inf(cls) -> "ExtendedReal":
        return cls(math.inf)

    @property
    def is_inf(self) -> bool:
        return self._value is None

    @property
    def is_finite(self) -> bool:
        return self._value is not None

    @property
    def value(self) -> float:
        """The finite value; raises on the infinity marker."""
        if self._value is None:
            raise InfiniteArithmeticError("infinite extended real has no finite value")
        return self._value

    def __float__(self) -> float:
        return math.inf if self._value is None else self._value

    # arithmetic -----------------------------------------------------------
    def __add__(self, other):
        other = _coerce(other)
        if other is NotImplemented:
            return other
        if self.is_inf or other.is_inf:
            return INF
        return ExtendedReal(self._value + other._value)

    __radd__ = __add__

    def __sub__(self, other):
        other = _coerce(other)
        if other is NotImplemented:
            return other
        if other.is_inf:
            if self.is_inf:
                raise InfiniteArithmeticError("inf - inf is undefined")
            raise InfiniteArithmeticError("finite - inf leaves the extended reals")
        if self.is_inf:
            return INF
        return ExtendedReal(self._value - other._value)

    def __rsub__(self, other):
        other = _coerce(other)
        if other is NotImplemented:
            return other
        return other - self

    def __mul__(self, other):
        if isinstance(other, ExtendedReal):
            if other.is_inf:
                return other * self
            other = other._value
        if not isinstance(other, (int, float, np.floating, np.integer)):
            return NotImplemented
        other = float(other)
        if self.is_inf:
            if other > 0:
                return INF
            raise InfiniteArithmeticError("inf times a non-positive number is undefined")
        return ExtendedReal(self._value * other)

    __rmul__ = __mul__

    def __abs__(self):
        return INF if self.is_inf else ExtendedReal(abs(self._value))

    # ordering ---------------------------------------------------------------
    def _key(self):
        return (1, 0.0) if self._value is None else (0, self._value)

    def __eq__(self, other):
        other = _coerce(other)
        if other is NotImplemented:
            return False
        return self._key() == other._key()

    def __lt__(self, other):
        other = _coerce(other)
        if other is NotImplemented:
            return other
        return self._key() < other._key()

    def __le__(self, other):
        other = _coerce(other)
        if other is NotImplemented:
            return other
        return self._key() <= other._key()

    def __gt__(self, other):
        other = _coerce(other)
        if other is NotImplemented:
            return other
        return self._key() > other._key()

    def __ge__(self, other):
        other = _coerce(other)
        if other is NotImplemented:
            return other
        return self._key() >= other._key()

    def __hash__(self):
        return hash(self._key())

    def __repr__(self):
        return "ExtendedReal(inf)" if self.is_inf else f"ExtendedReal({self._value!r})"

    def __str__(self):
        return "inf" if self.is_inf else format(self._value, ".17g")


def _coerce(value):
    if isinstance(value, ExtendedReal):
        return value
    if isinstance(value, (int, float, np.floating, np.integer)):
        return ExtendedReal(float(value))
    return NotImplemented


INF = ExtendedReal.inf()


@dataclass(frozen=True)
class ExtendedPoint:
    """A point of the extended plane ``(R u {inf})^2``."""

    x: ExtendedReal
    y: ExtendedReal

    def __init__(self, x, y):
        object.__setattr__(self, "x", ExtendedReal(x))
        object.__setattr__(self, "y", ExtendedReal(y))

    @property
    def is_finite(self) -> bool:
        return self.x.is_finite and self.y.is_finite

    def as_floats(self) -> tuple[float, float]:
        return float(self.x), float(self.y)

    def __repr__(self):
        return f"ExtendedPoint({self.x}, {self.y})"


@dataclass(frozen=True, order=True)
class LineParam:
    """Parameter ``(a, b)`` of the filtering line ``r_(a,b)``."""

    a: float
    b: float

    def __post_init__(self):
        a = float(self.a)
        b = float(self.b)
        if not (0.0 <= a <= 1.0):
            raise ValueError(f"line parameter a={a} outside [0, 1]")
        if not math.isfinite(b):
            raise ValueError(f"line parameter b={b} must be finite")
        object.__setattr__(self, "a", a)
        object.__setattr__(self, "b", b)

    @property
    def is_boundary(self) -> bool:
        return self.a == 0.0 or self.a == 1.0

    def point_at(self, t: float) -> tuple[float, float]:
        """Point of the line at parameter ``t`` (open strip only)."""
        if self.is_boundary:
            raise ValueError("boundary lines are not parametrised by t")
        return (t * self.a + self.b, t * (1.0 - self.a) - self.b)

    def contains(self, x: float, y: float, tol: float = 1e-12) -> bool:
        # (1-a)(x-b) - a(y+b) = 0 covers the open strip and both boundary lines
        return abs((1.0 - self.a) * (x - self.b) - self.a * (y + self.b)) <= tol


@dataclass(frozen=True)
class RotationSegment:
    """The closed segment ``[(a, b), (a', b')]`` of parameter space."""

    start: LineParam
    end: LineParam

    @property
    def kind(self) -> str:
        if self.start.a < self.end.a:
            return "clockwise"
        if self.end.a < self.start.a:
            return "counter-clockwise"
        return "translation"

    def sample(self, n: int) -> list[LineParam]:
        ts = np.linspace(0.0, 1.0, n)
        return [
            LineParam(self.start.a + t * (self.end.a - self.start.a),
                      self.start.b + t * (self.end.b - self.start.b))
            for t in ts
        ]


def restrict_value(phi1: float, phi2: float, line: LineParam) -> float:
    """Value of the restricted function phi_(a,b) = max((phi1-b)/a, (phi2+b)/(1-a))."""
    a, b = line.a, line.b
    if a <= 0.0 or a >= 1.0:
        raise ValueError("restrict_value needs 0 < a < 1; use normalized_value on the boundary")
    return max((phi1 - b) / a, (phi2 + b) / (1.0 - a))


def normalized_value(phi1: float, phi2: float, line: LineParam) -> float:
    """Normalised restriction min(a, 1-a) * phi_(a,b), extended to a in {0, 1}."""
    a, b = line.a, line.b
    if a == 0.0:
        return max(phi1 - b, 0.0)
    if a == 1.0:
        return max(0.0, phi2 + b)
    return min(a, 1.0 - a) * restrict_value(phi1, phi2, line)


def normalized_values(values: np.ndarray, a: float, b: float) -> np.ndarray:
    """Vectorised :func:`normalized_value` over an ``(n, 2)`` array of values."""
    values = np.asarray(values, dtype=np.float64)
    phi1 = values[:, 0]
    phi2 = values[:, 1]
    if a == 0.0:
        return np.maximum(phi1 - b, 0.0)
    if a == 1.0:
        return np.maximum(0.0, phi2 + b)
    if not (0.0 < a < 1.0):
        raise ValueError(f"a={a} outside [0, 1]")
    return min(a, 1.0 - a) * np.maximum((phi1 - b) / a, (phi2 + b) / (1.0 - a))


def line_through(a: float, point: ExtendedPoint | tuple[float, float]) -> LineParam:
    """The line of slope parameter ``a`` through a finite point."""
    if isinstance(point, ExtendedPoint):
        if not point.is_finite:
            raise ValueError("line_through needs a finite point")
        x, y = point.x.value, point.y.value
    else:
        x, y = float(point[0]), float(point[1])
        if not (math.isfinite(x) and math.isfinite(y)):
            raise ValueError("line_through needs a finite point")
    return LineParam(a, (1.0 - a) * x - a * y)
