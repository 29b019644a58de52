"""Forward-mode dual scalars carrying exact first and second derivatives.

``Dual1`` propagates a value and a gradient, ``Dual2`` additionally a full
Hessian.  Both are plain value types over numpy arrays; all rules are the
exact chain rule, so results are bit-reproducible and carry no truncation
error.  The module-level math functions (:func:`sin`, :func:`sqrt`, ...)
accept duals or ordinary numbers and enforce the same domain restrictions
for both, raising :class:`~kyano.errors.SingularEvaluation` at poles.
"""

from __future__ import annotations

import math
from typing import Union

import numpy as np

from .errors import SingularEvaluation

Scalar = Union[float, "Dual1", "Dual2"]


class Dual1:
    """First-order dual scalar: value plus gradient of length ``n``."""

    __slots__ = ("value", "gradient")

    def __init__(self, value: float, gradient: np.ndarray):
        self.value = float(value)
        self.gradient = np.asarray(gradient, dtype=float)

    @classmethod
    def constant(cls, value: float, n: int) -> "Dual1":
        return cls(value, np.zeros(n))

    @classmethod
    def seed(cls, value: float, i: int, n: int) -> "Dual1":
        g = np.zeros(n)
        g[i] = 1.0
        return cls(value, g)

    def _chain(self, f: float, df: float) -> "Dual1":
        return Dual1(f, df * self.gradient)

    def __add__(self, other):
        if isinstance(other, Dual1):
            return Dual1(self.value + other.value, self.gradient + other.gradient)
        if isinstance(other, (int, float)):
            return Dual1(self.value + other, self.gradient)
        return NotImplemented

    __radd__ = __add__

    def __neg__(self):
        return Dual1(-self.value, -self.gradient)

    def __sub__(self, other):
        return self + (-other)

    def __rsub__(self, other):
        return (-self) + other

    def __mul__(self, other):
        if isinstance(other, Dual1):
            return Dual1(
                self.value * other.value,
                self.value * other.gradient + other.value * self.gradient,
            )
        if isinstance(other, (int, float)):
            return Dual1(self.value * other, self.gradient * other)
        return NotImplemented

    __rmul__ = __mul__

    def _reciprocal(self) -> "Dual1":
        if self.value == 0.0:
            raise SingularEvaluation("division by zero")
        inv = 1.0 / self.value
        return self._chain(inv, -inv * inv)

    def __truediv__(self, other):
        if isinstance(other, Dual1):
            return self * other._reciprocal()
        if isinstance(other, (int, float)):
            if other == 0:
                raise SingularEvaluation("division by zero")
            return self * (1.0 / other)
        return NotImplemented

    def __rtruediv__(self, other):
        if isinstance(other, (int, float)):
            return other * self._reciprocal()
        return NotImplemented

    def __pow__(self, k):
        return power(self, k)

    def __repr__(self):
        return f"Dual1({self.value!r}, grad={self.gradient!r})"


class Dual2:
    """Second-order dual scalar: value, gradient, and symmetric Hessian."""

    __slots__ = ("value", "gradient", "hessian")

    def __init__(self, value: float, gradient: np.ndarray, hessian: np.ndarray):
        self.value = float(value)
        self.gradient = np.asarray(gradient, dtype=float)
        self.hessian = np.asarray(hessian, dtype=float)

    @classmethod
    def constant(cls, value: float, n: int) -> "Dual2":
        return cls(value, np.zeros(n), np.zeros((n, n)))

    @classmethod
    def seed(cls, value: float, i: int, n: int) -> "Dual2":
        g = np.zeros(n)
        g[i] = 1.0
        return cls(value, g, np.zeros((n, n)))

    def _chain(self, f: float, df: float, d2f: float) -> "Dual2":
        g = self.gradient
        return Dual2(f, df * g, df * self.hessian + d2f * np.outer(g, g))

    def __add__(self, other):
        if isinstance(other, Dual2):
            return Dual2(
                self.value + other.value,
                self.gradient + other.gradient,
                self.hessian + other.hessian,
            )
        if isinstance(other, (int, float)):
            return Dual2(self.value + other, self.gradient, self.hessian)
        return NotImplemented

    __radd__ = __add__

    def __neg__(self):
        return Dual2(-self.value, -self.gradient, -self.hessian)

    def __sub__(self, other):
        return self + (-other)

    def __rsub__(self, other):
        return (-self) + other

    def __mul__(self, other):
        if isinstance(other, Dual2):
            cross = np.outer(self.gradient, other.gradient)
            return Dual2(
                self.value * other.value,
                self.value * other.gradient + other.value * self.gradient,
                self.value * other.hessian
                + other.value * self.hessian
                + cross
                + cross.T,
            )
        if isinstance(other, (int, float)):
            return Dual2(self.value * other, self.gradient * other, self.hessian * other)
        return NotImplemented

    __rmul__ = __mul__

    def _reciprocal(self) -> "Dual2":
        if self.value == 0.0:
            raise SingularEvaluation("division by zero")
        inv = 1.0 / self.value
        return self._chain(inv, -inv * inv, 2.0 * inv * inv * inv)

    def __truediv__(self, other):
        if isinstance(other, Dual2):
            return self * other._reciprocal()
        if isinstance(other, (int, float)):
            if other == 0:
                raise SingularEvaluation("division by zero")
            return self * (1.0 / other)
        return NotImplemented

    def __rtruediv__(self, other):
        if isinstance(other, (int, float)):
            return other * self._reciprocal()
        return NotImplemented

    def __pow__(self, k):
        return power(self, k)

    def __repr__(self):
        return f"Dual2({self.value!r}, grad={self.gradient!r})"


def value_of(x: Scalar) -> float:
    """Plain float value of a dual or ordinary number."""
    if isinstance(x, (Dual1, Dual2)):
        return x.value
    return float(x)


def _as_int_exponent(k) -> "int | None":
    if isinstance(k, int):
        return k
    if isinstance(k, float) and k.is_integer():
        return int(k)
    return None


def integer_power(base: Scalar, k: int) -> Scalar:
    """``base ** k`` by repeated multiplication.

    Stays differentiable for non-positive bases; ``base ** 0`` is the
    constant 1 even at ``base == 0``.  Negative exponents take the
    reciprocal and therefore require a nonzero base.
    """
    if k < 0:
        if value_of(base) == 0.0:
            raise SingularEvaluation("zero raised to a negative power")
        return integer_power(1.0 / base, -k)
    if isinstance(base, Dual1):
        result: Scalar = Dual1.constant(1.0, base.gradient.shape[0])
    elif isinstance(base, Dual2):
        result = Dual2.constant(1.0, base.gradient.shape[0])
    else:
        result = 1.0
    # exponentiation by squaring keeps the multiplication count logarithmic
    acc = base
    e = k
    while e > 0:
        if e & 1:
            result = result * acc
        e >>= 1
        if e:
            acc = acc * acc
    return result


def power(base: Scalar, k) -> Scalar:
    """General power: integer exponents by repeated multiplication,
    everything else via ``exp(k*ln(base))`` on a positive base."""
    ki = _as_int_exponent(k)
    if ki is not None:
        return integer_power(base, ki)
    if isinstance(k, (Dual1, Dual2)) or isinstance(base, (Dual1, Dual2)):
        if value_of(base) <= 0.0:
            raise SingularEvaluation("non-integer power of a non-positive base")
        return exp(log(base) * k)
    if base <= 0.0:
        raise SingularEvaluation("non-integer power of a non-positive base")
    return math.pow(base, k)


def _apply(x: Scalar, f: float, df: float, d2f: float) -> Scalar:
    if isinstance(x, Dual1):
        return x._chain(f, df)
    if isinstance(x, Dual2):
        return x._chain(f, df, d2f)
    return f


def sin(x: Scalar) -> Scalar:
    v = value_of(x)
    return _apply(x, math.sin(v), math.cos(v), -math.sin(v))


def cos(x: Scalar) -> Scalar:
    v = value_of(x)
    return _apply(x, math.cos(v), -math.sin(v), -math.cos(v))


def tan(x: Scalar) -> Scalar:
    v = value_of(x)
    c = math.cos(v)
    if abs(c) < 1e-300:
        raise SingularEvaluation("tan at a pole")
    t = math.tan(v)
    sec2 = 1.0 + t * t
    return _apply(x, t, sec2, 2.0 * t * sec2)


def sqrt(x: Scalar) -> Scalar:
    v = value_of(x)
    if v <= 0.0:
        raise SingularEvaluation("sqrt of a non-positive argument")
    r = math.sqrt(v)
    return _apply(x, r, 0.5 / r, -0.25 / (r * v))


def exp(x: Scalar) -> Scalar:
    e = math.exp(value_of(x))
    return _apply(x, e, e, e)


def log(x: Scalar) -> Scalar:
    v = value_of(x)
    if v <= 0.0:
        raise SingularEvaluation("ln of a non-positive argument")
    inv = 1.0 / v
    return _apply(x, math.log(v), inv, -inv * inv)


def absolute(x: Scalar) -> Scalar:
    v = value_of(x)
    if v == 0.0:
        raise SingularEvaluation("abs at zero has no derivative")
    s = 1.0 if v > 0 else -1.0
    return _apply(x, abs(v), s, 0.0)
