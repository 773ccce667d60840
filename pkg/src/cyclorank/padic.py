"""Capped relative precision p-adic numbers and the Iwasawa logarithm."""
from __future__ import annotations

from fractions import Fraction
from numbers import Rational
from typing import Union

DEFAULT_PRECISION = 20


class PadicError(ArithmeticError):
    pass


class PadicDivisionByZero(PadicError, ZeroDivisionError):
    pass


class PrecisionExhausted(PadicError):
    """A result would carry no significant p-adic digits."""


class NotAUnit(PadicError):
    pass


class ZeroArgument(ValueError):
    pass


def valuation(n: Union[int, Fraction], p: int) -> int:
    """Exact p-adic valuation of a nonzero integer or rational."""
    if n == 0:
        raise ZeroArgument("valuation of zero")
    if isinstance(n, Fraction) or (isinstance(n, Rational) and not isinstance(n, int)):
        n = Fraction(n)
        return valuation(n.numerator, p) - valuation(n.denominator, p)
    n = abs(n)
    v = 0
    while n % p == 0:
        n //= p
        v += 1
    return v


valuation_of_integer = valuation


def _split(n: int, p: int) -> tuple[int, int]:
    v = 0
    while n % p == 0:
        n //= p
        v += 1
    return v, n


class PadicNumber:
    """p^val * unit, known modulo p^(val + prec).

    ``prec`` is the relative precision.  A value with ``prec == 0`` is an
    inexact zero O(p^val); ``val`` is then its absolute precision.
    """

    __slots__ = ("p", "val", "unit", "prec")

    def __init__(self, p: int, val: int, unit: int, prec: int):
        self.p = p
        self.val = val
        self.prec = prec
        self.unit = unit % p ** prec if prec > 0 else 0

    # -- constructors ---------------------------------------------------------

    @classmethod
    def zero(cls, p: int, absprec: int) -> "PadicNumber":
        return cls(p, absprec, 0, 0)

    @classmethod
    def from_rational(cls, x, p: int, prec: int = DEFAULT_PRECISION) -> "PadicNumber":
        """Approximate a rational to ``prec`` relative digits (exact zero -> O(p^prec))."""
        x = Fraction(x)
        if x == 0:
            return cls.zero(p, prec)
        vn, un = _split(x.numerator, p)
        vd, ud = _split(x.denominator, p)
        mod = p ** prec
        return cls(p, vn - vd, un * pow(ud, -1, mod), prec)

    @classmethod
    def from_int_mod(cls, n: int, p: int, absprec: int) -> "PadicNumber":
        """The class of n modulo p^absprec."""
        n %= p ** absprec
        if n == 0:
            return cls.zero(p, absprec)
        v, u = _split(n, p)
        return cls(p, v, u, absprec - v)

    def _coerce(self, other) -> "PadicNumber":
        if isinstance(other, PadicNumber):
            if other.p != self.p:
                raise PadicError("mismatched primes")
            return other
        if isinstance(other, (int, Fraction)):
            # exact rationals only limit precision through self
            return PadicNumber.from_rational(other, self.p, self.absprec + 10 + abs(self.val)
                                             if self.prec else self.absprec + 10)
        return NotImplemented

    # -- basic properties -------------------------------------------------------

    @property
    def absprec(self) -> int:
        return self.val + self.prec

    def is_zero(self) -> bool:
        return self.prec == 0

    def valuation(self) -> int:
        if self.prec == 0:
            raise PrecisionExhausted("valuation of an inexact zero")
        return self.val

    def is_unit(self) -> bool:
        return self.prec > 0 and self.val == 0

    def lift(self) -> Fraction:
        """Rational representative p^val * unit."""
        return Fraction(self.unit) * Fraction(self.p) ** self.val

    def residue(self, n: int) -> int:
        """Integer representative mod p^n of an integral value."""
        if self.prec == 0:
            if self.val < n:
                raise PrecisionExhausted(f"only known mod p^{self.val}")
            return 0
        if self.val < 0:
            raise PadicError("not integral")
        if self.absprec < n:
            raise PrecisionExhausted(f"only known mod p^{self.absprec}")
        return self.unit * self.p ** self.val % self.p ** n

    def with_precision(self, absprec: int) -> "PadicNumber":
        """Reduce absolute precision to at most ``absprec``."""
        if absprec >= self.absprec:
            return self
        if self.prec == 0 or absprec <= self.val:
            return PadicNumber.zero(self.p, min(absprec, self.absprec))
        return PadicNumber(self.p, self.val, self.unit, absprec - self.val)

    # -- arithmetic -----------------------------------------------------------

    def __neg__(self):
        return PadicNumber(self.p, self.val, -self.unit, self.prec)

    def __add__(self, other):
        other = self._coerce(other)
        if other is NotImplemented:
            return other
        p = self.p
        absprec = min(self.absprec, other.absprec)
        if self.prec == 0 and other.prec == 0:
            return PadicNumber.zero(p, absprec)
        base = min(v for v, q in ((self.val, self.prec), (other.val, other.prec)) if q)
        base = min(base, absprec)
        s = 0
        for x in (self, other):
            if x.prec:
                s += x.unit * p ** (x.val - base)
        n = absprec - base
        if n <= 0:
            return PadicNumber.zero(p, absprec)
        s %= p ** n
        if s == 0:
            return PadicNumber.zero(p, absprec)
        v, u = _split(s, p)
        return PadicNumber(p, base + v, u, n - v)

    __radd__ = __add__

    def __sub__(self, other):
        other = self._coerce(other)
        if other is NotImplemented:
            return other
        return self + (-other)

    def __rsub__(self, other):
        return (-self) + other

    def __mul__(self, other):
        other = self._coerce(other)
        if other is NotImplemented:
            return other
        p = self.p
        if self.prec == 0 or other.prec == 0:
            if self.prec == 0 and other.prec == 0:
                return PadicNumber.zero(p, self.val + other.val)
            z, nz = (self, other) if self.prec == 0 else (other, self)
            return PadicNumber.zero(p, z.val + nz.val)
        prec = min(self.prec, other.prec)
        return PadicNumber(p, self.val + other.val, self.unit * other.unit, prec)

    __rmul__ = __mul__

    def __truediv__(self, other):
        other = self._coerce(other)
        if other is NotImplemented:
            return other
        if other.prec == 0:
            raise PadicDivisionByZero("division by an inexact zero")
        p = self.p
        if self.prec == 0:
            return PadicNumber.zero(p, self.val - other.val)
        prec = min(self.prec, other.prec)
        inv = pow(other.unit, -1, p ** prec)
        return PadicNumber(p, self.val - other.val, self.unit * inv, prec)

    def __rtruediv__(self, other):
        return self._coerce(other) / self

    def __pow__(self, n: int):
        if n < 0:
            return PadicNumber.from_rational(1, self.p, self.prec) / self ** (-n)
        if self.prec == 0:
            return PadicNumber.zero(self.p, self.val * n) if n else PadicNumber.from_rational(1, self.p, 10)
        return PadicNumber(self.p, self.val * n, pow(self.unit, n, self.p ** self.prec), self.prec)

    def __eq__(self, other):
        """Equality within the joint precision."""
        if isinstance(other, (int, Fraction)):
            other = PadicNumber.from_rational(other, self.p, max(self.absprec, 1) + 5)
        if not isinstance(other, PadicNumber):
            return NotImplemented
        return (self - other).is_zero()

    def __hash__(self):
        return hash((self.p, self.val, self.unit, self.prec))

    def __repr__(self):
        if self.prec == 0:
            return f"O({self.p}^{self.val})"
        return f"{self.p}^{self.val}*{self.unit} + O({self.p}^{self.absprec})"


def padic(x, p: int, prec: int = DEFAULT_PRECISION) -> PadicNumber:
    if isinstance(x, PadicNumber):
        return x
    return PadicNumber.from_rational(x, p, prec)


def _log_one_plus(x: int, p: int, vx: int, n: int) -> int:
    """log(1 + x) mod p^n for an integer x with val_p(x) = vx >= 1 (p odd)."""
    # terms x^k/k with k*vx - v_p(k) >= n vanish mod p^n
    k_max = 1
    while True:
        k = k_max + 1
        if k * vx - valuation(k, p) >= n and (k + 1) * vx - valuation(k + 1, p) >= n:
            break
        k_max = k
    guard = 1
    while p ** guard <= k_max:
        guard += 1
    mod = p ** (n + guard)
    total = 0
    power = 1
    for k in range(1, k_max + 1):
        power = power * x % mod
        vk, uk = _split(k, p)
        term = (power // p ** vk) * pow(uk, -1, mod)
        total += term if k % 2 else -term
    return total % p ** n


def iwasawa_log(a: PadicNumber, allow_nonunit: bool = False) -> PadicNumber:
    """Iwasawa branch of the p-adic logarithm (log p = 0), p odd.

    Units are sent through the series via a^(p-1) = 1 mod p.  Non-units are
    accepted only with ``allow_nonunit`` (then log(p^v u) = log(u)).
    """
    p = a.p
    if a.prec == 0:
        raise PrecisionExhausted("logarithm of an inexact zero")
    if a.val != 0 and not allow_nonunit:
        raise NotAUnit(f"valuation {a.val}")
    n = a.prec
    mod = p ** n
    u = a.unit
    w = pow(u, p - 1, mod)
    x = (w - 1) % mod
    if x == 0:
        return PadicNumber.zero(p, n)
    vx, _ = _split(x, p)
    s = _log_one_plus(x, p, vx, n)
    s = s * pow(p - 1, -1, mod) % mod
    return PadicNumber.from_int_mod(s, p, n)
