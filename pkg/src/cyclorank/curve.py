"""Weierstrass models over Q, exact group law, and torsion order.

Everything here is exact: coordinates are :class:`fractions.Fraction`,
curve coefficients are Python ints.  Points on reductions mod p use plain
residues.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from functools import cached_property
from math import gcd, isqrt
from typing import Optional

import sympy


class SingularModel(ValueError):
    """The Weierstrass coefficients give a curve with zero discriminant."""


class PointNotOnCurve(ValueError):
    pass


@dataclass(frozen=True)
class EllipticCurveQ:
    """y^2 + a1 xy + a3 y = x^3 + a2 x^2 + a4 x + a6 with integer coefficients."""

    a1: int
    a2: int
    a3: int
    a4: int
    a6: int

    def __post_init__(self):
        for name in ("a1", "a2", "a3", "a4", "a6"):
            if not isinstance(getattr(self, name), int):
                raise TypeError(f"{name} must be an integer")
        if self.disc == 0:
            raise SingularModel(f"discriminant of {self.ainvs} is zero")

    @classmethod
    def from_ainvs(cls, ainvs) -> "EllipticCurveQ":
        ainvs = [int(a) for a in ainvs]
        if len(ainvs) != 5:
            raise ValueError("expected five a-invariants")
        return cls(*ainvs)

    @property
    def ainvs(self) -> tuple[int, int, int, int, int]:
        return (self.a1, self.a2, self.a3, self.a4, self.a6)

    @cached_property
    def b2(self) -> int:
        return self.a1 * self.a1 + 4 * self.a2

    @cached_property
    def b4(self) -> int:
        return 2 * self.a4 + self.a1 * self.a3

    @cached_property
    def b6(self) -> int:
        return self.a3 * self.a3 + 4 * self.a6

    @cached_property
    def b8(self) -> int:
        a1, a2, a3, a4, a6 = self.ainvs
        return (a1 * a1 * a6 + 4 * a2 * a6 - a1 * a3 * a4
                + a2 * a3 * a3 - a4 * a4)

    @cached_property
    def c4(self) -> int:
        return self.b2 ** 2 - 24 * self.b4

    @cached_property
    def c6(self) -> int:
        return -self.b2 ** 3 + 36 * self.b2 * self.b4 - 216 * self.b6

    @cached_property
    def disc(self) -> int:
        b2, b4, b6, b8 = self.b2, self.b4, self.b6, self.b8
        return -b2 * b2 * b8 - 8 * b4 ** 3 - 27 * b6 * b6 + 9 * b2 * b4 * b6

    @cached_property
    def j(self) -> Fraction:
        return Fraction(self.c4 ** 3, self.disc)

    # -- points -----------------------------------------------------------

    def point(self, x, y) -> "PointQ":
        P = PointQ(Fraction(x), Fraction(y))
        if not self.contains(P):
            raise PointNotOnCurve(f"({x}, {y}) is not on {self.ainvs}")
        return P

    def contains(self, P: "PointQ") -> bool:
        if P.is_zero:
            return True
        x, y = P.x, P.y
        a1, a2, a3, a4, a6 = self.ainvs
        return y * y + a1 * x * y + a3 * y == x ** 3 + a2 * x * x + a4 * x + a6

    def _check(self, P: "PointQ") -> None:
        if not self.contains(P):
            raise PointNotOnCurve(f"{P} is not on {self.ainvs}")

    def neg(self, P: "PointQ") -> "PointQ":
        if P.is_zero:
            return P
        return PointQ(P.x, -P.y - self.a1 * P.x - self.a3)

    def add(self, P: "PointQ", Q: "PointQ") -> "PointQ":
        self._check(P)
        self._check(Q)
        return self._add(P, Q)

    def _add(self, P: "PointQ", Q: "PointQ") -> "PointQ":
        if P.is_zero:
            return Q
        if Q.is_zero:
            return P
        a1, a2, a3, a4, a6 = self.ainvs
        x1, y1, x2, y2 = P.x, P.y, Q.x, Q.y
        if x1 == x2:
            if y1 + y2 + a1 * x2 + a3 == 0:
                return INFINITY
            lam = (3 * x1 * x1 + 2 * a2 * x1 + a4 - a1 * y1) / (2 * y1 + a1 * x1 + a3)
        else:
            lam = (y2 - y1) / (x2 - x1)
        nu = y1 - lam * x1
        x3 = lam * lam + a1 * lam - a2 - x1 - x2
        y3 = -(lam + a1) * x3 - nu - a3
        return PointQ(x3, y3)

    def mul(self, n: int, P: "PointQ") -> "PointQ":
        self._check(P)
        if n < 0:
            return self.neg(self._mul(-n, P))
        return self._mul(n, P)

    def _mul(self, n: int, P: "PointQ") -> "PointQ":
        result = INFINITY
        addend = P
        while n:
            if n & 1:
                result = self._add(result, addend)
            n >>= 1
            if n:
                addend = self._add(addend, addend)
        return result

    def order(self, P: "PointQ", bound: int = 16) -> Optional[int]:
        """Order of P if it is at most ``bound``, else None."""
        Q = P
        for k in range(1, bound + 1):
            if Q.is_zero:
                return k
            Q = self._add(Q, P)
        return None

    # -- reduction mod p ----------------------------------------------------

    def reduce_point(self, P: "PointQ", p: int) -> "PointFp":
        """Image of P in E(F_p); requires p prime to the denominators of P."""
        if P.is_zero:
            return PointFp(p, None, None)
        if P.x.denominator % p == 0:
            return PointFp(p, None, None)
        x = P.x.numerator * pow(P.x.denominator, -1, p) % p
        y = P.y.numerator * pow(P.y.denominator, -1, p) % p
        return PointFp(p, x, y)

    def contains_mod(self, P: "PointFp") -> bool:
        if P.is_zero:
            return True
        p = P.p
        a1, a2, a3, a4, a6 = self.ainvs
        x, y = P.x, P.y
        return (y * y + a1 * x * y + a3 * y - (x ** 3 + a2 * x * x + a4 * x + a6)) % p == 0

    def add_mod(self, P: "PointFp", Q: "PointFp") -> "PointFp":
        """Group law on the reduction mod p (p must be a prime of good reduction)."""
        if P.is_zero:
            return Q
        if Q.is_zero:
            return P
        p = P.p
        a1, a2, a3, a4, a6 = self.ainvs
        x1, y1, x2, y2 = P.x, P.y, Q.x, Q.y
        if x1 == x2:
            den = (2 * y1 + a1 * x1 + a3) % p
            if (y1 + y2 + a1 * x2 + a3) % p == 0:
                return PointFp(p, None, None)
            lam = (3 * x1 * x1 + 2 * a2 * x1 + a4 - a1 * y1) * pow(den, -1, p) % p
        else:
            lam = (y2 - y1) * pow(x2 - x1, -1, p) % p
        nu = (y1 - lam * x1) % p
        x3 = (lam * lam + a1 * lam - a2 - x1 - x2) % p
        y3 = (-(lam + a1) * x3 - nu - a3) % p
        return PointFp(p, x3, y3)

    def neg_mod(self, P: "PointFp") -> "PointFp":
        if P.is_zero:
            return P
        return PointFp(P.p, P.x, (-P.y - self.a1 * P.x - self.a3) % P.p)

    def mul_mod(self, n: int, P: "PointFp") -> "PointFp":
        if n < 0:
            return self.neg_mod(self.mul_mod(-n, P))
        result = PointFp(P.p, None, None)
        addend = P
        while n:
            if n & 1:
                result = self.add_mod(result, addend)
            n >>= 1
            if n:
                addend = self.add_mod(addend, addend)
        return result


@dataclass(frozen=True)
class PointQ:
    """A rational point; ``x is None`` encodes the point at infinity."""

    x: Optional[Fraction] = None
    y: Optional[Fraction] = None

    @property
    def is_zero(self) -> bool:
        return self.x is None

    @property
    def denominator_root(self) -> int:
        """The positive integer e with x = a/e^2 in lowest terms."""
        if self.is_zero:
            raise ValueError("point at infinity has no denominator")
        e = isqrt(self.x.denominator)
        assert e * e == self.x.denominator
        return e

    def __str__(self):
        return "O" if self.is_zero else f"({self.x}, {self.y})"


INFINITY = PointQ()


@dataclass(frozen=True)
class PointFp:
    p: int
    x: Optional[int] = None
    y: Optional[int] = None

    @property
    def is_zero(self) -> bool:
        return self.x is None


MAZUR_TORSION_ORDERS = frozenset({1, 2, 3, 4, 5, 6, 7, 8, 9, 10, 12, 16})


@dataclass
class CurveContext:
    """Arithmetic data about E that is taken as given rather than computed."""

    label: str
    rank: int
    generators: list[PointQ] = field(default_factory=list)
    torsion_order: int = 1
    sha_analytic_order: int = 1
    tamagawa_overrides: dict[int, int] = field(default_factory=dict)

    def __post_init__(self):
        if self.rank < 0:
            raise ValueError("rank must be nonnegative")
        if len(self.generators) != self.rank:
            raise ValueError(
                f"{self.label}: rank {self.rank} but {len(self.generators)} generators")
        if self.torsion_order < 1 or self.sha_analytic_order < 1:
            raise ValueError("torsion and sha orders must be positive")


def derive_invariants(a1: int, a2: int, a3: int, a4: int, a6: int) -> EllipticCurveQ:
    return EllipticCurveQ(a1, a2, a3, a4, a6)


def count_points_naive(E: EllipticCurveQ, p: int) -> int:
    """#E(F_p) by enumerating all (x, y); only meant for very small p."""
    a1, a2, a3, a4, a6 = E.ainvs
    n = 1
    for x in range(p):
        rhs = (x ** 3 + a2 * x * x + a4 * x + a6) % p
        for y in range(p):
            if (y * y + a1 * x * y + a3 * y - rhs) % p == 0:
                n += 1
    return n


def _small_good_primes(E: EllipticCurveQ, count: int, start: int = 5) -> list[int]:
    out = []
    q = start - 1
    while len(out) < count:
        q = sympy.nextprime(q)
        if E.disc % q:
            out.append(q)
    return out


def torsion_bound(E: EllipticCurveQ, nprimes: int = 5) -> int:
    """gcd of #E~(F_l) over the first few good primes l > 3."""
    g = 0
    for q in _small_good_primes(E, nprimes):
        g = gcd(g, count_points_naive(E, q) if q < 30 else _count_fast(E, q))
    return g


def _count_fast(E, q):
    from .reduction import count_points  # local import: reduction builds on this module
    return count_points(E, q)


def torsion_points(E: EllipticCurveQ) -> list[PointQ]:
    """All rational torsion points (including infinity), via Nagell-Lutz.

    Works on the integral model Y^2 = X^3 - 27 c4 X - 54 c6 obtained by
    X = 36x + 3b2, Y = 108(2y + a1 x + a3); torsion points there have
    integer coordinates and Y = 0 or Y^2 | disc of the cubic.
    """
    A, B = -27 * E.c4, -54 * E.c6
    D = -16 * (4 * A ** 3 + 27 * B ** 2)
    candidates = set()
    x = sympy.Symbol("x")

    def integer_roots(c0):
        poly = sympy.Poly(x ** 3 + A * x + c0, x)
        return [int(r) for r in sympy.polys.polyroots.roots(poly, filter="Z")]

    for r in integer_roots(B):
        candidates.add((r, 0))
    fac = sympy.factorint(abs(D))
    # Y^2 | D  <=>  Y | prod p^(e//2)
    half = 1
    for q, e in fac.items():
        half *= q ** (e // 2)
    for Y in sympy.divisors(half):
        for r in integer_roots(B - Y * Y):
            candidates.add((r, Y))
            candidates.add((r, -Y))
    pts = [INFINITY]
    for X, Y in candidates:
        xr = Fraction(X - 3 * E.b2, 36)
        yr = (Fraction(Y, 108) - E.a1 * xr - E.a3) / 2
        P = PointQ(xr, yr)
        if E.contains(P) and E.order(P) is not None:
            pts.append(P)
    return pts


def torsion_order(E: EllipticCurveQ) -> int:
    bound = torsion_bound(E)
    if bound == 1:
        return 1
    n = len(torsion_points(E))
    assert bound % n == 0, (bound, n)
    return n
