"""Minimal models, Tate's algorithm, point counting and prime classification."""
from __future__ import annotations

import random
from dataclasses import dataclass
from enum import Enum
from math import gcd, isqrt
from typing import Optional

import sympy

from .curve import EllipticCurveQ, PointFp
from .padic import valuation as _valuation


def valuation(n: int, p: int) -> int:
    """v_p(n), with v_p(0) treated as infinite."""
    return 10 ** 9 if n == 0 else _valuation(n, p)


class BadReduction(ValueError):
    pass


class ReductionKind(str, Enum):
    GOOD = "good"
    SPLIT = "multiplicative_split"
    NONSPLIT = "multiplicative_nonsplit"
    ADDITIVE = "additive"


@dataclass(frozen=True)
class LocalData:
    p: int
    kind: ReductionKind
    kodaira: str
    tamagawa: int
    conductor_exponent: int
    count: Optional[int] = None
    a_p: Optional[int] = None
    is_ordinary: Optional[bool] = None
    is_anomalous: Optional[bool] = None

    @property
    def is_good(self) -> bool:
        return self.kind is ReductionKind.GOOD


@dataclass(frozen=True)
class Transformation:
    """(u, r, s, t) with x = u^2 x' + r, y = u^3 y' + s u^2 x' + t."""

    u: int
    r: int
    s: int
    t: int


def rst_transform(ainvs, r: int, s: int, t: int) -> tuple[int, ...]:
    """Coefficients after x -> x + r, y -> y + s x + t (u = 1)."""
    a1, a2, a3, a4, a6 = ainvs
    return (
        a1 + 2 * s,
        a2 - s * a1 + 3 * r - s * s,
        a3 + r * a1 + 2 * t,
        a4 - s * a3 + 2 * r * a2 - (t + r * s) * a1 + 3 * r * r - 2 * s * t,
        a6 + r * a4 + r * r * a2 + r ** 3 - t * a3 - t * t - r * t * a1,
    )


def apply_transformation(ainvs, T: Transformation) -> tuple[int, ...]:
    """Model E' obtained from E by the change of variables T (exact division by u)."""
    u, r, s, t = T.u, T.r, T.s, T.t
    b = rst_transform(ainvs, r, s, t)
    out = []
    for a, w in zip(b, (1, 2, 3, 4, 6)):
        q, rem = divmod(a, u ** w)
        if rem:
            raise ValueError("transformation does not give an integral model")
        out.append(q)
    return tuple(out)


def _model_from_c4c6(c4: int, c6: int) -> tuple[int, ...]:
    b2 = (-c6) % 12
    if b2 > 6:
        b2 -= 12
    b4 = (b2 * b2 - c4) // 24
    b6 = (-b2 ** 3 + 36 * b2 * b4 - c6) // 216
    a1 = b2 % 2
    a2 = (b2 - a1) // 4
    a3 = b6 % 2
    a4 = (b4 - a1 * a3) // 2
    a6 = (b6 - a3) // 4
    return (a1, a2, a3, a4, a6)


def minimal_model(E: EllipticCurveQ) -> tuple[EllipticCurveQ, Transformation]:
    """Global minimal model in reduced form (a1, a3 in {0,1}, a2 in {-1,0,1})."""
    c4, c6, disc = E.c4, E.c6, E.disc
    g = gcd(c6 * c6, disc)
    u = 1
    for q in sympy.factorint(g):
        d = valuation(g, q) // 12
        if q == 2 and d > 0:
            a = (c4 >> (4 * d)) % 16
            b = (c6 >> (6 * d)) % 32
            if b % 4 != 3 and not (a == 0 and b in (0, 8)):
                d -= 1
        elif q == 3 and d > 0:
            if valuation(c6, 3) == 6 * d + 2:
                d -= 1
        u *= q ** d
    ainvs = _model_from_c4c6(c4 // u ** 4, c6 // u ** 6)
    Emin = EllipticCurveQ(*ainvs)
    a1, a2, a3 = E.a1, E.a2, E.a3
    s = (u * Emin.a1 - a1) // 2
    r = (u * u * Emin.a2 - a2 + s * a1 + s * s) // 3
    t = (u ** 3 * Emin.a3 - a3 - r * a1) // 2
    T = Transformation(u, r, s, t)
    assert apply_transformation(E.ainvs, T) == ainvs
    return Emin, T


def bad_primes(E: EllipticCurveQ) -> list[int]:
    Emin, _ = minimal_model(E)
    return sorted(sympy.factorint(abs(Emin.disc)))


# -- Tate's algorithm -------------------------------------------------------

def _quad_has_root(a: int, b: int, c: int, p: int) -> bool:
    a, b, c = a % p, b % p, c % p
    if a == 0:
        return b != 0 or c == 0
    if p == 2:
        return any((a * x * x + b * x + c) % 2 == 0 for x in (0, 1))
    d = (b * b - 4 * a * c) % p
    return d == 0 or pow(d, (p - 1) // 2, p) == 1


def _cubic_root_count(b: int, c: int, d: int, p: int) -> int:
    x = sympy.Symbol("x")
    poly = sympy.Poly(x ** 3 + b * x * x + c * x + d, x, modulus=p)
    return len(poly.ground_roots())


def _kodaira_tate(ainvs, p: int) -> tuple[str, int, int, ReductionKind]:
    """(Kodaira symbol, conductor exponent, Tamagawa number, kind) at p."""
    half = pow(2, -1, p) if p != 2 else None
    a1, a2, a3, a4, a6 = ainvs
    while True:
        C = EllipticCurveQ(a1, a2, a3, a4, a6)
        b2, b6, b8, c4, c6 = C.b2, C.b6, C.b8, C.c4, C.c6
        vd = valuation(C.disc, p)
        if vd == 0:
            return "I0", 0, 1, ReductionKind.GOOD
        # move the singular point to (0, 0)
        if p == 2:
            if b2 % 2 == 0:
                r = a4 % 2
                t = (r * (1 + a2 + a4) + a6) % 2
            else:
                r = a3 % 2
                t = (r + a4) % 2
        elif p == 3:
            r = (-b6) % 3 if b2 % 3 == 0 else (-b2 * C.b4) % 3
            t = (a1 * r + a3) % 3
        else:
            if c4 % p == 0:
                r = -b2 * pow(12, -1, p) % p
            else:
                r = -(c6 + b2 * c4) * pow(12 * c4, -1, p) % p
            t = -(a1 * r + a3) * half % p
        a1, a2, a3, a4, a6 = rst_transform((a1, a2, a3, a4, a6), r, 0, t)
        C = EllipticCurveQ(a1, a2, a3, a4, a6)
        b6, b8 = C.b6, C.b8

        if c4 % p:
            if _quad_has_root(1, a1, -a2, p):
                return f"I{vd}", 1, vd, ReductionKind.SPLIT
            return f"I{vd}", 1, (2 if vd % 2 == 0 else 1), ReductionKind.NONSPLIT
        if valuation(a6, p) < 2:
            return "II", vd, 1, ReductionKind.ADDITIVE
        if valuation(b8, p) < 3:
            return "III", vd - 1, 2, ReductionKind.ADDITIVE
        if valuation(b6, p) < 3:
            cp = 3 if _quad_has_root(1, a3 // p, -(a6 // p ** 2), p) else 1
            return "IV", vd - 2, cp, ReductionKind.ADDITIVE

        # arrange p | a1, a2; p^2 | a3, a4; p^3 | a6
        if p == 2:
            s = a2 % 2
            t = 2 * ((a6 // 4) % 2)
        else:
            s = -a1 * half % p
            t = -a3 * pow(2, -1, p * p) % (p * p)
        a1, a2, a3, a4, a6 = rst_transform((a1, a2, a3, a4, a6), 0, s, t)

        b = a2 // p
        c = a4 // p ** 2
        d = a6 // p ** 3
        w = 27 * d * d - b * b * c * c + 4 * b ** 3 * d - 18 * b * c * d + 4 * c ** 3
        x = 3 * c - b * b
        if w % p:
            cp = 1 + _cubic_root_count(b, c, d, p)
            return "I0*", vd - 4, cp, ReductionKind.ADDITIVE
        if x % p:
            # double root: move it to 0
            if p == 2:
                r = c
            elif p == 3:
                r = b * c
            else:
                r = (b * c - 9 * d) * pow(2 * x, -1, p)
            r = p * (r % p)
            a1, a2, a3, a4, a6 = rst_transform((a1, a2, a3, a4, a6), r, 0, 0)
            ix = iy = 3
            mx = my = p * p
            while True:
                a2t = a2 // p
                a3t = a3 // my
                a4t = a4 // p // mx
                a6t = a6 // mx // my
                if (a3t * a3t + 4 * a6t) % p:
                    cp = 4 if _quad_has_root(1, a3t, -a6t, p) else 2
                    break
                t = my * a6t if p == 2 else my * (-a3t * half % p)
                a1, a2, a3, a4, a6 = rst_transform((a1, a2, a3, a4, a6), 0, 0, t)
                my *= p
                iy += 1
                a2t = a2 // p
                a3t = a3 // my
                a4t = a4 // p // mx
                a6t = a6 // mx // my
                if (a4t * a4t - 4 * a6t * a2t) % p:
                    cp = 4 if _quad_has_root(a2t, a4t, a6t, p) else 2
                    break
                if p == 2:
                    r = mx * ((a6t * a2t) % 2)
                else:
                    r = mx * (-a4t * pow(2 * a2t, -1, p) % p)
                a1, a2, a3, a4, a6 = rst_transform((a1, a2, a3, a4, a6), r, 0, 0)
                mx *= p
                ix += 1
            m = ix + iy - 5
            return f"I{m}*", vd - ix - iy + 1, cp, ReductionKind.ADDITIVE
        # triple root: move it to 0
        if p == 2:
            r = b
        elif p == 3:
            r = -d  # (x - a)^3 = x^3 - a mod 3
        else:
            r = -b * pow(3, -1, p)
        r = p * (r % p)
        a1, a2, a3, a4, a6 = rst_transform((a1, a2, a3, a4, a6), r, 0, 0)
        a3t = a3 // p ** 2
        a6t = a6 // p ** 4
        if (a3t * a3t + 4 * a6t) % p:
            cp = 3 if _quad_has_root(1, a3t, -a6t, p) else 1
            return "IV*", vd - 6, cp, ReductionKind.ADDITIVE
        t = -p * p * a6t if p == 2 else p * p * (-a3t * half % p)
        a1, a2, a3, a4, a6 = rst_transform((a1, a2, a3, a4, a6), 0, 0, t)
        if valuation(a4, p) < 4:
            return "III*", vd - 7, 2, ReductionKind.ADDITIVE
        if valuation(a6, p) < 6:
            return "II*", vd - 8, 1, ReductionKind.ADDITIVE
        # not minimal at p: scale down and start again
        a1, a2, a3, a4, a6 = a1 // p, a2 // p ** 2, a3 // p ** 3, a4 // p ** 4, a6 // p ** 6


def tate_local(E: EllipticCurveQ, p: int) -> LocalData:
    """Local reduction data of E at the prime p (the model is minimalised first)."""
    Emin, _ = minimal_model(E)
    kodaira, f, cp, kind = _kodaira_tate(Emin.ainvs, p)
    if kind is not ReductionKind.GOOD:
        return LocalData(p, kind, kodaira, cp, f)
    n = count_points(Emin, p)
    ap = p + 1 - n
    return LocalData(p, kind, kodaira, 1, 0, count=n, a_p=ap,
                     is_ordinary=ap % p != 0, is_anomalous=n % p == 0)


def conductor(E: EllipticCurveQ) -> int:
    N = 1
    Emin, _ = minimal_model(E)
    for q in sympy.factorint(abs(Emin.disc)):
        N *= q ** _kodaira_tate(Emin.ainvs, q)[1]
    return N


def tamagawa_numbers(E: EllipticCurveQ) -> dict[int, int]:
    Emin, _ = minimal_model(E)
    return {q: _kodaira_tate(Emin.ainvs, q)[2] for q in bad_primes(Emin)}


# -- point counting -----------------------------------------------------------

BRUTE_FORCE_LIMIT = 1 << 12


def _count_brute(E: EllipticCurveQ, p: int) -> int:
    a1, a2, a3, a4, a6 = (a % p for a in E.ainvs)
    if p == 2:
        n = 1
        for x in range(2):
            for y in range(2):
                if (y * y + a1 * x * y + a3 * y - x ** 3 - a2 * x * x - a4 * x - a6) % 2 == 0:
                    n += 1
        return n
    # y^2 + (a1 x + a3) y = f(x)  <=>  (2y + a1 x + a3)^2 = 4 f(x) + (a1 x + a3)^2
    e = (p - 1) // 2
    b2, b4, b6 = E.b2 % p, E.b4 % p, E.b6 % p
    n = 1 + p
    for x in range(p):
        d = (((4 * x + b2) * x + 2 * b4) * x + b6) % p
        if d:
            n += 1 if pow(d, e, p) == 1 else -1
    return n


def _random_point(E: EllipticCurveQ, p: int, rng: random.Random) -> PointFp:
    b2, b4, b6 = E.b2 % p, E.b4 % p, E.b6 % p
    inv2 = pow(2, -1, p)
    while True:
        x = rng.randrange(p)
        d = (((4 * x + b2) * x + 2 * b4) * x + b6) % p
        if d == 0:
            w = 0
        elif pow(d, (p - 1) // 2, p) == 1:
            w = sympy.sqrt_mod(d, p)
        else:
            continue
        y = (w - E.a1 * x - E.a3) * inv2 % p
        return PointFp(p, x, y)


def _order_divides(E, P, n):
    return E.mul_mod(n, P).is_zero


def _point_order(E, P, multiple: int) -> int:
    n = multiple
    for q, e in sympy.factorint(multiple).items():
        for _ in range(e):
            if n % q == 0 and _order_divides(E, P, n // q):
                n //= q
            else:
                break
    return n


def _key(P: PointFp):
    return (P.x, P.y) if not P.is_zero else None


def _bsgs_multiples(E, P, lo: int, hi: int) -> list[int]:
    """All m in [lo, hi] with m P = O."""
    width = hi - lo
    m = isqrt(width) + 1
    baby = {}
    R = PointFp(P.p, None, None)
    for j in range(m):
        baby.setdefault(_key(R), []).append(j)
        R = E.add_mod(R, P)
    giant = E.neg_mod(E.mul_mod(m, P))
    # want lo + i*m + j with (lo + i m) P + j P = O  <=>  j P = -(lo + i m) P
    cur = E.neg_mod(E.mul_mod(lo, P))
    out = []
    for i in range(m + 1):
        for j in baby.get(_key(cur), ()):
            k = lo + i * m + j
            if k <= hi:
                out.append(k)
        cur = E.add_mod(cur, giant)
    return sorted(set(out))


def _count_bsgs(E: EllipticCurveQ, p: int, seed: int = 0) -> int:
    rng = random.Random(seed * 1_000_003 + p)
    s = 2 * isqrt(p) + 2
    lo, hi = p + 1 - s, p + 1 + s
    lo = max(lo, 1)
    L = 1
    for _ in range(60):
        P = _random_point(E, p, rng)
        if P.is_zero:
            continue
        cands = _bsgs_multiples(E, P, lo, hi)
        order = _point_order(E, P, cands[0])
        L = L * order // gcd(L, order)
        fits = [n for n in range(lo - lo % L + (L if lo % L else 0), hi + 1, L)
                if abs(p + 1 - n) ** 2 <= 4 * p]
        if len(fits) == 1:
            return fits[0]
    return _count_brute(E, p)


def count_points(E: EllipticCurveQ, p: int) -> int:
    """#E~(F_p) including the point at infinity; E must have good reduction at p."""
    Emin, _ = minimal_model(E)
    if Emin.disc % p == 0:
        raise BadReduction(f"{Emin.ainvs} has bad reduction at {p}")
    if p < BRUTE_FORCE_LIMIT:
        return _count_brute(Emin, p)
    return _count_bsgs(Emin, p)


@dataclass(frozen=True)
class PrimeClass:
    good: bool
    ordinary: bool
    anomalous: bool
    a_p: Optional[int] = None
    count: Optional[int] = None


def classify(E: EllipticCurveQ, p: int) -> PrimeClass:
    if p == 2:
        raise ValueError("classify is for odd primes")
    Emin, _ = minimal_model(E)
    if Emin.disc % p == 0:
        return PrimeClass(False, False, False)
    n = count_points(Emin, p)
    ap = p + 1 - n
    return PrimeClass(True, ap % p != 0, n % p == 0, ap, n)
