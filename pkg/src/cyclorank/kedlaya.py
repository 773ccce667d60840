"""Frobenius on H^1 of y^2 = Q(x) (Q a monic cubic) by Kedlaya's algorithm.

The Frobenius lift is x -> x^p, y -> y^p (1 + E(x)/y^(2p))^(1/2) with
E = Q(x^p) - Q(x)^p.  Differentials A(x) dx / y^s are reduced to the basis
dx/y, x dx/y in Monsky-Washnitzer cohomology.

Arithmetic is fixed point: a coefficient X stands for X / p^shift and is
kept modulo p^digits.  Polynomial arithmetic is delegated to FLINT.
"""
from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction

import flint

from .padic import PadicNumber, PrecisionExhausted


def _digits_for(n: int, p: int) -> int:
    """Smallest g with p^g > n."""
    g = 0
    while p ** g <= n:
        g += 1
    return g


@dataclass(frozen=True)
class FrobeniusMatrix:
    """Matrix of Frobenius on (dx/y, x dx/y); column j is the image of basis vector j."""

    p: int
    entries: tuple[tuple[PadicNumber, PadicNumber], tuple[PadicNumber, PadicNumber]]
    precision: int

    def trace(self) -> PadicNumber:
        return self.entries[0][0] + self.entries[1][1]

    def det(self) -> PadicNumber:
        m = self.entries
        return m[0][0] * m[1][1] - m[0][1] * m[1][0]


class _Fixed:
    """Fixed-point p-adic coefficient helpers for one (p, digits, shift)."""

    def __init__(self, p: int, digits: int, shift: int):
        self.p = p
        self.digits = digits
        self.shift = shift
        self.mod = p ** digits
        self.ctx = flint.fmpz_mod_poly_ctx(flint.fmpz_mod_ctx(self.mod))

    def poly(self, coeffs):
        return self.ctx([c % self.mod for c in coeffs])

    def coeffs(self, f) -> list[int]:
        return [int(c) for c in f.coeffs()]

    def divide(self, X: int, c: int) -> int:
        """X / c for a nonzero integer c, in fixed point."""
        p = self.p
        v = 0
        while c % p == 0:
            c //= p
            v += 1
        X %= self.mod
        if v:
            if X % p ** v:
                raise PrecisionExhausted("fixed-point shift too small for Kedlaya reduction")
            X //= p ** v
        return X * pow(c, -1, self.mod) % self.mod


def _binom_minus_half(k: int) -> Fraction:
    # binomial(-1/2, k) = (-1)^k (2k choose k) / 4^k
    from math import comb
    return Fraction((-1) ** k * comb(2 * k, k), 4 ** k)


def frobenius_matrix(Q: tuple[int, int, int], p: int, precision: int) -> FrobeniusMatrix:
    """Frobenius matrix for y^2 = x^3 + A x^2 + B x + C, to ``precision`` absolute digits.

    ``Q = (A, B, C)`` are p-integral rationals.
    Requires p >= 5 and Q squarefree mod p.
    """
    if p < 5:
        raise ValueError("Kedlaya's algorithm here needs p >= 5")
    N = precision
    nterms = N + _digits_for(2 * (N + 4) * p, p) + 1
    top_level = p * (2 * nterms - 1)
    guard = _digits_for(3 * top_level + 3, p) + 1
    F = _Fixed(p, N + 2 * guard + 1, guard)
    mod = F.mod

    def frac_mod(c):
        c = Fraction(c)
        if c.denominator % p == 0:
            raise ValueError("cubic is not p-integral")
        return c.numerator * pow(c.denominator, -1, mod) % mod

    A, B, C = (frac_mod(c) for c in Q)
    Qq = flint.fmpq_poly([flint.fmpq(Fraction(c).numerator, Fraction(c).denominator)
                          for c in (Q[2], Q[1], Q[0], 1)])
    Qp = F.poly([C, B, A, 1])
    dQp = F.poly([B, 2 * A, 3])
    # 1 = alpha Q + beta Q' (resultant is a unit at a good prime)
    dQq = Qq.derivative()
    g, s, t = flint.fmpq_poly.xgcd(Qq, dQq)
    if g.degree() != 0:
        raise ValueError("Q is not squarefree")
    s, t = s / g, t / g

    def to_mod(f):
        out = []
        for c in f.coeffs():
            c = Fraction(int(c.p), int(c.q))
            if c.denominator % p == 0:
                raise ValueError("bad reduction at p")
            out.append(c.numerator * pow(c.denominator, -1, mod) % mod)
        return F.poly(out)

    alpha, beta = to_mod(s), to_mod(t)
    # basis r in {1, x, x^2}:  r = u_r Q + v_r Q'  with deg v_r <= 2
    uv = []
    for i in range(3):
        r = F.poly([0] * i + [1])
        rb = r * beta
        q, v = divmod(rb, Qp)
        u = r * alpha + q * dQp
        uv.append((u, v))

    xp = F.poly([0] * p + [1])
    Qxp = xp * xp * xp + F.poly([A]) * xp * xp + F.poly([B]) * xp + F.poly([C])
    E = Qxp - Qp ** p

    scale = p ** (F.shift + 1)  # the factor p from d(x^p), in fixed point
    acc = [F.poly([0]), F.poly([0])]
    Ek = F.poly([1])
    terms = {}
    for k in range(nterms):
        bk = _binom_minus_half(k)
        c = bk.numerator * pow(bk.denominator, -1, mod) * scale % mod
        terms[p * (2 * k + 1)] = [Ek * F.poly([0] * (p * (i + 1) - 1) + [c]) for i in (0, 1)]
        Ek = Ek * E

    level = top_level
    while level >= 3:
        if level in terms:
            for i in (0, 1):
                acc[i] = acc[i] + terms[level][i]
        for i in (0, 1):
            a = acc[i]
            if a.is_zero():
                continue
            q, r = divmod(a, Qp)
            rc = F.coeffs(r) + [0, 0, 0]
            U = q
            V = F.poly([0])
            for j in range(3):
                if rc[j]:
                    U = U + uv[j][0] * rc[j]
                    V = V + uv[j][1] * rc[j]
            vc = F.coeffs(V) + [0, 0, 0]
            dv = [F.divide(2 * vc[1], level - 2), F.divide(4 * vc[2], level - 2)]
            acc[i] = U + F.poly(dv)
        level -= 2
    if 1 in terms:  # only when nterms covers level 1 (never for p >= 3)
        raise AssertionError("unexpected level-1 term")

    # level 1: x^(m+2) dx/y  ==  -(m x^(m-1) Q + x^m Q'/2 - (m + 3/2) x^(m+2)) / (m + 3/2)
    qc = [C % mod, B % mod, A % mod, 1]
    dqc = [B % mod, 2 * A % mod, 3]
    cols = []
    for i in (0, 1):
        a = F.coeffs(acc[i])
        a = a + [0] * max(0, 2 - len(a))
        for D in range(len(a) - 1, 1, -1):
            cD = a[D] % mod
            if not cD:
                continue
            m = D - 2
            # relation R = 2 m x^(m-1) Q + x^m Q' is exact and has leading coefficient 2m+3
            k = F.divide(cD, 2 * m + 3)
            a[D] = 0
            for j, qj in enumerate(qc):
                if m >= 1 and j + m - 1 < D:
                    a[j + m - 1] = (a[j + m - 1] - k * 2 * m * qj) % mod
            for j, qj in enumerate(dqc):
                if j + m < D:
                    a[j + m] = (a[j + m] - k * qj) % mod
        cols.append((a[0], a[1]))

    out_prec = N
    def entry(X):
        X %= mod
        return PadicNumber.from_int_mod(X, p, F.digits).__truediv__(
            PadicNumber.from_rational(p ** F.shift, p, F.digits + 5)).with_precision(out_prec)

    M = ((entry(cols[0][0]), entry(cols[1][0])),
         (entry(cols[0][1]), entry(cols[1][1])))
    return FrobeniusMatrix(p, M, out_prec)
