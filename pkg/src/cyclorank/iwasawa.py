"""Power series over Z_p at finite precision, Weierstrass preparation, and the
Euler characteristic valuation that decides mu = 0 and lambda = rank.

A series is a truncation a_0 + a_1 T + ... + a_{D-1} T^(D-1) whose
coefficients are known modulo p^N (one absolute precision for the whole
series).  Internally coefficients are integers in [0, p^N).
"""
from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from typing import Iterable, Optional, Sequence

from .padic import PadicNumber, valuation

DEFAULT_TRUNCATION = 64
DEFAULT_PRECISION = 20


class PrecisionInsufficient(ArithmeticError):
    """The answer is not determined by the known digits / known terms."""


class NegativeValuation(ValueError):
    """The Euler characteristic inputs produce a non-integral leading term."""


def _val(n: int, p: int, cap: int) -> int:
    """Valuation of a residue mod p^cap (cap for zero)."""
    if n == 0:
        return cap
    v = 0
    while n % p == 0 and v < cap:
        n //= p
        v += 1
    return v


@dataclass(frozen=True)
class ZpPowerSeries:
    p: int
    residues: tuple[int, ...]  # coefficient of T^k modulo p^precision
    precision: int

    def __post_init__(self):
        mod = self.p ** self.precision
        object.__setattr__(self, "residues", tuple(c % mod for c in self.residues))

    @classmethod
    def from_rationals(cls, p: int, coeffs: Iterable, precision: int = DEFAULT_PRECISION,
                       truncation: Optional[int] = None) -> "ZpPowerSeries":
        mod = p ** precision
        out = []
        for c in coeffs:
            c = Fraction(c)
            if c.denominator % p == 0:
                raise ValueError(f"coefficient {c} is not p-integral")
            out.append(c.numerator * pow(c.denominator, -1, mod) % mod)
        if truncation is not None:
            out = (out + [0] * truncation)[:truncation]
        return cls(p, tuple(out), precision)

    @classmethod
    def polynomial(cls, p: int, coeffs: Sequence[int], precision: int,
                   truncation: int) -> "ZpPowerSeries":
        return cls.from_rationals(p, coeffs, precision, truncation)

    @property
    def truncation(self) -> int:
        return len(self.residues)

    @property
    def modulus(self) -> int:
        return self.p ** self.precision

    @property
    def coefficients(self) -> tuple[PadicNumber, ...]:
        return tuple(PadicNumber.from_int_mod(c, self.p, self.precision) for c in self.residues)

    def coefficient_valuation(self, k: int) -> int:
        return _val(self.residues[k], self.p, self.precision)

    def is_zero(self) -> bool:
        return not any(self.residues)

    def _like(self, residues) -> "ZpPowerSeries":
        return ZpPowerSeries(self.p, tuple(residues), self.precision)

    def _check(self, other: "ZpPowerSeries"):
        if other.p != self.p:
            raise ValueError("mismatched primes")

    def __add__(self, other: "ZpPowerSeries") -> "ZpPowerSeries":
        self._check(other)
        n = min(self.truncation, other.truncation)
        prec = min(self.precision, other.precision)
        return ZpPowerSeries(self.p, tuple(a + b for a, b in zip(self.residues[:n], other.residues[:n])), prec)

    def __neg__(self):
        return self._like(-c for c in self.residues)

    def __sub__(self, other):
        return self + (-other)

    def __mul__(self, other) -> "ZpPowerSeries":
        if isinstance(other, int):
            return self._like(c * other for c in self.residues)
        self._check(other)
        n = min(self.truncation, other.truncation)
        prec = min(self.precision, other.precision)
        return ZpPowerSeries(self.p, tuple(_mullow(self.residues, other.residues, n, self.p ** prec)), prec)

    __rmul__ = __mul__

    def inverse(self) -> "ZpPowerSeries":
        if self.residues[0] % self.p == 0:
            raise ZeroDivisionError("constant term is not a unit")
        return self._like(_invlow(self.residues, self.truncation, self.modulus))

    def __eq__(self, other):
        if not isinstance(other, ZpPowerSeries):
            return NotImplemented
        n = min(self.truncation, other.truncation)
        mod = self.p ** min(self.precision, other.precision)
        return all((a - b) % mod == 0 for a, b in zip(self.residues[:n], other.residues[:n]))

    def __hash__(self):
        return hash((self.p, self.residues, self.precision))

    def __repr__(self):
        terms = [f"{c}*T^{k}" for k, c in enumerate(self.residues) if c]
        return f"ZpPowerSeries(p={self.p}, {' + '.join(terms) or '0'} + O(T^{self.truncation}), mod p^{self.precision})"


def _mullow(a, b, n, mod):
    out = [0] * n
    for i, x in enumerate(a[:n]):
        if x:
            for j, y in enumerate(b[:n - i]):
                out[i + j] += x * y
    return [c % mod for c in out]


def _invlow(a, n, mod):
    inv0 = pow(a[0], -1, mod)
    out = [0] * n
    out[0] = inv0
    for k in range(1, n):
        s = sum(a[j] * out[k - j] for j in range(1, min(k, len(a) - 1) + 1))
        out[k] = -s * inv0 % mod
    return out


@dataclass(frozen=True)
class PreparationResult:
    mu: int
    lam: int
    distinguished: tuple[int, ...]  # monic, low degree first, entries mod p^precision
    unit_part: ZpPowerSeries

    @property
    def distinguished_padic(self) -> tuple[PadicNumber, ...]:
        u = self.unit_part
        return tuple(PadicNumber.from_int_mod(c, u.p, u.precision) for c in self.distinguished)


def mu_invariant(f: ZpPowerSeries) -> int:
    if f.is_zero():
        raise PrecisionInsufficient("series vanishes at working precision")
    return min(f.coefficient_valuation(k) for k in range(f.truncation))


def weierstrass_preparation(f: ZpPowerSeries) -> PreparationResult:
    """f = p^mu * P(T) * u(T) with P distinguished of degree lambda, u a unit.

    The truncation is read as a polynomial of degree < D, which is then
    factored by Hensel lifting g = T^lam * u_0 mod p.  The unit part has
    truncation D - lambda and everything holds modulo p^(N - mu).
    """
    p = f.p
    mu = mu_invariant(f)
    prec = f.precision - mu
    mod = p ** prec
    g = [(c // p ** mu) % mod for c in f.residues]
    lam = next((k for k, c in enumerate(g) if c % p), None)
    D = f.truncation
    if lam is None:
        raise PrecisionInsufficient("no unit coefficient below the truncation order")
    n = D - lam
    P = [0] * lam + [1]
    U = [c % p for c in g[lam:]]
    # b = U_0^-1 mod (p, T^lam) solves b U_0 = 1 mod T^lam
    b = _invlow(U, lam, p) if lam else []
    for k in range(1, prec):
        pk = p ** k
        PU = _mullow(P + [0] * n, U + [0] * lam, D, mod)
        r = [(x - y) % mod for x, y in zip(g, PU)]
        if any(c % pk for c in r):
            raise AssertionError("Hensel step lost divisibility")
        e = [(c // pk) % p for c in r]
        # dP U_0 + dU T^lam = e  (mod p),  deg dP < lam
        dP = _mullow(e[:lam], b, lam, p) if lam else []
        dPU = _mullow(dP + [0] * n, U + [0] * lam, D, p)
        dU = [(x - y) % p for x, y in zip(e[lam:], dPU[lam:])]
        P = [(c + pk * d) % mod for c, d in zip(P, dP + [0])]
        U = [(c + pk * d) % mod for c, d in zip(U, dU)]
    u = ZpPowerSeries(p, tuple(U), prec)
    return PreparationResult(mu, lam, tuple(P), u)


def reconstruct(result: PreparationResult, p: int) -> ZpPowerSeries:
    """p^mu P u, for round-trip checks (precision N - mu, truncation of u)."""
    u = result.unit_part
    Ppoly = ZpPowerSeries(p, tuple(result.distinguished) + (0,) * u.truncation, u.precision)
    prod = Ppoly * u
    full_prec = u.precision + result.mu
    return ZpPowerSeries(p, tuple(c * p ** result.mu for c in prod.residues), full_prec)


def ord_at_zero(f: ZpPowerSeries) -> int:
    for k, c in enumerate(f.residues):
        if c:
            return k
    raise PrecisionInsufficient("series vanishes at working precision")


def leading_coefficient(f: ZpPowerSeries) -> PadicNumber:
    return PadicNumber.from_int_mod(f.residues[ord_at_zero(f)], f.p, f.precision)


# -- Euler characteristic -------------------------------------------------------


def euler_char_valuation(rank: int, val_Rp: int, sha_order: int, tamagawa_list: Sequence[int],
                         counts_at_p, torsion_order: int, p: int) -> int:
    """val_p of R_p * #Sha[p^oo] * prod c_v * (prod #E~(F_v)[p^oo])^2 / #E(K)[p^oo]^2."""
    if rank < 0:
        raise ValueError("rank must be nonnegative")
    if val_Rp < 0:
        raise NegativeValuation(f"regulator valuation {val_Rp} < 0")
    if isinstance(counts_at_p, int):
        counts_at_p = [counts_at_p]
    for n in (sha_order, torsion_order, *tamagawa_list, *counts_at_p):
        if n <= 0:
            raise ValueError("orders and Tamagawa numbers must be positive")
    v = (val_Rp + valuation(sha_order, p)
         + sum(valuation(c, p) for c in tamagawa_list)
         + 2 * sum(valuation(n, p) for n in counts_at_p)
         - 2 * valuation(torsion_order, p))
    if v < 0:
        raise NegativeValuation(f"leading coefficient valuation {v} < 0")
    return v


@dataclass(frozen=True)
class LambdaVerdict:
    conclusive: bool
    mu: Optional[int] = None
    lam: Optional[int] = None

    def __str__(self):
        if not self.conclusive:
            return "inconclusive"
        return f"mu={self.mu}, lambda={self.lam}"


def lambda_verdict(val_ar: int, rank: int) -> LambdaVerdict:
    """a_r a unit iff mu = 0 and lambda = r; otherwise nothing separates the cases."""
    if val_ar < 0 or rank < 0:
        raise ValueError("valuation and rank must be nonnegative")
    if val_ar == 0:
        return LambdaVerdict(True, 0, rank)
    return LambdaVerdict(False)
