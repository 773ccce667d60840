"""Prime scans: regulator divisibility sets, the split-prime sieve and densities."""
from __future__ import annotations

import os
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from functools import cached_property
from fractions import Fraction
from math import prod
from typing import Iterable, Optional

import flint
import sympy

from .curve import CurveContext, EllipticCurveQ
from .heights import regulator
from .padic import PadicError
from .reduction import classify, minimal_model, tamagawa_numbers


class BadPrime(ValueError):
    """p divides the discriminant (or leading coefficient) of the field polynomial."""


@dataclass(frozen=True)
class NumberFieldSpec:
    """A monic irreducible f in Z[x]; closure_degree is [K~ : Q] for its Galois closure."""

    coefficients: tuple[int, ...]  # low degree first
    closure_degree: int

    @property
    def degree(self) -> int:
        return len(self.coefficients) - 1

    @cached_property
    def discriminant(self) -> int:
        x = sympy.Symbol("x")
        return int(sympy.discriminant(self.as_sympy(x), x))

    def as_sympy(self, x):
        return sum(c * x ** k for k, c in enumerate(self.coefficients))

    def __str__(self):
        x = sympy.Symbol("x")
        return str(self.as_sympy(x)).replace("**", "^")

    @classmethod
    def parse(cls, text: str, closure_degree: Optional[int] = None) -> "NumberFieldSpec":
        """Read e.g. "x^3-x-1".  Cubics get their closure degree from the discriminant."""
        x = sympy.Symbol("x")
        try:
            expr = sympy.sympify(text.replace("^", "**"), locals={"x": x})
            poly = sympy.Poly(expr, x)
        except (sympy.SympifyError, sympy.PolynomialError, TypeError, SyntaxError) as exc:
            raise ValueError(f"cannot read polynomial {text!r}") from exc
        if poly.degree() < 1:
            raise ValueError("field polynomial must have positive degree")
        coeffs = [int(c) for c in reversed(poly.all_coeffs())]
        if any(sympy.Integer(c) != poly.all_coeffs()[-1 - k] for k, c in enumerate(coeffs)):
            raise ValueError("coefficients must be integers")
        if coeffs[-1] != 1:
            raise ValueError("field polynomial must be monic")
        if not poly.is_irreducible:
            raise ValueError(f"{text} is reducible over Q")
        d = poly.degree()
        if closure_degree is None:
            if d <= 2:
                closure_degree = d
            elif d == 3:
                disc = int(sympy.discriminant(expr, x))
                closure_degree = 3 if disc > 0 and sympy.sqrt(disc).is_Integer else 6
            else:
                # caller should supply it; a Galois polynomial is assumed
                closure_degree = d
        return cls(tuple(coeffs), closure_degree)


RATIONALS = NumberFieldSpec((-1, 1), 1)


def is_completely_split(f: NumberFieldSpec, p: int) -> bool:
    """f splits into distinct linear factors mod p, i.e. x^p = x mod (f, p)."""
    if f.coefficients[-1] % p == 0 or f.discriminant % p == 0:
        raise BadPrime(f"{p} is ramified or divides the leading coefficient of {f}")
    if f.degree == 1:
        return True
    F = flint.nmod_poly(list(f.coefficients), p)
    x = flint.nmod_poly([0, 1], p)
    return x.pow_mod(p, F) == x


# -- regulator scans ------------------------------------------------------------


@dataclass(frozen=True)
class PrimeDiagnostic:
    p: int
    status: str  # "unit", "divisible", "nonintegral", "skipped", "error"
    detail: str = ""
    valuation: Optional[int] = None


@dataclass
class ScanResult:
    label: str
    bound: int
    primes: list[int]
    diagnostics: list[PrimeDiagnostic] = field(default_factory=list)

    @property
    def failures(self) -> list[PrimeDiagnostic]:
        return [d for d in self.diagnostics if d.status == "error"]


def _scan_one(args) -> PrimeDiagnostic:
    E, ctx, p, precision = args
    cls = classify(E, p)
    if not cls.good:
        return PrimeDiagnostic(p, "skipped", "bad reduction")
    if not cls.ordinary:
        return PrimeDiagnostic(p, "skipped", "supersingular")
    try:
        R = regulator(E, ctx, p, precision)
    except (PadicError, ArithmeticError, ValueError) as exc:
        return PrimeDiagnostic(p, "error", f"{type(exc).__name__}: {exc}")
    v = R.normalized.val
    if v == 0:
        return PrimeDiagnostic(p, "unit", valuation=0)
    if v > 0:
        return PrimeDiagnostic(p, "divisible", valuation=v)
    note = "anomalous prime" if cls.anomalous else ""
    return PrimeDiagnostic(p, "nonintegral", note, valuation=v)


def pi_scan(E: EllipticCurveQ, ctx: CurveContext, N: int, precision: int = 10,
            jobs: int = 1, low: int = 5) -> ScanResult:
    """Primes low <= p <= N of good ordinary reduction with p | R_p(E/Q).

    R_p may have negative valuation at anomalous primes; those are not
    divisible by p and are only reported in the diagnostics.
    """
    if ctx.rank < 1:
        raise ValueError("the scan needs rank >= 1")
    if N < 5:
        raise ValueError("N must be at least 5")
    primes = list(sympy.primerange(max(low, 5), N + 1))
    work = [(E, ctx, p, precision) for p in primes]
    if jobs > 1 and len(work) > 1:
        with ProcessPoolExecutor(max_workers=jobs) as pool:
            diags = list(pool.map(_scan_one, work))
    else:
        diags = [_scan_one(w) for w in work]
    diags.sort(key=lambda d: d.p)
    found = [d.p for d in diags if d.status == "divisible"]
    return ScanResult(ctx.label, N, found, diags)


def default_jobs() -> int:
    return max(1, os.cpu_count() or 1)


# -- sieve ----------------------------------------------------------------------


@dataclass(frozen=True)
class DensityReport:
    bound: int
    count: int
    prime_count: int
    frequency: Fraction
    predicted: Fraction

    @property
    def deviation(self) -> Optional[float]:
        if self.predicted == 0:
            return None
        return abs(float(self.frequency - self.predicted))


def density_report(primes: Iterable[int], N: int, predicted=0) -> DensityReport:
    """Raw frequency of a prime set among all primes <= N."""
    members = [q for q in primes if q <= N]
    total = int(sympy.primepi(N))
    freq = Fraction(len(members), total) if total else Fraction(0)
    return DensityReport(N, len(members), total, freq, Fraction(predicted))


def split_primes(f: NumberFieldSpec, N: int) -> list[int]:
    out = []
    for p in sympy.primerange(2, N + 1):
        try:
            if is_completely_split(f, p):
                out.append(p)
        except BadPrime:
            pass
    return out


@dataclass
class SieveReport:
    bound: int
    field: str
    sigma0: list[int]
    sigma1: list[int]
    sigma2: list[int]
    sigma3: list[int]
    sigma: list[int]
    empirical_density: Fraction
    predicted_density: Fraction
    caveats: list[str] = field(default_factory=list)

    def check(self) -> None:
        s0 = set(self.sigma0)
        for part in (self.sigma1, self.sigma2, self.sigma3):
            assert set(part) <= s0
        assert set(self.sigma) == s0 - set(self.sigma1) - set(self.sigma2) - set(self.sigma3)
        assert all(q <= self.bound for q in self.sigma0)


def sigma_sieve(E: EllipticCurveQ, ctx: CurveContext, K: NumberFieldSpec, N: int) -> SieveReport:
    """Good ordinary split primes with the anomalous, Tamagawa and Sha divisors removed."""
    if N < 5:
        raise ValueError("N must be at least 5")
    Emin, _ = minimal_model(E)
    caveats = []
    tam = dict(tamagawa_numbers(Emin))
    if ctx.tamagawa_overrides:
        tam.update(ctx.tamagawa_overrides)
    elif K.degree > 1:
        caveats.append("Tamagawa numbers over K replaced by c_l(E/Q)")
    tam_product = prod(tam.values())
    sigma0, sigma1 = [], []
    for p in sympy.primerange(3, N + 1):
        try:
            if not is_completely_split(K, p):
                continue
        except BadPrime:
            continue
        cls = classify(Emin, p)
        if not (cls.good and cls.ordinary):
            continue
        sigma0.append(p)
        if cls.anomalous:
            sigma1.append(p)
    sigma2 = [p for p in sigma0 if tam_product % p == 0]
    sigma3 = [p for p in sigma0 if ctx.sha_analytic_order % p == 0]
    caveats.append("Sha enters through its analytic order")
    removed = set(sigma1) | set(sigma2) | set(sigma3)
    sigma = [p for p in sigma0 if p not in removed]
    rep = SieveReport(N, str(K), sigma0, sigma1, sigma2, sigma3, sigma,
                      density_report(sigma, N).frequency, Fraction(1, K.closure_degree), caveats)
    rep.check()
    return rep
