"""Cyclotomic p-adic heights and regulators over Q for good ordinary p >= 5.

The height of a point P is computed from a multiple Q = mP that lies in
the kernel of reduction at p and in the identity component everywhere:

    h_p(P) = log_p(sigma_p(t(Q)) / d(Q)) / m^2

with t = -x/y the formal group parameter, d the square root of the
denominator of x(Q) and log_p the Iwasawa logarithm (log_p(p) = 0).
There is no extra 1/p: with this scaling the regulator of a rank r curve
has valuation at least r, and R_p = p^-r det is the quantity whose unit-ness
is tested.  sigma_p is the canonical p-adic sigma function, pinned down by the value
E2(E, omega) read off the unit root subspace of Frobenius.

Q is never written down over Q.  t(Q) and d(Q) are obtained p-adically
from division polynomials evaluated at a fixed multiple of P.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from functools import lru_cache
from math import lcm

from .curve import EllipticCurveQ, PointQ, CurveContext
from .kedlaya import frobenius_matrix
from .padic import PadicNumber, PrecisionExhausted, iwasawa_log
from .reduction import classify, minimal_model, tamagawa_numbers

DEFAULT_PRECISION = 20


class SupersingularPrime(ValueError):
    """No unit root subspace: p is supersingular (or bad) for E."""


class TorsionPoint(ValueError):
    pass


class RankZero(ValueError):
    pass


@dataclass(frozen=True)
class E2Value:
    p: int
    value: PadicNumber
    provenance: str  # "computed" or "fixture"
    trace_check: bool | None = None


@dataclass(frozen=True)
class SigmaSeries:
    """sigma_p(t) = t + c_2 t^2 + ... truncated at t^order (exclusive)."""

    p: int
    coefficients: tuple[PadicNumber, ...]  # index k holds the coefficient of t^k
    order: int

    def __call__(self, t: PadicNumber) -> PadicNumber:
        if t.valuation() < 1:
            raise ValueError("sigma is evaluated on the formal group only")
        acc = PadicNumber.zero(self.p, t.val * self.order)
        for c in reversed(self.coefficients[1:]):
            acc = (acc + c) * t
        return acc


@dataclass
class RegulatorResult:
    p: int
    pairing_matrix: list[list[PadicNumber]]
    regulator: PadicNumber
    normalized: PadicNumber
    is_unit: bool
    caveats: list[str] = field(default_factory=list)


def _check_prime(E: EllipticCurveQ, p: int):
    cls = classify(E, p)
    if not cls.good or not cls.ordinary:
        raise SupersingularPrime(f"p = {p} is not a good ordinary prime for {E.ainvs}")
    if p < 5:
        raise ValueError("heights are only computed for p >= 5")
    return cls


# -- formal group -------------------------------------------------------------


def _mul(f, g, n):
    out = [0] * n
    for i, a in enumerate(f[:n]):
        if a:
            for j, b in enumerate(g[:n - i]):
                out[i + j] += a * b
    return out


def _inv(f, n):
    """1/f for a power series with f[0] invertible."""
    c0 = Fraction(f[0])
    out = [Fraction(0)] * n
    out[0] = 1 / c0
    for k in range(1, n):
        s = sum(f[j] * out[k - j] for j in range(1, min(k, len(f) - 1) + 1))
        out[k] = -s / c0
    return out


@lru_cache(maxsize=256)
def formal_group(ainvs: tuple[int, ...], n: int):
    """(u, omega) with w(t) = t^3 u(t) and omega = omega(t) dt, both mod t^n.

    x = t^-2 / u, y = -t^-3 / u; all coefficients are integers.
    """
    a1, a2, a3, a4, a6 = ainvs
    # w = t^3 + a1 t w + a2 t^2 w + a3 w^2 + a4 t w^2 + a6 w^3, in terms of u = w/t^3
    u = [1] + [0] * (n - 1)
    for _ in range(n):
        u2 = _mul(u, u, n)
        u3 = _mul(u2, u, n)
        new = [0] * n
        new[0] = 1
        for k in range(n):
            if k + 1 < n:
                new[k + 1] += a1 * u[k]
            if k + 2 < n:
                new[k + 2] += a2 * u[k]
            if k + 3 < n:
                new[k + 3] += a3 * u2[k]
            if k + 4 < n:
                new[k + 4] += a4 * u2[k]
            if k + 6 < n:
                new[k + 6] += a6 * u3[k]
        if new == u:
            break
        u = new
    X = [int(c) for c in _inv(u, n)]  # t^2 x
    # omega = dx / (2y + a1 x + a3) = (t X' - 2X) / (-2X + a1 t X + a3 t^3)
    num = [(k - 2) * X[k] for k in range(n)]
    den = [-2 * X[k] + (a1 * X[k - 1] if k >= 1 else 0) + (a3 if k == 3 else 0)
           for k in range(n)]
    omega = _inv(den, n)
    omega = _mul(num, omega, n)
    assert all(Fraction(c).denominator == 1 for c in omega)
    return tuple(u), tuple(int(c) for c in omega)


def weierstrass_p_coefficients(E: EllipticCurveQ, count: int) -> list[Fraction]:
    """c_2, c_3, ... with wp(z) = z^-2 + sum_{m>=2} c_m z^(2m-2); index m."""
    g2 = Fraction(E.c4, 12)
    g3 = Fraction(E.c6, 216)
    c = [Fraction(0)] * max(count, 4)
    c[2] = g2 / 20
    c[3] = g3 / 28
    for m in range(4, count):
        s = sum(c[k] * c[m - k] for k in range(2, m - 1))
        c[m] = Fraction(3, (2 * m + 1) * (m - 3)) * s
    return c[:count]


def _sigma_rational(E: EllipticCurveQ, e2: Fraction, n: int) -> list[Fraction]:
    """Coefficients of sigma(t) mod t^n for a rational stand-in of E2."""
    _, omega = formal_group(E.ainvs, n)
    z = [Fraction(0)] + [Fraction(omega[k], k + 1) for k in range(n - 1)]
    cm = weierstrass_p_coefficients(E, n // 2 + 2)
    # g(z) = E2 z^2/24 - sum c_m z^(2m) / ((2m-1) 2m)
    z2 = _mul(z, z, n)
    g = [e2 / 24 * a for a in z2]
    zpow = z2
    for m in range(2, n // 2 + 1):
        zpow = _mul(zpow, z2, n)
        coef = cm[m] / ((2 * m - 1) * 2 * m)
        if coef:
            g = [a - coef * b for a, b in zip(g, zpow)]
    # exp(g) with g(0) = 0
    ex = [Fraction(0)] * n
    ex[0] = Fraction(1)
    for k in range(1, n):
        ex[k] = sum(j * g[j] * ex[k - j] for j in range(1, k + 1)) / k
    return _mul(z, ex, n)


def _frac_to_padic(x: Fraction, p: int, absprec: int) -> PadicNumber:
    if x == 0:
        return PadicNumber.zero(p, absprec)
    v = PadicNumber.from_rational(x, p, 1).val
    if absprec <= v:
        return PadicNumber.zero(p, absprec)
    return PadicNumber.from_rational(x, p, absprec - v)


# -- E2 -----------------------------------------------------------------------


def compute_e2(E: EllipticCurveQ, p: int, precision: int = DEFAULT_PRECISION) -> E2Value:
    """E2(E, omega) for the minimal model of E, from the unit root of Frobenius."""
    Emin, _ = minimal_model(E)
    cls = _check_prime(Emin, p)
    work = precision + 2
    Q = (Fraction(Emin.b2, 4), Fraction(Emin.b4, 2), Fraction(Emin.b6, 4))
    M = frobenius_matrix(Q, p, work)
    trace_ok = M.trace() == cls.a_p
    # iterate Frobenius: the non-unit eigenvalue dies off
    m = M.entries
    v = [PadicNumber.from_rational(0, p, work), PadicNumber.from_rational(1, p, work)]
    for _ in range(work + 1):
        v = [m[0][0] * v[0] + m[0][1] * v[1], m[1][0] * v[0] + m[1][1] * v[1]]
        if v[1].is_zero() or v[1].val > 0:
            # renormalise; v[1] must stay a unit for an ordinary prime
            s = v[0] if not v[0].is_zero() and (v[1].is_zero() or v[0].val < v[1].val) else v[1]
            v = [v[0] / s, v[1] / s]
    if v[1].is_zero() or v[1].val != 0:
        raise SupersingularPrime(f"unit root subspace not found at p = {p}")
    lam = v[0] / v[1]
    # U is spanned by (x + lam) dx/y = 2 (wp - b2/12 + lam) omega
    value = (12 * lam - Emin.b2) * -1
    return E2Value(p, value.with_precision(precision), "computed", trace_ok)


def e2_from_fixture(p: int, value, precision: int = DEFAULT_PRECISION) -> E2Value:
    """Wrap a stored E2 (rational or p-adic) so the Frobenius step is skipped."""
    if not isinstance(value, PadicNumber):
        value = PadicNumber.from_rational(Fraction(value), p, precision)
    return E2Value(p, value, "fixture", None)


# -- sigma --------------------------------------------------------------------


def sigma_series(E: EllipticCurveQ, p: int, e2: E2Value, order: int) -> SigmaSeries:
    """sigma_p(t) mod t^order on the minimal model, with tracked coefficient precision."""
    Emin, _ = minimal_model(E)
    val = e2.value
    if val.is_zero():
        rep = Fraction(0)
    else:
        rep = val.lift()
    absprec = val.absprec
    a = _sigma_rational(Emin, rep, order)
    b = _sigma_rational(Emin, rep + Fraction(p) ** absprec, order)
    coeffs = []
    for x, y in zip(a, b):
        if x == y:
            prec_k = absprec + 10 * order  # coefficient does not involve E2
            prec_k = min(prec_k, absprec + 40)
        else:
            prec_k = PadicNumber.from_rational(x - y, p, 1).val
        coeffs.append(_frac_to_padic(x, p, prec_k))
    return SigmaSeries(p, tuple(coeffs), order)


# -- multiples of points, p-adically --------------------------------------------


def to_minimal(E: EllipticCurveQ, P: PointQ) -> tuple[EllipticCurveQ, PointQ]:
    Emin, T = minimal_model(E)
    if P.is_zero:
        return Emin, P
    u, r, s, t = T.u, T.r, T.s, T.t
    x = (P.x - r) / u ** 2
    y = (P.y - s * u * u * x - t) / u ** 3
    Q = PointQ(x, y)
    assert Emin.contains(Q)
    return Emin, Q


class _DivisionValues:
    """psi_n at a p-integral point, via the auxiliary f_n, modulo p^digits."""

    def __init__(self, E: EllipticCurveQ, x: int, y: int, mod: int):
        self.mod = mod
        b2, b4, b6, b8 = E.b2, E.b4, E.b6, E.b8
        self.psi2 = (2 * y + E.a1 * x + E.a3) % mod
        self.F = (4 * x ** 3 + b2 * x * x + 2 * b4 * x + b6) % mod
        self.F2 = self.F * self.F % mod
        self.x = x % mod
        f3 = 3 * x ** 4 + b2 * x ** 3 + 3 * b4 * x * x + 3 * b6 * x + b8
        f4 = (2 * x ** 6 + b2 * x ** 5 + 5 * b4 * x ** 4 + 10 * b6 * x ** 3
              + 10 * b8 * x * x + (b2 * b8 - b4 * b6) * x + (b4 * b8 - b6 * b6))
        self.cache = {0: 0, 1: 1, 2: 1, 3: f3 % mod, 4: f4 % mod}

    def f(self, n: int) -> int:
        if n < 0:
            return -self.f(-n) % self.mod
        c = self.cache
        if n in c:
            return c[n]
        mod = self.mod
        k = n // 2
        if n % 2 == 0:
            v = self.f(k) * (self.f(k + 2) * self.f(k - 1) ** 2
                             - self.f(k - 2) * self.f(k + 1) ** 2) % mod
        elif k % 2 == 0:
            v = (self.F2 * self.f(k + 2) * self.f(k) ** 3
                 - self.f(k - 1) * self.f(k + 1) ** 3) % mod
        else:
            v = (self.f(k + 2) * self.f(k) ** 3
                 - self.F2 * self.f(k - 1) * self.f(k + 1) ** 3) % mod
        c[n] = v
        return v

    def psi(self, n: int) -> int:
        return self.f(n) if n % 2 else self.psi2 * self.f(n) % self.mod

    def psi2n_over_psin(self, n: int) -> int:
        inner = (self.f(n + 2) * self.f(n - 1) ** 2 - self.f(n - 2) * self.f(n + 1) ** 2)
        if n % 2:
            inner *= self.psi2
        return inner % self.mod


def kernel_multiple(E: EllipticCurveQ, P: PointQ, p: int, digits: int,
                    multiplier: int | None = None) -> tuple[PadicNumber, PadicNumber, int]:
    """(t(nP), d(nP), n) as p-adic numbers for nP in the kernel of reduction.

    E must be minimal and P must reduce into the identity component at every
    bad prime (so that the denominator of nP is e^(n^2) psi_n(P)).  When
    ``multiplier`` is omitted the order of P mod p is used.
    """
    x, y = P.x, P.y
    e = P.denominator_root
    if e % p == 0:
        n = 1 if multiplier is None else multiplier
        if n == 1:
            t = PadicNumber.from_rational(-x / y, p, digits)
            d = PadicNumber.from_rational(e, p, digits)
            return t, d, 1
    else:
        if multiplier is None:
            Pp = E.reduce_point(P, p)
            n = 1
            R = Pp
            while not R.is_zero:
                R = E.add_mod(R, Pp)
                n += 1
        else:
            n = multiplier
    mod = p ** digits
    if e % p == 0:
        # P already in the kernel: fall back to exact arithmetic on nP
        Q = E.mul(n, P)
        t = PadicNumber.from_rational(-Q.x / Q.y, p, digits)
        d = PadicNumber.from_rational(Q.denominator_root, p, digits)
        return t, d, n
    xi = x.numerator * pow(x.denominator, -1, mod) % mod
    yi = y.numerator * pow(y.denominator, -1, mod) % mod
    D = _DivisionValues(E, xi, yi, mod)
    psi_n = D.psi(n)
    if psi_n % p:
        raise ValueError(f"{n} P is not in the kernel of reduction at {p}")
    phi_n = (D.x * psi_n * psi_n - D.psi(n + 1) * D.psi(n - 1)) % mod
    two_omega = (D.psi2n_over_psin(n) - E.a1 * phi_n * psi_n - E.a3 * psi_n ** 3) % mod
    omega_n = two_omega * pow(2, -1, mod) % mod
    if omega_n % p == 0:
        raise PrecisionExhausted("omega_n lost its unit part")
    t = PadicNumber.from_int_mod(-phi_n * psi_n * pow(omega_n, -1, mod), p, digits)
    d = PadicNumber.from_int_mod(psi_n, p, digits) * PadicNumber.from_rational(
        Fraction(e) ** (n * n), p, digits)
    return t, d, n


def component_multiplier(E: EllipticCurveQ, ctx: CurveContext | None = None) -> int:
    """lcm of the Tamagawa numbers: sends any point into the identity components."""
    cs = dict(tamagawa_numbers(E))
    if ctx is not None:
        cs.update(ctx.tamagawa_overrides)
    return lcm(1, *cs.values())


# -- heights ------------------------------------------------------------------


class HeightContext:
    """Caches E2, sigma and the minimal model for repeated heights at one (E, p)."""

    def __init__(self, E: EllipticCurveQ, p: int, precision: int = DEFAULT_PRECISION,
                 e2: E2Value | None = None, ctx: CurveContext | None = None):
        self.E = E
        self.p = p
        self.precision = precision
        self.Emin, self.T = minimal_model(E)
        _check_prime(self.Emin, p)
        self.work = precision + 6
        self.e2 = e2 if e2 is not None else compute_e2(self.Emin, p, self.work)
        self.c = component_multiplier(self.Emin, ctx)
        self._sigma: SigmaSeries | None = None

    def sigma(self) -> SigmaSeries:
        if self._sigma is None:
            self._sigma = sigma_series(self.Emin, self.p, self.e2, self.work + 2)
        return self._sigma

    def height(self, P: PointQ, multiplier: int | None = None,
               component: int | None = None) -> PadicNumber:
        if P.is_zero:
            raise TorsionPoint("the point at infinity")
        Emin, Q = to_minimal(self.E, P)
        c = self.c if component is None else component
        R = Emin.mul(c, Q)
        if R.is_zero or Emin.order(Q) is not None:
            raise TorsionPoint(f"{P} is a torsion point")
        p = self.p
        t, d, n = kernel_multiple(Emin, R, p, self.work + 4, multiplier)
        if t.is_zero():
            raise TorsionPoint(f"{P} is a torsion point")
        sig = self.sigma()
        s = sig(t)
        val = iwasawa_log(s / d, allow_nonunit=True)
        m = c * n
        h = val / PadicNumber.from_rational(m * m, p, self.work + 4)
        return h.with_precision(min(h.absprec, self.precision))

    def pairing(self, P: PointQ, Q: PointQ) -> PadicNumber:
        E = self.E
        parts = []
        for R in (E.add(P, Q), P, Q):
            try:
                parts.append(self.height(R))
            except TorsionPoint:
                parts.append(PadicNumber.zero(self.p, self.precision + 4))
        return (parts[0] - parts[1] - parts[2]) / 2


def padic_height(E: EllipticCurveQ, ctx: CurveContext | None, P: PointQ, p: int,
                 precision: int = DEFAULT_PRECISION) -> PadicNumber:
    return HeightContext(E, p, precision, ctx=ctx).height(P)


def height_pairing(E: EllipticCurveQ, ctx: CurveContext | None, P: PointQ, Q: PointQ,
                   p: int, precision: int = DEFAULT_PRECISION) -> PadicNumber:
    return HeightContext(E, p, precision, ctx=ctx).pairing(P, Q)


def _det(m):
    n = len(m)
    if n == 1:
        return m[0][0]
    total = None
    for j in range(n):
        minor = [row[:j] + row[j + 1:] for row in m[1:]]
        term = m[0][j] * _det(minor)
        if j % 2:
            term = -term
        total = term if total is None else total + term
    return total


SATURATION_CAVEAT = ("generators are taken as given; if they span a subgroup of index "
                     "divisible by p the regulator gains a factor p^2")


def regulator(E: EllipticCurveQ, ctx: CurveContext, p: int,
              precision: int = DEFAULT_PRECISION, e2: E2Value | None = None) -> RegulatorResult:
    if ctx.rank == 0:
        raise RankZero(f"{ctx.label} has rank 0")
    H = HeightContext(E, p, precision, e2=e2, ctx=ctx)
    gens = ctx.generators
    r = len(gens)
    mat = [[None] * r for _ in range(r)]
    for i in range(r):
        mat[i][i] = H.height(gens[i])
        for j in range(i + 1, r):
            mat[i][j] = mat[j][i] = H.pairing(gens[i], gens[j])
    R = _det(mat)
    normalized = R / PadicNumber.from_rational(p ** r, p, precision + 4)
    caveats = [SATURATION_CAVEAT]
    if H.e2.trace_check is False:
        caveats.append("Frobenius trace check failed")
    if normalized.is_zero():
        raise PrecisionExhausted(
            f"regulator is O({p}^{R.absprec}); raise the precision to decide unit-ness")
    return RegulatorResult(p, mat, R, normalized, normalized.val == 0, caveats)
