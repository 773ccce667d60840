"""Acceptance suite: one CRITERION line per check, tolerances as pinned."""

import random
import time
from fractions import Fraction

import pytest
import sympy

from cyclorank.curve import EllipticCurveQ
from cyclorank.heights import HeightContext, kernel_multiple, to_minimal
from cyclorank.iwasawa import (euler_char_valuation, lambda_verdict, leading_coefficient,
                               ord_at_zero, reconstruct, weierstrass_preparation)
from cyclorank.kedlaya import frobenius_matrix
from cyclorank.reduction import _count_brute, _count_bsgs, classify, count_points
from cyclorank.report import CONDITIONS, PASS, build_condition_report, render
from cyclorank.sieve import NumberFieldSpec, density_report, pi_scan, split_primes

from conftest import TABLE_LABELS
from test_iwasawa import N as PREP_N, random_composite, series

CURVES = [(0, 0, 1, -1, 0), (0, 1, 1, -2, 0), (0, 0, 0, -7, 10)]

TABLE = {
    "389a1": [], "433a1": [13], "446d1": [7], "563a1": [], "571b1": [],
    "643a1": [], "655a1": [7, 31], "664a1": [59], "681c1": [], "707a1": [29],
}


def close(a, b, digits):
    d = a - b
    return d.absprec >= digits and (d.is_zero() or d.val >= digits)


def test_criterion_1_worked_example(e37, criterion):
    E, ctx = e37
    t0 = time.perf_counter()
    rep = build_condition_report(E, ctx, 5, 20)
    text = render(rep)
    elapsed = time.perf_counter() - t0
    c = rep.conditions
    checks = {
        "ordinary": c["c1"].status == PASS and c["c1"].values["a_p"] == -2,
        "rank": c["c2"].values["rank"] == 1,
        "count": c["c7"].values["count"] == 8,
        "tamagawa": c["c6"].values["tamagawa"] == {"37": 1},
        "sha": c["c5"].status == PASS,
        "regulator": c["c4"].values["valuation"] == 0,
        "euler": rep.euler_valuation == 0,
        "lambda": rep.verdict.lambda_claim == "mu=0, lambda=1",
        "verdict": rep.verdict.rank_constant and all(c[k].status == PASS for k in CONDITIONS),
        "text": "good ordinary at 5 (a_5 = -2)" in text,
        "time": elapsed < 10,
    }
    bad = [k for k, ok in checks.items() if not ok]
    assert criterion(1, not bad, f"37a1 at 5, prec 20, {elapsed:.1f}s, failing: {bad or 'none'}")


@pytest.mark.slow
def test_criterion_2_table(db, criterion):
    t0 = time.perf_counter()
    got, wrong = {}, []
    for label in TABLE_LABELS:
        E, ctx = db[label]
        got[label] = pi_scan(E, ctx, 100, precision=10).primes
        if got[label] != TABLE[label]:
            wrong.append(label)
    elapsed = time.perf_counter() - t0
    ok = not wrong and elapsed <= 30 * 60
    assert criterion(2, ok, f"Pi up to 100 for ten curves in {elapsed / 60:.1f} min, "
                            f"mismatched: {wrong or 'none'}"), got


def test_criterion_3_frobenius_trace(criterion):
    prec = 8
    checked, failures = 0, []
    for ainvs in CURVES:
        E = EllipticCurveQ(*ainvs)
        Q = (Fraction(E.b2, 4), Fraction(E.b4, 2), Fraction(E.b6, 4))
        for p in sympy.primerange(5, 51):
            cls = classify(E, p)
            if not (cls.good and cls.ordinary):
                continue
            assert cls.count == _count_brute(E, p)
            M = frobenius_matrix(Q, p, prec)
            checked += 1
            if not close(M.trace(), cls.a_p, prec - 2):
                failures.append((ainvs, p))
    assert criterion(3, not failures and checked > 0,
                     f"{checked} traces mod p^{prec - 2}, failures: {failures or 'none'}")


def test_criterion_4_height_laws(db, criterion):
    prec = 20
    digits = prec - 2
    pairs = [("37a1", 5), ("389a1", 7), ("433a1", 13), ("655a1", 7)]
    failures = []
    for label, p in pairs:
        E, ctx = db[label]
        H = HeightContext(E, p, prec, ctx=ctx)
        P = ctx.generators[0]
        h = H.height(P)
        for n in (2, 3, 5):
            if not close(H.height(E.mul(n, P)), n * n * h, digits):
                failures.append((label, p, f"h({n}P)"))
        if len(ctx.generators) > 1:
            Q = ctx.generators[1]
            pq = H.pairing(P, Q)
            if not close(pq, H.pairing(Q, P), digits):
                failures.append((label, p, "symmetry"))
            if not close(H.pairing(E.add(P, Q), Q), pq + H.pairing(Q, Q), digits):
                failures.append((label, p, "additivity"))
            if not close(H.pairing(E.mul(3, P), Q), 3 * pq, digits):
                failures.append((label, p, "scaling"))
        _, Pm = to_minimal(E, P)
        _, _, m = kernel_multiple(H.Emin, H.Emin.mul(H.c, Pm), p, 10)
        if not close(H.height(P, multiplier=2 * m), h, digits):
            failures.append((label, p, "multiplier"))
        if not close(H.height(P, component=2 * H.c), h, digits):
            failures.append((label, p, "component"))
    assert criterion(4, not failures, f"{len(pairs)} curve/prime pairs to {digits} digits, "
                                      f"failures: {failures or 'none'}")


def test_criterion_5_preparation(criterion):
    rng = random.Random(20261016)
    bad_trip = 0
    for _ in range(1000):
        p = rng.choice([3, 5, 7, 11])
        f, mu, P, u = random_composite(rng, p)
        r = weierstrass_preparation(f)
        mod = p ** (PREP_N - mu)
        ok = (r.mu == mu and r.lam == len(P) - 1
              and list(r.distinguished) == [c % mod for c in P]
              and reconstruct(r, p) == f)
        bad_trip += not ok
    bad_lemma = 0
    for _ in range(1000):
        p = rng.choice([3, 5, 7])
        n = rng.randint(1, 10)
        coeffs = []
        for _ in range(n):
            v = rng.randint(0, 4)
            coeffs.append(0 if v == 4 else p ** v * (rng.randrange(1, 10 ** 6) * p + 1))
        f = series(p, coeffs + [1], truncation=n + 1)
        prep = weierstrass_preparation(f)
        unit = leading_coefficient(f).val == 0
        bad_lemma += unit != (prep.mu == 0 and prep.lam == ord_at_zero(f))
    assert criterion(5, bad_trip == 0 and bad_lemma == 0,
                     f"1000 round-trips, {bad_trip} failed; 1000 lemma checks, "
                     f"{bad_lemma} counterexamples")


def test_criterion_6_euler_characteristic(criterion):
    # rank 1, val R_p 0, sha, Tamagawa numbers, #E~(F_5), torsion, p
    v = euler_char_valuation(1, 0, 1, [1], 8, 1, 5)
    lv = lambda_verdict(v, 1)
    v25 = euler_char_valuation(1, 0, 25, [1], 8, 1, 5)
    lv25 = lambda_verdict(v25, 1)
    ok = (v == 0 and (lv.mu, lv.lam) == (0, 1) and lv.conclusive
          and v25 == 2 and str(lv25) == "inconclusive")
    assert criterion(6, ok, f"37a1 at 5 valuation {v} ({lv}); sha 25 valuation {v25} ({lv25})")


def _random_s3_cubic(rng):
    while True:
        a, b = rng.randint(-20, 20), rng.randint(-20, 20)
        text = f"x^3{a:+d}*x{b:+d}"
        try:
            f = NumberFieldSpec.parse(text)
        except ValueError:
            continue
        if f.closure_degree == 6:
            return f


def test_criterion_7_split_density(criterion):
    t0 = time.perf_counter()
    N = 10 ** 5
    quad = density_report(split_primes(NumberFieldSpec.parse("x^2+1"), N), N, Fraction(1, 2))
    cubic = _random_s3_cubic(random.Random(7))
    cub = density_report(split_primes(cubic, N), N, Fraction(1, 6))
    elapsed = time.perf_counter() - t0
    ok = quad.deviation <= 0.01 and cub.deviation <= 0.02 and elapsed < 60
    assert criterion(7, ok, f"x^2+1 {float(quad.frequency):.4f} vs 1/2, {cubic} "
                            f"{float(cub.frequency):.4f} vs 1/6, {elapsed:.1f}s")


def test_criterion_8_point_counts(criterion):
    mismatches, hasse, checked = [], [], 0
    for ainvs in CURVES:
        E = EllipticCurveQ(*ainvs)
        for p in sympy.primerange(3, 1 << 12):
            if E.disc % p == 0:
                continue
            brute, bsgs = _count_brute(E, p), _count_bsgs(E, p)
            checked += 1
            if brute != bsgs:
                mismatches.append((ainvs, p))
            if (p + 1 - brute) ** 2 > 4 * p:
                hasse.append((ainvs, p))
        # past the brute-force range only the bound is available
        for p in sympy.primerange(1 << 12, 1 << 16):
            if p % 97 != 1 or E.disc % p == 0:
                continue
            n = count_points(E, p)
            checked += 1
            if (p + 1 - n) ** 2 > 4 * p:
                hasse.append((ainvs, p))
    ok = not mismatches and not hasse
    assert criterion(8, ok, f"{checked} counts, BSGS mismatches: {mismatches or 'none'}, "
                            f"Hasse violations: {hasse or 'none'}")
