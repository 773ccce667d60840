import random
import socket
from fractions import Fraction

import pytest
import sympy

from cyclorank.curve import CurveContext, EllipticCurveQ, count_points_naive
from cyclorank.report import build_condition_report
from cyclorank.sieve import (RATIONALS, BadPrime, NumberFieldSpec, density_report,
                             is_completely_split, pi_scan, sigma_sieve, split_primes)

E37 = EllipticCurveQ(0, 0, 1, -1, 0)


def brute_split(coeffs, p):
    roots = sum(1 for x in range(p) if sum(c * pow(x, k, p) for k, c in enumerate(coeffs)) % p == 0)
    return roots == len(coeffs) - 1


def test_linear_field_always_splits():
    for p in (2, 3, 5, 101):
        assert is_completely_split(RATIONALS, p)


def test_gaussian_examples():
    f = NumberFieldSpec.parse("x^2+1")
    assert f.closure_degree == 2
    assert is_completely_split(f, 5)
    assert not is_completely_split(f, 7)
    with pytest.raises(BadPrime):
        is_completely_split(f, 2)


def test_parse_rejects_bad_polynomials():
    with pytest.raises(ValueError):
        NumberFieldSpec.parse("x^2-1")
    with pytest.raises(ValueError):
        NumberFieldSpec.parse("2*x^2+1")
    with pytest.raises(ValueError):
        NumberFieldSpec.parse("x^2+1/2")
    with pytest.raises(ValueError):
        NumberFieldSpec.parse("y^2+")


def test_closure_degree_of_cubics():
    assert NumberFieldSpec.parse("x^3-x-1").closure_degree == 6
    assert NumberFieldSpec.parse("x^3-3*x+1").closure_degree == 3


def _random_fields(count):
    rng = random.Random(7)
    x = sympy.Symbol("x")
    out = []
    while len(out) < count:
        deg = rng.choice([3, 4])
        coeffs = [rng.randint(-9, 9) for _ in range(deg)] + [1]
        if sympy.Poly(sum(c * x ** k for k, c in enumerate(coeffs)), x).is_irreducible:
            out.append(NumberFieldSpec(tuple(coeffs), 0))
    return out


@pytest.mark.parametrize("f", _random_fields(20), ids=str)
def test_split_matches_root_count(f):
    for p in sympy.primerange(2, 1000):
        if f.discriminant % p == 0:
            with pytest.raises(BadPrime):
                is_completely_split(f, p)
            continue
        assert is_completely_split(f, p) == brute_split(f.coefficients, p), p


def test_density_report():
    rep = density_report([5, 13, 17], 20)
    assert rep.prime_count == 8 and rep.count == 3
    assert rep.frequency == Fraction(3, 8)
    assert rep.deviation is None
    rep = density_report(split_primes(NumberFieldSpec.parse("x^2+1"), 10 ** 4), 10 ** 4,
                         Fraction(1, 2))
    assert rep.deviation < 0.01


def test_sieve_over_q_37a1(e37):
    E, ctx = e37
    rep = sigma_sieve(E, ctx, RATIONALS, 100)
    expected = []
    for p in sympy.primerange(3, 101):
        if E.disc % p == 0:
            continue
        n = count_points_naive(E, p)
        if (p + 1 - n) % p:
            expected.append(p)
    assert rep.sigma0 == expected
    assert rep.sigma2 == [] and rep.sigma3 == []
    assert rep.sigma1 == [p for p in expected if count_points_naive(E, p) % p == 0]
    rep.check()


def test_sieve_set_algebra(db):
    E, ctx = db["655a1"]
    rep = sigma_sieve(E, ctx, NumberFieldSpec.parse("x^2+1"), 500)
    s0 = set(rep.sigma0)
    assert set(rep.sigma1) <= s0 and set(rep.sigma2) <= s0 and set(rep.sigma3) <= s0
    for part in (rep.sigma1, rep.sigma2, rep.sigma3):
        assert not set(part) & set(rep.sigma)
    assert all(is_completely_split(NumberFieldSpec.parse("x^2+1"), p) for p in rep.sigma0)


def test_sieve_records_tamagawa_caveat(db):
    E, ctx = db["37a1"]
    rep = sigma_sieve(E, ctx, NumberFieldSpec.parse("x^2+1"), 50)
    if ctx.tamagawa_overrides:
        assert not any("Tamagawa" in c for c in rep.caveats)
    bare = sigma_sieve(E, CurveContext("37a1", 1, ctx.generators), NumberFieldSpec.parse("x^2+1"), 50)
    assert any("Tamagawa" in c for c in bare.caveats)


def test_pi_scan_37a1_small():
    ctx = CurveContext("37a1", 1, [E37.point(0, 0)])
    res = pi_scan(E37, ctx, 30, precision=8)
    # h_13(P) has valuation 2 (independent height oracle)
    assert res.primes == [13]
    assert [d.p for d in res.diagnostics] == list(sympy.primerange(5, 31))
    assert {d.status for d in res.diagnostics} <= {"unit", "divisible", "skipped", "nonintegral"}


def test_pi_scan_rejects_rank_zero():
    with pytest.raises(ValueError):
        pi_scan(E37, CurveContext("x", 0, []), 50)


def test_pi_scan_deterministic_across_jobs(db):
    E, ctx = db["433a1"]
    a = pi_scan(E, ctx, 20, precision=8, jobs=1)
    b = pi_scan(E, ctx, 20, precision=8, jobs=2)
    assert a == b
    assert a.primes == [13]


def test_no_network_during_scans(monkeypatch, db):
    def refuse(*args, **kwargs):
        raise AssertionError("network access attempted")

    monkeypatch.setattr(socket, "socket", refuse)
    monkeypatch.setattr(socket, "create_connection", refuse)
    E, ctx = db["37a1"]
    pi_scan(E, ctx, 20, precision=8)
    sigma_sieve(E, ctx, NumberFieldSpec.parse("x^2+1"), 100)
    build_condition_report(E, ctx, 5, 10)
