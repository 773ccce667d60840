"""The seven-condition checklist for rank constancy, and text rendering.

Conditions, for E/Q and an odd prime p:

  c1  good ordinary reduction at p
  c2  rank E(Q) > 0
  c3  the dual p-infinity Selmer group over the cyclotomic tower is Lambda-torsion
  c4  R_p(E/Q) is a p-adic unit
  c5  Sha(E/Q)[p^oo] = 0
  c6  p does not divide any Tamagawa number
  c7  p does not divide #E~(F_p)

When all hold, lambda = rank, the rank is constant up the tower and each
layer K_n/Q is integrally diophantine (conditionally, see VERDICT_TEXT).
"""
from __future__ import annotations

import json
from dataclasses import asdict, dataclass, field
from typing import Optional

from .curve import CurveContext, EllipticCurveQ
from .heights import RankZero, SupersingularPrime, regulator
from .iwasawa import NegativeValuation, euler_char_valuation, lambda_verdict
from .padic import PadicError, valuation
from .reduction import classify, minimal_model, tamagawa_numbers

PASS, FAIL, ASSUMED, UNKNOWN = "pass", "fail", "assumed", "unknown"
CONDITIONS = ("c1", "c2", "c3", "c4", "c5", "c6", "c7")
SCHEMA = "cyclorank-report/1"

KATO_NOTE = ("base field Q is abelian over Q: the Selmer dual is Lambda-torsion "
             "by Kato's theorem")
VERDICT_TEXT = ("if the diophantine conjecture holds for K, then K_n/K is integrally "
                "diophantine for all n >= 0")


@dataclass
class Condition:
    status: str
    evidence: str = ""
    values: dict = field(default_factory=dict)


@dataclass
class Verdict:
    rank_constant: bool
    diophantine_transfer: bool
    lambda_claim: str = "inconclusive"
    caveats: list[str] = field(default_factory=list)


@dataclass
class ConditionReport:
    label: str
    p: int
    conditions: dict[str, Condition]
    verdict: Verdict
    euler_valuation: Optional[int] = None

    def to_dict(self) -> dict:
        return asdict(self)

    @classmethod
    def from_dict(cls, d: dict) -> "ConditionReport":
        conds = {k: Condition(**v) for k, v in d["conditions"].items()}
        return cls(d["label"], d["p"], conds, Verdict(**d["verdict"]), d.get("euler_valuation"))


def decide(conditions: dict[str, Condition]) -> bool:
    """Rank constancy needs every condition to pass, c3 may also be assumed."""
    for key in CONDITIONS:
        st = conditions[key].status
        if key == "c3":
            if st not in (PASS, ASSUMED):
                return False
        elif st != PASS:
            return False
    return True


def build_condition_report(E: EllipticCurveQ, ctx: CurveContext, p: int,
                           precision: int = 20, base_field_abelian: bool = True) -> ConditionReport:
    if p == 2 or p < 2:
        raise ValueError("p must be an odd prime")
    Emin, _ = minimal_model(E)
    c: dict[str, Condition] = {}
    caveats: list[str] = []

    cls = classify(Emin, p)
    if not cls.good:
        c["c1"] = Condition(FAIL, f"bad reduction at {p}", {"good": False})
    elif not cls.ordinary:
        c["c1"] = Condition(FAIL, f"supersingular at {p} (a_{p} = {cls.a_p})", {"a_p": cls.a_p})
    else:
        c["c1"] = Condition(PASS, f"good ordinary at {p} (a_{p} = {cls.a_p})",
                             {"a_p": cls.a_p})

    c["c2"] = Condition(PASS if ctx.rank > 0 else FAIL, f"rank {ctx.rank}", {"rank": ctx.rank})

    if base_field_abelian:
        c["c3"] = Condition(PASS, KATO_NOTE)
    else:
        c["c3"] = Condition(ASSUMED, "Mazur's conjecture assumed")

    val_Rp = None
    if c["c1"].status != PASS or ctx.rank == 0 or p < 5:
        why = "needs p >= 5, good ordinary and positive rank"
        c["c4"] = Condition(UNKNOWN, f"regulator not computed: {why}")
    else:
        try:
            R = regulator(E, ctx, p, precision)
        except (RankZero, SupersingularPrime, PadicError, ArithmeticError, ValueError) as exc:
            c["c4"] = Condition(UNKNOWN, f"{type(exc).__name__}: {exc}")
        else:
            val_Rp = R.normalized.val
            st = PASS if R.is_unit else FAIL
            c["c4"] = Condition(st, f"val_p(R_p) = {val_Rp}",
                                {"valuation": val_Rp, "R_p": repr(R.normalized)})
            caveats.extend(R.caveats)

    sha = ctx.sha_analytic_order
    vs = valuation(sha, p)
    c["c5"] = Condition(PASS if vs == 0 else FAIL, f"analytic order of Sha is {sha}",
                        {"sha_an": sha, "valuation": vs})
    caveats.append("Sha condition read from the analytic order of Sha")

    tam = dict(tamagawa_numbers(Emin))
    tam.update(ctx.tamagawa_overrides)
    bad_c = {q: cq for q, cq in tam.items() if cq % p == 0}
    c["c6"] = Condition(FAIL if bad_c else PASS,
                        "Tamagawa numbers " + ", ".join(f"c_{q}={cq}" for q, cq in sorted(tam.items())),
                        {"tamagawa": {str(q): cq for q, cq in sorted(tam.items())}})

    if cls.good:
        st = FAIL if cls.count % p == 0 else PASS
        c["c7"] = Condition(st, f"#E~(F_{p}) = {cls.count}", {"count": cls.count})
    else:
        c["c7"] = Condition(UNKNOWN, "no good reduction at p")

    euler = None
    claim = "inconclusive"
    if val_Rp is not None and val_Rp >= 0 and cls.good:
        try:
            euler = euler_char_valuation(ctx.rank, val_Rp, sha, list(tam.values()),
                                         cls.count, ctx.torsion_order, p)
        except NegativeValuation as exc:
            caveats.append(str(exc))
        else:
            claim = str(lambda_verdict(euler, ctx.rank))

    ok = decide(c)
    if ok:
        caveats.append(VERDICT_TEXT)
    verdict = Verdict(ok, ok, claim, caveats)
    return ConditionReport(ctx.label, p, c, verdict, euler)


# -- rendering ------------------------------------------------------------------


def format_prime_set(primes) -> str:
    primes = sorted(primes)
    return "{" + ",".join(str(q) for q in primes) + "}" if primes else "∅"


def short_label(label: str) -> str:
    """Class label as printed in tables: 433a1 -> 433a."""
    return label[:-1] if label.endswith("1") and label[:-1][-1:].isalpha() else label


def _dump(value) -> str:
    return json.dumps(value, sort_keys=True, ensure_ascii=False)


def _flatten(prefix: str, value, out: list[str]):
    # one level of nesting keeps the lines short and greppable
    if prefix in ("conditions", "verdict") and isinstance(value, dict):
        for k, v in value.items():
            out.append(f"{prefix}.{k}: {_dump(v)}")
    else:
        out.append(f"{prefix}: {_dump(value)}")


def to_structured(kind: str, data: dict) -> str:
    lines = [f"schema: {json.dumps(SCHEMA)}", f"kind: {json.dumps(kind)}"]
    for k, v in data.items():
        _flatten(k, v, lines)
    return "\n".join(lines) + "\n"


def parse_structured(text: str) -> tuple[str, dict]:
    """Inverse of :func:`to_structured`: returns (kind, data)."""
    data: dict = {}
    schema = kind = None
    for n, line in enumerate(text.splitlines(), start=1):
        if not line.strip():
            continue
        key, sep, raw = line.partition(": ")
        if not sep:
            raise ValueError(f"line {n}: expected 'key: value'")
        value = json.loads(raw)
        if key == "schema":
            schema = value
            continue
        if key == "kind":
            kind = value
            continue
        node = data
        parts = key.split(".")
        for part in parts[:-1]:
            node = node.setdefault(part, {})
        node[parts[-1]] = value
    if schema != SCHEMA:
        raise ValueError(f"unsupported schema {schema!r}")
    return kind, data


def render_report(rep: ConditionReport, fmt: str = "table") -> str:
    if fmt == "structured":
        return to_structured("condition_report", rep.to_dict())
    names = {
        "c1": "good ordinary at p", "c2": "positive rank", "c3": "Selmer dual torsion",
        "c4": "R_p is a unit", "c5": "Sha[p^oo] trivial", "c6": "p prime to Tamagawa",
        "c7": "p prime to #E~(F_p)",
    }
    lines = [f"{rep.label}  p = {rep.p}"]
    for k in CONDITIONS:
        cnd = rep.conditions[k]
        lines.append(f"  ({k[1]}) {names[k]:<24} {cnd.status:<8} {cnd.evidence}")
    if rep.euler_valuation is not None:
        lines.append(f"  Euler characteristic valuation: {rep.euler_valuation}")
    lines.append(f"  lambda: {rep.verdict.lambda_claim}")
    lines.append(f"  rank constant in the tower: {'yes' if rep.verdict.rank_constant else 'no'}")
    for cv in rep.verdict.caveats:
        lines.append(f"  note: {cv}")
    return "\n".join(lines) + "\n"


def render_scans(scans, fmt: str = "table") -> str:
    """Rows "label | Pi set" in the layout of the published table."""
    if fmt == "structured":
        out = []
        for s in scans:
            data = {"label": s.label, "bound": s.bound, "primes": s.primes,
                    "diagnostics": [asdict(d) for d in s.diagnostics if d.status != "unit"
                                    and d.status != "skipped"]}
            out.append(to_structured("scan", data))
        return "\n".join(out)
    width = max([len(short_label(s.label)) for s in scans] + [5])
    bound = scans[0].bound if scans else 0
    lines = [f"{'label':<{width}} | Pi^<={bound}"]
    for s in scans:
        lines.append(f"{short_label(s.label):<{width}} | {format_prime_set(s.primes)}")
    return "\n".join(lines) + "\n"


def render_sieve(rep, fmt: str = "table") -> str:
    if fmt == "structured":
        data = asdict(rep)
        data["empirical_density"] = str(rep.empirical_density)
        data["predicted_density"] = str(rep.predicted_density)
        return to_structured("sieve", data)
    lines = [f"field {rep.field}, primes <= {rep.bound}"]
    for name in ("sigma0", "sigma1", "sigma2", "sigma3", "sigma"):
        vals = getattr(rep, name)
        shown = format_prime_set(vals) if len(vals) <= 40 else f"{len(vals)} primes"
        lines.append(f"  {name:<7} {shown}")
    lines.append(f"  density {float(rep.empirical_density):.4f} (split density bound 1/"
                 f"{rep.predicted_density.denominator})")
    for cv in rep.caveats:
        lines.append(f"  note: {cv}")
    return "\n".join(lines) + "\n"


def render(obj, fmt: str = "table") -> str:
    from .sieve import ScanResult, SieveReport
    if isinstance(obj, ConditionReport):
        return render_report(obj, fmt)
    if isinstance(obj, ScanResult):
        return render_scans([obj], fmt)
    if isinstance(obj, list) and all(isinstance(s, ScanResult) for s in obj):
        return render_scans(obj, fmt)
    if isinstance(obj, SieveReport):
        return render_sieve(obj, fmt)
    raise TypeError(f"cannot render {type(obj).__name__}")
