"""Curve records: the line-delimited fixture format and a remote database client.

One JSON object per line:

    {"label": "37a1", "ainvs": [0, 0, 1, -1, 0], "rank": 1,
     "generators": [[0, 1, -1, 1]], "torsion_order": 1, "sha_an": 1,
     "tamagawa": {"37": 1}}

A generator [xn, xd, yn, yd] is the point (xn/xd, yn/yd).  The optional
"tamagawa" map is carried into CurveContext.tamagawa_overrides.
"""
from __future__ import annotations

import json
import os
import re
import socket
import urllib.error
import urllib.parse
import urllib.request
from fractions import Fraction
from importlib import resources
from pathlib import Path
from typing import Iterable, Optional

from .curve import (CurveContext, EllipticCurveQ, MAZUR_TORSION_ORDERS, PointQ,
                    SingularModel)

DB_ENV = "CYCLORANK_DB"
ENDPOINT_ENV = "CYCLORANK_ENDPOINT"
DEFAULT_ENDPOINT = "https://www.lmfdb.org"

CREMONA_LABEL = re.compile(r"^(\d+)([a-z]+)(\d*)$")
LMFDB_LABEL = re.compile(r"^(\d+)\.([a-z]+)(\d*)$")


class ParseError(ValueError):
    def __init__(self, message: str, line: Optional[int] = None):
        self.line = line
        super().__init__(f"line {line}: {message}" if line is not None else message)


class ValidationError(ValueError):
    pass


class NetworkError(OSError):
    pass


class NotFound(LookupError):
    pass


class SchemaMismatch(ValueError):
    pass


Record = tuple[EllipticCurveQ, CurveContext]


def _point(E: EllipticCurveQ, quad) -> PointQ:
    if not (isinstance(quad, (list, tuple)) and len(quad) == 4
            and all(isinstance(v, int) and not isinstance(v, bool) for v in quad)):
        raise ParseError(f"generator {quad!r} is not four integers")
    xn, xd, yn, yd = quad
    if xd == 0 or yd == 0:
        raise ValidationError("zero denominator in generator")
    P = PointQ(Fraction(xn, xd), Fraction(yn, yd))
    if not E.contains(P):
        raise ValidationError(f"generator {P} is not on {E.ainvs}")
    return P


def record_from_dict(rec: dict) -> Record:
    """Validate one decoded record."""
    for key in ("label", "ainvs", "rank", "generators"):
        if key not in rec:
            raise ParseError(f"missing field {key!r}")
    ainvs = rec["ainvs"]
    if not (isinstance(ainvs, list) and len(ainvs) == 5 and all(isinstance(a, int) for a in ainvs)):
        raise ParseError("ainvs must be five integers")
    try:
        E = EllipticCurveQ(*ainvs)
    except SingularModel as exc:
        raise ValidationError(str(exc)) from exc
    gens = rec["generators"]
    if not isinstance(gens, list):
        raise ParseError("generators must be a list")
    points = [_point(E, g) for g in gens]
    rank = rec["rank"]
    if not isinstance(rank, int) or rank != len(points):
        raise ValidationError(f"rank {rank} does not match {len(points)} generators")
    torsion = rec.get("torsion_order", 1)
    sha = rec.get("sha_an", 1)
    if not isinstance(torsion, int) or torsion not in MAZUR_TORSION_ORDERS:
        raise ValidationError(f"torsion order {torsion} is impossible over Q")
    if not isinstance(sha, int) or sha < 1:
        raise ValidationError(f"bad Sha order {sha!r}")
    tam = {}
    for q, c in (rec.get("tamagawa") or {}).items():
        try:
            q, c = int(q), int(c)
        except (TypeError, ValueError) as exc:
            raise ParseError(f"bad Tamagawa entry {q!r}: {c!r}") from exc
        if c < 1:
            raise ValidationError("Tamagawa numbers are positive")
        tam[q] = c
    for P in points:
        if E.order(P) is not None:
            raise ValidationError(f"generator {P} is torsion")
    ctx = CurveContext(str(rec["label"]), rank, points, torsion, sha, tam)
    return E, ctx


def record_to_dict(E: EllipticCurveQ, ctx: CurveContext) -> dict:
    rec = {
        "label": ctx.label,
        "ainvs": list(E.ainvs),
        "rank": ctx.rank,
        "generators": [[P.x.numerator, P.x.denominator, P.y.numerator, P.y.denominator]
                       for P in ctx.generators],
        "torsion_order": ctx.torsion_order,
        "sha_an": ctx.sha_analytic_order,
    }
    if ctx.tamagawa_overrides:
        rec["tamagawa"] = {str(q): c for q, c in sorted(ctx.tamagawa_overrides.items())}
    return rec


def parse_records(lines: Iterable[str]) -> list[Record]:
    out = []
    for n, line in enumerate(lines, start=1):
        line = line.strip()
        if not line or line.startswith("#"):
            continue
        try:
            rec = json.loads(line)
        except json.JSONDecodeError as exc:
            raise ParseError(f"invalid JSON ({exc.msg})", n) from exc
        if not isinstance(rec, dict):
            raise ParseError("record is not an object", n)
        try:
            out.append(record_from_dict(rec))
        except ParseError as exc:
            raise ParseError(str(exc), n) from exc
        except ValidationError as exc:
            raise ValidationError(f"line {n}: {exc}") from exc
    return out


def ingest_curves(path) -> list[Record]:
    with open(path, encoding="utf-8") as fh:
        return parse_records(fh)


def default_db_path() -> Path:
    env = os.environ.get(DB_ENV)
    if env:
        return Path(env)
    return Path(str(resources.files("cyclorank") / "data" / "curves.jsonl"))


def find_curve(label: str, records: Iterable[Record]) -> Record:
    """Look up a Cremona label; a bare class label like "433a" means curve 1."""
    want = {label}
    m = CREMONA_LABEL.match(label)
    if m and not m.group(3):
        want.add(label + "1")
    for E, ctx in records:
        if ctx.label in want:
            return E, ctx
    raise NotFound(f"no curve labelled {label}")


def find_by_ainvs(ainvs, records: Iterable[Record]) -> Optional[Record]:
    ainvs = tuple(ainvs)
    for E, ctx in records:
        if E.ainvs == ainvs:
            return E, ctx
    return None


# -- remote client --------------------------------------------------------------


def _query_url(label: str, endpoint: str) -> str:
    if CREMONA_LABEL.match(label):
        field = "Clabel"
    elif LMFDB_LABEL.match(label):
        field = "lmfdb_label"
    else:
        raise NotFound(f"malformed curve label {label!r}")
    query = urllib.parse.urlencode({field: label, "_format": "json"})
    return f"{endpoint.rstrip('/')}/api/ec_curvedata/?{query}"


def _rational(v) -> Fraction:
    if isinstance(v, bool):
        raise SchemaMismatch("boolean where a number was expected")
    if isinstance(v, int):
        return Fraction(v)
    if isinstance(v, str):
        try:
            return Fraction(v)
        except ValueError as exc:
            raise SchemaMismatch(f"bad rational {v!r}") from exc
    raise SchemaMismatch(f"bad rational {v!r}")


def _generator_quad(g) -> list[int]:
    # projective [X, Y, Z] integers or affine [x, y] rationals
    if isinstance(g, list) and len(g) == 3:
        X, Y, Z = (_rational(v) for v in g)
        if Z == 0:
            raise SchemaMismatch("generator at infinity")
        x, y = X / Z, Y / Z
    elif isinstance(g, list) and len(g) == 2:
        x, y = (_rational(v) for v in g)
    else:
        raise SchemaMismatch(f"unrecognised generator {g!r}")
    return [x.numerator, x.denominator, y.numerator, y.denominator]


def record_from_api(label: str, row: dict) -> Record:
    """Map the database's documented fields onto the fixture record shape."""
    try:
        ainvs = [int(a) for a in row["ainvs"]]
        rank = int(row["rank"])
        gens = row.get("gens") or []
        torsion = int(row.get("torsion", 1))
        sha = row.get("sha", row.get("sha_an", 1))
        sha = int(round(float(sha)))
    except (KeyError, TypeError, ValueError) as exc:
        raise SchemaMismatch(f"response for {label} lacks expected fields: {exc}") from exc
    rec = {
        "label": row.get("Clabel", label),
        "ainvs": ainvs,
        "rank": rank,
        "generators": [_generator_quad(g) for g in gens],
        "torsion_order": torsion,
        "sha_an": sha,
    }
    try:
        return record_from_dict(rec)
    except (ParseError, ValidationError) as exc:
        raise SchemaMismatch(f"record for {label} fails validation: {exc}") from exc


def fetch_curve(label: str, endpoint: Optional[str] = None, timeout: float = 10.0) -> Record:
    endpoint = endpoint or os.environ.get(ENDPOINT_ENV) or DEFAULT_ENDPOINT
    url = _query_url(label, endpoint)
    try:
        with urllib.request.urlopen(url, timeout=timeout) as resp:
            body = resp.read()
    except urllib.error.HTTPError as exc:
        if exc.code == 404:
            raise NotFound(f"{label}: HTTP 404") from exc
        raise NetworkError(f"{url}: HTTP {exc.code}") from exc
    except (urllib.error.URLError, socket.timeout, ConnectionError, OSError) as exc:
        raise NetworkError(f"{url}: {exc}") from exc
    try:
        payload = json.loads(body)
    except (json.JSONDecodeError, UnicodeDecodeError) as exc:
        raise SchemaMismatch(f"{url}: response is not JSON") from exc
    if not isinstance(payload, dict) or not isinstance(payload.get("data"), list):
        raise SchemaMismatch(f"{url}: no 'data' list in response")
    if not payload["data"]:
        raise NotFound(f"no curve labelled {label}")
    return record_from_api(label, payload["data"][0])
