"""Matrix CSV ingestion and byte-stable CSV/JSON emission."""

from __future__ import annotations

import csv
import hashlib
import io
import json
import math
import re
from typing import Optional, Sequence

from .classification import ClassificationReport
from .distance import DissimilarityMatrix
from .errors import MatrixError, PowerDistError
from .power_triangle import (RelationResult, SigmaProfile, SigmaWitness,
                             TripleWitness)
from .sequences import CauchyReport, ConvergenceCertificate

_DECIMAL = re.compile(r"[+-]?(?:\d+(?:\.\d*)?|\.\d+)(?:[eE][+-]?\d+)?")


def fmt(x) -> str:
    """17 significant digits, ``inf``/``-inf`` for infinities."""
    if isinstance(x, bool):
        raise TypeError("booleans are not numbers here")
    if isinstance(x, int):
        return str(x)
    x = float(x)
    if math.isinf(x):
        return "inf" if x > 0 else "-inf"
    if math.isnan(x):
        raise PowerDistError("NaN in report")
    return format(x, ".17g")


def _is_decimal(s: str) -> bool:
    return _DECIMAL.fullmatch(s.strip()) is not None


def parse_matrix_csv(text: str) -> DissimilarityMatrix:
    """Read an n-by-n comma-separated matrix, with an optional label row.

    A first row counts as a header when its first field is not a decimal
    number, or when there are n + 1 rows of n fields (so numeric labels
    work too). Only plain decimals with a period radix are accepted.
    """
    rows = [r for r in csv.reader(io.StringIO(text))]
    while rows and not any(f.strip() for f in rows[-1]):
        rows.pop()
    if not rows:
        raise MatrixError("empty matrix input")
    width = len(rows[0])
    for k, r in enumerate(rows, start=1):
        if len(r) != width:
            raise MatrixError(f"ragged row {k}: expected {width} fields, got {len(r)}", row=k)
    labels = None
    first = 0
    if not _is_decimal(rows[0][0]) or len(rows) == width + 1:
        labels = [f.strip() for f in rows[0]]
        first = 1
    body = rows[first:]
    if len(body) != width:
        raise MatrixError(f"expected {width} data rows for {width} columns, got {len(body)}")
    values = []
    for i, r in enumerate(body):
        out = []
        for j, cell in enumerate(r):
            if not _is_decimal(cell):
                raise MatrixError(
                    f"non-numeric cell at row {i + first + 1}, column {j + 1}: {cell!r}",
                    row=i, col=j)
            out.append(float(cell.strip()))
        values.append(out)
    return DissimilarityMatrix(values, labels=labels)


def matrix_to_csv(m: DissimilarityMatrix) -> str:
    """Label header plus rows; re-parses to bit-identical entries."""
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(m.labels)
    for row in m.entries:
        w.writerow([fmt(v) for v in row])
    return buf.getvalue()


PROFILE_COLUMNS = ("p", "sigma_min", "boundary_sigma", "witness_x", "witness_y", "witness_z")


def profile_to_csv(profile: SigmaProfile, labels: Sequence[str]) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(PROFILE_COLUMNS)
    for r in profile.rows:
        wit = ["", "", ""] if r.witness is None else [labels[i] for i in r.witness.triple]
        w.writerow([fmt(r.p), fmt(r.sigma_min),
                    "" if r.boundary is None else fmt(r.boundary), *wit])
    return buf.getvalue()


def input_record(path: Optional[str], text: str, m: DissimilarityMatrix) -> dict:
    return {"path": path, "n": fmt(m.n),
            "sha256": hashlib.sha256(text.encode("utf-8")).hexdigest()}


def _triple(w, labels):
    return {"x": labels[w.x], "y": labels[w.y], "z": labels[w.z]}


def triple_witness_json(w: Optional[TripleWitness], labels) -> Optional[dict]:
    if w is None:
        return None
    return {**_triple(w, labels), "lhs": fmt(w.lhs), "rhs": fmt(w.rhs),
            "deficit": fmt(w.deficit)}


def sigma_witness_json(w: Optional[SigmaWitness], labels) -> Optional[dict]:
    if w is None:
        return None
    return {**_triple(w, labels), "lhs": fmt(w.lhs), "mean": fmt(w.mean),
            "ratio": fmt(w.ratio)}


def relation_json(r: RelationResult, labels) -> dict:
    return {"p": fmt(r.params.p), "sigma": fmt(r.params.sigma), "holds": r.holds,
            "witness": triple_witness_json(r.witness, labels)}


def classification_json(c: ClassificationReport) -> dict:
    return {
        "n": fmt(c.n),
        "is_metric": c.is_metric,
        "near_metric_sigma": fmt(c.near_metric_sigma),
        "inframetric_sigma": fmt(c.inframetric_sigma),
        "inframetric_constant": fmt(c.inframetric_constant),
        "is_inframetric": c.is_inframetric,
        "quadratic_sigma": fmt(c.quadratic_sigma),
    }


def profile_json(profile: Optional[SigmaProfile], labels) -> list:
    if profile is None:
        return []
    return [{"p": fmt(r.p), "sigma_min": fmt(r.sigma_min),
             "boundary_sigma": None if r.boundary is None else fmt(r.boundary),
             "witness": sigma_witness_json(r.witness, labels)} for r in profile.rows]


def convergence_json(c: ConvergenceCertificate) -> dict:
    return {
        "kind": "limit",
        "candidate": fmt(c.candidate),
        "n_max": fmt(c.n_max),
        "verdict": c.verdict.value,
        "schedule": [{"eps": fmt(r.eps), "n": None if r.n is None else fmt(r.n),
                      "verdict": r.verdict.value} for r in c.schedule],
        "witness": None if c.witness_n is None else {
            "n": fmt(c.witness_n), "eps": fmt(c.witness_eps), "d": fmt(c.witness_d)},
    }


def cauchy_json(c: CauchyReport) -> dict:
    return {
        "kind": "cauchy",
        "n_max": fmt(c.n_max),
        "verdict": c.verdict.value,
        "bound": fmt(c.bound),
        "schedule": [{"eps": fmt(r.eps), "n": None if r.n is None else fmt(r.n),
                      "verdict": r.verdict.value} for r in c.schedule],
        "witness": None if c.witness is None else {
            "n": fmt(c.witness[0]), "m": fmt(c.witness[1]), "d": fmt(c.witness_d),
            "eps": fmt(c.witness_eps)},
    }


def build_report(*, input: Optional[dict] = None, policy: Optional[str] = None,
                 classification: Optional[dict] = None, profile: Optional[list] = None,
                 witnesses: Optional[dict] = None,
                 certificates: Optional[list] = None) -> dict:
    return {
        "input": input,
        "policy": policy,
        "classification": classification,
        "profile": profile if profile is not None else [],
        "witnesses": witnesses if witnesses is not None else {},
        "certificates": certificates if certificates is not None else [],
    }


def dumps(report: dict) -> str:
    return json.dumps(report, indent=2, ensure_ascii=True) + "\n"
