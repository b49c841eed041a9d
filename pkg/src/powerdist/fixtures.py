"""Closed-form distance functions on the real line that break metric axioms.

``EX321``  Euclidean, except d(4, y) = y and d(x, 4) = x for x, y in (0, 2]
``EX322``  Euclidean through 0 (or x = y), 1 otherwise
``EX323``  Euclidean, dilated to 2|x - y| on the pair {0, 1}
``EX324``  squared Euclidean
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Sequence

import numpy as np

from .distance import DissimilarityMatrix, _label_for
from .errors import PowerDistError


class AnalyticSpace(str, enum.Enum):
    EX321 = "ex321"
    EX322 = "ex322"
    EX323 = "ex323"
    EX324 = "ex324"

    def __call__(self, x, y):
        return eval_distance(self, x, y)


def _in_half_open(v):
    # (0 : 2], literal: 0 excluded, 2 included
    return (v > 0) & (v <= 2)


def eval_distance(space: AnalyticSpace, x, y):
    """Evaluate d(x, y); scalars give a float, arrays broadcast."""
    space = AnalyticSpace(space)
    scalar = np.isscalar(x) and np.isscalar(y)
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    eucl = np.abs(x - y)
    if space is AnalyticSpace.EX321:
        out = np.where((x == 4) & _in_half_open(y), y,
                       np.where(_in_half_open(x) & (y == 4), x, eucl))
    elif space is AnalyticSpace.EX322:
        out = np.where((x == 0) | (y == 0) | (x == y), eucl, 1.0)
    elif space is AnalyticSpace.EX323:
        pair = ((x == 0) & (y == 1)) | ((x == 1) & (y == 0))
        out = np.where(pair, 2.0 * eucl, eucl)
    else:
        out = (x - y) ** 2
    return float(out) if scalar else out


def sample_matrix(space: AnalyticSpace, points: Sequence[float]) -> DissimilarityMatrix:
    """Restrict ``space`` to a finite, strictly increasing set of points."""
    pts = np.asarray([float(p) for p in points])
    if pts.size == 0:
        raise PowerDistError("no sample points")
    if np.any(np.diff(pts) <= 0):
        raise PowerDistError("sample points must be strictly increasing (no duplicates)")
    d = eval_distance(space, pts[:, None], pts[None, :])
    return DissimilarityMatrix(d, labels=[_label_for(p) for p in pts])


def uniform_points(count: int, lo: float = 0.0, hi: float = 1.0) -> list[float]:
    return [float(v) for v in np.linspace(lo, hi, count)]


def refinement_series(epsilons: Sequence[float]) -> list[DissimilarityMatrix]:
    """EX321 samples {0, eps, 4} for each eps."""
    return [sample_matrix(AnalyticSpace.EX321, (0.0, e, 4.0)) for e in epsilons]


def curve_length_324(n: int) -> float:
    """Inscribed-polygon length of [0, 1] under EX324 with 2**n segments.

    Equals 2**-n: the finer the partition, the shorter the "curve".
    """
    if not isinstance(n, (int, np.integer)) or not 1 <= n <= 62:
        raise PowerDistError(f"N must be an integer in [1, 62], got {n!r}")
    n = int(n)
    if n <= 20:
        # dyadic points: differences, squares and the sum are all exact
        pts = np.arange(2 ** n + 1, dtype=float) / 2.0 ** n
        return math.fsum(eval_distance(AnalyticSpace.EX324, pts[:-1], pts[1:]))
    return math.ldexp(1.0, -n)


@dataclass(frozen=True)
class WitnessRecord:
    """A documented fact about one of the example spaces.

    ``kind`` is ``"triangle-violation"`` (``points = (x, y, z)``, lhs is
    d(x, y), rhs is d(x, z) + d(z, y)) or ``"discontinuity"`` /
    ``"continuity"`` (``points = (a, b, c, e)`` for sequences
    ``x_n = a + b/n``, ``y_n = c + e/n``; lhs is the limit of d(x_n, y_n),
    rhs is d(a, c)).
    """

    space: AnalyticSpace
    kind: str
    points: tuple[float, ...]
    lhs: float
    rhs: float


def _rec(space, kind, points, lhs, rhs):
    return WitnessRecord(AnalyticSpace(space), kind,
                         tuple(float(Fraction(p)) for p in points), lhs, rhs)


_RECORDS = {
    AnalyticSpace.EX321: (
        _rec("ex321", "triangle-violation", (0, 4, 1), 4.0, 2.0),
        # sequences 1 - 1/n and 4 - 1/n: limits are 1 and 4, and d(1, 4) = 1
        _rec("ex321", "discontinuity", (1, -1, 4, -1), 3.0, 1.0),
    ),
    AnalyticSpace.EX322: (
        _rec("ex322", "triangle-violation", ("1/4", "1/2", 0), 1.0, 0.75),
        # 1/n -> 0 against the constant 2; 2 - 1/n has no limit here
        _rec("ex322", "discontinuity", (0, 1, 2, 0), 1.0, 2.0),
    ),
    AnalyticSpace.EX323: (
        _rec("ex323", "triangle-violation", (0, 1, "1/2"), 2.0, 1.0),
        _rec("ex323", "discontinuity", (1, -1, 0, 1), 1.0, 2.0),
    ),
    AnalyticSpace.EX324: (
        _rec("ex324", "triangle-violation", (0, 2, 1), 4.0, 2.0),
        _rec("ex324", "continuity", (0, 1, 2, -1), 4.0, 4.0),
    ),
}


def known_witnesses(space: AnalyticSpace) -> list[WitnessRecord]:
    return list(_RECORDS[AnalyticSpace(space)])


@dataclass(frozen=True)
class RecordCheck:
    record: WitnessRecord
    lhs: float
    rhs: float
    reproduced: bool


def _tail_limit(space, a, b, c, e):
    """Limit of d(a + b/n, c + e/n), read off dyadic n = 2**k.

    Values along the tail are exact for these fixtures; the limit is taken
    as the common value of the last terms, or extrapolated by Richardson
    when the terms still move like 1/n.
    """
    ks = np.arange(30, 41)
    inv = 2.0 ** -ks
    vals = eval_distance(space, a + b * inv, c + e * inv)
    if np.all(vals == vals[-1]):
        return float(vals[-1])
    # first-order tail: v(h) = L + k h + O(h^2), h = 1/n
    return float(2.0 * vals[-1] - vals[-2])


def verify_record(record: WitnessRecord) -> RecordCheck:
    """Re-derive a record's two sides and compare exactly (tolerance 0)."""
    space = record.space
    if record.kind == "triangle-violation":
        x, y, z = record.points
        lhs = eval_distance(space, x, y)
        rhs = eval_distance(space, x, z) + eval_distance(space, z, y)
        ok = lhs == record.lhs and rhs == record.rhs and lhs > rhs
    elif record.kind in ("discontinuity", "continuity"):
        a, b, c, e = record.points
        lhs = _tail_limit(space, a, b, c, e)
        rhs = eval_distance(space, a, c)
        same = lhs == rhs
        ok = (lhs == record.lhs and rhs == record.rhs
              and same == (record.kind == "continuity"))
    else:
        raise PowerDistError(f"unknown record kind {record.kind!r}")
    return RecordCheck(record, lhs, rhs, bool(ok))
