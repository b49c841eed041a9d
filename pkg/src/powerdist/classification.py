"""Naming a space: metric, near metric, inframetric and the other presets."""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass
from typing import Optional, Sequence

from .distance import DissimilarityMatrix
from .errors import DegenerateMatrixError, PowerDistError
from .numerics import INF
from .power_triangle import (DEFAULT_POLICY, PowerParams, RelationResult,
                             TriplePolicy, check_relation, sigma_min)

METRIC_TOL = 1e-12


class Inequality(str, enum.Enum):
    SIGMA_INFRAMETRIC = "sigma-inframetric"
    INFRAMETRIC = "inframetric"
    QUADRATIC = "quadratic"
    RELAXED_TRIANGLE = "relaxed-triangle"
    TRIANGLE = "triangle"
    SQUARE_MEAN_ROOT = "square-mean-root"
    GEOMETRIC = "geometric"
    HARMONIC = "harmonic"
    MINIMAL = "minimal"


PARAMETRIC = frozenset({Inequality.SIGMA_INFRAMETRIC, Inequality.QUADRATIC,
                        Inequality.RELAXED_TRIANGLE})


@dataclass(frozen=True)
class NamedInequality:
    """A named member of the power-triangle family.

    ``sigma`` is required for the parametric kinds and ignored otherwise.
    The quadratic preset stores ``(2, sqrt(2) * sigma)`` literally, so its
    sigma scales differently from the relaxed-triangle one.
    """

    kind: Inequality
    sigma: Optional[float] = None

    def __post_init__(self):
        object.__setattr__(self, "kind", Inequality(self.kind))
        if self.kind in PARAMETRIC and self.sigma is None:
            raise PowerDistError(f"{self.kind.value} needs a sigma parameter")

    def params(self) -> PowerParams:
        k, s = self.kind, self.sigma
        table = {
            Inequality.SIGMA_INFRAMETRIC: lambda: (INF, s / 2),
            Inequality.INFRAMETRIC: lambda: (INF, 0.5),
            Inequality.QUADRATIC: lambda: (2.0, math.sqrt(2.0) * s),
            Inequality.RELAXED_TRIANGLE: lambda: (1.0, s),
            Inequality.TRIANGLE: lambda: (1.0, 1.0),
            Inequality.SQUARE_MEAN_ROOT: lambda: (0.5, 2.0),
            Inequality.GEOMETRIC: lambda: (0.0, 0.5),
            Inequality.HARMONIC: lambda: (-1.0, 0.25),
            Inequality.MINIMAL: lambda: (-INF, 0.5),
        }
        return PowerParams(*table[k]())

    @property
    def name(self) -> str:
        if self.kind in PARAMETRIC:
            return f"{self.kind.value}({self.sigma!r})"
        return self.kind.value


def named_check(m: DissimilarityMatrix, which: NamedInequality,
                policy: TriplePolicy = DEFAULT_POLICY) -> RelationResult:
    return check_relation(m, which.params(), policy)


FIXED_PRESETS = (Inequality.INFRAMETRIC, Inequality.TRIANGLE,
                 Inequality.SQUARE_MEAN_ROOT, Inequality.GEOMETRIC,
                 Inequality.HARMONIC, Inequality.MINIMAL)


@dataclass(frozen=True)
class ClassificationReport:
    """Where a finite space sits in the power-triangle family.

    ``inframetric_constant`` is ``C = 2 * sigma_min(+inf)``, the smallest C
    with ``d(x, y) <= C * max(d(x, z), d(z, y))``. ``quadratic_sigma`` is the
    smallest sigma for the quadratic preset as printed, i.e.
    ``sigma_min(2) / sqrt(2)``.
    """

    policy: TriplePolicy
    n: int
    is_metric: bool
    near_metric_sigma: float
    inframetric_sigma: float
    inframetric_constant: float
    is_inframetric: bool
    quadratic_sigma: float
    named: dict[str, RelationResult]


def classify(m: DissimilarityMatrix,
             policy: TriplePolicy = DEFAULT_POLICY) -> ClassificationReport:
    policy = TriplePolicy(policy)
    if m.n < 2:
        raise PowerDistError("classification needs at least two points")
    if not m.nondegenerate:
        raise DegenerateMatrixError(
            "matrix has zero off-diagonal entries; distinct points at distance 0 "
            "are not a distance space, refusing to classify")
    s1 = sigma_min(m, 1.0, policy).sigma
    s_inf = sigma_min(m, INF, policy).sigma
    s2 = sigma_min(m, 2.0, policy).sigma
    c = 2.0 * s_inf
    named = {}
    for kind in FIXED_PRESETS:
        which = NamedInequality(kind)
        if policy is TriplePolicy.ALL_TRIPLES and which.params().p <= 0:
            continue  # vacuous under all-triples
        named[which.name] = named_check(m, which, policy)
    return ClassificationReport(
        policy=policy,
        n=m.n,
        is_metric=s1 <= 1.0 + METRIC_TOL,
        near_metric_sigma=s1,
        inframetric_sigma=s_inf,
        inframetric_constant=c,
        is_inframetric=c <= 1.0 + METRIC_TOL,
        quadratic_sigma=s2 / math.sqrt(2.0),
        named=named,
    )


@dataclass(frozen=True)
class RefinementTrend:
    sigmas: tuple[float, ...]
    increasing: bool
    unbounded: bool


def refinement_trend(series: Sequence[DissimilarityMatrix],
                     policy: TriplePolicy = DEFAULT_POLICY,
                     growth: float = 10.0) -> RefinementTrend:
    """Near-metric sigma along a sequence of refining samples.

    Flags ``unbounded`` when sigma strictly increases at every step and the
    last value is at least ``growth`` times the first. This is finite
    evidence that no single sigma works for the underlying space.
    """
    if len(series) < 2:
        raise PowerDistError("need at least two samples to judge a trend")
    sig = tuple(sigma_min(m, 1.0, policy).sigma for m in series)
    inc = all(a < b for a, b in zip(sig, sig[1:]))
    unbounded = inc and (math.isinf(sig[-1]) or sig[-1] >= growth * sig[0])
    return RefinementTrend(sig, inc, unbounded)
