"""Metric-preserving transforms: phi applied entry-wise to a distance matrix."""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable, Optional, Sequence

import numpy as np

from .distance import DissimilarityMatrix
from .errors import PowerDistError

SUBADD_TOL = 1e-12
BUILTIN = ("scale", "snowflake", "truncate", "bounded", "discrete-step", "piecewise-c9")
_NEEDS_PARAM = {"scale", "snowflake", "truncate"}


def _c9(x):
    # left-continuous at 2: phi(2) = 1
    return np.where(x < 1, x, np.where(x <= 2, 1.0, np.where(x < 3, x - 1.0, 2.0)))


@dataclass(frozen=True)
class TransformSpec:
    """A function phi on [0, inf).

    Built-ins: ``scale`` (alpha x), ``snowflake`` (x**alpha, 0 < alpha <= 1),
    ``truncate`` (min(alpha, x)), ``bounded`` (x / (1 + x)),
    ``discrete-step`` (0 at 0, else 1), ``piecewise-c9`` (x, then 1, then
    x - 1, then 2, breaking at 1, 2, 3). ``custom`` wraps either a sampled
    table, linearly interpolated and held constant past its last knot, or
    a vectorized callable.
    """

    kind: str
    alpha: Optional[float] = None
    xs: Optional[tuple[float, ...]] = None
    ys: Optional[tuple[float, ...]] = None
    func: Optional[Callable] = None

    def __post_init__(self):
        k, a = self.kind, self.alpha
        if k in _NEEDS_PARAM:
            if a is None or not math.isfinite(a) or a <= 0:
                raise PowerDistError(f"{k} needs a positive parameter, got {a!r}")
            if k == "snowflake" and a > 1:
                raise PowerDistError(f"snowflake exponent must lie in (0, 1], got {a!r}")
        elif k in BUILTIN:
            if a is not None:
                raise PowerDistError(f"{k} takes no parameter")
        elif k == "custom":
            if (self.func is None) == (self.xs is None):
                raise PowerDistError("custom transform needs exactly one of a table or a callable")
            if self.xs is not None:
                xs, ys = np.asarray(self.xs), np.asarray(self.ys)
                if xs.size < 2 or xs.shape != ys.shape:
                    raise PowerDistError("custom table needs matching xs/ys of length >= 2")
                if xs[0] != 0 or np.any(np.diff(xs) <= 0):
                    raise PowerDistError("custom table xs must start at 0 and strictly increase")
                if not (np.isfinite(xs).all() and np.isfinite(ys).all()):
                    raise PowerDistError("custom table values must be finite")
        else:
            raise PowerDistError(f"unknown transform {k!r}; choose from {', '.join(BUILTIN)}, custom")

    @classmethod
    def table(cls, xs: Sequence[float], ys: Sequence[float]) -> "TransformSpec":
        return cls("custom", xs=tuple(map(float, xs)), ys=tuple(map(float, ys)))

    @classmethod
    def custom(cls, func: Callable) -> "TransformSpec":
        return cls("custom", func=func)

    @classmethod
    def parse(cls, text: str) -> "TransformSpec":
        """``name`` or ``name:param``, e.g. ``snowflake:0.5``."""
        name, _, param = text.partition(":")
        name = name.strip()
        if name == "custom":
            raise PowerDistError("custom transforms are only available from Python")
        if param:
            try:
                alpha = float(param)
            except ValueError:
                raise PowerDistError(f"bad transform parameter {param!r}") from None
            return cls(name, alpha)
        return cls(name)

    @property
    def name(self) -> str:
        return self.kind if self.alpha is None else f"{self.kind}:{self.alpha!r}"

    @property
    def metric_preserving(self) -> Optional[bool]:
        """Known verdict for built-ins; None for custom transforms."""
        return None if self.kind == "custom" else True

    def __call__(self, x):
        x = np.asarray(x, dtype=float)
        k, a = self.kind, self.alpha
        if k == "scale":
            return a * x
        if k == "snowflake":
            return x ** a
        if k == "truncate":
            return np.minimum(a, x)
        if k == "bounded":
            return x / (1.0 + x)
        if k == "discrete-step":
            return np.where(x <= 0, 0.0, 1.0)
        if k == "piecewise-c9":
            return _c9(x)
        if self.func is not None:
            return np.asarray(self.func(x), dtype=float)
        return np.interp(x, self.xs, self.ys)


def apply(m: DissimilarityMatrix, spec: TransformSpec) -> DissimilarityMatrix:
    """Entry-wise ``phi(d)``; the result is validated like any input."""
    if float(spec(0.0)) != 0.0:
        raise PowerDistError(f"transform {spec.name} has phi(0) = {float(spec(0.0))!r}, need 0")
    return DissimilarityMatrix(spec(m.entries), labels=m.labels)


def _sample(sample_xs) -> np.ndarray:
    xs = np.asarray(sample_xs, dtype=float).ravel()
    if xs.size == 0:
        raise PowerDistError("empty sample")
    if np.any(xs < 0) or not np.isfinite(xs).all():
        raise PowerDistError("sample values must be nonnegative reals")
    return xs


def _first_subadditive_failure(spec, xs):
    """Lexicographically first (x, y), x <= y, with phi(x+y) > phi(x)+phi(y)+tol."""
    u = np.unique(xs)
    fx = spec(u)
    lhs = spec(u[:, None] + u[None, :])
    bad = np.triu(lhs > fx[:, None] + fx[None, :] + SUBADD_TOL)
    hits = np.argwhere(bad)
    if hits.size == 0:
        return None
    i, j = hits[0]
    return float(u[i]), float(u[j])


@dataclass(frozen=True)
class NecessaryReport:
    zero_preimage: bool               # phi(x) = 0 only at x = 0
    range_ok: bool                    # phi(x) >= 0
    subadditive: bool
    zero_witness: Optional[float] = None
    range_witness: Optional[float] = None
    subadditive_witness: Optional[tuple[float, float]] = None

    @property
    def passed(self) -> bool:
        return self.zero_preimage and self.range_ok and self.subadditive


def necessary_conditions_check(spec: TransformSpec, sample_xs) -> NecessaryReport:
    xs = np.unique(_sample(sample_xs))
    fx = spec(xs)
    zero_bad = xs[((fx == 0) & (xs != 0)) | ((xs == 0) & (fx != 0))]
    range_bad = xs[~(np.isfinite(fx) & (fx >= 0))]
    sub = _first_subadditive_failure(spec, xs)
    return NecessaryReport(
        zero_preimage=zero_bad.size == 0,
        range_ok=range_bad.size == 0,
        subadditive=sub is None,
        zero_witness=float(zero_bad[0]) if zero_bad.size else None,
        range_witness=float(range_bad[0]) if range_bad.size else None,
        subadditive_witness=sub,
    )


@dataclass(frozen=True)
class SufficientReport:
    """``positive`` (phi > 0 away from 0) is checked on top of the classic
    three conditions; without it phi = 0 would pass."""

    isotone: bool
    zero_at_zero: bool
    subadditive: bool
    positive: bool
    isotone_witness: Optional[tuple[float, float]] = None
    subadditive_witness: Optional[tuple[float, float]] = None

    @property
    def passed(self) -> bool:
        return self.isotone and self.zero_at_zero and self.subadditive and self.positive


def sufficient_conditions_check(spec: TransformSpec, sample_xs) -> SufficientReport:
    xs = np.unique(_sample(sample_xs))
    fx = spec(xs)
    drops = np.flatnonzero(np.diff(fx) < 0)
    iso_w = (float(xs[drops[0]]), float(xs[drops[0] + 1])) if drops.size else None
    sub = _first_subadditive_failure(spec, xs)
    return SufficientReport(
        isotone=iso_w is None,
        zero_at_zero=float(spec(0.0)) == 0.0,
        subadditive=sub is None,
        positive=bool(np.all(fx[xs > 0] > 0)),
        isotone_witness=iso_w,
        subadditive_witness=sub,
    )
