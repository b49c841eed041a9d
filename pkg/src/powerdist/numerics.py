"""Extended-real helpers and overflow-safe weighted power means.

Power means are evaluated in the log domain relative to a reference element
(the max for p > 0, the min for p < 0) so that ``x**p`` never overflows and
the p -> 0 limit stays accurate::

    M_p = x_ref * exp(log1p(sum w * expm1(p * log(x / x_ref))) / p)

Closed forms are used at p in {0, 1, -1, 2, +inf, -inf}.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .errors import PowerDistError

INF = math.inf

WEIGHT_TOL = 1e-12
SMALL_P = 1e-8
CHECK_TOL = 1e-12


def check_extended(x: float, what: str = "value") -> float:
    """Return ``x`` as a float, refusing NaN."""
    x = float(x)
    if math.isnan(x):
        raise PowerDistError(f"{what} is not a number")
    return x


def parse_extended(token: str) -> float:
    """Parse a real or one of ``inf``/``+inf``/``-inf`` (period radix only)."""
    t = token.strip().lower()
    if t in ("inf", "+inf", "infinity", "+infinity"):
        return INF
    if t in ("-inf", "-infinity"):
        return -INF
    if t in ("nan", "+nan", "-nan") or "," in t:
        raise PowerDistError(f"not an extended real: {token!r}")
    try:
        return check_extended(float(t), "p")
    except ValueError:
        raise PowerDistError(f"not an extended real: {token!r}") from None


def equal_weights(n: int) -> tuple[float, ...]:
    return (1.0 / n,) * n


def _validate(values, weights):
    xs = [float(v) for v in values]
    ws = [float(w) for w in weights]
    if len(xs) == 0:
        raise PowerDistError("power mean of an empty tuple")
    if len(xs) != len(ws):
        raise PowerDistError(
            f"length mismatch: {len(xs)} values vs {len(ws)} weights")
    for v in xs:
        if math.isnan(v) or v < 0 or math.isinf(v):
            raise PowerDistError(f"values must be finite and >= 0, got {v}")
    for w in ws:
        if math.isnan(w) or w < 0:
            raise PowerDistError(f"weights must be >= 0, got {w}")
    total = math.fsum(ws)
    if abs(total - 1.0) > WEIGHT_TOL:
        raise PowerDistError(f"weights must sum to 1, got {total!r}")
    # drop zero-weight entries: they do not take part in any limit
    pairs = [(x, w / total) for x, w in zip(xs, ws) if w > 0]
    return pairs


def power_mean(values: Sequence[float], weights: Sequence[float],
               p: float) -> float:
    """Weighted power mean ``(sum w_n x_n**p)**(1/p)`` with its limits.

    ``p = 0`` gives the weighted geometric mean, ``p = +inf`` the max and
    ``p = -inf`` the min. If some ``x_n = 0`` carries positive weight the
    result is 0 for ``p <= 0``.
    """
    p = check_extended(p, "p")
    pairs = _validate(values, weights)
    xs = [x for x, _ in pairs]
    if p == INF:
        return max(xs)
    if p == -INF:
        return min(xs)
    if p < SMALL_P and min(xs) == 0.0:
        return 0.0
    if abs(p) < SMALL_P:
        return math.exp(math.fsum(w * math.log(x) for x, w in pairs))
    if p == 1.0:
        return math.fsum(w * x for x, w in pairs)
    if p == -1.0:
        return 1.0 / math.fsum(w / x for x, w in pairs)
    if p == 2.0:
        top = max(xs)
        if top == 0.0:
            return 0.0
        return top * math.sqrt(math.fsum(w * (x / top) ** 2 for x, w in pairs))

    ref = max(xs) if p > 0 else min(xs)
    if ref == 0.0:
        return 0.0
    acc = math.fsum(
        w * (-1.0 if x == 0.0 else math.expm1(p * (math.log(x) - math.log(ref))))
        for x, w in pairs)
    return ref * math.exp(math.log1p(acc) / p)


def pair_mean(a, b, p: float) -> np.ndarray:
    """Equal-weight power mean of two nonnegative arrays, elementwise."""
    a = np.asarray(a, dtype=float)
    b = np.asarray(b, dtype=float)
    p = check_extended(p, "p")
    if p == INF:
        return np.maximum(a, b)
    if p == -INF:
        return np.minimum(a, b)
    with np.errstate(divide="ignore", invalid="ignore", over="ignore"):
        if abs(p) < SMALL_P:
            return np.sqrt(a) * np.sqrt(b)
        if p == 1.0:
            return (a + b) / 2.0
        if p == 2.0:
            return np.hypot(a, b) * math.sqrt(0.5)
        if p == -1.0:
            # 1/0 = inf so a zero leg yields 0
            return 2.0 / (1.0 / a + 1.0 / b)
        hi = np.maximum(a, b)
        lo = np.minimum(a, b)
        if p > 0:
            ref, other = hi, lo
        else:
            ref, other = lo, hi
        ratio = np.where(ref > 0, other / np.where(ref > 0, ref, 1.0), 1.0)
        t = np.expm1(p * np.log(ratio))
        out = ref * np.exp(np.log1p(0.5 * t) / p)
        return np.where(ref > 0, out, 0.0)


@dataclass(frozen=True)
class MeanChain:
    minimum: float
    harmonic: float
    geometric: float
    arithmetic: float
    maximum: float

    def as_tuple(self) -> tuple[float, float, float, float, float]:
        return (self.minimum, self.harmonic, self.geometric,
                self.arithmetic, self.maximum)

    def min_slack(self) -> float:
        """Smallest consecutive gap; negative means the chain is broken."""
        t = self.as_tuple()
        return min(t[i + 1] - t[i] for i in range(4))


def mean_chain(values: Sequence[float], weights: Sequence[float]) -> MeanChain:
    """min <= harmonic <= geometric <= arithmetic <= max."""
    if any(float(v) <= 0 for v in values):
        raise PowerDistError("mean_chain needs strictly positive values")
    return MeanChain(*(power_mean(values, weights, p)
                       for p in (-INF, -1.0, 0.0, 1.0, INF)))


@dataclass(frozen=True)
class InequalityCheck:
    holds: bool
    lhs: float
    rhs: float
    equality: bool = False

    @property
    def slack(self) -> float:
        return self.rhs - self.lhs


def minkowski_check(xs: Sequence[float], ys: Sequence[float],
                    p: float) -> InequalityCheck:
    """``||x + y||_p <= ||x||_p + ||y||_p`` for 1 < p < inf."""
    p = check_extended(p, "p")
    if not (1.0 < p < INF):
        raise PowerDistError(f"Minkowski check needs 1 < p < inf, got {p}")
    if len(xs) != len(ys):
        raise PowerDistError("length mismatch")
    x = np.abs(np.asarray(xs, dtype=float))
    y = np.abs(np.asarray(ys, dtype=float))

    def norm(v):
        m = v.max(initial=0.0)
        if m == 0.0:
            return 0.0
        return m * math.fsum((v / m) ** p) ** (1.0 / p)

    lhs = norm(x + y)
    rhs = norm(x) + norm(y)
    return InequalityCheck(holds=rhs - lhs >= -CHECK_TOL, lhs=lhs, rhs=rhs,
                           equality=abs(rhs - lhs) <= CHECK_TOL)


def young_check(x: float, y: float, p: float) -> InequalityCheck:
    """``x*y <= x**p/p + y**q/q`` with ``1/p + 1/q = 1``."""
    p = check_extended(p, "p")
    if not (1.0 < p < INF):
        raise PowerDistError(f"Young check needs 1 < p < inf, got {p}")
    if x < 0 or y < 0:
        raise PowerDistError("Young check needs x, y >= 0")
    q = p / (p - 1.0)
    lhs = x * y
    rhs = x ** p / p + y ** q / q
    return InequalityCheck(holds=rhs - lhs >= -CHECK_TOL, lhs=lhs, rhs=rhs,
                           equality=abs(y - x ** (p - 1.0)) <= CHECK_TOL)
