"""Finite-horizon evidence for convergence, Cauchy-ness, continuity and
open balls on the analytic example spaces.

Nothing here proves a statement about an infinite sequence. A
``certified`` verdict means every (eps, N) pair in the schedule was checked
for all indices up to the horizon ``n_max``; ``refuted`` means the condition
still fails at the end of the horizon; anything else is ``inconclusive``.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field
from typing import Optional, Sequence

import numpy as np

from .errors import PowerDistError, UncertifiedLimitError
from .fixtures import AnalyticSpace, eval_distance

DEFAULT_EPS = (1e-1, 1e-2, 1e-3, 1e-4, 1e-5, 1e-6)
DEFAULT_N_MAX = 10 ** 7
CAUCHY_EPS = (1e-1, 1e-2, 1e-3)
CAUCHY_N_MAX = 10 ** 4
CHUNK = 1 << 20
PAIR_BLOCK = 256
# dyadic indices n = 2**k used to read off tail limits exactly
TAIL_KS = tuple(range(30, 41))


class Verdict(str, enum.Enum):
    CERTIFIED = "certified"
    REFUTED = "refuted"
    INCONCLUSIVE = "inconclusive"


@dataclass(frozen=True)
class SequenceSpec:
    """A real sequence indexed from n = 1.

    kinds: ``reciprocal`` (1/n), ``affine`` (a + b/n), ``constant`` (c),
    ``table`` (explicit x_1..x_K), ``sub`` (x_{f(n)} of ``base``).
    """

    kind: str
    a: float = 0.0
    b: float = 1.0
    table: Optional[tuple[float, ...]] = None
    base: Optional["SequenceSpec"] = None
    stride: Optional[int] = None
    indices: Optional[tuple[int, ...]] = None

    @classmethod
    def reciprocal(cls) -> "SequenceSpec":
        return cls("reciprocal")

    @classmethod
    def affine(cls, a: float, b: float) -> "SequenceSpec":
        return cls("affine", float(a), float(b))

    @classmethod
    def constant(cls, c: float) -> "SequenceSpec":
        return cls("constant", float(c), 0.0)

    @classmethod
    def from_table(cls, values: Sequence[float]) -> "SequenceSpec":
        vals = tuple(float(v) for v in values)
        if not vals:
            raise PowerDistError("empty sequence table")
        return cls("table", table=vals)

    @property
    def length(self) -> Optional[int]:
        """Number of defined terms, or None when unbounded."""
        if self.kind == "table":
            return len(self.table)
        if self.kind == "sub":
            if self.indices is not None:
                return len(self.indices)
            base_len = self.base.length
            return None if base_len is None else base_len // self.stride
        return None

    def values(self, n) -> np.ndarray:
        n = np.asarray(n, dtype=np.int64)
        if np.any(n < 1):
            raise PowerDistError("sequence index starts at 1")
        if self.length is not None and np.any(n > self.length):
            raise PowerDistError(f"index beyond the {self.length} defined terms")
        if self.kind == "reciprocal":
            return 1.0 / n.astype(float)
        if self.kind == "affine":
            return self.a + self.b / n.astype(float)
        if self.kind == "constant":
            return np.full(n.shape, self.a)
        if self.kind == "table":
            return np.asarray(self.table)[n - 1]
        if self.kind == "sub":
            if self.indices is not None:
                return self.base.values(np.asarray(self.indices)[n - 1])
            return self.base.values(self.stride * n)
        raise PowerDistError(f"unknown sequence kind {self.kind!r}")

    def __call__(self, n: int) -> float:
        return float(self.values(np.array([n]))[0])


def subsequence(seq: SequenceSpec, selector) -> SequenceSpec:
    """``x_{f(n)}`` where ``f`` is a stride ``k`` (f(n) = k n) or a table."""
    if isinstance(selector, (int, np.integer)):
        if selector < 1:
            raise PowerDistError("stride must be a positive integer")
        return SequenceSpec("sub", base=seq, stride=int(selector))
    idx = tuple(int(i) for i in selector)
    if not idx or idx[0] < 1 or any(a >= b for a, b in zip(idx, idx[1:])):
        raise PowerDistError("selector must be strictly increasing from >= 1")
    if seq.length is not None and idx[-1] > seq.length:
        raise PowerDistError("selector reaches beyond the base sequence")
    return SequenceSpec("sub", base=seq, indices=idx)


def _check_schedule(eps_schedule, n_max) -> tuple[float, ...]:
    eps = tuple(float(e) for e in eps_schedule)
    if not eps:
        raise PowerDistError("empty eps schedule")
    if any(not (e > 0 and math.isfinite(e)) for e in eps):
        raise PowerDistError("eps values must be positive reals")
    if any(a <= b for a, b in zip(eps, eps[1:])):
        raise PowerDistError("eps schedule must be strictly decreasing")
    if n_max < 10.0 / eps[-1] * (1 - 1e-12):
        raise PowerDistError(
            f"n_max={n_max} too small for eps={eps[-1]}: need n_max >= 10/eps")
    return eps


def _horizon(seq: SequenceSpec, n_max: int) -> int:
    if seq.length is not None and n_max > seq.length:
        raise PowerDistError(f"n_max={n_max} exceeds the {seq.length} defined terms")
    return int(n_max)


@dataclass(frozen=True)
class EpsN:
    eps: float
    n: Optional[int]          # least N verified, None if not verified
    verdict: Verdict


@dataclass(frozen=True)
class ConvergenceCertificate:
    candidate: float
    n_max: int
    schedule: tuple[EpsN, ...]
    verdict: Verdict
    witness_n: Optional[int] = None
    witness_eps: Optional[float] = None
    witness_d: Optional[float] = None

    @property
    def certified(self) -> bool:
        return self.verdict is Verdict.CERTIFIED


def _classify_eps(eps, last_bad, end_bad, n_max):
    if end_bad:
        return EpsN(eps, None, Verdict.REFUTED)
    if last_bad <= n_max // 2:
        return EpsN(eps, int(last_bad), Verdict.CERTIFIED)
    return EpsN(eps, None, Verdict.INCONCLUSIVE)


def _overall(rows: Sequence[EpsN]) -> Verdict:
    if any(r.verdict is Verdict.REFUTED for r in rows):
        return Verdict.REFUTED
    if all(r.verdict is Verdict.CERTIFIED for r in rows):
        return Verdict.CERTIFIED
    return Verdict.INCONCLUSIVE


def limit_check(space: AnalyticSpace, seq: SequenceSpec, candidate: float,
                eps_schedule: Sequence[float] = DEFAULT_EPS,
                n_max: int = DEFAULT_N_MAX) -> ConvergenceCertificate:
    """Evidence that ``d(x_n, candidate) -> 0``.

    For each eps the reported N is the last index (0 if none) with
    ``d(x_N, candidate) >= eps``; it is accepted when at least half the
    horizon lies beyond it. A violation at ``n_max`` itself refutes.
    """
    eps = _check_schedule(eps_schedule, n_max)
    n_max = _horizon(seq, n_max)
    last_bad = [0] * len(eps)
    for start in range(1, n_max + 1, CHUNK):
        ns = np.arange(start, min(start + CHUNK, n_max + 1))
        dist = eval_distance(space, seq.values(ns), candidate)
        for k, e in enumerate(eps):
            bad = np.flatnonzero(dist >= e)
            if bad.size:
                last_bad[k] = int(ns[bad[-1]])
    end_d = eval_distance(space, seq(n_max), candidate)
    rows = tuple(_classify_eps(e, lb, end_d >= e, n_max)
                 for e, lb in zip(eps, last_bad))
    verdict = _overall(rows)
    if verdict is Verdict.REFUTED:
        e = next(r.eps for r in rows if r.verdict is Verdict.REFUTED)
        return ConvergenceCertificate(candidate, n_max, rows, verdict,
                                      n_max, e, end_d)
    return ConvergenceCertificate(candidate, n_max, rows, verdict)


def certified_limits(space: AnalyticSpace, seq: SequenceSpec,
                     candidates: Sequence[float], **kw) -> list[float]:
    return [c for c in candidates if limit_check(space, seq, c, **kw).certified]


@dataclass(frozen=True)
class CauchyReport:
    n_max: int
    schedule: tuple[EpsN, ...]
    verdict: Verdict
    bound: float                       # max d(x_n, x_m) over the horizon
    witness: Optional[tuple[int, int]] = None
    witness_d: Optional[float] = None
    witness_eps: Optional[float] = None

    @property
    def certified(self) -> bool:
        return self.verdict is Verdict.CERTIFIED


def _pair_tail_max(space, seq, n_max):
    """r[n] = max over m in (n, n_max] of d(x_n, x_m), with its argmax m."""
    xs = seq.values(np.arange(1, n_max + 1))
    r = np.full(n_max + 1, -np.inf)
    arg = np.zeros(n_max + 1, dtype=np.int64)
    for s in range(0, n_max - 1, PAIR_BLOCK):
        e = min(s + PAIR_BLOCK, n_max - 1)
        block = eval_distance(space, xs[s:e, None], xs[None, :])
        cols = np.arange(n_max)[None, :]
        rows = np.arange(s, e)[:, None]
        block = np.where(cols > rows, block, -np.inf)
        j = np.argmax(block, axis=1)
        r[s + 1:e + 1] = block[np.arange(e - s), j]
        arg[s + 1:e + 1] = j + 1
    return r, arg


def _pair_schedule(r, n_max, eps_list):
    rows = []
    for e in eps_list:
        bad = np.flatnonzero(r[1:n_max] >= e)
        last_bad = int(bad[-1]) + 1 if bad.size else 0
        end_bad = n_max >= 2 and r[n_max - 1] >= e
        rows.append(_classify_eps(e, last_bad, end_bad, n_max))
    return tuple(rows)


def _cauchy_report(r, arg, n_max, rows) -> CauchyReport:
    verdict = _overall(rows)
    bound = float(max(r[1:n_max].max(initial=0.0), 0.0))
    if verdict is Verdict.REFUTED:
        e = next(x.eps for x in rows if x.verdict is Verdict.REFUTED)
        n = n_max - 1
        return CauchyReport(n_max, rows, verdict, bound, (n, int(arg[n])),
                            float(r[n]), e)
    return CauchyReport(n_max, rows, verdict, bound)


def cauchy_check(space: AnalyticSpace, seq: SequenceSpec,
                 eps_schedule: Sequence[float] = CAUCHY_EPS,
                 n_max: int = CAUCHY_N_MAX) -> CauchyReport:
    """Evidence that ``d(x_n, x_m) -> 0`` by an exhaustive pair scan.

    Cost is O(n_max**2) distance evaluations. ``bound`` is the largest
    pairwise distance seen, so a certified prefix is bounded.
    """
    eps = _check_schedule(eps_schedule, n_max)
    n_max = _horizon(seq, n_max)
    if n_max < 2:
        raise PowerDistError("need at least two terms")
    r, arg = _pair_tail_max(space, seq, n_max)
    return _cauchy_report(r, arg, n_max, _pair_schedule(r, n_max, eps))


def cauchy_from_convergence(space: AnalyticSpace, seq: SequenceSpec,
                            cert: ConvergenceCertificate, sigma: float,
                            n_max: Optional[int] = None) -> CauchyReport:
    """Check the Cauchy schedule implied by a convergence certificate.

    In a space where the relation holds with constant sigma, ``d(x_n, x) <
    eps`` for n > N gives ``d(x_n, x_m) < 2 sigma eps`` for n, m > N. Each
    certified ``(eps, N)`` becomes ``(2 sigma eps, N)`` and is verified by
    the pair scan up to ``n_max`` (default: the certificate's horizon).
    """
    if not cert.certified:
        raise UncertifiedLimitError("convergence certificate is not certified")
    n_max = cert.n_max if n_max is None else min(int(n_max), cert.n_max)
    n_max = _horizon(seq, n_max)
    r, arg = _pair_tail_max(space, seq, n_max)
    rows = []
    for row in cert.schedule:
        e2 = 2.0 * sigma * row.eps
        bad = np.flatnonzero(r[row.n + 1:n_max] >= e2)
        if row.n >= n_max - 1 or not bad.size:
            rows.append(EpsN(e2, row.n, Verdict.CERTIFIED))
        else:
            rows.append(EpsN(e2, None, Verdict.REFUTED))
    return _cauchy_report(r, arg, n_max, tuple(rows))


@dataclass(frozen=True)
class ContinuityReport:
    tail_value: float           # limit of d(x_n, y_n) read off the tail
    limit_distance: float       # d(lim x_n, lim y_n)
    discrepancy: float
    oscillation: float
    continuous: bool
    certificates: tuple[ConvergenceCertificate, ConvergenceCertificate] = field(repr=False)

    @property
    def verdict(self) -> str:
        return "continuous-evidence" if self.continuous else "discontinuous"


def _tail_estimates(space, seq_x, seq_y, n_max):
    if seq_x.length is None and seq_y.length is None:
        ns = np.array([2 ** k for k in TAIL_KS], dtype=np.int64)
        v = eval_distance(space, seq_x.values(ns), seq_y.values(ns))
        # first-order extrapolation in h = 1/n between consecutive dyadic n
        est = 2.0 * v[1:] - v[:-1]
        est = np.where(v[1:] == v[:-1], v[1:], est)
        return float(est[-1]), float(est.max() - est.min())
    ns = np.arange(max(1, n_max // 2), n_max + 1)
    v = eval_distance(space, seq_x.values(ns), seq_y.values(ns))
    return float(v[-1]), float(v.max() - v.min())


def distance_continuity_check(space: AnalyticSpace, seq_x: SequenceSpec,
                              seq_y: SequenceSpec, lim_x: float, lim_y: float,
                              n_max: int = 10 ** 6,
                              eps_schedule: Sequence[float] = (1e-1, 1e-2, 1e-3, 1e-4, 1e-5)
                              ) -> ContinuityReport:
    """Compare ``lim d(x_n, y_n)`` against ``d(lim x_n, lim y_n)``.

    Both limits must first be certified by ``limit_check``. The verdict is
    ``discontinuous`` only when the discrepancy exceeds ten times the tail
    oscillation (and 1e-12).
    """
    cx = limit_check(space, seq_x, lim_x, eps_schedule, n_max)
    cy = limit_check(space, seq_y, lim_y, eps_schedule, n_max)
    for c, name in ((cx, "x"), (cy, "y")):
        if not c.certified:
            raise UncertifiedLimitError(
                f"limit {c.candidate!r} of the {name} sequence is {c.verdict.value}")
    tail, osc = _tail_estimates(space, seq_x, seq_y, n_max)
    d_lim = eval_distance(space, lim_x, lim_y)
    disc = abs(tail - d_lim)
    discontinuous = disc > 10.0 * osc and disc > 1e-12
    return ContinuityReport(tail, d_lim, disc, osc, not discontinuous, (cx, cy))


_ANCHORS = {
    AnalyticSpace.EX321: (0.0, 2.0, 4.0),
    AnalyticSpace.EX322: (0.0,),
    AnalyticSpace.EX323: (0.0, 1.0),
    AnalyticSpace.EX324: (),
}
_FRACTIONS = np.array([0.1, 0.2, 0.3, 0.4, 0.5, 0.6, 0.7, 0.8, 0.9])


def default_probes(space: AnalyticSpace, center: float, interior: float,
                   eps: float, count: int = 1000) -> np.ndarray:
    """Grid around the interior point plus points hugging the special branches."""
    grid = np.linspace(interior - eps, interior + eps, count + 2)[1:-1]
    anchors = set(_ANCHORS[AnalyticSpace(space)]) | {float(center), float(interior)}
    adv = [a + s * _FRACTIONS * eps for a in sorted(anchors) for s in (1.0, -1.0)]
    return np.concatenate([grid, *adv])


@dataclass(frozen=True)
class BallProbe:
    eps: float
    probe: Optional[float]      # point within eps of the interior point but outside the ball


@dataclass(frozen=True)
class BallOpennessResult:
    """``non_open`` is True when every eps in the grid produced a witness."""

    center: float
    radius: float
    interior: float
    probes: tuple[BallProbe, ...]

    @property
    def non_open(self) -> bool:
        return all(p.probe is not None for p in self.probes)

    @property
    def witness(self) -> Optional[BallProbe]:
        return self.probes[-1] if self.non_open else None

    @property
    def verdict(self) -> str:
        return "non-open" if self.non_open else "pass"


def ball_openness_check(space: AnalyticSpace, center: float, radius: float,
                        interior_point: float,
                        eps_grid: Sequence[float] = (1.0, 1e-1, 1e-2, 1e-3, 1e-4, 1e-5, 1e-6),
                        probes: Optional[Sequence[float]] = None) -> BallOpennessResult:
    """Look for points of B(interior, eps) outside B(center, radius).

    A ball is open at ``interior_point`` if some eps keeps B(interior, eps)
    inside it, so the verdict is ``non-open`` only if every eps in the grid
    yields an escaping probe; otherwise ``pass`` (evidence only).
    """
    space = AnalyticSpace(space)
    if not radius > 0:
        raise PowerDistError("radius must be positive")
    if not eval_distance(space, center, interior_point) < radius:
        raise PowerDistError(f"{interior_point!r} is not inside B({center!r}, {radius!r})")
    grid = tuple(float(e) for e in eps_grid)
    if not grid or any(a <= b for a, b in zip(grid, grid[1:])) or grid[-1] <= 0:
        raise PowerDistError("eps grid must be positive and strictly decreasing")
    extra = np.asarray([] if probes is None else probes, dtype=float)
    found = []
    for e in grid:
        cand = np.concatenate([extra, default_probes(space, center, interior_point, e)])
        near = eval_distance(space, interior_point, cand) < e
        out = eval_distance(space, center, cand) >= radius
        hit = np.flatnonzero(near & out)
        found.append(BallProbe(e, float(cand[hit[0]]) if hit.size else None))
    return BallOpennessResult(float(center), float(radius), float(interior_point),
                              tuple(found))
