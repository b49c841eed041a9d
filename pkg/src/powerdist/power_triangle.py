"""Power triangle function, relation checks and minimal-sigma profiles.

For a distance matrix ``d`` and parameters ``(p, sigma)`` the relation
requires, for every admissible triple ``(x, y, z)``::

    d(x, y) <= tau(p, sigma; x, y, z) = 2 * sigma * M_p(d(x, z), d(z, y))

where ``M_p`` is the equal-weight power mean of the two legs. All scans are
exhaustive over triples; rows (the ``x`` index) may be split across worker
threads and are merged deterministically (largest score, then smallest
``(x, y, z)``).
"""

from __future__ import annotations

import enum
import math
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from typing import Callable, Optional, Sequence

import numpy as np

from .distance import DissimilarityMatrix
from .errors import (DegenerateMatrixError, PowerDistError,
                     UnsupportedParameterError, VacuousRelationError)
from .numerics import INF, check_extended, pair_mean

REL_TOL = 1e-12
PROFILE_TOL = 1e-10
PARALLEL_MIN_N = 192


class TriplePolicy(str, enum.Enum):
    """Which triples the relation quantifies over.

    ``EXCLUDE_DEGENERATE`` skips ``z in {x, y}``; ``ALL_TRIPLES`` keeps them.
    """

    EXCLUDE_DEGENERATE = "exclude-degenerate"
    ALL_TRIPLES = "all-triples"


DEFAULT_POLICY = TriplePolicy.EXCLUDE_DEGENERATE


@dataclass(frozen=True)
class PowerParams:
    p: float
    sigma: float

    def __post_init__(self):
        check_extended(self.p, "p")
        s = check_extended(self.sigma, "sigma")
        if not (s > 0 and math.isfinite(s)):
            raise PowerDistError(f"sigma must be a positive real, got {self.sigma}")


@dataclass(frozen=True)
class TripleWitness:
    """``deficit = lhs - rhs``; positive means the triple violates the relation."""

    x: int
    y: int
    z: int
    lhs: float
    rhs: float
    deficit: float

    @property
    def triple(self) -> tuple[int, int, int]:
        return (self.x, self.y, self.z)


@dataclass(frozen=True)
class SigmaWitness:
    """Triple realizing sigma_min: ``ratio = lhs / (2 * mean)``."""

    x: int
    y: int
    z: int
    lhs: float
    mean: float
    ratio: float

    @property
    def triple(self) -> tuple[int, int, int]:
        return (self.x, self.y, self.z)


@dataclass(frozen=True)
class RelationResult:
    holds: bool
    params: PowerParams
    policy: TriplePolicy
    witness: Optional[TripleWitness]


@dataclass(frozen=True)
class SigmaMin:
    p: float
    sigma: float
    witness: Optional[SigmaWitness]


@dataclass(frozen=True)
class ProfileRow:
    p: float
    sigma_min: float
    boundary: Optional[float]
    witness: Optional[SigmaWitness]


@dataclass(frozen=True)
class SigmaProfile:
    policy: TriplePolicy
    rows: tuple[ProfileRow, ...]

    @property
    def ps(self) -> list[float]:
        return [r.p for r in self.rows]

    @property
    def sigmas(self) -> list[float]:
        return [r.sigma_min for r in self.rows]


def tau(params: PowerParams, a, b):
    """Power triangle function for legs ``a = d(x, z)`` and ``b = d(z, y)``.

    Uses the closed forms at p in {inf, 2, 1, 0, -1, -inf}. Accepts scalars
    or arrays.
    """
    p, s = params.p, params.sigma
    scalar = np.isscalar(a) and np.isscalar(b)
    a = np.asarray(a, dtype=float)
    b = np.asarray(b, dtype=float)
    with np.errstate(divide="ignore", invalid="ignore", over="ignore"):
        if p == INF:
            out = 2 * s * np.maximum(a, b)
        elif p == 2.0:
            out = 2 * s * np.hypot(a, b) * math.sqrt(0.5)
        elif p == 1.0:
            out = s * (a + b)
        elif p == 0.0:
            out = 2 * s * np.sqrt(a) * np.sqrt(b)
        elif p == -1.0:
            out = 4 * s / (1.0 / a + 1.0 / b)
        elif p == -INF:
            out = 2 * s * np.minimum(a, b)
        else:
            out = 2 * s * pair_mean(a, b, p)
    return float(out) if scalar else out


def boundary_sigma(p: float) -> float:
    """Feasibility boundary ``sigma = 2**(1/p - 1)`` (1/2 at p = +-inf)."""
    p = check_extended(p, "p")
    if p == 0.0:
        raise UnsupportedParameterError("boundary sigma is undefined at p = 0")
    if math.isinf(p):
        return 0.5
    return 2.0 ** (1.0 / p - 1.0)


def boundary_p(sigma: float) -> float:
    """Inverse of ``boundary_sigma``: ``p = ln 2 / ln(2 sigma)``."""
    if not sigma > 0:
        raise PowerDistError("sigma must be positive")
    if sigma == 0.5:
        return INF
    return math.log(2.0) / math.log(2.0 * sigma)


def _worker_count(workers: Optional[int]) -> int:
    if workers is None:
        try:
            workers = int(os.environ.get("POWERDIST_THREADS", "0"))
        except ValueError:
            workers = 0
    if workers <= 0:
        workers = min(os.cpu_count() or 1, 8)
    return max(1, workers)


def _admissible(n: int, i: int, policy: TriplePolicy) -> np.ndarray:
    """Mask over (y, z) for row x = i."""
    mask = np.ones((n, n), dtype=bool)
    mask[i, :] = False  # y == x: lhs is 0, nothing to check
    if policy is TriplePolicy.EXCLUDE_DEGENERATE:
        mask[:, i] = False
        np.fill_diagonal(mask, False)
    return mask


def _scan(n: int, row_fn: Callable[[int], Optional[tuple]],
          workers: Optional[int]) -> Optional[tuple]:
    """Run ``row_fn`` on every row and keep the max-score result.

    ``row_fn`` returns ``(score, x, y, z, ...)`` or None. Ties keep the
    lexicographically smallest triple.
    """
    w = _worker_count(workers)
    if w > 1 and n >= PARALLEL_MIN_N:
        with ThreadPoolExecutor(max_workers=w) as pool:
            results = list(pool.map(row_fn, range(n)))
    else:
        results = [row_fn(i) for i in range(n)]
    best = None
    for r in results:
        if r is None:
            continue
        if best is None or r[0] > best[0]:
            best = r
    return best


def _row_argmax(score: np.ndarray, mask: np.ndarray):
    score = np.where(mask, score, -INF)
    k = int(np.argmax(score))
    y, z = divmod(k, score.shape[1])
    if not mask[y, z]:
        return None
    return float(score[y, z]), y, z


def check_relation(m: DissimilarityMatrix, params: PowerParams,
                   policy: TriplePolicy = DEFAULT_POLICY, *,
                   flag_only: bool = False,
                   workers: Optional[int] = None) -> RelationResult:
    """Does ``d(x, y) <= tau + 1e-12 * max(1, d(x, y))`` hold on every triple?

    The returned witness maximizes the deficit ``lhs - tau``; on success it
    is the tightest triple. With ``flag_only`` the scan stops at the first
    row holding a violation.
    """
    policy = TriplePolicy(policy)
    d = m.entries
    n = m.n
    if policy is TriplePolicy.ALL_TRIPLES and params.p <= 0 and n > 1 and d.max() > 0:
        raise VacuousRelationError(
            f"relation vacuously fails at degenerate triples: with p={params.p} "
            "tau(x, y, x) = 0 for every pair; use the exclude-degenerate policy")

    def row(i):
        mask = _admissible(n, i, policy)
        lhs = d[i][:, None]
        rhs = tau(params, d[i][None, :], d)
        deficit = lhs - rhs
        found = _row_argmax(deficit, mask)
        if found is None:
            return None
        score, y, z = found
        return score, i, y, z, float(d[i, y]), float(rhs[y, z])

    def violates(r):
        return r is not None and r[0] > REL_TOL * max(1.0, r[4])

    if flag_only:
        best = None
        for i in range(n):
            r = row(i)
            if violates(r):
                best = r
                break
            if r is not None and (best is None or r[0] > best[0]):
                best = r
    else:
        best = _scan(n, row, workers)
    if best is None:
        return RelationResult(True, params, policy, None)
    score, x, y, z, lhs, rhs = best
    return RelationResult(not violates(best), params, policy,
                          TripleWitness(x, y, z, lhs, rhs, score))


def sigma_min(m: DissimilarityMatrix, p: float,
              policy: TriplePolicy = DEFAULT_POLICY, *,
              workers: Optional[int] = None) -> SigmaMin:
    """Smallest sigma for which the relation holds at exponent ``p``.

    Max over admissible triples of ``d(x, y) / (2 M_p(d(x, z), d(z, y)))``;
    the ratio is +inf when the mean is 0 and ``d(x, y) > 0``, and triples
    with ``d(x, y) = 0`` are skipped. Returns 0 with no witness when no
    triple constrains sigma.
    """
    p = check_extended(p, "p")
    policy = TriplePolicy(policy)
    if m.n < 2:
        raise PowerDistError("sigma_min needs at least two points")
    d = m.entries
    n = m.n

    def row(i):
        mask = _admissible(n, i, policy) & (d[i][:, None] > 0)
        mean = pair_mean(d[i][None, :], d, p)
        lhs = np.broadcast_to(d[i][:, None], mean.shape)
        with np.errstate(divide="ignore", invalid="ignore"):
            ratio = np.where(mean > 0, lhs / (2.0 * mean), INF)
        found = _row_argmax(ratio, mask)
        if found is None:
            return None
        score, y, z = found
        return score, i, y, z, float(d[i, y]), float(mean[y, z])

    best = _scan(n, row, workers)
    if best is None:
        return SigmaMin(p, 0.0, None)
    score, x, y, z, lhs, mean = best
    return SigmaMin(p, score, SigmaWitness(x, y, z, lhs, mean, score))


def _check_grid(p_grid: Sequence[float]) -> list[float]:
    grid = [check_extended(p, "p") for p in p_grid]
    if not grid:
        raise PowerDistError("empty p grid")
    for a, b in zip(grid, grid[1:]):
        if not a < b:
            raise PowerDistError(f"p grid must be strictly increasing ({a} then {b})")
    return grid


def sigma_profile(m: DissimilarityMatrix, p_grid: Sequence[float],
                  policy: TriplePolicy = DEFAULT_POLICY, *,
                  workers: Optional[int] = None) -> SigmaProfile:
    """sigma_min at every grid point, with the boundary curve alongside."""
    grid = _check_grid(p_grid)
    rows = []
    for p in grid:
        s = sigma_min(m, p, policy, workers=workers)
        b = None if p == 0.0 else boundary_sigma(p)
        rows.append(ProfileRow(p, s.sigma, b, s.witness))
    for a, b in zip(rows, rows[1:]):
        # antitone in p; a failure here is a kernel bug, not bad input
        assert a.sigma_min >= b.sigma_min - PROFILE_TOL, (a, b)
    return SigmaProfile(TriplePolicy(policy), tuple(rows))


@dataclass(frozen=True)
class LowerBoundWitness:
    x: int
    y: int
    z: int
    lhs: float
    bound: float
    deficit: float


@dataclass(frozen=True)
class LowerBoundResult:
    """Outcome of the lower-bound check.

    ``holds`` covers the power-form bound; ``reverse_holds`` is set only on
    the boundary ``2 sigma = 2**(1/p)`` and covers
    ``d(x, y) >= |d(x, z) - d(z, y)|``.
    """

    params: PowerParams
    relation_holds: bool
    holds: bool
    witness: Optional[LowerBoundWitness]
    on_boundary: bool
    reverse_holds: Optional[bool]
    reverse_witness: Optional[LowerBoundWitness]


def lower_bound_check(m: DissimilarityMatrix, params: PowerParams,
                      policy: TriplePolicy = DEFAULT_POLICY) -> LowerBoundResult:
    """Lower bounds implied by the relation, checked over all triples.

    With ``c = 2 / (2 sigma)**p`` and p > 0::

        d^p(x, y) >= max(0, c d^p(x, z) - d^p(z, y), c d^p(y, z) - d^p(z, x))

    For p < 0 raising to the p-th power reverses the order, so the checked
    form is ``d^p(x, y) <= min(c d^p(x, z) - d^p(z, y), c d^p(y, z) - d^p(z, x))``.
    Whether the relation itself holds is reported, not assumed.
    """
    p, s = params.p, params.sigma
    if p == 0.0 or math.isinf(p):
        raise UnsupportedParameterError(
            f"the power-form lower bound needs a finite p != 0, got {p}")
    policy = TriplePolicy(policy)
    if p < 0 and not m.nondegenerate:
        raise DegenerateMatrixError("p < 0 needs a nondegenerate matrix")
    rel = check_relation(m, params, policy)
    d = m.entries
    n = m.n
    c = 2.0 / (2.0 * s) ** p
    with np.errstate(divide="ignore"):
        dp = d ** p
    np.fill_diagonal(dp, 0.0 if p > 0 else INF)
    on_boundary = abs(2.0 * s - 2.0 ** (1.0 / p)) <= REL_TOL * 2.0 ** (1.0 / p)

    best = None
    rev_best = None
    err = np.seterr(invalid="ignore", over="ignore")
    try:
        rows = [_lower_bound_row(i, n, d, dp, c, p, policy, on_boundary)
                for i in range(n)]
    finally:
        np.seterr(**err)
    for cand, rev_cand in rows:
        if cand is not None and (best is None or cand[0] > best[0]):
            best = cand
        if rev_cand is not None and (rev_best is None or rev_cand[0] > rev_best[0]):
            rev_best = rev_cand

    def to_witness(b):
        if b is None:
            return None
        return LowerBoundWitness(b[1], b[2], b[3], b[4], b[5], b[6])

    holds = best is None or best[0] <= REL_TOL
    rev_holds = None
    if on_boundary:
        rev_holds = rev_best is None or rev_best[0] <= REL_TOL
    return LowerBoundResult(params, rel.holds, holds, to_witness(best),
                            on_boundary, rev_holds, to_witness(rev_best))


def _lower_bound_row(i, n, d, dp, c, p, policy, on_boundary):
    mask = _admissible(n, i, policy)
    # rows index y, columns index z
    t1 = c * dp[i][None, :] - dp                 # c d^p(x,z) - d^p(z,y)
    t2 = c * dp - dp[i][None, :]                 # c d^p(y,z) - d^p(z,x)
    lhs = dp[i][:, None]
    if p > 0:
        bound = np.maximum(0.0, np.maximum(t1, t2))
        deficit = bound - lhs
    else:
        bound = np.minimum(t1, t2)
        deficit = lhs - bound
    rel_def = deficit / np.maximum(1.0, np.abs(lhs))
    cand = rev_cand = None
    found = _row_argmax(rel_def, mask)
    if found is not None:
        _, y, z = found
        cand = (float(rel_def[y, z]), i, y, z,
                float(lhs[y, 0]), float(bound[y, z]), float(deficit[y, z]))
    if on_boundary:
        rev = np.abs(d[i][None, :] - d) - d[i][:, None]
        rev_scaled = rev / np.maximum(1.0, d[i][:, None])
        found = _row_argmax(rev_scaled, mask)
        if found is not None:
            _, y, z = found
            rev_cand = (float(rev_scaled[y, z]), i, y, z, float(d[i, y]),
                        float(abs(d[i, z] - d[z, y])), float(rev[y, z]))
    return cand, rev_cand
