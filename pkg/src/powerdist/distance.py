"""Finite dissimilarity matrices: validation, diameter, boundedness."""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Iterable, Sequence

import numpy as np

from .errors import MatrixError

INGEST_TOL = 1e-12
WITNESS_CAP = 100


@dataclass(frozen=True)
class AxiomWitness:
    i: int
    j: int
    value: float
    other: float | None = None


@dataclass(frozen=True)
class DistanceValidation:
    """Outcome of checking the distance axioms on a square array.

    Each ``*_witnesses`` list holds offending index pairs (capped at 100);
    a flag is true exactly when its list is empty.
    """

    n: int
    nonnegative_witnesses: list[AxiomWitness] = field(default_factory=list)
    nondegenerate_witnesses: list[AxiomWitness] = field(default_factory=list)
    symmetric_witnesses: list[AxiomWitness] = field(default_factory=list)
    diagonal_witnesses: list[AxiomWitness] = field(default_factory=list)

    @property
    def nonnegative(self) -> bool:
        return not self.nonnegative_witnesses

    @property
    def nondegenerate(self) -> bool:
        return not self.nondegenerate_witnesses

    @property
    def symmetric(self) -> bool:
        return not self.symmetric_witnesses

    @property
    def zero_diagonal(self) -> bool:
        return not self.diagonal_witnesses

    @property
    def ok(self) -> bool:
        return (self.nonnegative and self.nondegenerate and self.symmetric
                and self.zero_diagonal)


def _as_square(candidate) -> np.ndarray:
    try:
        a = np.array(candidate, dtype=float)
    except (TypeError, ValueError) as exc:
        raise MatrixError(f"not a numeric array: {exc}") from None
    if a.ndim != 2 or a.shape[0] != a.shape[1] or a.shape[0] < 1:
        raise MatrixError(f"expected a non-empty square array, got shape {a.shape}")
    if not np.isfinite(a).all():
        i, j = np.argwhere(~np.isfinite(a))[0]
        raise MatrixError(f"non-finite entry at ({i},{j})", row=int(i), col=int(j))
    return a


def validate(candidate, tol: float = 0.0) -> DistanceValidation:
    """Check non-negativity, nondegeneracy, symmetry and a zero diagonal.

    ``tol`` is the absolute slack allowed for symmetry and the diagonal.
    """
    a = _as_square(candidate)
    n = a.shape[0]
    off = ~np.eye(n, dtype=bool)
    upper = np.triu(off)

    def collect(mask, other=None):
        out = []
        for i, j in np.argwhere(mask)[:WITNESS_CAP]:
            o = None if other is None else float(other[i, j])
            out.append(AxiomWitness(int(i), int(j), float(a[i, j]), o))
        return out

    diag = collect(np.eye(n, dtype=bool) & (np.abs(a) > tol))
    neg = collect(off & (a < 0))
    degen = collect(upper & ((a == 0.0) | (a.T == 0.0)))
    asym = collect(upper & (np.abs(a - a.T) > tol), other=a.T)
    return DistanceValidation(n, neg, degen, asym, diag)


def _label_for(x: float) -> str:
    x = float(x)
    if x.is_integer() and abs(x) < 1e15:
        return str(int(x))
    return repr(x)


class DissimilarityMatrix:
    """Immutable symmetric, nonnegative matrix with zero diagonal.

    Entries within ``INGEST_TOL`` of symmetric (and of a zero diagonal) are
    repaired on construction; anything further off raises ``MatrixError``.
    Off-diagonal zeros are accepted and reported by ``nondegenerate``.
    """

    __slots__ = ("_d", "_labels", "_nondegenerate")

    def __init__(self, entries, labels: Sequence[str] | None = None):
        a = _as_square(entries)
        n = a.shape[0]
        check = validate(a, tol=INGEST_TOL)
        if not check.zero_diagonal:
            w = check.diagonal_witnesses[0]
            raise MatrixError(f"nonzero diagonal at ({w.i},{w.j}): {w.value!r}",
                              row=w.i, col=w.j)
        if not check.nonnegative:
            w = check.nonnegative_witnesses[0]
            raise MatrixError(f"negative entry at ({w.i},{w.j}): {w.value!r}",
                              row=w.i, col=w.j)
        if not check.symmetric:
            w = check.symmetric_witnesses[0]
            raise MatrixError(
                f"symmetry violated at ({w.i},{w.j}): {_num(w.value)} vs {_num(w.other)}",
                row=w.i, col=w.j)
        sym = a.copy()
        off = a != a.T
        sym[off] = ((a + a.T) / 2.0)[off]
        np.fill_diagonal(sym, 0.0)
        sym.setflags(write=False)
        self._d = sym
        if labels is None:
            labels = [str(i) for i in range(n)]
        labels = [str(s) for s in labels]
        if len(labels) != n:
            raise MatrixError(f"{len(labels)} labels for {n} points")
        self._labels = tuple(labels)
        self._nondegenerate = validate(sym).nondegenerate

    @classmethod
    def from_points(cls, points: Iterable[float], metric=None) -> "DissimilarityMatrix":
        """Pairwise matrix of real points (Euclidean unless ``metric`` given)."""
        pts = [float(x) for x in points]
        if metric is None:
            arr = np.asarray(pts)
            d = np.abs(arr[:, None] - arr[None, :])
        else:
            d = np.array([[metric(x, y) for y in pts] for x in pts], dtype=float)
        return cls(d, labels=[_label_for(x) for x in pts])

    @property
    def n(self) -> int:
        return self._d.shape[0]

    @property
    def entries(self) -> np.ndarray:
        return self._d

    @property
    def labels(self) -> tuple[str, ...]:
        return self._labels

    @property
    def nondegenerate(self) -> bool:
        return self._nondegenerate

    def __getitem__(self, ij) -> float:
        return float(self._d[ij])

    def __len__(self) -> int:
        return self.n

    def __eq__(self, other) -> bool:
        if not isinstance(other, DissimilarityMatrix):
            return NotImplemented
        return (self._labels == other._labels
                and np.array_equal(self._d, other._d))

    def __repr__(self) -> str:
        return f"DissimilarityMatrix(n={self.n}, labels={list(self._labels)})"

    def to_list(self) -> list[float]:
        """Row-major n*n values."""
        return [float(v) for v in self._d.ravel()]

    def index_of(self, label: str) -> int:
        return self._labels.index(label)


def _num(x) -> str:
    return _label_for(x) if x is not None else "?"


def _check_subset(m: DissimilarityMatrix, subset) -> list[int]:
    idx = sorted(set(int(i) for i in subset))
    for i in idx:
        if not 0 <= i < m.n:
            raise IndexError(f"index {i} out of range for n={m.n}")
    return idx


def diameter(m: DissimilarityMatrix, subset: Iterable[int] | None = None) -> float:
    """sup of d over pairs in ``subset`` (all points if None); 0 if |A| < 2."""
    idx = list(range(m.n)) if subset is None else _check_subset(m, subset)
    if len(idx) < 2:
        return 0.0
    return float(m.entries[np.ix_(idx, idx)].max())


def is_bounded(m: DissimilarityMatrix, subset: Iterable[int] | None = None) -> bool:
    return bool(np.isfinite(diameter(m, subset)))
