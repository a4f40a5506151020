"""Validated finite metric spaces, balls, tubes and the Hausdorff distance.

Two comparison conventions are used throughout the package:

* strict inequalities (open balls, tubes, pseudo-orbit and tracing bounds)
  are evaluated robustly as ``a < b - tol``, so values that agree up to
  rounding count as *not* strictly smaller;
* feasibility bounds of approximation maps are evaluated as ``a <= b + tol``.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable, Sequence

import numpy as np

from .errors import (
    AsymmetricMatrix,
    DuplicatePoints,
    EmptySet,
    NegativeDistance,
    NonzeroDiagonal,
    NotSquare,
    TriangleViolation,
)

DEFAULT_TOL = 1e-9


def lt(a, b, tol: float):
    """Robust strict comparison ``a < b``."""
    return np.less(a, np.subtract(b, tol))


def le(a, b, tol: float):
    """Tolerant comparison ``a <= b``."""
    return np.less_equal(a, np.add(b, tol))


class FiniteMetricSpace:
    """Labelled points with a validated, read-only distance matrix.

    Instances are immutable; build them with :func:`validate_metric`.
    """

    __slots__ = ("labels", "dist", "tol")

    def __init__(self, labels: Sequence, dist: np.ndarray, tol: float = DEFAULT_TOL):
        dist = np.array(dist, dtype=np.float64)
        dist.setflags(write=False)
        object.__setattr__(self, "labels", tuple(labels))
        object.__setattr__(self, "dist", dist)
        object.__setattr__(self, "tol", float(tol))

    def __setattr__(self, name, value):
        raise AttributeError("FiniteMetricSpace is immutable")

    def __len__(self) -> int:
        return self.dist.shape[0]

    def __repr__(self) -> str:
        return f"FiniteMetricSpace(n={len(self)}, diameter={diameter(self):g})"

    def d(self, i: int, j: int) -> float:
        return float(self.dist[i, j])

    def same_as(self, other: "FiniteMetricSpace") -> bool:
        """True when both spaces have the same size and distance matrix."""
        return self is other or (
            self.dist.shape == other.dist.shape and np.array_equal(self.dist, other.dist)
        )

    def subspace(self, indices: Iterable[int]) -> "FiniteMetricSpace":
        idx = list(indices)
        return FiniteMetricSpace([self.labels[i] for i in idx], self.dist[np.ix_(idx, idx)], self.tol)


class PointSet:
    """A sorted, duplicate-free subset of one space."""

    __slots__ = ("space", "members")

    def __init__(self, space: FiniteMetricSpace, members: Iterable[int] = ()):
        n = len(space)
        ms = sorted({int(m) for m in members})
        if ms and (ms[0] < 0 or ms[-1] >= n):
            raise IndexError(f"point index out of range for a {n}-point space")
        self.space = space
        self.members = tuple(ms)

    @classmethod
    def from_mask(cls, space: FiniteMetricSpace, mask: np.ndarray) -> "PointSet":
        return cls(space, np.flatnonzero(mask).tolist())

    @classmethod
    def whole(cls, space: FiniteMetricSpace) -> "PointSet":
        return cls(space, range(len(space)))

    @property
    def indices(self) -> np.ndarray:
        return np.asarray(self.members, dtype=np.intp)

    def __iter__(self):
        return iter(self.members)

    def __len__(self) -> int:
        return len(self.members)

    def __contains__(self, i) -> bool:
        return int(i) in self.members

    def __eq__(self, other) -> bool:
        if not isinstance(other, PointSet):
            return NotImplemented
        return self.members == other.members and self.space.same_as(other.space)

    def __hash__(self) -> int:
        return hash(self.members)

    def issubset(self, other: "PointSet") -> bool:
        return set(self.members) <= set(other.members)

    def __repr__(self) -> str:
        return f"PointSet({list(self.members)})"


@dataclass(frozen=True)
class PointedSpace:
    """A space with one or more distinguished points."""

    space: FiniteMetricSpace
    basepoints: tuple

    def __post_init__(self):
        bps = tuple(int(b) for b in self.basepoints)
        if not bps:
            raise ValueError("a pointed space needs at least one basepoint")
        n = len(self.space)
        for b in bps:
            if not 0 <= b < n:
                raise IndexError(f"basepoint {b} out of range for a {n}-point space")
        object.__setattr__(self, "basepoints", bps)

    @property
    def basepoint(self) -> int:
        return self.basepoints[0]

    @property
    def single(self) -> bool:
        return len(self.basepoints) == 1

    def __len__(self) -> int:
        return len(self.space)


def validate_metric(matrix, tol: float = DEFAULT_TOL, labels: Sequence | None = None) -> FiniteMetricSpace:
    """Check the metric axioms and wrap ``matrix`` as a space.

    Raises the first violation found, in the order: shape, negativity,
    diagonal, symmetry, distinctness, triangle inequality.  Triangle
    witnesses are the lexicographically smallest ``(i, j, k)`` with
    ``d[i][j] > d[i][k] + d[k][j] + tol``.
    """
    d = np.array(matrix, dtype=np.float64)
    if d.ndim != 2 or d.shape[0] != d.shape[1]:
        raise NotSquare(f"distance matrix must be square, got shape {d.shape}")
    n = d.shape[0]
    if labels is None:
        labels = [str(i) for i in range(n)]
    elif len(labels) != n:
        raise NotSquare(f"{len(labels)} labels for a {n}x{n} matrix")
    if not np.all(np.isfinite(d)):
        raise NegativeDistance(*map(int, np.argwhere(~np.isfinite(d))[0]), float("nan"))

    neg = np.argwhere(d < -tol)
    if len(neg):
        i, j = map(int, neg[0])
        raise NegativeDistance(i, j, float(d[i, j]))
    diag = np.flatnonzero(np.abs(np.diag(d)) > tol)
    if len(diag):
        i = int(diag[0])
        raise NonzeroDiagonal(i, float(d[i, i]))
    asym = np.argwhere(np.abs(d - d.T) > tol)
    if len(asym):
        i, j = map(int, asym[0])
        raise AsymmetricMatrix(i, j)
    dup = np.argwhere((d <= tol) & ~np.eye(n, dtype=bool))
    if len(dup):
        i, j = map(int, dup[0])
        raise DuplicatePoints(i, j)

    d = 0.5 * (d + d.T)
    np.fill_diagonal(d, 0.0)
    witness = _triangle_witness(d, tol)
    if witness is not None:
        i, j, k = witness
        raise TriangleViolation(i, j, k, float(d[i, j] - d[i, k] - d[k, j]))
    return FiniteMetricSpace(labels, d, tol)


def _triangle_witness(d: np.ndarray, tol: float):
    n = d.shape[0]
    buf = np.empty_like(d)
    bad_k = []
    for k in range(n):
        np.add(d[:, k, None], d[None, k, :], out=buf)
        np.subtract(d, buf, out=buf)
        if buf.max() > tol:
            bad_k.append(k)
    best = None
    for k in bad_k:
        bad = d - d[:, k, None] - d[None, k, :] > tol
        i, j = map(int, np.argwhere(bad)[0])
        if best is None or (i, j, k) < best:
            best = (i, j, k)
    return best


def ball(space: FiniteMetricSpace, center: int, r: float) -> PointSet:
    """Open ball ``{p : d(center, p) < r}``; always contains ``center``."""
    mask = lt(space.dist[center], r, space.tol)
    mask[center] = True
    return PointSet.from_mask(space, mask)


def distance_to_set(space: FiniteMetricSpace, A: PointSet) -> np.ndarray:
    """``d(z, A)`` for every point ``z``; ``inf`` when ``A`` is empty."""
    if len(A) == 0:
        return np.full(len(space), np.inf)
    return space.dist[:, A.indices].min(axis=1)


def tube(space: FiniteMetricSpace, A: PointSet, eps: float) -> PointSet:
    """The open eps-tube ``N_eps(A) = {z : d(z, A) < eps}``."""
    if len(A) == 0:
        return PointSet(space)
    mask = lt(distance_to_set(space, A), eps, space.tol)
    mask[A.indices] = True
    return PointSet.from_mask(space, mask)


def hausdorff(space: FiniteMetricSpace, A: PointSet, B: PointSet) -> float:
    if len(A) == 0 or len(B) == 0:
        raise EmptySet("Hausdorff distance needs two nonempty sets")
    block = space.dist[np.ix_(A.indices, B.indices)]
    return float(max(block.min(axis=1).max(), block.min(axis=0).max()))


def diameter(space: FiniteMetricSpace) -> float:
    return float(space.dist.max()) if len(space) else 0.0
