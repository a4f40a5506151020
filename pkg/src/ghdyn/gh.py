"""Distortion, eps-GH approximations and Gromov-Hausdorff distances.

``gh_exact`` is the distance defined through pairs of approximation maps
(``i: X -> Y`` and ``j: Y -> X``).  ``gh_hat_exact`` is the correspondence
(embedding) distance.  The two differ by bounded factors and are kept
strictly apart.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass, field
from typing import Iterable

import numpy as np

from ._search import check_budget, covering_radii, distortions, iter_map_chunks, map_count
from .errors import NotAnApproximation, SizeMismatch
from .metric import FiniteMetricSpace, PointSet, le

log = logging.getLogger(__name__)

DEFAULT_MAX_ENUM = 10_000_000


class MapTable:
    """A map between finite spaces stored as an array of image indices.

    A ``partial`` table marks undefined points with ``-1``.
    """

    __slots__ = ("image", "cod_size", "partial")

    def __init__(self, image, cod_size: int, partial: bool = False):
        img = np.array(image, dtype=np.intp).reshape(-1)
        lo = -1 if partial else 0
        if img.size and (img.min() < lo or img.max() >= cod_size):
            raise ValueError(f"image indices must lie in [0, {cod_size})")
        img.setflags(write=False)
        self.image = img
        self.cod_size = int(cod_size)
        self.partial = bool(partial)

    @classmethod
    def identity(cls, n: int) -> "MapTable":
        return cls(np.arange(n), n)

    @classmethod
    def constant(cls, n: int, value: int, cod_size: int) -> "MapTable":
        return cls(np.full(n, value), cod_size)

    @property
    def dom_size(self) -> int:
        return len(self.image)

    @property
    def defined(self) -> np.ndarray:
        return self.image >= 0

    def __call__(self, i: int) -> int:
        return int(self.image[i])

    def __len__(self) -> int:
        return self.dom_size

    def __eq__(self, other) -> bool:
        if not isinstance(other, MapTable):
            return NotImplemented
        return self.cod_size == other.cod_size and np.array_equal(self.image, other.image)

    def __hash__(self) -> int:
        return hash((self.cod_size, self.image.tobytes()))

    def __repr__(self) -> str:
        return f"MapTable({self.image.tolist()}, cod_size={self.cod_size})"

    def compose(self, inner: "MapTable") -> "MapTable":
        """``self o inner``."""
        if inner.cod_size != self.dom_size:
            raise SizeMismatch("cannot compose: codomain and domain sizes differ")
        img = np.where(inner.image >= 0, self.image[np.maximum(inner.image, 0)], -1)
        return MapTable(img, self.cod_size, partial=bool((img < 0).any()))


@dataclass
class ApproxCertificate:
    """Outcome of checking one approximation claim at scale ``eps``.

    ``basepoint_ok`` is ``None`` for unpointed claims.  ``witnesses`` hold
    violating pairs or points, tagged by the failing condition.
    """

    eps: float
    kind: str
    distortion_ok: bool
    surjectivity_ok: bool
    basepoint_ok: bool | None = None
    witnesses: list = field(default_factory=list)
    measured_distortion: float = 0.0
    measured_covering_radius: float = 0.0
    clamped: bool = False
    degenerate: bool = False
    failing_basepoints: list = field(default_factory=list)
    notes: list = field(default_factory=list)

    @property
    def valid(self) -> bool:
        flags = [self.distortion_ok, self.surjectivity_ok]
        if self.basepoint_ok is not None:
            flags.append(self.basepoint_ok)
        return all(flags)

    def __bool__(self) -> bool:
        return self.valid

    def as_dict(self) -> dict:
        return {
            "eps": self.eps,
            "kind": self.kind,
            "valid": self.valid,
            "distortion_ok": self.distortion_ok,
            "surjectivity_ok": self.surjectivity_ok,
            "basepoint_ok": self.basepoint_ok,
            "measured_distortion": self.measured_distortion,
            "measured_covering_radius": self.measured_covering_radius,
            "clamped": self.clamped,
            "degenerate": self.degenerate,
            "failing_basepoints": list(self.failing_basepoints),
            "witnesses": [list(w) if isinstance(w, tuple) else w for w in self.witnesses],
            "notes": list(self.notes),
        }


def _check_sizes(i: MapTable, X: FiniteMetricSpace, Y: FiniteMetricSpace) -> None:
    if i.dom_size != len(X) or i.cod_size != len(Y):
        raise SizeMismatch(
            f"map is {i.dom_size}->{i.cod_size} but spaces have {len(X)} and {len(Y)} points"
        )


def _distortion_pair(i: MapTable, X, Y, idx: np.ndarray) -> tuple[float, tuple[int, int] | None]:
    if len(idx) < 2:
        return 0.0, None
    img = i.image[idx]
    E = np.abs(Y.dist[np.ix_(img, img)] - X.dist[np.ix_(idx, idx)])
    a, b = np.unravel_index(int(E.argmax()), E.shape)
    return float(E[a, b]), (int(idx[a]), int(idx[b]))


def distortion(i: MapTable, X: FiniteMetricSpace, Y: FiniteMetricSpace) -> float:
    _check_sizes(i, X, Y)
    return _distortion_pair(i, X, Y, np.arange(len(X)))[0]


def distortion_on(i: MapTable, X: FiniteMetricSpace, Y: FiniteMetricSpace, U: PointSet | Iterable[int]) -> float:
    """Distortion of ``i`` restricted to pairs inside ``U``."""
    _check_sizes(i, X, Y)
    idx = U.indices if isinstance(U, PointSet) else np.asarray(sorted(set(U)), dtype=np.intp)
    return _distortion_pair(i, X, Y, idx)[0]


def covering_radius(i: MapTable, Y: FiniteMetricSpace) -> float:
    """``max_y d(y, i(X))``: the smallest eps with ``i(X)`` eps-dense in ``Y``."""
    return float(Y.dist[:, np.unique(i.image)].min(axis=1).max())


def is_gha(i: MapTable, X: FiniteMetricSpace, Y: FiniteMetricSpace, eps: float) -> ApproxCertificate:
    _check_sizes(i, X, Y)
    tol = max(X.tol, Y.tol)
    dis, pair = _distortion_pair(i, X, Y, np.arange(len(X)))
    gaps = Y.dist[:, np.unique(i.image)].min(axis=1)
    cert = ApproxCertificate(
        eps=float(eps),
        kind="unpointed",
        distortion_ok=bool(le(dis, eps, tol)),
        surjectivity_ok=bool(np.all(le(gaps, eps, tol))),
        measured_distortion=dis,
        measured_covering_radius=float(gaps.max()),
    )
    if not cert.distortion_ok:
        cert.witnesses.append(("distortion",) + pair)
    for y in np.flatnonzero(~le(gaps, eps, tol)):
        cert.witnesses.append(("uncovered", int(y)))
    return cert


def eps_inverse(i: MapTable, X: FiniteMetricSpace, Y: FiniteMetricSpace, eps: float) -> MapTable:
    """An approximate inverse of a certified eps-GHA.

    Each ``y`` is sent to the first ``x`` minimising ``d(i(x), y)``.  The
    result lies in ``App_{4 eps}(Y, X)`` and both round trips move points by
    at most ``3 eps``.
    """
    if not is_gha(i, X, Y, eps).valid:
        raise NotAnApproximation(f"map is not an {eps}-GH approximation")
    return MapTable(Y.dist[:, i.image].argmin(axis=1), len(X))


def round_trip_defects(i: MapTable, ip: MapTable, X: FiniteMetricSpace, Y: FiniteMetricSpace) -> tuple[float, float]:
    """``(max_x d(i' i x, x), max_y d(i i' y, y))``."""
    ii = ip.image[i.image]
    jj = i.image[ip.image]
    return (
        float(X.dist[ii, np.arange(len(X))].max()),
        float(Y.dist[jj, np.arange(len(Y))].max()),
    )


# --- exact and heuristic distances ----------------------------------------------------


def best_gha(X: FiniteMetricSpace, Y: FiniteMetricSpace) -> tuple[float, MapTable]:
    """The smallest ``max(dis(i), covering radius)`` over all maps ``X -> Y``."""
    best, best_map = np.inf, None
    for _, M in iter_map_chunks(len(X), len(Y)):
        vals = np.maximum(distortions(M, X.dist, Y.dist), covering_radii(M, Y.dist))
        k = int(vals.argmin())
        if vals[k] < best:
            best, best_map = float(vals[k]), M[k].copy()
    return best, MapTable(best_map, len(Y))


def gh_exact_witness(X: FiniteMetricSpace, Y: FiniteMetricSpace, max_enum: int = DEFAULT_MAX_ENUM):
    """``(d_GH, i, j)`` with ``i``, ``j`` attaining the distance."""
    check_budget(map_count(len(X), len(Y)) + map_count(len(Y), len(X)), max_enum)
    a, i = best_gha(X, Y)
    b, j = best_gha(Y, X)
    return max(a, b), i, j


def gh_exact(X: FiniteMetricSpace, Y: FiniteMetricSpace, max_enum: int = DEFAULT_MAX_ENUM) -> float:
    """Gromov-Hausdorff distance through approximation pairs, by full enumeration.

    Feasibility is monotone in eps here, so the infimum is the larger of the
    two one-sided optima and no bisection over eps is needed.
    """
    return gh_exact_witness(X, Y, max_enum)[0]


def _neighbours(cur: np.ndarray, m: int) -> np.ndarray:
    n = len(cur)
    nb = np.repeat(cur[None], n * m, axis=0)
    nb[np.arange(n * m), np.repeat(np.arange(n), m)] = np.tile(np.arange(m), n)
    return nb


def _descend(X, Y, start: np.ndarray, rng: np.random.Generator, max_plateau: int, tol: float) -> float:
    cur = start.copy()
    m = len(Y)

    def score(M):
        return np.maximum(distortions(M, X.dist, Y.dist), covering_radii(M, Y.dist))

    val = float(score(cur[None])[0])
    plateau = 0
    while True:
        nb = _neighbours(cur, m)
        vals = score(nb)
        vals[(nb == cur).all(axis=1)] = np.inf
        best = float(vals.min())
        if best < val - tol:
            plateau = 0
        elif best <= val + tol and plateau < max_plateau:
            plateau += 1
        else:
            return val
        ties = np.flatnonzero(vals <= best + tol)
        cur = nb[rng.choice(ties)]
        val = min(val, best) if best <= val + tol else best


def gh_upper(
    X: FiniteMetricSpace,
    Y: FiniteMetricSpace,
    restarts: int = 32,
    seed: int = 0,
    max_plateau: int = 8,
) -> float:
    """Upper bound on ``gh_exact`` by randomised local search.

    Moves reassign one image; non-increasing moves are accepted (at most
    ``max_plateau`` sideways moves in a row).  Every restart draws from its
    own child of ``SeedSequence(seed)``, so the answer does not depend on the
    order restarts are run in.  When ``X`` and ``Y`` share a distance matrix
    the first restart starts from the identity.
    """
    tol = max(X.tol, Y.tol)
    children = np.random.SeedSequence(seed).spawn(restarts)
    same = X.same_as(Y)
    best_i = best_j = np.inf
    for r, child in enumerate(children):
        rng = np.random.default_rng(child)
        if r == 0 and same:
            si, sj = np.arange(len(X)), np.arange(len(Y))
        else:
            si, sj = rng.integers(len(Y), size=len(X)), rng.integers(len(X), size=len(Y))
        best_i = min(best_i, _descend(X, Y, si, rng, max_plateau, tol))
        best_j = min(best_j, _descend(Y, X, sj, rng, max_plateau, tol))
    return max(best_i, best_j)


def gh_hat_exact(X: FiniteMetricSpace, Y: FiniteMetricSpace, max_enum: int = DEFAULT_MAX_ENUM) -> float:
    """Correspondence GH distance: half the least distortion of a correspondence.

    Only correspondences ``graph(i) u graph(j)^T`` are searched; every
    correspondence contains one of these with no larger distortion.  The
    budget counts evaluated ``(i, j)`` pairs.
    """
    n, m = len(X), len(Y)
    check_budget(map_count(n, m) * map_count(m, n), max_enum)
    I = np.concatenate([M for _, M in iter_map_chunks(n, m)])
    J = np.concatenate([M for _, M in iter_map_chunks(m, n)])
    dis_i = distortions(I, X.dist, Y.dist)
    dis_j = distortions(J, Y.dist, X.dist)
    order = np.argsort(dis_i, kind="stable")
    jorder = np.argsort(dis_j, kind="stable")
    J, dis_j = J[jorder], dis_j[jorder]
    # dX[x, j(y)] for every j: (K, n, m)
    dXJ = X.dist[np.arange(n)[None, :, None], J[:, None, :]]
    best = np.inf
    for k in order:
        if dis_i[k] >= best:
            break
        usable = dis_j < best
        if not usable.any():
            break
        cross = np.abs(dXJ[usable] - Y.dist[I[k]][None]).max(axis=(1, 2))
        vals = np.maximum(np.maximum(cross, dis_j[usable]), dis_i[k])
        best = min(best, float(vals.min()))
    return best / 2.0


@dataclass
class SandwichReport:
    gh: float
    gh_hat: float
    left_ok: bool
    right_ok: bool

    @property
    def holds(self) -> bool:
        return self.left_ok and self.right_ok


def gh_sandwich(X: FiniteMetricSpace, Y: FiniteMetricSpace, max_enum: int = DEFAULT_MAX_ENUM) -> SandwichReport:
    """Evaluate ``d_GH <= 2 d_hat <= 3 d_GH``; violations are logged, not raised."""
    tol = max(X.tol, Y.tol)
    a = gh_exact(X, Y, max_enum)
    b = gh_hat_exact(X, Y, max_enum)
    rep = SandwichReport(a, b, bool(le(a, 2 * b, tol)), bool(le(2 * b, 3 * a, tol)))
    if not rep.holds:
        log.warning("GH sandwich violated: d_GH=%r, d_hat=%r", a, b)
    return rep
