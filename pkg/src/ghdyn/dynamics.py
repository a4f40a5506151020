"""Self-maps of finite spaces and the C0 / C0-GH / pointed C0-GH distances."""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from ._search import check_budget, covering_radii, distortions, iter_map_chunks, map_count
from .errors import (
    DomainEscape,
    NonInvertible,
    NonInvertibleNegativeOffset,
    SpaceMismatch,
)
from .gh import DEFAULT_MAX_ENUM, MapTable, distortion_on
from .metric import FiniteMetricSpace, PointedSpace, PointSet, ball, le, lt
from .pointed import DistanceInterval, pgh_distance, pointed_search


class SelfMapSystem:
    """A map of a finite space to itself, optionally with a basepoint."""

    def __init__(self, space: FiniteMetricSpace, map, basepoint: int | None = None, bijective: bool | None = None):
        if not isinstance(map, MapTable):
            map = MapTable(map, len(space))
        if map.dom_size != len(space) or map.cod_size != len(space):
            raise SpaceMismatch("self-map size does not match the space")
        perm = len(np.unique(map.image)) == len(space)
        if bijective is None:
            bijective = perm
        elif bijective and not perm:
            raise NonInvertible("bijective flag set but the map is not a permutation")
        self.space = space
        self.map = map
        self.basepoint = None if basepoint is None else int(basepoint)
        self.bijective = bool(bijective)

    def __len__(self) -> int:
        return len(self.space)

    def __call__(self, p: int) -> int:
        return self.map(p)

    def __repr__(self) -> str:
        return f"SelfMapSystem(n={len(self)}, basepoint={self.basepoint}, bijective={self.bijective})"

    @property
    def image(self) -> np.ndarray:
        return self.map.image

    @property
    def pointed(self) -> PointedSpace:
        if self.basepoint is None:
            raise ValueError("system has no basepoint")
        return PointedSpace(self.space, (self.basepoint,))

    def with_basepoint(self, basepoint: int) -> "SelfMapSystem":
        return SelfMapSystem(self.space, self.map, basepoint, self.bijective)

    def inverse(self) -> MapTable:
        if not self.bijective:
            raise NonInvertible("map is not a bijection")
        inv = np.empty_like(self.image)
        inv[self.image] = np.arange(len(self))
        return MapTable(inv, len(self))

    def power(self, n: int) -> np.ndarray:
        """Image array of ``f^n``; negative ``n`` needs a bijection."""
        if n < 0 and not self.bijective:
            raise NonInvertibleNegativeOffset(f"f^{n} is undefined for a non-injective map")
        step = self.inverse().image if n < 0 else self.image
        out = np.arange(len(self))
        for _ in range(abs(n)):
            out = step[out]
        return out

    def orbit_table(self, n_min: int, n_max: int) -> np.ndarray:
        """Rows ``f^n`` for ``n = n_min .. n_max`` (shape ``(n_max - n_min + 1, |X|)``)."""
        T = np.empty((n_max - n_min + 1, len(self)), dtype=np.intp)
        T[0] = self.power(n_min)
        for k in range(1, len(T)):
            T[k] = self.image[T[k - 1]]
        return T

    def lipschitz_constant(self) -> float:
        d = self.space.dist
        off = ~np.eye(len(self), dtype=bool)
        if not off.any():
            return 0.0
        return float((d[np.ix_(self.image, self.image)][off] / d[off]).max())


@dataclass
class ConjugacyCheck:
    """Outcome of checking ``h o f = g o h`` over ``domain_set``."""

    h: MapTable
    domain_set: PointSet
    target_set: PointSet | None
    defect: float
    onto_ok: bool
    distortion: float | None = None
    isometric_ok: bool | None = None
    witnesses: list = field(default_factory=list)

    @property
    def valid(self) -> bool:
        ok = self.defect == 0 and self.onto_ok
        return ok and self.isometric_ok is not False


def c0_distance(f: SelfMapSystem, g: SelfMapSystem) -> float:
    if not f.space.same_as(g.space):
        raise SpaceMismatch("C0 distance needs two maps of one space")
    return float(f.space.dist[f.image, g.image].max())


def _best_semiconj(X, Y, fi: np.ndarray, gi: np.ndarray):
    best, best_map = np.inf, None
    for _, M in iter_map_chunks(len(X), len(Y)):
        vals = np.maximum(distortions(M, X.dist, Y.dist), covering_radii(M, Y.dist))
        defect = Y.dist[M[:, fi], gi[M]].max(axis=1)
        vals = np.maximum(vals, defect)
        k = int(vals.argmin())
        if vals[k] < best:
            best, best_map = float(vals[k]), M[k].copy()
    return best, MapTable(best_map, len(Y))


def gh0_distance(f: SelfMapSystem, g: SelfMapSystem, max_enum: int = DEFAULT_MAX_ENUM, eps_grid=None) -> DistanceInterval:
    """C0-GH distance by exhaustive search.

    Feasibility is monotone in eps here, so the interval collapses to the
    exact value.  ``eps_grid`` is accepted for interface symmetry only.
    """
    X, Y = f.space, g.space
    check_budget(map_count(len(X), len(Y)) + map_count(len(Y), len(X)), max_enum)
    a, i = _best_semiconj(X, Y, f.image, g.image)
    b, j = _best_semiconj(Y, X, g.image, f.image)
    v = max(a, b)
    return DistanceInterval(v, v, True, [v], i, j)


def _window_warnings(i: MapTable, f: SelfMapSystem, g: SelfMapSystem, eps: float, tag: str) -> list:
    """Flag images of ``i o f`` or ``g o i`` falling outside ``B(g(y), 1/eps)``."""
    if eps <= 0:
        return []
    X, Y = f.space, g.space
    q = ball(X, f.basepoint, 1.0 / eps).indices
    centre = g(g.basepoint)
    pts = np.concatenate([i.image[f.image[q]], g.image[i.image[q]]])
    outside = ~lt(Y.dist[centre, pts], 1.0 / eps, Y.tol)
    if outside.any():
        return [f"OutOfWindow ({tag}): {int(outside.sum())} images outside B(g(y), 1/eps); ambient distance used"]
    return []


def pgh0_distance(
    f: SelfMapSystem,
    g: SelfMapSystem,
    max_enum: int = DEFAULT_MAX_ENUM,
    eps_grid=None,
    maps=None,
) -> DistanceInterval:
    """Pointed C0-GH distance between pointed systems.

    Approximations fix ``i(x) = y`` and also keep ``d(i(f(x)), g(y))``
    within eps.  Semi-conjugacy defects are measured with the ambient
    distance; images leaving ``B(g(y), 1/eps)`` are reported as
    OutOfWindow warnings.  ``maps=(I, J)`` restricts the search to explicit
    candidate maps (arrays of image rows), giving a certified upper bound.
    """
    I, J = (None, None) if maps is None else maps
    res = pointed_search(f.pointed, g.pointed, eps_grid, max_enum, f.image, g.image, I, J)
    res.warnings += _window_warnings(res.i, f, g, res.upper, "i")
    res.warnings += _window_warnings(res.j, g, f, res.upper, "j")
    return res


def is_local_conjugacy(
    h: MapTable,
    f: SelfMapSystem,
    g: SelfMapSystem,
    U: PointSet,
    V: PointSet | None = None,
    isometric: bool = False,
) -> ConjugacyCheck:
    """Check ``h(U) = V`` and ``h o f = g o h`` on ``U`` (defect is the worst gap)."""
    u = U.indices
    fu = f.image[u]
    need = np.union1d(u, fu)
    if len(need) and ((need >= h.dom_size).any() or (h.image[need] < 0).any()):
        raise DomainEscape("U or f(U) leaves the domain of h")
    Y = g.space
    gaps = Y.dist[h.image[fu], g.image[h.image[u]]]
    chk = ConjugacyCheck(
        h,
        U,
        V,
        float(gaps.max()) if len(gaps) else 0.0,
        True if V is None else set(h.image[u].tolist()) == set(V.members),
    )
    chk.witnesses = [int(p) for p in u[gaps > 0]]
    if isometric:
        chk.distortion = distortion_on(h, f.space, Y, need)
        chk.isometric_ok = chk.distortion == 0
    return chk


def restricted_c0(f: SelfMapSystem, g: SelfMapSystem, eps0: float) -> float:
    """Sup of ``d(f q, g q)`` over ``q`` in ``B(x, 1/eps0)`` on a shared pointed space."""
    q = PointSet.whole(f.space).indices if eps0 <= 0 else ball(f.space, f.basepoint, 1.0 / eps0).indices
    return float(f.space.dist[f.image[q], g.image[q]].max())


def identity_system(space: FiniteMetricSpace, basepoint: int | None = None) -> SelfMapSystem:
    return SelfMapSystem(space, MapTable.identity(len(space)), basepoint, True)


def theorem_pointed_checks(
    f: SelfMapSystem,
    g: SelfMapSystem,
    eps0: float = 0.0,
    third: SelfMapSystem | None = None,
    max_enum: int = DEFAULT_MAX_ENUM,
) -> dict:
    """Evaluate the finite-instance properties of the pointed C0-GH distance.

    Keys ``"1"``, ``"2"``, ``"4"``, ``"5"``, ``"6"`` each map to
    ``{"ok": bool | None, ...measured values}``; ``ok`` is None when the
    property does not apply.  ``eps0 == 0`` takes the whole space for the
    restricted C0 distance.  Item ``"5"`` needs ``third`` and is report-only.
    """
    out = {}
    tol = max(f.space.tol, g.space.tol)
    d_fg = pgh0_distance(f, g, max_enum).upper
    d_gf = pgh0_distance(g, f, max_enum).upper

    if f.space.same_as(g.space) and f.basepoint == g.basepoint:
        rc = restricted_c0(f, g, eps0)
        out["1"] = {"ok": bool(le(d_fg, rc, tol)), "pgh0": d_fg, "restricted_c0": rc, "eps0": eps0}
    else:
        out["1"] = {"ok": None, "note": "needs a shared pointed space"}

    p = pgh_distance(f.pointed, g.pointed, max_enum=max_enum).upper
    ids = pgh0_distance(
        identity_system(f.space, f.basepoint), identity_system(g.space, g.basepoint), max_enum
    ).upper
    out["2"] = {"ok": bool(le(p, d_fg, tol)) and ids == p, "pgh": p, "pgh0": d_fg, "pgh0_identities": ids}

    out["4"] = {"ok": d_fg == d_gf, "forward": d_fg, "backward": d_gf}

    if third is None:
        out["5"] = {"ok": None, "note": "needs a third system"}
    else:
        d23 = pgh0_distance(g, third, max_enum).upper
        d13 = pgh0_distance(f, third, max_enum).upper
        lips = [s.lipschitz_constant() for s in (f, g, third)]
        entry = {"d12": d_fg, "d23": d23, "d13": d13, "lipschitz": lips}
        if d_fg > 0.5 + tol or d23 > 0.5 + tol:
            entry["ok"] = None
            entry["note"] = "d12 or d23 exceeds 1/2"
        else:
            entry["ok"] = bool(le(d13, 2 * (d_fg + d23), tol))
        out["5"] = entry

    out["6"] = {"ok": bool(0 <= d_fg < np.inf), "value": d_fg}
    return out
