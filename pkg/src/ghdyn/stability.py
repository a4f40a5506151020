"""Pseudo-orbits, tracing, expansivity and the shadowing-based conjugacy.

Orbit quantifiers run over finite windows of offsets.  Negative offsets
need a bijection; non-injective maps fall back to one-sided windows
``[0, N]`` and say so in their reports.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass, field

import numpy as np

from .dynamics import SelfMapSystem, pgh0_distance
from .errors import (
    EnumerationBudgetExceeded,
    NoSeparationWithinBudget,
    NonInvertible,
    NonInvertibleNegativeOffset,
    NonUniqueShadowing,
    NoTracer,
    PreconditionViolated,
    PseudoOrbitViolation,
    ShadowingFailure,
    SizeMismatch,
)
from .gh import DEFAULT_MAX_ENUM, MapTable, distortion_on
from .metric import FiniteMetricSpace, PointSet, ball, le, lt
from .pointed import DistanceInterval, is_pointed_gha

log = logging.getLogger(__name__)


class ScaleFunction:
    """A strictly positive value per point of a space."""

    __slots__ = ("space", "values")

    def __init__(self, space: FiniteMetricSpace, values):
        v = np.array(values, dtype=float).reshape(-1)
        if v.shape != (len(space),):
            raise SizeMismatch(f"{len(v)} values for a {len(space)}-point space")
        if not np.all(v > 0):
            raise ValueError("scale functions must be strictly positive")
        v.setflags(write=False)
        self.space = space
        self.values = v

    @classmethod
    def constant(cls, space: FiniteMetricSpace, c: float) -> "ScaleFunction":
        return cls(space, np.full(len(space), float(c)))

    def __call__(self, p) -> float:
        return self.values[p]

    def min(self) -> float:
        return float(self.values.min())

    def __repr__(self) -> str:
        return f"ScaleFunction(min={self.values.min():g}, max={self.values.max():g})"


class PseudoOrbit:
    """Points ``x_n`` for ``n`` in the window ``[n_min, n_max]`` (``n_min <= 0 <= n_max``)."""

    __slots__ = ("offsets", "points")

    def __init__(self, offsets, points):
        n_min, n_max = (int(o) for o in offsets)
        if not n_min <= 0 <= n_max:
            raise ValueError("window must contain offset 0")
        pts = np.array(points, dtype=np.intp).reshape(-1)
        if len(pts) != n_max - n_min + 1:
            raise SizeMismatch(f"{len(pts)} points for window [{n_min}, {n_max}]")
        pts.setflags(write=False)
        self.offsets = (n_min, n_max)
        self.points = pts

    @classmethod
    def orbit_of(cls, f: SelfMapSystem, q: int, n_min: int, n_max: int) -> "PseudoOrbit":
        return cls((n_min, n_max), f.orbit_table(n_min, n_max)[:, q])

    def __len__(self) -> int:
        return len(self.points)

    def at(self, n: int) -> int:
        return int(self.points[n - self.offsets[0]])

    def replace(self, n: int, p: int) -> "PseudoOrbit":
        pts = self.points.copy()
        pts[n - self.offsets[0]] = p
        return PseudoOrbit(self.offsets, pts)

    @property
    def range(self) -> range:
        return range(self.offsets[0], self.offsets[1] + 1)


@dataclass
class CheckReport:
    ok: bool
    witnesses: list = field(default_factory=list)

    def __bool__(self) -> bool:
        return self.ok


@dataclass
class ShadowReport:
    orbit: PseudoOrbit
    tracers: PointSet
    eps_used: ScaleFunction

    @property
    def unique(self) -> bool:
        return len(self.tracers) == 1


def is_pseudo_orbit(orbit: PseudoOrbit, f: SelfMapSystem, delta: ScaleFunction) -> CheckReport:
    """``d(f(x_n), x_{n+1}) < delta(f(x_n))`` along the window; witnesses are offsets ``n``."""
    if len(orbit) < 2:
        raise ValueError("a pseudo-orbit needs at least two points")
    fx = f.image[orbit.points[:-1]]
    gaps = f.space.dist[fx, orbit.points[1:]]
    bad = ~lt(gaps, delta.values[fx], f.space.tol)
    return CheckReport(not bad.any(), [orbit.offsets[0] + int(k) for k in np.flatnonzero(bad)])


def _orbit_rows(f: SelfMapSystem, orbit: PseudoOrbit) -> np.ndarray:
    if orbit.offsets[0] < 0 and not f.bijective:
        raise NonInvertibleNegativeOffset("negative offsets need a bijection; use a one-sided window")
    return f.orbit_table(*orbit.offsets)


def traces(p: int, orbit: PseudoOrbit, f: SelfMapSystem, eps: ScaleFunction) -> CheckReport:
    """``d(f^n(p), x_n) < eps(f^n(p))`` at every offset; witnesses are offsets ``n``."""
    fp = _orbit_rows(f, orbit)[:, p]
    gaps = f.space.dist[fp, orbit.points]
    bad = ~lt(gaps, eps.values[fp], f.space.tol)
    return CheckReport(not bad.any(), [orbit.offsets[0] + int(k) for k in np.flatnonzero(bad)])


def _tracer_mask(F: np.ndarray, XS: np.ndarray, space: FiniteMetricSpace, eps_vals: np.ndarray) -> np.ndarray:
    """``mask[k, p]``: point ``p`` traces pseudo-orbit column ``k`` of ``XS`` (rows = offsets)."""
    mask = np.ones((XS.shape[1], F.shape[1]), dtype=bool)
    for r in range(F.shape[0]):
        d = space.dist[XS[r][:, None], F[r][None, :]]
        mask &= lt(d, eps_vals[F[r]][None, :], space.tol)
    return mask


def shadowing_points(orbit: PseudoOrbit, f: SelfMapSystem, eps: ScaleFunction) -> ShadowReport:
    """Every point of the space that eps-traces ``orbit`` (exhaustive scan)."""
    F = _orbit_rows(f, orbit)
    mask = _tracer_mask(F, orbit.points[:, None], f.space, eps.values)[0]
    return ShadowReport(orbit, PointSet.from_mask(f.space, mask), eps)


# --- expansivity -----------------------------------------------------------------------


@dataclass
class ExpansivityEstimate:
    """Per-point separation ``e(x) = min_{y != x} max_{|n| < N} d(f^n x, f^n y)``.

    ``feasible`` is False when no point separates from its nearest neighbour
    by more than their initial distance: on a finite sample that is the
    signature of a non-expansive map.
    """

    values: np.ndarray
    window: int
    one_sided: bool
    feasible: bool

    @property
    def constant(self) -> float:
        return float(self.values.min())

    def scale(self, space: FiniteMetricSpace) -> ScaleFunction:
        return ScaleFunction(space, self.values)


def _separation_matrix(f: SelfMapSystem, n_min: int, n_max: int) -> np.ndarray:
    d = f.space.dist
    T = f.orbit_table(n_min, n_max)
    S = np.zeros_like(d)
    for row in T:
        np.maximum(S, d[np.ix_(row, row)], out=S)
    return S


def estimate_expansivity(f: SelfMapSystem, N: int, one_sided: bool = False) -> ExpansivityEstimate:
    """Exhaustive pair scan over offsets ``|n| < N`` (``0 <= n < N`` if ``one_sided``)."""
    if len(f) < 2:
        raise ValueError("expansivity needs at least two points")
    if not f.bijective and not one_sided:
        raise NonInvertible("expansivity over two-sided windows needs a bijection")
    S = _separation_matrix(f, 0 if one_sided else -(N - 1), N - 1)
    np.fill_diagonal(S, np.inf)
    e = S.min(axis=1)
    d = f.space.dist + np.diag(np.full(len(f), np.inf))
    nn = d.min(axis=1)
    feasible = bool(np.all(e > nn + f.space.tol))
    return ExpansivityEstimate(e, int(N), one_sided, feasible)


def gamma_from(alpha: ScaleFunction, eta: float = 1e-6, max_iter: int = 10_000) -> ScaleFunction:
    """A ``gamma`` with ``gamma(x) < inf{alpha(y) : y in B(x, gamma(x))}`` everywhere.

    Descending iteration from ``alpha``:
    ``gamma <- min(gamma, (1 - eta) * min alpha over B(x, gamma(x)))``.
    """
    d = alpha.space.dist
    a = alpha.values
    g = a.copy()
    for _ in range(max_iter):
        inside = d < g[:, None]
        np.fill_diagonal(inside, True)
        cap = (1 - eta) * np.where(inside, a[None, :], np.inf).min(axis=1)
        new = np.minimum(g, cap)
        if np.array_equal(new, g):
            break
        g = new
    return ScaleFunction(alpha.space, g)


def remark32_check(gamma: ScaleFunction, eps: ScaleFunction, pairs=None) -> CheckReport:
    """``d(x, y) < max(gamma(x), gamma(y))`` implies ``d(x, y) < eps(x)``."""
    d = gamma.space.dist
    tol = gamma.space.tol
    if pairs is None:
        xs, ys = np.indices(d.shape).reshape(2, -1)
    else:
        xs, ys = np.asarray(pairs, dtype=np.intp).reshape(-1, 2).T
    dd = d[xs, ys]
    hyp = lt(dd, np.maximum(gamma.values[xs], gamma.values[ys]), tol)
    bad = hyp & ~lt(dd, eps.values[xs], tol)
    return CheckReport(not bad.any(), [(int(a), int(b)) for a, b in zip(xs[bad], ys[bad])])


def separation_time(f: SelfMapSystem, x0: int, lam: ScaleFunction, e: ScaleFunction, N_max: int) -> int:
    """Smallest ``N`` such that every ``y`` with ``d(x0, y) >= lam(x0)`` separates within ``|n| < N``."""
    if not f.bijective:
        raise NonInvertible("separation time needs a bijection")
    d = f.space.dist
    tol = f.space.tol
    far = np.flatnonzero(~lt(d[x0], lam(x0), tol))
    if len(far) == 0:
        return 1
    pending = np.ones(len(far), dtype=bool)
    fwd = np.arange(len(f))
    bwd = np.arange(len(f))
    inv = f.inverse().image
    for N in range(1, N_max + 1):
        # offsets +-(N-1) become available at window N
        for row in ((fwd,) if N == 1 else (fwd, bwd)):
            sep = ~lt(d[row[x0], row[far]], e(row[x0]), tol)
            pending &= ~sep
        if not pending.any():
            return N
        fwd = f.image[fwd]
        bwd = inv[bwd]
    raise NoSeparationWithinBudget(f"{int(pending.sum())} points never separate within |n| < {N_max}")


# --- conjugacy construction --------------------------------------------------------------


@dataclass
class ConjugacyResult:
    """The map ``h: Y -> X`` built from unique shadowing points.

    ``h`` is partial (``-1``) outside ``ball``.  ``defect`` is the worst
    ``d(f(h(q)), h(g(q)))`` over ``q`` in the ball with ``g(q)`` also in it.
    """

    h: MapTable
    ball: PointSet
    eps_bar: float
    defect: float
    max_dist_to_j: float
    distortion: float
    eps_min: float
    window: tuple
    one_sided: bool
    warnings: list = field(default_factory=list)

    @property
    def close_to_j(self) -> bool:
        return self.max_dist_to_j < self.eps_bar

    @property
    def in_app(self) -> bool:
        return self.distortion <= self.eps_min + 1e-9

    @property
    def valid(self) -> bool:
        return self.defect == 0 and self.close_to_j and self.in_app

    def as_dict(self) -> dict:
        return {
            "h": self.h.image.tolist(),
            "ball_size": len(self.ball),
            "eps_bar": self.eps_bar,
            "defect": self.defect,
            "max_dist_to_j": self.max_dist_to_j,
            "distortion": self.distortion,
            "eps_min": self.eps_min,
            "window": list(self.window),
            "one_sided": self.one_sided,
            "close_to_j": self.close_to_j,
            "in_app": self.in_app,
            "warnings": list(self.warnings),
        }


def semiconjugacy_defect(j: MapTable, g: SelfMapSystem, f: SelfMapSystem, U) -> float:
    """``max_{q in U} d(j(g(q)), f(j(q)))``."""
    u = np.asarray(U, dtype=np.intp)
    if len(u) == 0:
        return 0.0
    return float(f.space.dist[j.image[g.image[u]], f.image[j.image[u]]].max())


def calibrate_eps_bar(f: SelfMapSystem, eps: ScaleFunction, window: int, warnings: list | None = None) -> float:
    """``1/4 min(eps, gamma)`` with ``gamma`` built from the expansivity estimate.

    Without measurable expansivity the ``gamma`` term is dropped (warned).
    """
    one_sided = not f.bijective
    est = estimate_expansivity(f, window, one_sided=one_sided)
    if est.feasible:
        gamma = gamma_from(est.scale(f.space))
        return 0.25 * min(eps.min(), gamma.min())
    if warnings is not None:
        warnings.append("expansivity not measurable; eps_bar = eps/4 without the gamma bound")
    return 0.25 * eps.min()


def build_conjugacy(
    f: SelfMapSystem,
    g: SelfMapSystem,
    j: MapTable,
    delta: ScaleFunction,
    eps: ScaleFunction,
    window: int = 20,
    eps_bar: float | None = None,
) -> ConjugacyResult:
    """Construct ``h(q)`` = the unique eps_bar-tracer of ``p_n = j(g^n(q))``.

    ``q`` ranges over ``B(y, 1/delta_min)``.  ``j: Y -> X`` must be a pointed
    ``delta_min``-approximation whose semi-conjugacy defect on that ball is
    within ``delta_min``.  Every failure is collected first; the raised
    error lists all offending ``q``.
    """
    X, Y = f.space, g.space
    x, y = f.basepoint, g.basepoint
    if x is None or y is None:
        raise PreconditionViolated("both systems need basepoints")
    dmin = delta.min()
    tol = max(X.tol, Y.tol)
    cert = is_pointed_gha(j, g.pointed, f.pointed, dmin)
    B = ball(Y, y, 1.0 / dmin)
    q = B.indices
    jdef = semiconjugacy_defect(j, g, f, q)
    if not cert.valid or not le(jdef, dmin, tol):
        raise PreconditionViolated(
            f"j is not a pointed {dmin}-approximation with semi-conjugacy defect within delta "
            f"(certificate valid={cert.valid}, defect={jdef})"
        )

    warnings = []
    one_sided = not (f.bijective and g.bijective)
    if one_sided:
        warnings.append("one-sided window [0, N]: a self-map is not a bijection")
    n_min, n_max = (0 if one_sided else -window), window
    if eps_bar is None:
        eps_bar = calibrate_eps_bar(f, eps, window, warnings)
    warnings.append("eps_bar is used uniformly for tracing")

    G = g.orbit_table(n_min, n_max)[:, q]  # (rows, Q)
    XS = j.image[G]
    fx = f.image[XS[:-1]]
    bad_step = ~lt(X.dist[fx, XS[1:]], delta.values[fx], tol)
    if bad_step.any():
        rows, cols = np.nonzero(bad_step)
        raise PseudoOrbitViolation(
            "pseudo-orbit condition fails",
            points=sorted({int(q[c]) for c in cols}),
            offsets=sorted({n_min + int(r) for r in rows}),
        )

    F = f.orbit_table(n_min, n_max)
    mask = _tracer_mask(F, XS, X, np.full(len(X), eps_bar))
    counts = mask.sum(axis=1)
    if (counts == 0).any():
        raise NoTracer("no tracer", points=q[counts == 0].tolist())
    if (counts > 1).any():
        raise NonUniqueShadowing("several tracers", points=q[counts > 1].tolist())

    img = np.full(len(Y), -1, dtype=np.intp)
    img[q] = mask.argmax(axis=1)
    h = MapTable(img, len(X), partial=len(q) < len(Y))

    inside = np.zeros(len(Y), dtype=bool)
    inside[q] = True
    cons = q[inside[g.image[q]]]
    defect = float(X.dist[f.image[img[cons]], img[g.image[cons]]].max()) if len(cons) else 0.0
    dist_j = float(X.dist[img[q], j.image[q]].max())
    full = MapTable(np.where(img >= 0, img, 0), len(X))
    dis = distortion_on(full, Y, X, B)
    return ConjugacyResult(h, B, float(eps_bar), defect, dist_j, dis, eps.min(), (n_min, n_max), one_sided, warnings)


# --- end-to-end report ---------------------------------------------------------------------


@dataclass
class StabilityReport:
    status: str  # "stable-instance", "inconclusive" or "hypothesis-not-met"
    distance: DistanceInterval
    exact: bool
    threshold: float
    conjugacy: ConjugacyResult | None = None
    error: str | None = None
    error_points: list = field(default_factory=list)
    warnings: list = field(default_factory=list)

    def as_dict(self) -> dict:
        return {
            "status": self.status,
            "pgh0": self.distance.as_dict(),
            "exact": self.exact,
            "threshold": self.threshold,
            "conjugacy": None if self.conjugacy is None else self.conjugacy.as_dict(),
            "error": self.error,
            "error_points": list(self.error_points),
            "warnings": list(self.warnings),
        }


def _nearest_preimage(j: MapTable, X: FiniteMetricSpace) -> MapTable:
    """For each ``x``, a ``y`` minimising ``d(j(y), x)``."""
    return MapTable(X.dist[:, j.image].argmin(axis=1), j.dom_size)


def stability_report(
    f: SelfMapSystem,
    g: SelfMapSystem,
    eps: ScaleFunction,
    delta: ScaleFunction,
    window: int = 20,
    j: MapTable | None = None,
    max_enum: int = DEFAULT_MAX_ENUM,
    eps_bar: float | None = None,
) -> StabilityReport:
    """Instance check of pGH-stability for ``f`` against ``g``.

    The pointed C0-GH distance is exact when the enumeration fits the budget
    and otherwise a certified upper bound from explicit maps (``j`` and a
    nearest-point inverse; the identity on a shared space).  If it is below
    ``delta(f(x))`` the conjugacy is built.  Shadowing failures make the
    instance inconclusive: they never count as instability.
    """
    warnings = []
    exact = True
    try:
        dist = pgh0_distance(f, g, max_enum)
        if j is None:
            j = dist.j
    except EnumerationBudgetExceeded:
        exact = False
        if j is None:
            if not f.space.same_as(g.space):
                raise PreconditionViolated("spaces differ and the exact search is over budget: supply j")
            j = MapTable.identity(len(f))
        i = _nearest_preimage(j, f.space)
        dist = pgh0_distance(f, g, max_enum, maps=(i.image[None], j.image[None]))
        warnings.append("pgh0 is a certified upper bound from explicit maps")
    threshold = float(delta(f(f.basepoint)))
    tol = max(f.space.tol, g.space.tol)
    rep = StabilityReport("hypothesis-not-met", dist, exact, threshold, warnings=warnings)
    if not lt(dist.upper, threshold, tol):
        return rep
    try:
        rep.conjugacy = build_conjugacy(f, g, j, delta, eps, window, eps_bar)
    except ShadowingFailure as exc:
        rep.status = "inconclusive"
        rep.error = type(exc).__name__
        rep.error_points = list(exc.points)
        return rep
    except PreconditionViolated as exc:
        rep.status = "inconclusive"
        rep.error = f"PreconditionViolated: {exc}"
        return rep
    rep.status = "stable-instance" if rep.conjugacy.valid else "inconclusive"
    rep.warnings += rep.conjugacy.warnings
    return rep
