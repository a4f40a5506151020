"""Pointed and multi-pointed GH approximations and the pointed GH distance.

A pointed eps-approximation ``i: (X, x) -> (Y, y)`` sends ``x`` to ``y``,
has distortion below ``eps`` on ``B(x, 1/eps)`` and covers
``B(y, 1/eps - eps)`` up to ``eps``.  Scale ``eps == 0`` is read as the
limit ``eps -> 0+``: whole spaces, exact isometry.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass, field

import numpy as np

from ._search import (
    ball_radius,
    build_regime_table,
    check_budget,
    cover_radius,
    map_count,
    regime_breakpoints,
    scan_grid,
)
from .errors import BasepointCountMismatch, PreconditionViolated, SearchFailed, SizeMismatch
from .gh import ApproxCertificate, MapTable
from .metric import FiniteMetricSpace, PointedSpace, PointSet, ball, diameter, le, lt, tube

log = logging.getLogger(__name__)

DEFAULT_MAX_ENUM = 10_000_000


@dataclass(frozen=True)
class PointedApproxParams:
    """The ``1/eps`` radius used at scale ``eps``.

    When ``1/eps`` exceeds the farthest sample point from the basepoint the
    reported radius is clamped to that distance.  Membership tests always use
    the unclamped radius.
    """

    eps: float
    radius: float
    clamped: bool

    @classmethod
    def at(cls, X: FiniteMetricSpace, x: int, eps: float) -> "PointedApproxParams":
        r = ball_radius(eps)
        far = float(X.dist[x].max())
        if r > far:
            return cls(float(eps), far if far > 0 else r, True)
        return cls(float(eps), r, False)


@dataclass
class SpaceSequence:
    """Pointed spaces ``(X_k, x_k)`` with optional maps ``i_k: X_k -> target``."""

    entries: list
    maps: list | None = None
    eps_seq: list | None = None

    def __post_init__(self):
        for name in ("maps", "eps_seq"):
            v = getattr(self, name)
            if v is not None and len(v) != len(self.entries):
                raise SizeMismatch(f"{name} has {len(v)} items for {len(self.entries)} entries")

    def __len__(self) -> int:
        return len(self.entries)


@dataclass
class DistanceInterval:
    """Bracket ``[lower, upper]`` around an infimum over scales.

    ``upper`` is the smallest feasible scale among ``grid``; ``lower`` the
    largest infeasible one below it.  ``monotone`` is False when some
    infeasible scale lies above ``upper``.
    """

    lower: float
    upper: float
    monotone: bool
    grid: list
    i: MapTable | None = None
    j: MapTable | None = None
    warnings: list = field(default_factory=list)

    @property
    def value(self) -> float:
        return self.upper

    def __iter__(self):
        return iter((self.lower, self.upper))

    def as_dict(self) -> dict:
        return {
            "lower": self.lower,
            "upper": self.upper,
            "monotone": self.monotone,
            "grid_size": len(self.grid),
            "i": None if self.i is None else self.i.image.tolist(),
            "j": None if self.j is None else self.j.image.tolist(),
            "warnings": list(self.warnings),
        }


def _single(P: PointedSpace) -> int:
    if not P.single:
        raise BasepointCountMismatch("expected a single basepoint")
    return P.basepoint


def _check_map(i: MapTable, X: FiniteMetricSpace, Y: FiniteMetricSpace) -> None:
    if i.dom_size != len(X) or i.cod_size != len(Y):
        raise SizeMismatch(
            f"map is {i.dom_size}->{i.cod_size} but spaces have {len(X)} and {len(Y)} points"
        )


def _domain_ball(X: FiniteMetricSpace, x: int, eps: float) -> PointSet:
    return PointSet.whole(X) if eps <= 0 else ball(X, x, 1.0 / eps)


def _conditions(i: MapTable, X, x: int, Y, y: int, eps: float, tol: float) -> dict:
    """Evaluate the three pointed conditions at one basepoint pair."""
    B = _domain_ball(X, x, eps).indices
    img = i.image[B]
    E = np.abs(Y.dist[np.ix_(img, img)] - X.dist[np.ix_(B, B)])
    a, b = np.unravel_index(int(E.argmax()), E.shape)
    dis = float(E[a, b])
    r = cover_radius(eps)
    degenerate = r <= 0
    if degenerate:
        targets = np.array([], dtype=np.intp)
    else:
        targets = np.flatnonzero(lt(Y.dist[y], r, Y.tol))
    gaps = Y.dist[np.ix_(targets, np.unique(img))].min(axis=1) if len(targets) else np.zeros(0)
    return {
        "basepoint_ok": i(x) == y,
        "distortion_ok": bool(le(dis, eps, tol)),
        "surjectivity_ok": bool(np.all(le(gaps, eps, tol))),
        "dis": dis,
        "pair": (int(B[a]), int(B[b])),
        "cover": float(gaps.max()) if len(gaps) else 0.0,
        "uncovered": targets[~le(gaps, eps, tol)].tolist(),
        "degenerate": degenerate,
    }


def is_pointed_gha(i: MapTable, Xp: PointedSpace, Yp: PointedSpace, eps: float) -> ApproxCertificate:
    """Certify ``i`` as a pointed eps-approximation ``(X, x) -> (Y, y)``."""
    if eps < 0:
        raise ValueError("eps must be nonnegative")
    X, Y = Xp.space, Yp.space
    x, y = _single(Xp), _single(Yp)
    _check_map(i, X, Y)
    c = _conditions(i, X, x, Y, y, eps, max(X.tol, Y.tol))
    params = PointedApproxParams.at(X, x, eps)
    cert = ApproxCertificate(
        eps=float(eps),
        kind="pointed",
        distortion_ok=c["distortion_ok"],
        surjectivity_ok=c["surjectivity_ok"],
        basepoint_ok=c["basepoint_ok"],
        measured_distortion=c["dis"],
        measured_covering_radius=c["cover"],
        clamped=params.clamped,
        degenerate=c["degenerate"],
    )
    if not c["basepoint_ok"]:
        cert.witnesses.append(("basepoint", x, i(x)))
    if not c["distortion_ok"]:
        cert.witnesses.append(("distortion",) + c["pair"])
    for u in c["uncovered"]:
        cert.witnesses.append(("uncovered", u))
    if c["degenerate"]:
        cert.notes.append("covering condition vacuous: 1/eps - eps <= 0")
    return cert


def is_multipointed_gha(i: MapTable, Xp: PointedSpace, Yp: PointedSpace, eps: float) -> ApproxCertificate:
    """Conditions 1-3 at every basepoint pair; failing pairs are listed 1-based."""
    if len(Xp.basepoints) != len(Yp.basepoints):
        raise BasepointCountMismatch(
            f"{len(Xp.basepoints)} basepoints in the domain, {len(Yp.basepoints)} in the codomain"
        )
    if eps < 0:
        raise ValueError("eps must be nonnegative")
    X, Y = Xp.space, Yp.space
    _check_map(i, X, Y)
    tol = max(X.tol, Y.tol)
    cert = ApproxCertificate(float(eps), "multipointed", True, True, True)
    for n, (x, y) in enumerate(zip(Xp.basepoints, Yp.basepoints), start=1):
        c = _conditions(i, X, x, Y, y, eps, tol)
        ok = c["basepoint_ok"] and c["distortion_ok"] and c["surjectivity_ok"]
        cert.basepoint_ok &= c["basepoint_ok"]
        cert.distortion_ok &= c["distortion_ok"]
        cert.surjectivity_ok &= c["surjectivity_ok"]
        cert.measured_distortion = max(cert.measured_distortion, c["dis"])
        cert.measured_covering_radius = max(cert.measured_covering_radius, c["cover"])
        cert.degenerate |= c["degenerate"]
        cert.clamped |= PointedApproxParams.at(X, x, eps).clamped
        if not ok:
            cert.failing_basepoints.append(n)
            if not c["distortion_ok"]:
                cert.witnesses.append(("distortion", n) + c["pair"])
            if not c["basepoint_ok"]:
                cert.witnesses.append(("basepoint", n, x, i(x)))
            for u in c["uncovered"]:
                cert.witnesses.append(("uncovered", n, u))
    return cert


# --- ball sandwich ------------------------------------------------------------------


@dataclass
class SandwichCheck:
    """The three inclusions around ``i(B(x, r))`` at scale ``eps``.

    ``image_ok``: ``i(B(x,r))`` inside ``B(y, r+eps)``;
    ``left_ok``: ``B(y, r-eps)`` inside ``N_eps(i(B(x,r)))``;
    ``right_ok``: ``N_eps(i(B(x,r)))`` inside ``B(y, r+2 eps)``.
    """

    eps: float
    r: float
    certified: bool
    image_ok: bool
    left_ok: bool
    right_ok: bool
    witnesses: list = field(default_factory=list)

    @property
    def holds(self) -> bool:
        return self.image_ok and self.left_ok and self.right_ok

    def __bool__(self) -> bool:
        return self.holds


def ball_sandwich_check(
    i: MapTable, Xp: PointedSpace, Yp: PointedSpace, eps: float, r: float, strict: bool = True
) -> SandwichCheck:
    """Check the ball inclusions for one radius ``eps < r < 1/eps``.

    With ``strict`` the map must certify as a pointed eps-approximation;
    otherwise the inclusions are measured anyway and ``certified`` records
    the outcome.
    """
    X, Y = Xp.space, Yp.space
    x, y = _single(Xp), _single(Yp)
    if not (0 < eps < r < 1.0 / eps):
        raise PreconditionViolated(f"need 0 < eps < r < 1/eps, got eps={eps!r}, r={r!r}")
    certified = is_pointed_gha(i, Xp, Yp, eps).valid
    if strict and not certified:
        raise PreconditionViolated("map is not a certified pointed approximation")

    img = PointSet(Y, i.image[ball(X, x, r).indices])
    N = tube(Y, img, eps)
    out_img = [int(p) for p in img if not lt(Y.dist[y, p], r + eps, Y.tol)]
    inner = ball(Y, y, r - eps)
    missing = [int(p) for p in inner if p not in N]
    out_tube = [int(p) for p in N if not lt(Y.dist[y, p], r + 2 * eps, Y.tol)]
    rep = SandwichCheck(float(eps), float(r), certified, not out_img, not missing, not out_tube)
    rep.witnesses += [("image", p) for p in out_img]
    rep.witnesses += [("left", p) for p in missing]
    rep.witnesses += [("right", p) for p in out_tube]
    return rep


def sandwich_radii(Xp: PointedSpace, Yp: PointedSpace, eps: float) -> list[float]:
    """Radii in ``(eps, 1/eps)`` where some inclusion can change.

    Candidates are the domain distances from the basepoint and codomain
    distances shifted by ``+eps`` and ``-2 eps``, plus the midpoints
    between consecutive candidates.
    """
    if eps <= 0 or eps >= 1:
        return []
    dx = Xp.space.dist[Xp.basepoint]
    dy = Yp.space.dist[Yp.basepoint]
    pts = set(dx.tolist()) | set((dy + eps).tolist()) | set((dy - 2 * eps).tolist())
    pts = sorted(p for p in pts if eps < p < 1.0 / eps)
    mids = [(a + b) / 2 for a, b in zip(pts, pts[1:])]
    lo, hi = eps, 1.0 / eps
    ends = [(lo + pts[0]) / 2, (pts[-1] + min(hi, pts[-1] + 1)) / 2] if pts else [(lo + min(hi, lo + 1)) / 2]
    return sorted(r for r in set(pts + mids + ends) if lo < r < hi)


# --- pointed distance ---------------------------------------------------------------


def _candidate_scales(tables, Xp: PointedSpace, Yp: PointedSpace, eps_grid) -> set:
    c = {0.0}
    c.update(regime_breakpoints(Xp.space, Xp.basepoint))
    c.update(regime_breakpoints(Yp.space, Yp.basepoint))
    for t in tables:
        c.update(t.need[np.isfinite(t.need)].ravel().tolist())
    if eps_grid is not None and not isinstance(eps_grid, str):
        c.update(float(e) for e in eps_grid)
    return c


def pointed_search(
    Xp: PointedSpace,
    Yp: PointedSpace,
    eps_grid=None,
    max_enum: int = DEFAULT_MAX_ENUM,
    f=None,
    g=None,
    maps_xy=None,
    maps_yx=None,
) -> DistanceInterval:
    """Shared engine for the pointed distances.

    Without self-maps this is the pointed GH distance.  With ``f`` and ``g``
    (image arrays) the semi-conjugacy defects enter the feasibility test.
    ``maps_xy``/``maps_yx`` restrict the search to explicit candidate maps,
    which turns the result into a certified upper bound.
    """
    X, Y = Xp.space, Yp.space
    x, y = _single(Xp), _single(Yp)
    need = 0
    if maps_xy is None:
        need += map_count(len(X), len(Y), 1)
    if maps_yx is None:
        need += map_count(len(Y), len(X), 1)
    check_budget(need, max_enum)
    tol = max(X.tol, Y.tol)
    ab = build_regime_table(X, Y, x, y, f, g, maps_xy)
    ba = build_regime_table(Y, X, y, x, g, f, maps_yx)

    def feasible(e):
        return ab.need_at(e) <= e + tol and ba.need_at(e) <= e + tol

    scan = scan_grid(_candidate_scales((ab, ba), Xp, Yp, eps_grid), feasible)
    if scan is None:
        raise SearchFailed("no feasible scale among the candidates")
    res = DistanceInterval(
        scan.lower,
        scan.upper,
        scan.monotone,
        scan.grid,
        MapTable(ab.map_at(scan.upper), len(Y)),
        MapTable(ba.map_at(scan.upper), len(X)),
    )
    if not scan.monotone:
        res.warnings.append("feasibility is not monotone in eps on the candidate grid")
    if PointedApproxParams.at(X, x, scan.upper).clamped or PointedApproxParams.at(Y, y, scan.upper).clamped:
        res.warnings.append("clamped: 1/eps exceeds the sample radius")
    return res


def pgh_distance(Xp: PointedSpace, Yp: PointedSpace, eps_grid=None, max_enum: int = DEFAULT_MAX_ENUM) -> DistanceInterval:
    """Pointed GH distance by exhaustive search over basepoint-preserving maps.

    Every candidate scale (regime breakpoints, tabulated defects, and the
    optional ``eps_grid``) is tested independently; no monotonicity is
    assumed.
    """
    return pointed_search(Xp, Yp, eps_grid, max_enum)


def pointed_threshold(i: MapTable, Xp: PointedSpace, Yp: PointedSpace) -> float:
    """Smallest scale at which ``i`` alone is a pointed approximation; ``inf`` if none."""
    X, Y = Xp.space, Yp.space
    x, y = _single(Xp), _single(Yp)
    _check_map(i, X, Y)
    t = build_regime_table(X, Y, x, y, maps=i.image[None])
    tol = max(X.tol, Y.tol)
    c = {0.0}
    c.update(regime_breakpoints(X, x))
    c.update(regime_breakpoints(Y, y))
    c.update(t.need[np.isfinite(t.need)].ravel().tolist())
    scan = scan_grid(c, lambda e: t.need_at(e) <= e + tol)
    return np.inf if scan is None else scan.upper


# --- triangle inequality ------------------------------------------------------------


@dataclass
class TriangleReport:
    status: str  # "ok", "violated" or "not-applicable"
    d12: float
    d23: float
    d13: float
    bound: float
    composite_eps: float
    composite: ApproxCertificate | None

    @property
    def holds(self) -> bool:
        return self.status != "violated" and (self.composite is None or self.composite.valid)


def triangle_check(P1: PointedSpace, P2: PointedSpace, P3: PointedSpace, max_enum: int = DEFAULT_MAX_ENUM) -> TriangleReport:
    """``d13 <= 2 (d12 + d23)`` when ``d12, d23 <= 1/2``, plus the composite map.

    The composite ``i23 o i12`` of the optimal maps is certified at
    ``2 (d12 + d23)``.
    """
    r12 = pgh_distance(P1, P2, max_enum=max_enum)
    r23 = pgh_distance(P2, P3, max_enum=max_enum)
    r13 = pgh_distance(P1, P3, max_enum=max_enum)
    tol = max(P1.space.tol, P2.space.tol, P3.space.tol)
    d12, d23, d13 = r12.upper, r23.upper, r13.upper
    bound = 2 * (d12 + d23)
    if d12 > 0.5 + tol or d23 > 0.5 + tol:
        return TriangleReport("not-applicable", d12, d23, d13, bound, bound, None)
    comp = r23.i.compose(r12.i)
    cert = is_pointed_gha(comp, P1, P3, bound)
    status = "ok" if le(d13, bound, tol) else "violated"
    return TriangleReport(status, d12, d23, d13, bound, bound, cert)


# --- Lipschitz / co-Lipschitz -------------------------------------------------------


@dataclass
class LcLReport:
    C: float
    radii: list
    violations: list = field(default_factory=list)

    @property
    def holds(self) -> bool:
        return not self.violations

    def __bool__(self) -> bool:
        return self.holds


def is_lcl(f: MapTable, X: FiniteMetricSpace, Y: FiniteMetricSpace, C: float, radii) -> LcLReport:
    """``B(f(x), r/C) in f(B(x, r)) in B(f(x), C r)`` for every ``x`` and ``r``.

    Violations are ``(x, r, side, witness)`` with side ``"lipschitz"`` or
    ``"co-lipschitz"``.
    """
    if C < 1:
        raise PreconditionViolated("C must be at least 1")
    _check_map(f, X, Y)
    rep = LcLReport(float(C), [float(r) for r in radii])
    for r in rep.radii:
        inside = lt(X.dist, r, X.tol)  # row x: B(x, r)
        np.fill_diagonal(inside, True)
        for x in range(len(X)):
            fx = f(x)
            img = np.unique(f.image[inside[x]])
            far = img[~lt(Y.dist[fx, img], C * r, Y.tol)]
            far = far[far != fx]
            if len(far):
                rep.violations.append((x, r, "lipschitz", int(far[0])))
            small = ball(Y, fx, r / C).indices
            miss = np.setdiff1d(small, img)
            if len(miss):
                rep.violations.append((x, r, "co-lipschitz", int(miss[0])))
    return rep


# --- convergence checkers -----------------------------------------------------------


@dataclass
class SequenceReport:
    eps: list
    decreasing: bool
    converged: bool
    thresholds: list
    clamped: list


def sequence_convergence(
    seq: SpaceSequence,
    target: PointedSpace,
    thresholds=(),
    max_enum: int = DEFAULT_MAX_ENUM,
) -> SequenceReport:
    """Per-entry scale ``eps_k`` and a convergence verdict.

    With maps the scale is the least one certifying ``i_k`` alone;
    otherwise it is the pointed GH distance to the target.  The verdict
    needs ``eps_k`` non-increasing and the final value below every
    threshold.
    """
    eps = []
    clamped = []
    for k, P in enumerate(seq.entries):
        if seq.maps is not None:
            e = pointed_threshold(seq.maps[k], P, target)
            if not np.isfinite(e):
                raise SearchFailed(f"map {k} is not a pointed approximation at any scale")
        else:
            e = pgh_distance(P, target, max_enum=max_enum).upper
        eps.append(float(e))
        clamped.append(PointedApproxParams.at(P.space, P.basepoint, e).clamped)
    tol = target.space.tol
    dec = all(b <= a + tol for a, b in zip(eps, eps[1:]))
    below = all(eps and eps[-1] < t for t in thresholds)
    return SequenceReport(eps, dec, dec and below, list(thresholds), clamped)


@dataclass
class PointConvergenceReport:
    distances: list
    threshold: float
    converged: bool


def point_convergence(seq: SpaceSequence, points, target: PointedSpace, target_point: int, threshold: float | None = None, window: int = 1) -> PointConvergenceReport:
    """``d(i_k(x_k), x)`` per entry; converged when the last ``window`` values are within ``threshold``."""
    if seq.maps is None:
        raise PreconditionViolated("point convergence needs the maps i_k")
    if len(points) != len(seq):
        raise SizeMismatch("one point per sequence entry is required")
    thr = target.space.tol if threshold is None else threshold
    d = [float(target.space.dist[m(p), target_point]) for m, p in zip(seq.maps, points)]
    tail = d[-window:] if window > 0 else d
    return PointConvergenceReport(d, thr, all(v <= thr + target.space.tol for v in tail))


@dataclass
class ProbeReport:
    probe: int
    errors: list
    converged: bool
    witness: list  # indices k with err_k within the threshold


@dataclass
class MapConvergenceReport:
    threshold: float
    probes: list

    @property
    def converged(self) -> bool:
        return all(p.converged for p in self.probes)


def map_convergence(
    seq_X: SpaceSequence,
    seq_Y: SpaceSequence,
    maps,
    f: MapTable,
    probes,
    target_X: PointedSpace,
    target_Y: PointedSpace,
    threshold: float | None = None,
    tail: int = 2,
) -> MapConvergenceReport:
    """Check ``f_k(x_k) -> f(x)`` for every selection ``x_k -> x``.

    For a probe ``x`` the selections at step ``k`` are the points ``p`` with
    ``d(i_k(p), x) <= eps_k``; the error is the worst
    ``d(j_k(f_k(p)), f(x))`` among them.  A probe converges when the last
    ``tail`` errors are within ``threshold`` (default: a tenth of the
    target codomain diameter).  Colliding preimage families show up as
    errors that stay large.
    """
    if seq_X.maps is None or seq_Y.maps is None:
        raise PreconditionViolated("both sequences need their approximation maps")
    eX = seq_X.eps_seq or [pointed_threshold(m, P, target_X) for m, P in zip(seq_X.maps, seq_X.entries)]
    tol = target_Y.space.tol
    thr = 0.1 * diameter(target_Y.space) if threshold is None else threshold
    out = []
    for x in probes:
        errs = []
        for k, (ik, jk, fk) in enumerate(zip(seq_X.maps, seq_Y.maps, maps)):
            S = np.flatnonzero(le(target_X.space.dist[ik.image, x], eX[k], tol))
            if len(S) == 0:
                errs.append(np.inf)
                continue
            errs.append(float(target_Y.space.dist[jk.image[fk.image[S]], f(x)].max()))
        good = [k for k, e in enumerate(errs) if e <= thr + tol]
        conv = all(e <= thr + tol for e in errs[-tail:])
        out.append(ProbeReport(int(x), errs, conv, good))
    return MapConvergenceReport(thr, out)
