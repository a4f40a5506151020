"""Exhaustive map enumeration and the ball-regime feasibility tables.

A map ``X -> Y`` between finite spaces is identified with an integer code
(base-``|Y|`` digits over the free domain points).  Maps are materialised
in chunks so the exhaustive solvers stay within a few megabytes.

For pointed searches, every condition of a pointed approximation at scale
``eps`` depends on ``eps`` only through two prefixes: the domain points
inside the ball ``B(x, 1/eps)`` (sorted by distance from ``x``) and the
codomain points inside ``B(y, 1/eps - eps)``.  ``RegimeTable`` stores, for
every pair of prefix lengths, the smallest attainable worst-case defect
over all maps; feasibility at ``eps`` is a table lookup.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import EnumerationBudgetExceeded
from .metric import FiniteMetricSpace, lt

_CHUNK_ELEMS = 1 << 21


def map_count(n_dom: int, n_cod: int, n_fixed: int = 0) -> int:
    return n_cod ** (n_dom - n_fixed)


def check_budget(needed: int, budget: int) -> None:
    if needed > budget:
        raise EnumerationBudgetExceeded(needed, budget)


def _free_positions(n_dom: int, fixed: dict[int, int] | None) -> list[int]:
    fixed = fixed or {}
    return [p for p in range(n_dom) if p not in fixed]


def decode_maps(codes: np.ndarray, n_dom: int, n_cod: int, fixed: dict[int, int] | None = None) -> np.ndarray:
    codes = np.asarray(codes, dtype=np.int64)
    out = np.empty((len(codes), n_dom), dtype=np.intp)
    for p, v in (fixed or {}).items():
        out[:, p] = v
    rest = codes.copy()
    for p in _free_positions(n_dom, fixed):
        rest, digit = np.divmod(rest, n_cod)
        out[:, p] = digit
    return out


def iter_map_chunks(n_dom: int, n_cod: int, fixed: dict[int, int] | None = None, chunk: int | None = None):
    """Yield ``(codes, maps)`` covering every map with the ``fixed`` images."""
    total = map_count(n_dom, n_cod, len(fixed or {}))
    if chunk is None:
        chunk = max(1, _CHUNK_ELEMS // max(1, n_dom * n_dom))
    for start in range(0, total, chunk):
        codes = np.arange(start, min(total, start + chunk), dtype=np.int64)
        yield codes, decode_maps(codes, n_dom, n_cod, fixed)


def distortions(maps: np.ndarray, dX: np.ndarray, dY: np.ndarray) -> np.ndarray:
    """``dis`` of every map row in ``maps``."""
    D = dY[maps[:, :, None], maps[:, None, :]]
    return np.abs(D - dX).max(axis=(1, 2))


def covering_radii(maps: np.ndarray, dY: np.ndarray) -> np.ndarray:
    """``max_y min_x dY(y, i(x))`` for every map row."""
    return dY[:, maps].min(axis=2).max(axis=0)


# --- pointed regime tables -----------------------------------------------------


@dataclass
class RegimeTable:
    """Best attainable defect for one search direction ``X -> Y``.

    ``need[t - 1, u]`` is the minimum over maps of the worst defect when the
    domain ball holds the ``t`` nearest points to ``x`` and the covering ball
    holds the ``u`` nearest points to ``y``; ``code[t - 1, u]`` is a map
    attaining it.
    """

    X: FiniteMetricSpace
    Y: FiniteMetricSpace
    x: int
    y: int
    need: np.ndarray
    code: np.ndarray
    maps: np.ndarray | None = None  # explicit candidate maps; None = enumeration
    fixed: dict = field(default_factory=dict)

    def prefixes(self, eps: float) -> tuple[int, int]:
        return regime_prefixes(self.X, self.Y, self.x, self.y, eps)

    def need_at(self, eps: float) -> float:
        t, u = self.prefixes(eps)
        return float(self.need[t - 1, u])

    def map_at(self, eps: float) -> np.ndarray:
        t, u = self.prefixes(eps)
        c = int(self.code[t - 1, u])
        if self.maps is not None:
            return self.maps[c]
        return decode_maps(np.array([c]), len(self.X), len(self.Y), self.fixed)[0]


def ball_radius(eps: float) -> float:
    return np.inf if eps <= 0 else 1.0 / eps


def cover_radius(eps: float) -> float:
    return np.inf if eps <= 0 else 1.0 / eps - eps


def regime_prefixes(X: FiniteMetricSpace, Y: FiniteMetricSpace, x: int, y: int, eps: float) -> tuple[int, int]:
    """Sizes of ``B(x, 1/eps)`` and ``B(y, 1/eps - eps)``; ``eps == 0`` means the limit ``eps -> 0+``."""
    t = int(np.count_nonzero(lt(X.dist[x], ball_radius(eps), X.tol)))
    r = cover_radius(eps)
    u = int(np.count_nonzero(lt(Y.dist[y], r, Y.tol))) if r > 0 else 0
    return max(t, 1), u


def build_regime_table(
    X: FiniteMetricSpace,
    Y: FiniteMetricSpace,
    x: int,
    y: int,
    f: np.ndarray | None = None,
    g: np.ndarray | None = None,
    maps: np.ndarray | None = None,
) -> RegimeTable:
    """Tabulate the best defect per ball regime for pointed maps ``(X,x) -> (Y,y)``.

    The defect of a map ``i`` in regime ``(t, u)`` is the largest of its
    distortion on the domain ball, the covering gap of the codomain ball,
    and, when self-maps ``f`` and ``g`` are given, the semi-conjugacy defect
    ``d(i f q, g i q)`` over the domain ball together with the basepoint
    image gap ``d(i f x, g y)``.  Without ``maps`` every map with
    ``i(x) = y`` is enumerated.
    """
    n, m = len(X), len(Y)
    dX, dY = X.dist, Y.dist
    xo = np.argsort(dX[x], kind="stable")
    yo = np.argsort(dY[y], kind="stable")
    tril = np.tril(np.ones((n, n), dtype=bool))
    best = np.full((n, m + 1), np.inf)
    best_code = np.zeros((n, m + 1), dtype=np.int64)
    fixed = {x: y}

    if maps is not None:
        chunks = [(np.arange(len(maps)), np.asarray(maps, dtype=np.intp))]
    else:
        chunk = max(1, _CHUNK_ELEMS // max(1, n * max(n, m + 1)))
        chunks = iter_map_chunks(n, m, fixed, chunk)

    for codes, M in chunks:
        Ms = M[:, xo]
        E = np.abs(dY[Ms[:, :, None], Ms[:, None, :]] - dX[np.ix_(xo, xo)])
        E = np.where(tril, E, 0.0)
        dis = np.maximum.accumulate(E.max(axis=2), axis=1)  # (K, n)

        cov = np.minimum.accumulate(dY[yo][:, Ms], axis=2)  # (m, K, n): nearest image within prefix t
        cov = np.maximum.accumulate(cov, axis=0)  # worst over covering prefix u
        cover = np.concatenate([np.zeros((1,) + cov.shape[1:]), cov], axis=0)  # (m+1, K, n)
        need = np.maximum(cover.transpose(1, 2, 0), dis[:, :, None])  # (K, n, m+1)

        if f is not None:
            defect = dY[M[:, f[xo]], g[Ms]]  # (K, n) along xo
            defect = np.maximum.accumulate(defect, axis=1)
            triple = dY[M[:, f[x]], g[y]]
            need = np.maximum(need, np.maximum(defect, triple[:, None])[:, :, None])

        if maps is not None:
            need = np.where((M[:, x] == y)[:, None, None], need, np.inf)

        k = need.argmin(axis=0)
        vals = np.take_along_axis(need, k[None], axis=0)[0]
        better = vals < best
        best = np.where(better, vals, best)
        best_code = np.where(better, codes[k], best_code)

    return RegimeTable(X, Y, x, y, best, best_code, None if maps is None else np.asarray(maps), fixed)


def regime_breakpoints(X: FiniteMetricSpace, x: int) -> list[float]:
    """Scales where ``B(x, 1/eps)`` or ``B(x, 1/eps - eps)`` changes."""
    out = []
    for dd in np.unique(X.dist[x]):
        if dd > 0:
            out.append(1.0 / dd)
        out.append((-dd + np.sqrt(dd * dd + 4.0)) / 2.0)
    return out


@dataclass
class GridScan:
    """Outcome of evaluating a feasibility predicate on a sorted grid."""

    grid: list
    feasible: list
    upper: float
    lower: float
    monotone: bool


def scan_grid(candidates, feasible_at) -> GridScan | None:
    grid = sorted({float(c) for c in candidates if np.isfinite(c) and c >= 0})
    flags = [bool(feasible_at(e)) for e in grid]
    ok = [e for e, fl in zip(grid, flags) if fl]
    if not ok:
        return None
    upper = ok[0]
    below = [e for e, fl in zip(grid, flags) if not fl and e < upper]
    above_bad = any((not fl) and e > upper for e, fl in zip(grid, flags))
    return GridScan(grid, flags, upper, below[-1] if below else upper, not above_bad)
